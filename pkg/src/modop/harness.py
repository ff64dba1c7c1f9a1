"""Property-suite runner.

Every suite pairs a generator with a verifier. A trial's random stream is
``default_rng(SeedSequence([master_seed, suite_index, trial_index]))``, so a
report is a pure function of its :class:`SuiteConfig` (wall-clock aside) and
any single trial can be regenerated from its seed triple. Failed trials also
carry their operators in full, so they can be replayed without regenerating.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import decomposition, normality, regular
from . import generators as gen
from .checks import Check
from .errors import ConfigInvalid, ModopError, PreconditionFailed
from .module_space import OperatorMatrix, op_norm

log = logging.getLogger(__name__)

SUITE_NAMES = (
    "polar_conditions",
    "commutant_transfer",
    "v_unitary_range",
    "unitary_absT",
    "unitary_star",
    "regular_transform",
    "theorem_regular",
    "fuglede_putnam",
    "kaplansky",
)

KAPLANSKY_RETRIES = 50


@dataclass(frozen=True)
class Tolerances:
    normal: float = 1e-9
    property: float = 1e-9
    unitary: float = 1e-10
    regular: float = 1e-8
    roundtrip: float = 1e-6
    adjoint: float = 1e-10
    projection: float = 1e-9
    intertwine: float = 1e-9

    @classmethod
    def from_overrides(cls, overrides):
        unknown = set(overrides) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigInvalid(f"unknown tolerance(s): {sorted(unknown)}")
        return cls(**overrides)


@dataclass(frozen=True)
class SuiteConfig:
    trials: int = 200
    seed: int = 0
    max_block: int = 3
    max_blocks: int = 3
    max_rank: int = 4
    max_embed: int = 24
    tolerances: dict = field(default_factory=dict)
    suites: tuple = SUITE_NAMES
    trial_overrides: dict = field(default_factory=dict)

    def validate(self):
        if self.trials < 1:
            raise ConfigInvalid("trials must be at least 1")
        for name in ("max_block", "max_blocks", "max_rank"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be at least 1")
        if self.max_embed < 1:
            raise ConfigInvalid("max_embed must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigInvalid("seed must be a 64-bit unsigned integer")
        unknown = [s for s in self.suites if s not in SUITE_NAMES]
        unknown += [s for s in self.trial_overrides if s not in SUITE_NAMES]
        if unknown:
            raise ConfigInvalid(f"unknown suite(s): {unknown}")
        if any(int(n) < 1 for n in self.trial_overrides.values()):
            raise ConfigInvalid("trial overrides must be at least 1")
        tol = self.tol()
        if any(v <= 0 for v in asdict(tol).values()):
            raise ConfigInvalid("tolerances must be positive")
        return self

    def tol(self):
        return Tolerances.from_overrides(self.tolerances)

    def trials_for(self, suite):
        return int(self.trial_overrides.get(suite, self.trials))

    def to_json(self):
        return {
            "trials": self.trials,
            "seed": self.seed,
            "max_block": self.max_block,
            "max_blocks": self.max_blocks,
            "max_rank": self.max_rank,
            "max_embed": self.max_embed,
            "tolerances": asdict(self.tol()),
            "suites": list(self.suites),
            "trial_overrides": dict(self.trial_overrides),
        }


@dataclass
class TrialOutcome:
    status: str
    checks: list
    info: dict = field(default_factory=dict)
    error: str | None = None


def trial_rng(master, suite_index, trial_index):
    return np.random.default_rng(np.random.SeedSequence([master, suite_index, trial_index]))


def _from_report(rep, prefix=""):
    return [Check(prefix + c.name, c.residual, c.threshold) for c in rep.checks.values()]


def _status(checks):
    return "pass" if all(c.passed for c in checks) else "fail"


# Generators take (rng, cfg) and return the operator dict plus JSON-able meta.
# Verifiers take (ops, meta, tol) and return a TrialOutcome.

def _shape(rng, cfg):
    return gen.random_shape(rng, cfg.max_block, cfg.max_blocks, cfg.max_rank, cfg.max_embed)


def _gen_polar(rng, cfg):
    shape, k = _shape(rng, cfg)
    if rng.random() < 0.5:
        return {"T": gen.gen_rank_deficient(shape, k, rng)}, {"family": "rank_deficient"}
    return {"T": gen.gen_random_operator(shape, k, rng)}, {"family": "gaussian"}


def _verify_polar(ops, meta, tol):
    checks = _from_report(decomposition.check_polar_conditions(ops["T"], tol.property))
    return TrialOutcome(_status(checks), checks)


def _gen_commutant(rng, cfg):
    shape, k = _shape(rng, cfg)
    if rng.random() < 0.5:
        T = gen.gen_random_normal(shape, k, rng, kernel_fraction=0.3)
        family = "normal"
    else:
        T = gen.gen_compressed(shape, k, rng)
        family = "compressed"
    return {"T": T, "S": gen.gen_commutant_element(T, rng, of="pair")}, {"family": family}


def _verify_commutant(ops, meta, tol):
    rep = normality.check_commutant_transfer(ops["T"], ops["S"], tol.property, tol.normal)
    checks = _from_report(rep)
    return TrialOutcome(_status(checks), checks)


def _gen_normal_with_kernel(rng, cfg):
    shape, k = _shape(rng, cfg)
    return {"T": gen.gen_random_normal(shape, k, rng, kernel_fraction=0.3)}, {}


def _verify_v_unitary(ops, meta, tol):
    checks = _from_report(normality.check_v_unitary_on_range(ops["T"], tol.property, tol.normal))
    return TrialOutcome(_status(checks), checks)


def _gen_unitary_abs(rng, cfg):
    shape, k = _shape(rng, cfg)
    T = gen.gen_random_normal(shape, k, rng, kernel_fraction=0.3)
    P = gen.gen_positive(shape, k, rng, kernel_fraction=0.3)
    U = gen.gen_unitary_commuting_with(P, rng)
    return {"T": T, "P": P, "U": U}, {}


def _verify_unitary_abs(ops, meta, tol):
    w = normality.build_unitary_abs_t(ops["T"], tol.normal)
    checks = _from_report(w.report(tol.property, tol.unitary))
    U, P = ops["U"], ops["P"]
    ru = normality.unitarity_residual(U)
    rc = op_norm(U @ P - P @ U)
    if ru > tol.unitary:
        raise PreconditionFailed("converse U is not unitary", ru, tol.unitary)
    if rc > tol.property * (1.0 + op_norm(P)):
        raise PreconditionFailed("converse U does not commute with P", rc, tol.property * (1.0 + op_norm(P)))
    checks.append(Check("converse_normality", normality.normality_residual(U @ P), tol.property))
    return TrialOutcome(_status(checks), checks)


def _gen_unitary_star(rng, cfg):
    shape, k = _shape(rng, cfg)
    T = gen.gen_random_normal(shape, k, rng, kernel_fraction=0.3)
    U = gen.gen_random_unitary(shape, k, rng)
    return {"T": T, "U": U, "T_fixed": gen.sample_fixed_point_T(U, rng)}, {}


def _verify_unitary_star(ops, meta, tol):
    w = normality.build_unitary_star(ops["T"], tol.normal)
    checks = _from_report(w.report(tol.property, tol.unitary))
    rep = normality.verify_converse_star(ops["T_fixed"], ops["U"], tol.property, tol.unitary)
    checks += _from_report(rep, "converse_")
    return TrialOutcome(_status(checks), checks)


_TRANSFORM_FAMILIES = ("gaussian", "rank_deficient", "normal", "selfadjoint", "positive")


def _gen_transform(rng, cfg):
    shape, k = _shape(rng, cfg)
    family = _TRANSFORM_FAMILIES[int(rng.integers(len(_TRANSFORM_FAMILIES)))]
    if family == "gaussian":
        t = gen.gen_random_operator(shape, k, rng)
    elif family == "rank_deficient":
        t = gen.gen_rank_deficient(shape, k, rng)
    elif family == "normal":
        t = gen.gen_random_normal(shape, k, rng, kernel_fraction=0.3)
    elif family == "selfadjoint":
        t = gen.gen_selfadjoint(shape, k, rng)
    else:
        t = gen.gen_positive(shape, k, rng, kernel_fraction=0.3)
    norm = op_norm(t)
    if norm > 0:
        t = t * (float(rng.uniform(0.05, 10.0)) / norm)
    return {"t": t}, {"family": family}


def _verify_transform(ops, meta, tol):
    t = ops["t"]
    rep = regular.transform_adjoint_compat(t, tol.adjoint, tol.projection, tol.normal)
    checks = _from_report(rep)
    checks.append(Check("roundtrip", regular.roundtrip_residual(t),
                        tol.roundtrip * (1.0 + op_norm(t)) ** 3))
    return TrialOutcome(_status(checks), checks, info={"predicates": rep.info["predicates"]})


def _gen_regular_normal(rng, cfg):
    shape, k = _shape(rng, cfg)
    t = gen.gen_random_normal(shape, k, rng, kernel_fraction=0.3)
    norm = op_norm(t)
    if norm > 0:
        t = t * (float(rng.uniform(0.05, 10.0)) / norm)
    return {"T": t}, {}


def _verify_theorem_regular(ops, meta, tol):
    t = ops["T"]
    rep = regular.theorem_regular_report(t, tol.regular, tol.unitary, tol.normal)
    checks = _from_report(rep)
    checks.append(Check("roundtrip", regular.roundtrip_residual(t),
                        tol.roundtrip * (1.0 + op_norm(t)) ** 3))
    chain = regular.check_closed_range_specialization(t, tol.normal)
    checks.append(Check("specialization_applies", 0.0 if chain["applicable"] else 1.0, 0.0))
    return TrialOutcome(_status(checks), checks)


def _gen_fuglede(rng, cfg):
    shape, k = _shape(rng, cfg)
    T, S = gen.gen_intertwined_pair(shape, k, rng)
    basis = normality.solve_intertwiners(T, S)
    A = OperatorMatrix.zero(shape, k)
    coeffs = (rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))) / np.sqrt(2.0)
    for c, B in zip(coeffs, basis):
        A = A + c * B
    return {"T": T, "S": S, "A": A}, {"intertwiner_dim": len(basis)}


def _verify_fuglede(ops, meta, tol):
    rep = normality.fuglede_putnam_check(ops["T"], ops["S"], ops["A"], tol.property,
                                         tol.normal, tol.intertwine)
    checks = _from_report(rep)
    return TrialOutcome(_status(checks), checks)


def _gen_kaplansky(rng, cfg, branch):
    shape, k = _shape(rng, cfg)
    T, S = gen.gen_kaplansky_instance(rng, branch, shape, k)
    return {"T": T, "S": S}, {"branch": branch}


def _verify_kaplansky(ops, meta, tol):
    rep = normality.kaplansky_check(ops["T"], ops["S"], tol.normal, tol.property)
    checks = [Check("equivalence", 0.0 if rep.equivalence_holds is not False else 1.0, 0.0)]
    if rep.proof_identity_residual is not None:
        checks.append(Check("unitary_equivalence", rep.proof_identity_residual,
                            rep.proof_identity_threshold))
    if rep.indeterminate:
        status = "indeterminate"
    else:
        status = "pass" if rep.passed else "fail"
    return TrialOutcome(status, checks, info={
        "verdict": [rep.lhs, rep.rhs],
        "residuals": [rep.lhs_residual, rep.rhs_residual],
    })


SUITES = {
    "polar_conditions": (_gen_polar, _verify_polar),
    "commutant_transfer": (_gen_commutant, _verify_commutant),
    "v_unitary_range": (_gen_normal_with_kernel, _verify_v_unitary),
    "unitary_absT": (_gen_unitary_abs, _verify_unitary_abs),
    "unitary_star": (_gen_unitary_star, _verify_unitary_star),
    "regular_transform": (_gen_transform, _verify_transform),
    "theorem_regular": (_gen_regular_normal, _verify_theorem_regular),
    "fuglede_putnam": (_gen_fuglede, _verify_fuglede),
    "kaplansky": (None, _verify_kaplansky),
}

# Verdict-only checks (thresholds of zero) are reported as failures but
# excluded from worst-residual tables.
_BOOLEAN_CHECKS = {"equivalence", "specialization_applies", "contraction_strict",
                   "normal_agrees", "selfadjoint_agrees", "positive_agrees"}


def _kaplansky_branch(trial_index):
    return "generic" if trial_index % 2 == 0 else "commuting"


def generate_trial(suite, cfg, master, trial_index):
    suite_index = SUITE_NAMES.index(suite)
    rng = trial_rng(master, suite_index, trial_index)
    if suite == "kaplansky":
        return _gen_kaplansky(rng, cfg, _kaplansky_branch(trial_index))
    return SUITES[suite][0](rng, cfg)


def verify_trial(suite, ops, meta, tol):
    """Run a suite's verifier; hypothesis violations become failures."""
    try:
        return SUITES[suite][1](ops, meta, tol)
    except PreconditionFailed as exc:
        residual = exc.residual if exc.residual is not None else float("inf")
        threshold = exc.threshold if exc.threshold is not None else 0.0
        return TrialOutcome("fail", [Check(f"precondition: {exc.hypothesis}", residual, threshold)],
                            error=f"PreconditionFailed: {exc}")
    except ModopError as exc:
        return TrialOutcome("fail", [], error=f"{type(exc).__name__}: {exc}")


def payload(suite, cfg, trial_index, ops, meta, outcome):
    return {
        "suite": suite,
        "trial": trial_index,
        "seed": [cfg.seed, SUITE_NAMES.index(suite), trial_index],
        "meta": meta,
        "tolerances": asdict(cfg.tol()),
        "operators": {name: op.to_json() for name, op in ops.items()},
        "status": outcome.status,
        "error": outcome.error,
        "failed_checks": {c.name: c.to_json() for c in outcome.checks if not c.passed},
    }


def replay(data):
    """Re-run the verifier recorded in a failure payload on its operators."""
    ops = {name: OperatorMatrix.from_json(op) for name, op in data["operators"].items()}
    tol = Tolerances(**data["tolerances"])
    return verify_trial(data["suite"], ops, data.get("meta", {}), tol)


class _SuiteTally:
    def __init__(self, name, trials):
        self.name = name
        self.trials = trials
        self.counts = {"pass": 0, "fail": 0, "indeterminate": 0}
        self.worst = {}
        self.failures = []
        self.margins = []
        self.extra = {}

    def record(self, trial_index, outcome):
        self.counts[outcome.status] += 1
        ratios = []
        for c in outcome.checks:
            if c.name in _BOOLEAN_CHECKS or c.name.startswith("precondition"):
                continue
            ratios.append(c.ratio)
            best = self.worst.get(c.name)
            if best is None or c.ratio > best["ratio"]:
                self.worst[c.name] = {"residual": float(c.residual), "threshold": float(c.threshold),
                                      "ratio": float(c.ratio), "trial": trial_index}
        if ratios:
            self.margins.append(max(ratios))

    def to_json(self):
        out = {
            "name": self.name,
            "trials": self.trials,
            "pass": self.counts["pass"],
            "fail": self.counts["fail"],
            "indeterminate": self.counts["indeterminate"],
            "worst_residuals": dict(sorted(self.worst.items())),
            "failures": self.failures,
        }
        out.update(self.extra)
        return out


def _run_one(suite, cfg, tol):
    trials = cfg.trials_for(suite)
    tally = _SuiteTally(suite, trials)
    witnesses = 0
    for trial_index in range(trials):
        ops, meta = generate_trial(suite, cfg, cfg.seed, trial_index)
        outcome = verify_trial(suite, ops, meta, tol)
        tally.record(trial_index, outcome)
        if outcome.status == "fail":
            tally.failures.append(payload(suite, cfg, trial_index, ops, meta, outcome))
        if suite == "kaplansky" and outcome.info.get("verdict") == [False, False]:
            witnesses += 1
    if suite == "kaplansky":
        attempts = 0
        trial_index = trials
        while witnesses == 0 and attempts < KAPLANSKY_RETRIES:
            ops, meta = generate_trial(suite, cfg, cfg.seed, trial_index)
            if meta["branch"] == "generic":
                attempts += 1
                outcome = verify_trial(suite, ops, meta, tol)
                if outcome.info.get("verdict") == [False, False]:
                    witnesses += 1
            trial_index += 1
        starved = witnesses == 0
        tally.extra["asymmetry_witnesses"] = witnesses
        tally.extra["generator_starvation"] = starved
        decided = trials - tally.counts["indeterminate"]
        tally.extra["indeterminate_rate"] = tally.counts["indeterminate"] / trials
        tally.extra["decided"] = decided
    if suite == "regular_transform":
        tally.extra["families"] = sorted(_TRANSFORM_FAMILIES)
    return tally


@dataclass
class SuiteReport:
    config: dict
    suites: list
    wallclock_ms: float
    margins: dict = field(default_factory=dict, repr=False)

    @property
    def total_failures(self):
        n = sum(s["fail"] for s in self.suites)
        return n + sum(1 for s in self.suites if s.get("generator_starvation"))

    @property
    def passed(self):
        return self.total_failures == 0

    def suite(self, name):
        for s in self.suites:
            if s["name"] == name:
                return s
        raise KeyError(name)

    def to_json(self):
        return {"config": self.config, "suites": self.suites, "wallclock_ms": self.wallclock_ms}


def run_suite(config=None, progress=None):
    """Run the selected suites; returns a :class:`SuiteReport`."""
    cfg = (config or SuiteConfig()).validate()
    tol = cfg.tol()
    start = time.perf_counter()
    suites, margins = [], {}
    for name in SUITE_NAMES:
        if name not in cfg.suites:
            continue
        t0 = time.perf_counter()
        tally = _run_one(name, cfg, tol)
        log.info("%s: %s in %.2fs", name, tally.counts, time.perf_counter() - t0)
        if progress is not None:
            progress(name, tally)
        suites.append(tally.to_json())
        margins[name] = tally.margins
    elapsed = (time.perf_counter() - start) * 1000.0
    return SuiteReport(cfg.to_json(), suites, round(elapsed, 3), margins)
