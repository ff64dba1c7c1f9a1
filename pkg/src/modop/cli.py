"""Command-line entry point ``modop``.

Exit codes: 0 all checks pass, 1 at least one property failure, 2 bad
input or configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import decomposition, normality, regular
from .errors import ModopError, PreconditionFailed
from .generators import gen_kaplansky_instance
from .harness import SUITE_NAMES, SuiteConfig, run_suite
from .module_space import OperatorMatrix

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("modop")


class InputError(Exception):
    pass


def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _load_operator(path):
    data = _load_json(path)
    try:
        return OperatorMatrix.from_json(data)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"{path} is not an operator document: {exc}") from exc


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def cmd_verify(args):
    suites = SUITE_NAMES if args.suite == "all" else tuple(args.suite.split(","))
    tolerances = {"normal": args.tol} if args.tol is not None else {}
    cfg = SuiteConfig(trials=args.trials, seed=args.seed, max_block=args.max_block,
                      max_rank=args.max_rank, tolerances=tolerances, suites=suites)
    report = run_suite(cfg)
    print("suite\ttrials\tpass\tfail\tindeterminate\tworst_check\tworst_ratio")
    for s in report.suites:
        if s["worst_residuals"]:
            name, w = max(s["worst_residuals"].items(), key=lambda kv: kv[1]["ratio"])
            worst = f"{name}\t{w['ratio']:.3e}"
        else:
            worst = "-\t-"
        print(f"{s['name']}\t{s['trials']}\t{s['pass']}\t{s['fail']}\t{s['indeterminate']}\t{worst}")
    print(f"# wallclock_ms\t{report.wallclock_ms:.1f}")
    if args.out:
        _emit(report.to_json(), args.out)
    if args.figures:
        from .plotting import render_report_figures

        for path in render_report_figures(report, args.figures):
            print(f"# figure\t{path}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_polar(args):
    T = _load_operator(args.file)
    parts = decomposition.polar(T)
    rep = decomposition.check_polar_conditions(T)
    _emit({**parts.to_json(), "conditions": rep.to_json()}, args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_normal_check(args):
    T = _load_operator(args.file)
    verdict = normality.is_normal(T, args.tol)
    out = {"normal": verdict.to_json()}
    ok = True
    if verdict:
        for key, build in (("unitary_abs", normality.build_unitary_abs_t),
                           ("unitary_star", normality.build_unitary_star)):
            w = build(T, args.tol)
            rep = w.report()
            ok &= rep.passed
            out[key] = {"U": w.U.to_json(), "report": rep.to_json()}
        out["v_unitary_range"] = normality.check_v_unitary_on_range(T, tol_pre=args.tol).to_json()
        ok &= out["v_unitary_range"]["passed"]
    _emit(out, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_kaplansky_search(args):
    for attempt in range(args.attempts):
        rng = np.random.default_rng(np.random.SeedSequence([args.seed, attempt]))
        T, S = gen_kaplansky_instance(rng, "generic")
        rep = normality.kaplansky_check(T, S)
        if rep.lhs is False and rep.rhs is False:
            _emit({"attempt": attempt, "seed": [args.seed, attempt], "T": T.to_json(),
                   "S": S.to_json(), "report": rep.to_json()}, args.out)
            return EXIT_OK
    print(f"no asymmetric witness in {args.attempts} attempts", file=sys.stderr)
    return EXIT_FAIL


def cmd_transform(args):
    data = _load_json(args.file)
    try:
        if args.invert:
            t = regular.inverse_transform(regular.RegularOp.from_json(data))
            _emit(t.to_json(), args.out)
        else:
            _emit(regular.bounded_transform(OperatorMatrix.from_json(data)).to_json(), args.out)
    except (KeyError, TypeError, IndexError) as exc:
        raise InputError(f"{args.file}: {exc}") from exc
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="modop", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", default="all",
                   help="suite name, comma-separated list, or 'all' (%s)" % ", ".join(SUITE_NAMES))
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-block", type=int, default=3)
    p.add_argument("--max-rank", type=int, default=4)
    p.add_argument("--tol", type=float, default=None, help="normality verdict threshold")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--figures", metavar="DIR", help="render report figures into DIR")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("polar", help="polar decomposition of an operator document")
    p.add_argument("file")
    p.add_argument("--out")
    p.set_defaults(func=cmd_polar)

    p = sub.add_parser("normal-check", help="normality verdict and unitary witnesses")
    p.add_argument("file")
    p.add_argument("--tol", type=float, default=normality.TOL_NORMAL)
    p.add_argument("--out")
    p.set_defaults(func=cmd_normal_check)

    p = sub.add_parser("kaplansky-search", help="find T, S with TS normal but ST not")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--attempts", type=int, default=50)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kaplansky_search)

    p = sub.add_parser("transform", help="bounded transform (or its inverse)")
    p.add_argument("file")
    p.add_argument("--invert", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_transform)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except PreconditionFailed as exc:
        print(f"modop: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (InputError, ModopError, ValueError) as exc:
        print(f"modop: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
