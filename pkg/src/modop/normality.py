"""Normality tests and the unitary constructions that characterise normality.

Verifiers return :class:`~modop.checks.Report` objects. A residual above its
threshold is a reported failure; inputs that violate a verifier's
hypotheses raise :class:`~modop.errors.PreconditionFailed` instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numkernel
from .checks import Report
from .decomposition import abs_op, kernel_projection, polar, range_projection
from .errors import PreconditionFailed
from .module_space import OperatorMatrix, op_adjoint, op_norm

TOL_NORMAL = 1e-9
TOL_UNITARY = 1e-10
TOL_PROPERTY = 1e-9
TOL_INTERTWINE = 1e-9
KNIFE_EDGE = 10.0


@dataclass(frozen=True)
class Verdict:
    holds: bool
    residual: float
    threshold: float

    def __bool__(self):
        return self.holds

    def to_json(self):
        return {"holds": self.holds, "residual": self.residual, "threshold": self.threshold}


def normality_residual(T):
    Ts = op_adjoint(T)
    n = op_norm(T)
    return op_norm(Ts @ T - T @ Ts) / (1.0 + n * n)


def is_normal(T, tol=TOL_NORMAL):
    """``||T^*T - TT^*|| / (1 + ||T||^2) <= tol``."""
    r = normality_residual(T)
    return Verdict(bool(r <= tol), float(r), float(tol))


def commutator_residual(A, B):
    return op_norm(A @ B - B @ A) / ((1.0 + op_norm(A)) * (1.0 + op_norm(B)))


def commutes(A, B, tol=TOL_NORMAL):
    r = commutator_residual(A, B)
    return Verdict(bool(r <= tol), float(r), float(tol))


def unitarity_residual(U):
    I = OperatorMatrix.identity(U.shape, U.rank)
    Us = op_adjoint(U)
    return max(op_norm(Us @ U - I), op_norm(U @ Us - I))


def _require_normal(T, tol, name="T"):
    v = is_normal(T, tol)
    if not v:
        raise PreconditionFailed(f"{name} is not normal", v.residual, v.threshold)
    return v


@dataclass
class UnitaryWitness:
    U: OperatorMatrix
    residual_factorization: float
    residual_unitarity: float
    residual_commutation_T: float
    residual_commutation_Tstar: float
    scale: float
    extra: dict = field(default_factory=dict)

    def report(self, tol=TOL_PROPERTY, tol_unitary=TOL_UNITARY, kind="unitary_witness"):
        """Thresholds: unitarity ``tol_unitary``, everything else ``tol * (1 + ||T||)``."""
        limit = tol * (1.0 + self.scale)
        rep = Report(kind)
        rep.add("factorization", self.residual_factorization, limit)
        rep.add("unitarity", self.residual_unitarity, tol_unitary)
        rep.add("commutation_T", self.residual_commutation_T, limit)
        rep.add("commutation_Tstar", self.residual_commutation_Tstar, limit)
        for name, value in self.extra.items():
            rep.add(name, value, limit)
        return rep

    def to_json(self):
        return {
            "U": self.U.to_json(),
            "residual_factorization": self.residual_factorization,
            "residual_unitarity": self.residual_unitarity,
            "residual_commutation_T": self.residual_commutation_T,
            "residual_commutation_Tstar": self.residual_commutation_Tstar,
            **{f"residual_{k}": v for k, v in self.extra.items()},
        }


def check_commutant_transfer(T, S, tol=TOL_PROPERTY, tol_pre=TOL_NORMAL):
    """If S commutes with T and T^*, it commutes with both polar factors of T."""
    Ts, Ss = op_adjoint(T), op_adjoint(S)
    for other, label in ((T, "T"), (Ts, "T*")):
        v = commutes(S, other, tol_pre)
        if not v:
            raise PreconditionFailed(f"S does not commute with {label}", v.residual, v.threshold)
    parts = polar(T)
    limit = tol * (1.0 + op_norm(T)) * (1.0 + op_norm(S))
    rep = Report("commutant_transfer")
    rep.add("S_V", op_norm(S @ parts.V - parts.V @ S), limit)
    rep.add("Sstar_V", op_norm(Ss @ parts.V - parts.V @ Ss), limit)
    rep.add("S_absT", op_norm(S @ parts.absT - parts.absT @ S), limit)
    rep.add("Sstar_absT", op_norm(Ss @ parts.absT - parts.absT @ Ss), limit)
    return rep


def check_v_unitary_on_range(T, tol=TOL_PROPERTY, tol_pre=TOL_NORMAL):
    """For normal T the polar isometry is unitary on the closure of Ran(T)."""
    _require_normal(T, tol_pre)
    Ts = op_adjoint(T)
    V = polar(T).V
    Vs = op_adjoint(V)
    P = range_projection(T)
    limit = tol * (1.0 + op_norm(T))
    rep = Report("v_unitary_range")
    rep.add("VsV_eq_P", op_norm(Vs @ V - P), limit)
    rep.add("VVs_eq_P", op_norm(V @ Vs - P), limit)
    rep.add("range_T_eq_range_Tstar", op_norm(P - range_projection(Ts)), limit)
    rep.add("kernel_T_eq_kernel_Tstar", op_norm(kernel_projection(T) - kernel_projection(Ts)), limit)
    for name, X in (("T", T), ("Tstar", Ts), ("V", V), ("Vstar", Vs)):
        rep.add(f"V_commutes_{name}", op_norm(V @ X - X @ V), limit)
    return rep


def _witness(T, U, target, extra):
    Ts = op_adjoint(T)
    return UnitaryWitness(
        U=U,
        residual_factorization=op_norm(T - target),
        residual_unitarity=unitarity_residual(U),
        residual_commutation_T=op_norm(U @ T - T @ U),
        residual_commutation_Tstar=op_norm(U @ Ts - Ts @ U),
        scale=op_norm(T),
        extra=extra,
    )


def build_unitary_abs_t(T, tol_pre=TOL_NORMAL):
    """Unitary U commuting with |T| and T = U|T|, for normal T.

    ``U`` is the identity on Ker(T) and V on the closure of Ran(T^*), i.e.
    ``U = P_ker(T) + V`` since V already vanishes on the kernel.
    """
    _require_normal(T, tol_pre)
    parts = polar(T)
    U = kernel_projection(T) + parts.V
    absT = parts.absT
    return _witness(T, U, U @ absT,
                    {"commutation_absT": op_norm(U @ absT - absT @ U)})


def build_unitary_star(T, tol_pre=TOL_NORMAL):
    """Unitary U with T = U T^*, for normal T: ``U = P_ker(T) + V^2``."""
    _require_normal(T, tol_pre)
    V = polar(T).V
    U = kernel_projection(T) + V @ V
    return _witness(T, U, U @ op_adjoint(T), {})


def verify_converse_star(T, U, tol=TOL_PROPERTY, tol_unitary=TOL_UNITARY):
    """Given unitary U with T = U T^*, report the normality defect of T.

    The defect ``||T^*T - TT^*||`` is compared against ``tol * (1 + ||T||)^2``.
    """
    ru = unitarity_residual(U)
    if ru > tol_unitary:
        raise PreconditionFailed("U is not unitary", ru, tol_unitary)
    n = op_norm(T)
    rf = op_norm(T - U @ op_adjoint(T))
    if rf > tol * (1.0 + n):
        raise PreconditionFailed("T != U T*", rf, tol * (1.0 + n))
    Ts = op_adjoint(T)
    rep = Report("converse_star", info={"normal": bool(is_normal(T))})
    rep.add("normality", op_norm(Ts @ T - T @ Ts), tol * (1.0 + n) ** 2)
    return rep


def fuglede_putnam_check(T, S, A, tol=TOL_PROPERTY, tol_pre=TOL_NORMAL, tol_intertwine=TOL_INTERTWINE):
    """Normal T, S with TA = AS must also satisfy T^*A = AS^*."""
    _require_normal(T, tol_pre, "T")
    _require_normal(S, tol_pre, "S")
    scale = (op_norm(T) + op_norm(S)) * (1.0 + op_norm(A))
    ri = op_norm(T @ A - A @ S)
    if ri > tol_intertwine * scale:
        raise PreconditionFailed("TA != AS", ri, tol_intertwine * scale)
    rep = Report("fuglede_putnam")
    value = op_norm(op_adjoint(T) @ A - A @ op_adjoint(S))
    rep.add("adjoint_intertwining", value / scale if scale > 0 else value, tol)
    return rep


def solve_intertwiners(T, S):
    """Orthonormal basis (trace inner product) of ``{A : TA = AS}``.

    Each algebra block contributes the null space of
    ``A -> T_i A - A S_i``, written as ``kron(T_i, I) - kron(I, S_i^T)`` on
    row-major vectorisations.
    """
    T._check(S)
    basis = []
    for i, (Tb, Sb) in enumerate(zip(T.blocks, S.blocks)):
        n = Tb.shape[0]
        K = np.kron(Tb, np.eye(n)) - np.kron(np.eye(n), Sb.T)
        res = numkernel.svd(K)
        smax = float(res.sigma[0]) if res.sigma.size else 0.0
        r = numkernel.numeric_rank(res.sigma, scale=smax, dim=K.shape[0])
        for v in res.V[:, r:].T:
            blocks = [np.zeros_like(b) for b in T.blocks]
            blocks[i] = v.reshape(n, n)
            basis.append(T.like(blocks))
    return basis


def _three_valued(residual, tol):
    if residual <= tol / KNIFE_EDGE:
        return True
    if residual >= tol * KNIFE_EDGE:
        return False
    return None


@dataclass
class KaplanskyReport:
    lhs: object
    rhs: object
    lhs_residual: float
    rhs_residual: float
    tol: float
    proof_identity_residual: float | None = None
    proof_identity_threshold: float | None = None

    @property
    def indeterminate(self):
        return self.lhs is None or self.rhs is None

    @property
    def equivalence_holds(self):
        if self.indeterminate:
            return None
        return self.lhs == self.rhs

    @property
    def passed(self):
        if self.equivalence_holds is False:
            return False
        if self.proof_identity_residual is not None:
            return self.proof_identity_residual <= self.proof_identity_threshold
        return True

    def to_json(self):
        return {
            "lhs_ST_normal": self.lhs,
            "rhs_S_commutes_absT": self.rhs,
            "lhs_residual": self.lhs_residual,
            "rhs_residual": self.rhs_residual,
            "tol": self.tol,
            "indeterminate": self.indeterminate,
            "equivalence_holds": self.equivalence_holds,
            "proof_identity_residual": self.proof_identity_residual,
            "proof_identity_threshold": self.proof_identity_threshold,
            "passed": self.passed,
        }


def kaplansky_check(T, S, tol=TOL_NORMAL, tol_identity=TOL_PROPERTY):
    """With T and TS normal: ST normal iff S commutes with |T|.

    Residuals within a factor of ten of ``tol`` give an indeterminate (None)
    side rather than a boolean.
    """
    _require_normal(T, tol, "T")
    _require_normal(T @ S, tol, "TS")
    ST = S @ T
    lhs_r = normality_residual(ST)
    rhs_r = commutator_residual(S, abs_op(T))
    rep = KaplanskyReport(_three_valued(lhs_r, tol), _three_valued(rhs_r, tol),
                          float(lhs_r), float(rhs_r), float(tol))
    if rep.rhs:
        U = build_unitary_abs_t(T, tol).U
        moved = op_adjoint(U) @ (T @ S) @ U
        rep.proof_identity_residual = float(op_norm(moved - ST))
        rep.proof_identity_threshold = float(
            tol_identity * (1.0 + op_norm(T)) * (1.0 + op_norm(S)))
    return rep
