"""Absolute value, polar decomposition and kernel/range projections.

All spectral work happens blockwise on the embedded matrices. One rank
cutoff, derived from the largest singular value of the whole operator and
its embedding dimension, decides which singular directions count as range,
so ``Ker(V) = Ker(T)`` holds by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numkernel
from .checks import Report
from .module_space import OperatorMatrix, op_adjoint, op_norm

TOL_POLAR = 1e-9


@dataclass(frozen=True)
class PolarParts:
    V: OperatorMatrix
    absT: OperatorMatrix

    def to_json(self):
        return {"V": self.V.to_json(), "absT": self.absT.to_json()}


@dataclass(frozen=True)
class _Spectral:
    svds: tuple
    cutoff: float

    def ranks(self):
        return [int(np.count_nonzero(s.sigma > self.cutoff)) for s in self.svds]


def _spectral(T, method="lapack"):
    svds = tuple(numkernel.svd(b, method=method) for b in T.blocks)
    smax = max((float(s.sigma[0]) for s in svds if s.sigma.size), default=0.0)
    return _Spectral(svds, numkernel.rank_cutoff(smax, T.embed_dim))


def _gram(s):
    M = (s.V * s.sigma) @ s.V.conj().T
    return 0.5 * (M + M.conj().T)


def abs_op(T, *, method="lapack"):
    """``|T| = (T^* T)^{1/2}``, assembled from the right singular vectors of T."""
    sp = _spectral(T, method)
    return T.like([_gram(s) for s in sp.svds])


def polar(T, *, method="lapack"):
    """``T = V |T|`` with V the partial isometry sharing T's kernel."""
    sp = _spectral(T, method)
    V, absT = [], []
    for s, r in zip(sp.svds, sp.ranks()):
        V.append(s.U[:, :r] @ s.V[:, :r].conj().T)
        absT.append(_gram(s))
    return PolarParts(T.like(V), T.like(absT))


def kernel_projection(T, *, method="lapack"):
    sp = _spectral(T, method)
    out = []
    for s, r in zip(sp.svds, sp.ranks()):
        W = s.V[:, r:]
        out.append(W @ W.conj().T)
    return T.like(out)


def range_projection(T, *, method="lapack"):
    sp = _spectral(T, method)
    out = []
    for s, r in zip(sp.svds, sp.ranks()):
        U = s.U[:, :r]
        out.append(U @ U.conj().T)
    return T.like(out)


def numeric_rank_op(T):
    return sum(_spectral(T).ranks())


def check_polar_conditions(T, tol=TOL_POLAR):
    """Residuals for the four equivalent polar-decomposition conditions.

    Every residual is compared against ``tol * (1 + ||T||)``; a breach is
    reported, never raised.
    """
    from .regular import bounded_transform

    I = OperatorMatrix.identity(T.shape, T.rank)
    Ts = op_adjoint(T)
    parts = polar(T)
    V, absT = parts.V, parts.absT
    Vs = op_adjoint(V)
    limit = tol * (1.0 + op_norm(T))
    rep = Report("polar_conditions", info={"rank": numeric_rank_op(T), "norm": op_norm(T)})

    # unique polar decomposition with Ker(V) = Ker(T)
    rep.add("factorization", op_norm(T - V @ absT), limit)
    rep.add("partial_isometry", op_norm(V @ Vs @ V - V), limit)
    rep.add("abs_squared", op_norm(absT @ absT - Ts @ T), limit * (1.0 + op_norm(T)))
    rep.add("kernel_V_eq_kernel_T", op_norm(kernel_projection(V) - kernel_projection(T)), limit)

    # both orthogonal direct-sum splittings
    rep.add("split_abs", op_norm(kernel_projection(absT) + range_projection(absT) - I), limit)
    rep.add("split_adjoint", op_norm(kernel_projection(Ts) + range_projection(T) - I), limit)
    rep.add("split_kernel_coimage",
            op_norm(kernel_projection(T) + range_projection(Ts) - I), limit)

    # the adjoint factors through V^*
    abs_Ts = abs_op(Ts)
    rep.add("adjoint_factorization", op_norm(Ts - Vs @ abs_Ts), limit)
    rep.add("adjoint_partial_isometry", op_norm(polar(Ts).V - Vs), limit)

    # the bounded transform factors through the same V
    F = bounded_transform(T).F
    rep.add("transform_factorization", op_norm(F - V @ abs_op(F)), limit)
    rep.add("transform_partial_isometry", op_norm(polar(F).V - V), limit)

    # consequences
    rep.add("VsV_absT", op_norm(Vs @ V @ absT - absT), limit)
    rep.add("Vs_T", op_norm(Vs @ T - absT), limit)
    rep.add("VVs_T", op_norm(V @ Vs @ T - T), limit)
    rep.add("VsV_is_coimage_projection", op_norm(Vs @ V - range_projection(Ts)), limit)
    rep.add("VVs_is_range_projection", op_norm(V @ Vs - range_projection(T)), limit)
    rep.add("kernel_Vs_eq_kernel_Ts", op_norm(kernel_projection(Vs) - kernel_projection(Ts)), limit)
    return rep
