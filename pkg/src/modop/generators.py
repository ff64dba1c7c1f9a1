"""Seeded random instances for every verifier.

Each generator accepts either an integer seed or a ``numpy.random.Generator``;
the same seed always yields a bit-identical operator.
"""

from __future__ import annotations

import numpy as np

from . import numkernel
from .algebra import AlgebraShape, as_shape, complex_gaussian
from .decomposition import abs_op, kernel_projection, polar
from .module_space import OperatorMatrix, op_adjoint, op_norm, random_operator
from .normality import is_normal


def as_rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_shape(rng, max_block=3, max_blocks=3, max_rank=4, max_embed=24):
    """Draw ``(shape, k)`` with ``k * sum(n_i) <= max_embed``."""
    rng = as_rng(rng)
    while True:
        m = int(rng.integers(1, max_blocks + 1))
        dims = tuple(int(n) for n in rng.integers(1, max_block + 1, size=m))
        k = int(rng.integers(1, max_rank + 1))
        if k * sum(dims) <= max_embed:
            return AlgebraShape(dims), k


def gen_random_operator(shape, k, seed):
    """Entries i.i.d. standard complex Gaussian."""
    return random_operator(shape, k, as_rng(seed))


def gen_random_unitary(shape, k, seed):
    """Polar isometry of a random operator; retried until it is invertible."""
    rng = as_rng(seed)
    shape = as_shape(shape)
    while True:
        G = random_operator(shape, k, rng)
        V = polar(G).V
        if op_norm(kernel_projection(G)) == 0.0:
            return V


def _diag_op(shape, k, diags):
    return OperatorMatrix(shape, k, [np.diag(d) for d in diags])


def _conjugate(W, D):
    return W @ D @ op_adjoint(W)


def gen_random_normal(shape, k, seed, kernel_fraction=0.0, margin=0.0):
    """``W D W^*`` with W a random unitary in M_k(A) and D diagonal complex.

    Each eigenvalue is zeroed with probability ``kernel_fraction``; with
    ``margin > 0`` all eigenvalues are pushed radially to modulus
    ``|z| + margin`` instead.
    """
    rng = as_rng(seed)
    shape = as_shape(shape)
    W = gen_random_unitary(shape, k, rng)
    diags = []
    for n in shape:
        d = complex_gaussian(rng, k * n)
        if margin > 0:
            d = d * (1.0 + margin / np.abs(d))
        if kernel_fraction > 0:
            d = np.where(rng.random(k * n) < kernel_fraction, 0.0, d)
        diags.append(d)
    return _conjugate(W, _diag_op(shape, k, diags))


def gen_positive(shape, k, seed, kernel_fraction=0.0):
    rng = as_rng(seed)
    shape = as_shape(shape)
    W = gen_random_unitary(shape, k, rng)
    diags = []
    for n in shape:
        d = rng.exponential(1.0, size=k * n)
        if kernel_fraction > 0:
            d = np.where(rng.random(k * n) < kernel_fraction, 0.0, d)
        diags.append(d.astype(complex))
    return _conjugate(W, _diag_op(shape, k, diags))


def gen_selfadjoint(shape, k, seed):
    G = gen_random_operator(shape, k, seed)
    return (G + op_adjoint(G)) * 0.5


def gen_rank_deficient(shape, k, seed):
    """Random operator times a random projection of random rank per block."""
    rng = as_rng(seed)
    shape = as_shape(shape)
    G = random_operator(shape, k, rng)
    W = gen_random_unitary(shape, k, rng)
    diags = []
    for n in shape:
        r = int(rng.integers(0, k * n + 1))
        diags.append(np.r_[np.ones(r), np.zeros(k * n - r)].astype(complex))
    return G @ _conjugate(W, _diag_op(shape, k, diags))


def gen_compressed(shape, k, seed):
    """``P G P`` for a random projection P: generically non-normal with a
    joint kernel of T and T^* equal to Ker(P)."""
    rng = as_rng(seed)
    shape = as_shape(shape)
    G = random_operator(shape, k, rng)
    W = gen_random_unitary(shape, k, rng)
    diags = []
    for n in shape:
        r = int(rng.integers(1, k * n + 1))
        diags.append(np.r_[np.ones(r), np.zeros(k * n - r)].astype(complex))
    P = _conjugate(W, _diag_op(shape, k, diags))
    return P @ G @ P


def _random_coeffs(rng, count):
    return complex_gaussian(rng, count)


def gen_commutant_element(T, seed, of="pair"):
    """Random S commuting with T and T^* (``of="pair"``) or with |T| (``of="abs"``).

    The "pair" commutant uses polynomials in T and T^* when T is normal and
    scalars otherwise, plus a random operator supported on the joint kernel
    of T and T^*. The "abs" commutant uses polynomials in |T| plus a random
    operator supported on Ker(T).
    """
    rng = as_rng(seed)
    I = OperatorMatrix.identity(T.shape, T.rank)
    Ts = op_adjoint(T)
    c = _random_coeffs(rng, 6)
    if of == "abs":
        A = abs_op(T)
        S = c[0] * I + c[1] * A + c[2] * (A @ A)
        P = kernel_projection(T)
    elif of == "pair":
        if is_normal(T):
            S = c[0] * I + c[1] * T + c[2] * Ts + c[3] * (T @ Ts) + c[4] * (T @ T)
        else:
            S = c[0] * I
        P = kernel_projection(T @ Ts + Ts @ T)
    else:
        raise ValueError(f"unknown commutant {of!r}")
    G = random_operator(T.shape, T.rank, rng)
    return S + P @ G @ P


def gen_unitary_commuting_with(P, seed):
    """Random unitary commuting with the positive operator ``P``.

    On the closure of Ran(P) it is the polar isometry of an invertible
    polynomial in P; on Ker(P) it is the polar isometry of a compressed
    random operator.
    """
    rng = as_rng(seed)
    I = OperatorMatrix.identity(P.shape, P.rank)
    c = _random_coeffs(rng, 3)
    c[0] = c[0] / abs(c[0]) * (abs(c[0]) + 1.0 + abs(c[1]) * op_norm(P) + abs(c[2]) * op_norm(P) ** 2)
    f = c[0] * I + c[1] * P + c[2] * (P @ P)
    K = kernel_projection(P)
    on_range = polar(f).V @ (I - K)
    while True:
        G = random_operator(P.shape, P.rank, rng)
        KG = K @ G @ K
        on_kernel = polar(KG).V
        if op_norm(on_kernel @ op_adjoint(on_kernel) - K) < 1e-8:
            return on_range + on_kernel


def gen_kaplansky_instance(seed, branch="generic", shape=None, k=None, margin=0.5):
    """``(T, S)`` with T normal invertible and TS normal.

    ``generic``: ``S = T^{-1} M`` for random normal M, so ``TS = M``.
    ``commuting``: ``S = p(|T|) W`` with W a unitary polynomial-type function
    of T, so S commutes with |T| and TS is normal.
    """
    rng = as_rng(seed)
    if shape is None or k is None:
        shape, k = random_shape(rng)
    shape = as_shape(shape)
    T = gen_random_normal(shape, k, rng, margin=margin)
    if branch == "generic":
        M = gen_random_normal(shape, k, rng)
        Tinv = T.like([np.linalg.inv(b) for b in T.blocks])
        return T, Tinv @ M
    if branch == "commuting":
        I = OperatorMatrix.identity(shape, k)
        A = abs_op(T)
        a = _random_coeffs(rng, 3)
        c = _random_coeffs(rng, 3)
        c[0] = c[0] / abs(c[0]) * (abs(c[0]) + 1.0 + abs(c[1]) * op_norm(T) + abs(c[2]) * op_norm(T) ** 2)
        W = polar(c[0] * I + c[1] * T + c[2] * (T @ T)).V
        return T, (a[0] * I + a[1] * A + a[2] * (A @ A)) @ W
    raise ValueError(f"unknown branch {branch!r}")


def gen_intertwined_pair(shape, k, seed):
    """Normal T, S sharing at least one eigenvalue in every block."""
    rng = as_rng(seed)
    shape = as_shape(shape)
    W1 = gen_random_unitary(shape, k, rng)
    W2 = gen_random_unitary(shape, k, rng)
    d1s, d2s = [], []
    for n in shape:
        m = k * n
        d1 = complex_gaussian(rng, m)
        if m > 1 and rng.random() < 0.3:
            d1[1] = d1[0]
        d2 = complex_gaussian(rng, m)
        shared = int(rng.integers(1, m + 1))
        pick = rng.choice(m, size=shared, replace=False)
        d2[:shared] = d1[pick]
        d1s.append(d1)
        d2s.append(rng.permutation(d2))
    return _conjugate(W1, _diag_op(shape, k, d1s)), _conjugate(W2, _diag_op(shape, k, d2s))


def sample_fixed_point_T(U, seed):
    """Random solution of ``T = U T^*`` (a real-linear condition), blockwise.

    The condition on a block ``X`` is ``vec(X) - (U kron I) P conj(vec(X)) = 0``
    with P the transpose permutation; splitting into real and imaginary
    parts gives a real matrix whose null space is sampled with Gaussian
    weights.
    """
    rng = as_rng(seed)
    blocks = []
    for Ub in U.blocks:
        m = Ub.shape[0]
        perm = np.arange(m * m).reshape(m, m).T.ravel()
        K = np.kron(Ub, np.eye(m))[:, perm]
        I = np.eye(m * m)
        R = np.block([[I - K.real, -K.imag], [-K.imag, I + K.real]])
        res = numkernel.svd(R)
        r = numkernel.numeric_rank(res.sigma, dim=R.shape[0])
        null = res.V[:, r:].real
        x = null @ rng.standard_normal(null.shape[1])
        blocks.append((x[:m * m] + 1j * x[m * m:]).reshape(m, m))
    return U.like(blocks)
