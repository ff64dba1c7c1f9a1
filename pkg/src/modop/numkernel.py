"""Dense complex matrix kernels: Hermitian eigensolver, SVD, PSD powers, rank.

Two engines are provided. ``method="lapack"`` (the default) defers to
numpy's LAPACK bindings; ``method="jacobi"`` runs the self-contained
parallel-ordered Jacobi solvers defined here. Both return the same result
types and honour the same tolerance policy, and the test-suite checks one
against the other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, NotHermitian, NotPositive, SingularMatrix

EPS = np.finfo(float).eps
RANK_SAFETY = 100.0
MAX_SWEEPS = 60

TOL_FUN = 1e-12
TOL_PSD = 1e-10
TOL_HERM = 1e-10
EPS_INV = 1e-12


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.conj().T


@dataclass(frozen=True)
class EigResult:
    Q: np.ndarray
    lam: np.ndarray

    def reconstruct(self):
        return (self.Q * self.lam) @ self.Q.conj().T


def spectral_norm(M):
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _round_robin(n):
    """Rounds of disjoint index pairs covering every pair exactly once."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
        rounds.append(np.array(pairs, dtype=int).reshape(-1, 2))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _rotation(n, p, q, app, aqq, apq):
    """Batch of 2x2 unitaries G with G^H [[app, apq], [apq*, aqq]] G diagonal."""
    mag = np.abs(apq)
    active = mag > 0
    G = np.eye(n, dtype=complex)
    if not np.any(active):
        return G, False
    p, q = p[active], q[active]
    app, aqq, apq, mag = app[active], aqq[active], apq[active], mag[active]
    phase = np.exp(-1j * np.angle(apq))
    tau = (aqq - app) / (2.0 * mag)
    sgn = np.where(tau >= 0, 1.0, -1.0)
    t = sgn / (np.abs(tau) + np.hypot(1.0, tau))
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    G[p, p] = c
    G[p, q] = s
    G[q, p] = -s * phase
    G[q, q] = c * phase
    return G, True


def jacobi_eigh(M):
    """Cyclic Jacobi eigensolver (Brent-Luk parallel ordering)."""
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    Q = np.eye(n, dtype=complex)
    if n <= 1:
        return EigResult(Q, np.real(np.diag(A)).copy())
    scale = np.linalg.norm(A)
    threshold = n * n * EPS * scale
    rounds = _round_robin(n)
    for _ in range(MAX_SWEEPS):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= threshold:
            break
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            G, moved = _rotation(n, p, q, A[p, p].real, A[q, q].real, A[p, q])
            if moved:
                A = G.conj().T @ A @ G
                Q = Q @ G
    else:
        raise NoConvergence(f"Jacobi eigensolver exceeded {MAX_SWEEPS} sweeps")
    lam = np.real(np.diag(A))
    order = np.argsort(lam, kind="stable")
    return EigResult(Q[:, order], lam[order])


def _complete_columns(U, keep):
    """Replace columns outside ``keep`` with an orthonormal complement."""
    n = U.shape[0]
    r = int(np.count_nonzero(keep))
    if r == U.shape[1]:
        return U
    basis, _ = np.linalg.qr(np.hstack([U[:, keep], np.eye(n, dtype=complex)]))
    out = U.copy()
    out[:, ~keep] = basis[:, r:r + np.count_nonzero(~keep)]
    return out


def jacobi_svd(M):
    """One-sided (Hestenes) Jacobi SVD of a square complex matrix."""
    W = np.array(M, dtype=complex)
    m, n = W.shape
    if m != n:
        raise ValueError("jacobi_svd expects a square matrix")
    V = np.eye(n, dtype=complex)
    if n == 0:
        return SvdResult(W, np.zeros(0), V)
    rounds = _round_robin(n) if n > 1 else []
    scale = np.linalg.norm(W)
    tiny = (EPS * scale) ** 2
    for _ in range(MAX_SWEEPS):
        worst = 0.0
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            alpha = np.sum(np.abs(W[:, p]) ** 2, axis=0)
            beta = np.sum(np.abs(W[:, q]) ** 2, axis=0)
            gamma = np.sum(W[:, p].conj() * W[:, q], axis=0)
            live = (alpha > tiny) & (beta > tiny)
            rel = np.zeros_like(alpha)
            rel[live] = np.abs(gamma[live]) / np.sqrt(alpha[live] * beta[live])
            worst = max(worst, float(rel.max(initial=0.0)))
            gamma = np.where(rel > n * EPS, gamma, 0.0)
            G, moved = _rotation(n, p, q, alpha, beta, gamma)
            if moved:
                W = W @ G
                V = V @ G
        if worst <= n * EPS:
            break
    else:
        raise NoConvergence(f"Jacobi SVD exceeded {MAX_SWEEPS} sweeps")
    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma, W, V = sigma[order], W[:, order], V[:, order]
    keep = sigma > np.sqrt(tiny)
    U = np.zeros_like(W)
    U[:, keep] = W[:, keep] / sigma[keep]
    U = _complete_columns(U, keep)
    return SvdResult(U, sigma, V)


def herm_eig(M, *, method="lapack", tol=None):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrised before factoring; a Hermitian defect larger than
    ``tol`` (default ``TOL_HERM * (1 + ||M||)``) raises :class:`NotHermitian`.
    """
    M = np.asarray(M, dtype=complex)
    norm = spectral_norm(M)
    if tol is None:
        tol = TOL_HERM * (1.0 + norm)
    defect = spectral_norm(M - M.conj().T)
    if defect > tol:
        raise NotHermitian(f"Hermitian defect {defect:.3e} exceeds {tol:.3e}")
    H = 0.5 * (M + M.conj().T)
    if method == "jacobi":
        return jacobi_eigh(H)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    lam, Q = np.linalg.eigh(H)
    return EigResult(Q, lam)


def svd(M, *, method="lapack"):
    """Full SVD; real input stays real on the LAPACK path."""
    M = np.asarray(M)
    if not np.iscomplexobj(M):
        M = M.astype(float)
    if method == "jacobi":
        return jacobi_svd(M)
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    try:
        U, sigma, Vh = np.linalg.svd(M)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    return SvdResult(U, sigma, Vh.conj().T)


def psd_power(M, p, *, method="lapack", eps_inv=EPS_INV):
    """``M**p`` for Hermitian positive semidefinite ``M`` and ``p`` in {1/2, -1/2}.

    Eigenvalues in ``[-tol_psd, 0)`` are clamped to zero, with
    ``tol_psd = 1e-10 * (1 + ||M||)``.
    """
    if p not in (0.5, -0.5):
        raise ValueError("psd_power supports p = 1/2 and p = -1/2 only")
    M = np.asarray(M, dtype=complex)
    norm = spectral_norm(M)
    eig = herm_eig(M, method=method)
    lam = eig.lam
    tol_psd = TOL_PSD * (1.0 + norm)
    if lam.size and lam[0] < -tol_psd:
        raise NotPositive(f"eigenvalue {lam[0]:.3e} below -{tol_psd:.3e}")
    lam = np.clip(lam, 0.0, None)
    if p < 0:
        floor = eps_inv * (1.0 + norm)
        if lam.size and lam[0] < floor:
            raise SingularMatrix(f"eigenvalue {lam[0]:.3e} below {floor:.3e}")
    f = lam ** p
    out = (eig.Q * f) @ eig.Q.conj().T
    return 0.5 * (out + out.conj().T)


def rank_cutoff(scale, dim):
    return dim * EPS * scale * RANK_SAFETY


def numeric_rank(sigma, scale=None, dim=None):
    """Number of singular values above ``dim * eps * scale * 100``.

    ``scale`` defaults to the largest singular value and ``dim`` to
    ``len(sigma)``.
    """
    sigma = np.asarray(sigma, dtype=float)
    if sigma.size == 0:
        return 0
    if scale is None:
        scale = float(sigma.max())
    if dim is None:
        dim = sigma.size
    return int(np.count_nonzero(sigma > rank_cutoff(scale, dim)))
