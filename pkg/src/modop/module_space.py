"""The standard Hilbert module ``A^k`` and its adjointable operators.

Over ``A = M_{n_1} + ... + M_{n_m}`` the operator algebra ``M_k(A)`` is
isomorphic to ``M_{k n_1} + ... + M_{k n_m}``. Operators are stored in that
form: one dense ``(k n_i) x (k n_i)`` matrix per algebra block, with module
index ``p`` and block-row ``a`` mapped to row ``p * n_i + a``. Every such
tuple of matrices is an A-linear adjointable map, and the adjoint is the
blockwise conjugate transpose. Vectors are stored the same way, as one
``(k n_i) x n_i`` matrix per block, so the right A-action is right
multiplication.
"""

from __future__ import annotations

from numbers import Number

import numpy as np
import scipy.linalg

from . import numkernel
from .algebra import AlgebraElement, _frozen, _matrix_from_json, _matrix_to_json, as_shape
from .errors import ShapeMismatch, StructureViolation

TOL_EMBED = 1e-12


class ModuleVector:
    __slots__ = ("shape", "rank", "blocks")

    def __init__(self, shape, rank, blocks):
        shape = as_shape(shape)
        blocks = tuple(_frozen(b) for b in blocks)
        if len(blocks) != len(shape):
            raise ShapeMismatch(f"{len(blocks)} blocks for shape {shape.block_dims}")
        for n, b in zip(shape, blocks):
            if b.shape != (rank * n, n):
                raise ShapeMismatch(f"vector block {b.shape}, expected {(rank * n, n)}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "rank", int(rank))
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("ModuleVector is immutable")

    @classmethod
    def from_entries(cls, entries):
        entries = list(entries)
        if not entries:
            raise ValueError("a module vector needs at least one entry")
        shape = entries[0].shape
        if any(e.shape != shape for e in entries):
            raise ShapeMismatch("entries live in different algebras")
        blocks = [np.vstack([e.blocks[i] for e in entries]) for i in range(len(shape))]
        return cls(shape, len(entries), blocks)

    @classmethod
    def zero(cls, shape, rank):
        shape = as_shape(shape)
        return cls(shape, rank, [np.zeros((rank * n, n)) for n in shape])

    @property
    def entries(self):
        out = []
        for p in range(self.rank):
            out.append(AlgebraElement(
                self.shape,
                [b[p * n:(p + 1) * n, :] for n, b in zip(self.shape, self.blocks)],
            ))
        return out

    def _check(self, other):
        if other.shape != self.shape or other.rank != self.rank:
            raise ShapeMismatch("module vectors of different shape or rank")

    def __add__(self, other):
        self._check(other)
        return ModuleVector(self.shape, self.rank, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        self._check(other)
        return ModuleVector(self.shape, self.rank, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, other):
        """Scalar multiple, or the right module action ``x * a``."""
        if isinstance(other, Number):
            return ModuleVector(self.shape, self.rank, [other * b for b in self.blocks])
        if isinstance(other, AlgebraElement):
            if other.shape != self.shape:
                raise ShapeMismatch("algebra element from a different algebra")
            return ModuleVector(self.shape, self.rank, [x @ a for x, a in zip(self.blocks, other.blocks)])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.__mul__(other)
        return NotImplemented

    def to_json(self):
        return {
            "shape": list(self.shape.block_dims),
            "rank": self.rank,
            "entries": [e.to_json() for e in self.entries],
        }

    @classmethod
    def from_json(cls, data):
        return cls.from_entries(AlgebraElement.from_json(e) for e in data["entries"])


class OperatorMatrix:
    __slots__ = ("shape", "rank", "blocks")

    def __init__(self, shape, rank, blocks):
        shape = as_shape(shape)
        rank = int(rank)
        if rank < 1:
            raise ValueError("module rank must be at least 1")
        blocks = tuple(_frozen(b) for b in blocks)
        if len(blocks) != len(shape):
            raise ShapeMismatch(f"{len(blocks)} blocks for shape {shape.block_dims}")
        for n, b in zip(shape, blocks):
            if b.shape != (rank * n, rank * n):
                raise ShapeMismatch(f"operator block {b.shape}, expected {(rank * n,) * 2}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("OperatorMatrix is immutable")

    def __repr__(self):
        return f"OperatorMatrix(shape={self.shape.block_dims}, rank={self.rank}, norm={op_norm(self):.4g})"

    @classmethod
    def from_entries(cls, grid):
        """Build from a ``k x k`` grid of :class:`AlgebraElement`."""
        grid = [list(row) for row in grid]
        k = len(grid)
        if k == 0 or any(len(row) != k for row in grid):
            raise ShapeMismatch("operator entries must form a non-empty square grid")
        shape = grid[0][0].shape
        if any(e.shape != shape for row in grid for e in row):
            raise ShapeMismatch("entries live in different algebras")
        blocks = [np.block([[grid[p][q].blocks[i] for q in range(k)] for p in range(k)])
                  for i in range(len(shape))]
        return cls(shape, k, blocks)

    @classmethod
    def from_scalar_matrix(cls, M, shape=(1,)):
        """Complex ``k x k`` matrix acting diagonally, ``T_pq = M_pq * 1``."""
        M = np.asarray(M, dtype=complex)
        shape = as_shape(shape)
        return cls(shape, M.shape[0], [np.kron(M, np.eye(n)) for n in shape])

    @classmethod
    def identity(cls, shape, rank):
        shape = as_shape(shape)
        return cls(shape, rank, [np.eye(rank * n) for n in shape])

    @classmethod
    def zero(cls, shape, rank):
        shape = as_shape(shape)
        return cls(shape, rank, [np.zeros((rank * n, rank * n)) for n in shape])

    def like(self, blocks):
        return OperatorMatrix(self.shape, self.rank, blocks)

    @property
    def entries(self):
        k = self.rank
        return [[AlgebraElement(self.shape, [b[p * n:(p + 1) * n, q * n:(q + 1) * n]
                                             for n, b in zip(self.shape, self.blocks)])
                 for q in range(k)] for p in range(k)]

    @property
    def embed_dim(self):
        return self.rank * self.shape.total_dim

    def _check(self, other):
        if not isinstance(other, OperatorMatrix):
            return False
        if other.shape != self.shape or other.rank != self.rank:
            raise ShapeMismatch(
                f"operators over {self.shape.block_dims}^{self.rank} and "
                f"{other.shape.block_dims}^{other.rank}")
        return True

    def __add__(self, other):
        if not self._check(other):
            return NotImplemented
        return self.like([a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if not self._check(other):
            return NotImplemented
        return self.like([a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return self.like([-a for a in self.blocks])

    def __matmul__(self, other):
        if isinstance(other, ModuleVector):
            return op_apply(self, other)
        if not self._check(other):
            return NotImplemented
        return self.like([a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, other):
        if isinstance(other, Number):
            return self.like([other * a for a in self.blocks])
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Number):
            return self.like([a / other for a in self.blocks])
        return NotImplemented

    @property
    def H(self):
        return op_adjoint(self)

    def to_json(self):
        return {
            "shape": list(self.shape.block_dims),
            "rank": self.rank,
            "entries": [[e.to_json() for e in row] for row in self.entries],
        }

    @classmethod
    def from_json(cls, data):
        grid = [[AlgebraElement.from_json(e) for e in row] for row in data["entries"]]
        op = cls.from_entries(grid)
        if "rank" in data and int(data["rank"]) != op.rank:
            raise ShapeMismatch(f"declared rank {data['rank']} but {op.rank} rows of entries")
        if "shape" in data and as_shape(data["shape"]) != op.shape:
            raise ShapeMismatch("declared shape disagrees with entries")
        return op


def inner_product(x, y):
    """``<x, y> = sum_i x_i^* y_i``."""
    x._check(y)
    return AlgebraElement(x.shape, [a.conj().T @ b for a, b in zip(x.blocks, y.blocks)])


def vector_norm(x):
    ip = inner_product(x, x)
    return float(np.sqrt(max(numkernel.spectral_norm(b) for b in ip.blocks)))


def op_apply(T, x):
    if x.shape != T.shape or x.rank != T.rank:
        raise ShapeMismatch("operator and vector over different modules")
    return ModuleVector(T.shape, T.rank, [a @ b for a, b in zip(T.blocks, x.blocks)])


def op_adjoint(T):
    return T.like([b.conj().T for b in T.blocks])


def op_norm(T):
    return max(numkernel.spectral_norm(b) for b in T.blocks)


def embed(T):
    """Block-diagonal complex matrix of size ``k * sum(n_i)``."""
    return scipy.linalg.block_diag(*T.blocks)


def unembed(M, shape, rank, tol=None):
    """Inverse of :func:`embed`; off-structure mass above ``tol`` is an error."""
    shape = as_shape(shape)
    M = np.asarray(M, dtype=complex)
    dim = rank * shape.total_dim
    if M.shape != (dim, dim):
        raise ShapeMismatch(f"matrix {M.shape} cannot carry {shape.block_dims}^{rank}")
    if tol is None:
        tol = TOL_EMBED * (1.0 + numkernel.spectral_norm(M))
    blocks = []
    stray = M.copy()
    start = 0
    for n in shape:
        stop = start + rank * n
        blocks.append(M[start:stop, start:stop])
        stray[start:stop, start:stop] = 0
        start = stop
    mass = float(np.linalg.norm(stray))
    if mass > tol:
        raise StructureViolation(f"off-block mass {mass:.3e} exceeds {tol:.3e}")
    return OperatorMatrix(shape, rank, blocks)


def random_vector(shape, rank, rng):
    shape = as_shape(shape)
    return ModuleVector(shape, rank, [
        (rng.standard_normal((rank * n, n)) + 1j * rng.standard_normal((rank * n, n))) / np.sqrt(2.0)
        for n in shape])


def random_operator(shape, rank, rng):
    shape = as_shape(shape)
    return OperatorMatrix(shape, rank, [
        (rng.standard_normal((rank * n, rank * n)) + 1j * rng.standard_normal((rank * n, rank * n)))
        / np.sqrt(2.0) for n in shape])


def matrix_to_json(M):
    return _matrix_to_json(M)


def matrix_from_json(rows):
    return _matrix_from_json(rows)
