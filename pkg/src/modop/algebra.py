"""Finite-dimensional C*-algebras ``M_{n_1}(C) + ... + M_{n_m}(C)``.

Elements are tuples of square complex blocks. Everything here is immutable:
block arrays are copied on construction and flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Number

import numpy as np

from . import numkernel
from .errors import ShapeMismatch


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AlgebraShape:
    block_dims: tuple

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise ValueError("an algebra shape needs at least one block")
        if any(n < 1 for n in dims):
            raise ValueError(f"block dimensions must be positive, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @property
    def total_dim(self):
        """Sum of the block sizes (dimension of the defining representation)."""
        return sum(self.block_dims)

    @property
    def complex_dim(self):
        return sum(n * n for n in self.block_dims)

    def __len__(self):
        return len(self.block_dims)

    def __iter__(self):
        return iter(self.block_dims)


def as_shape(shape):
    if isinstance(shape, AlgebraShape):
        return shape
    if isinstance(shape, int):
        return AlgebraShape((shape,))
    return AlgebraShape(tuple(shape))


class AlgebraElement:
    __slots__ = ("shape", "blocks")

    def __init__(self, shape, blocks):
        shape = as_shape(shape)
        blocks = tuple(_frozen(b) for b in blocks)
        if len(blocks) != len(shape):
            raise ShapeMismatch(f"{len(blocks)} blocks for shape {shape.block_dims}")
        for n, b in zip(shape, blocks):
            if b.shape != (n, n):
                raise ShapeMismatch(f"block of shape {b.shape}, expected {(n, n)}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "blocks", blocks)

    def __setattr__(self, name, value):
        raise AttributeError("AlgebraElement is immutable")

    @classmethod
    def zero(cls, shape):
        shape = as_shape(shape)
        return cls(shape, [np.zeros((n, n)) for n in shape])

    @classmethod
    def identity(cls, shape):
        shape = as_shape(shape)
        return cls(shape, [np.eye(n) for n in shape])

    @classmethod
    def scalar(cls, shape, value):
        shape = as_shape(shape)
        return cls(shape, [value * np.eye(n) for n in shape])

    def __repr__(self):
        return f"AlgebraElement(shape={self.shape.block_dims}, norm={elem_norm(self):.4g})"

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.shape != self.shape:
            raise ShapeMismatch(f"{self.shape.block_dims} vs {other.shape.block_dims}")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.shape, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.shape, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __neg__(self):
        return AlgebraElement(self.shape, [-a for a in self.blocks])

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.shape, [a @ b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, other):
        if isinstance(other, Number):
            return AlgebraElement(self.shape, [other * a for a in self.blocks])
        return self.__matmul__(other)

    def __rmul__(self, other):
        if isinstance(other, Number):
            return self.__mul__(other)
        return NotImplemented

    @property
    def H(self):
        return elem_adjoint(self)

    def to_json(self):
        return {
            "shape": list(self.shape.block_dims),
            "blocks": [_matrix_to_json(b) for b in self.blocks],
        }

    @classmethod
    def from_json(cls, data):
        return cls(data["shape"], [_matrix_from_json(b) for b in data["blocks"]])


def _matrix_to_json(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def _matrix_from_json(rows):
    arr = np.array(rows, dtype=float)
    if arr.size == 0:
        return np.zeros((0, 0), dtype=complex)
    return arr[..., 0] + 1j * arr[..., 1]


def elem_compose(a, b, op, scale=None):
    """Blockwise ``add``, ``mul`` or ``scale``; ``scale`` ignores ``b``."""
    if op == "add":
        return a + b
    if op == "mul":
        return a @ b
    if op == "scale":
        return a * complex(scale)
    raise ValueError(f"unknown op {op!r}")


def elem_adjoint(a):
    return AlgebraElement(a.shape, [b.conj().T for b in a.blocks])


def elem_norm(a):
    return max(numkernel.spectral_norm(b) for b in a.blocks)


def elem_positive_sqrt(a, *, method="lapack"):
    """Positive square root, blockwise; raises NotPositive on a negative spectrum."""
    return AlgebraElement(a.shape, [numkernel.psd_power(b, 0.5, method=method) for b in a.blocks])


def matrix_unit(n, i, j, shape=None, block=0):
    """``E_ij`` in the chosen block of ``shape`` (0-based indices)."""
    shape = as_shape(shape if shape is not None else (n,))
    blocks = [np.zeros((m, m)) for m in shape]
    blocks[block][i, j] = 1.0
    return AlgebraElement(shape, blocks)


def random_element(shape, rng):
    """Blocks with i.i.d. standard complex Gaussian entries."""
    shape = as_shape(shape)
    return AlgebraElement(shape, [complex_gaussian(rng, (n, n)) for n in shape])


def complex_gaussian(rng, size):
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
