import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modop.algebra import (
    AlgebraElement,
    AlgebraShape,
    elem_adjoint,
    elem_compose,
    elem_norm,
    elem_positive_sqrt,
    matrix_unit,
    random_element,
)
from modop.errors import NotPositive, ShapeMismatch

shapes = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)


def E(i, j, n=2):
    return matrix_unit(n, i, j)


def test_shape_validation():
    with pytest.raises(ValueError):
        AlgebraShape(())
    with pytest.raises(ValueError):
        AlgebraShape((2, 0))
    assert AlgebraShape((1, 2)).complex_dim == 5


def test_element_validation():
    with pytest.raises(ShapeMismatch):
        AlgebraElement((2,), [np.eye(3)])
    with pytest.raises(ShapeMismatch):
        AlgebraElement((1, 1), [np.eye(1)])


def test_elements_are_immutable():
    a = AlgebraElement.identity((2,))
    with pytest.raises(ValueError):
        a.blocks[0][0, 0] = 5
    with pytest.raises(AttributeError):
        a.shape = None


class TestCompose:
    def test_absorbing_zero(self):
        one = AlgebraElement.identity((1,))
        zero = AlgebraElement.zero((1,))
        assert elem_norm(elem_compose(one, zero, "mul")) == 0

    def test_additive_inverse(self, rng):
        a = random_element((2, 1), rng)
        assert elem_norm(elem_compose(a, elem_compose(a, None, "scale", -1), "add")) == 0

    def test_matrix_units(self):
        prod = elem_compose(E(0, 1), E(1, 0), "mul")
        np.testing.assert_array_equal(prod.blocks[0], E(0, 0).blocks[0])

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            AlgebraElement.identity((1,)) + AlgebraElement.identity((2,))


class TestAdjoint:
    def test_matrix_unit(self):
        np.testing.assert_array_equal(elem_adjoint(E(0, 1)).blocks[0], E(1, 0).blocks[0])

    def test_selfadjoint_fixed(self):
        a = AlgebraElement((2,), [np.diag([1.0, -1.0])])
        np.testing.assert_array_equal(elem_adjoint(a).blocks[0], a.blocks[0])

    def test_conjugate_transpose(self):
        a = AlgebraElement((2,), [[[0, 1j], [0, 0]]])
        np.testing.assert_array_equal(elem_adjoint(a).blocks[0], [[0, 0], [-1j, 0]])

    @given(shapes, st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_involutive_isometry(self, shape, seed):
        a = random_element(shape, np.random.default_rng(seed))
        back = elem_adjoint(elem_adjoint(a))
        for x, y in zip(a.blocks, back.blocks):
            np.testing.assert_array_equal(x, y)
        assert elem_norm(elem_adjoint(a)) == pytest.approx(elem_norm(a), rel=1e-14)


class TestNorm:
    def test_zero(self):
        assert elem_norm(AlgebraElement.zero((2, 3))) == 0

    def test_max_of_blocks(self):
        assert elem_norm(AlgebraElement((1, 1), [[[3]], [[4]]])) == 4

    def test_nilpotent_block(self):
        block = np.array([[0, 2], [0, 0]])
        oracle = np.linalg.svd(block, compute_uv=False)[0]
        assert elem_norm(AlgebraElement((2,), [block])) == pytest.approx(oracle, abs=1e-15)
        assert oracle == pytest.approx(2.0)

    @given(shapes, st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_c_star_identity(self, shape, seed):
        a = random_element(shape, np.random.default_rng(seed))
        assert elem_norm(a.H @ a) == pytest.approx(elem_norm(a) ** 2, rel=1e-12)


class TestPositiveSqrt:
    def test_identity(self):
        r = elem_positive_sqrt(AlgebraElement.identity((3,)))
        np.testing.assert_allclose(r.blocks[0], np.eye(3), atol=1e-15)

    def test_diagonal(self):
        r = elem_positive_sqrt(AlgebraElement((2,), [np.diag([4.0, 9.0])]))
        np.testing.assert_allclose(r.blocks[0], np.diag([2.0, 3.0]), atol=1e-14)

    def test_eigenvector_oracle(self):
        # [[2,1],[1,2]] has eigenpairs 3:(1,1)/sqrt2 and 1:(1,-1)/sqrt2
        plus = np.array([[1, 1], [1, 1]]) / 2
        minus = np.array([[1, -1], [-1, 1]]) / 2
        expected = np.sqrt(3) * plus + 1.0 * minus
        r = elem_positive_sqrt(AlgebraElement((2,), [[[2, 1], [1, 2]]]))
        np.testing.assert_allclose(r.blocks[0], expected, atol=1e-14)

    @given(shapes, st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_squares_back(self, shape, seed):
        g = random_element(shape, np.random.default_rng(seed))
        a = g.H @ g
        r = elem_positive_sqrt(a)
        assert elem_norm(r @ r - a) <= 1e-12 * (1 + elem_norm(a))
        assert all(np.linalg.eigvalsh(b).min() >= -1e-12 for b in r.blocks)

    def test_not_positive(self):
        with pytest.raises(NotPositive):
            elem_positive_sqrt(AlgebraElement((2,), [np.diag([1.0, -1.0])]))


def test_json_roundtrip(rng):
    a = random_element((2, 1, 3), rng)
    data = json.loads(json.dumps(a.to_json()))
    assert data["shape"] == [2, 1, 3]
    assert data["blocks"][0][0][1] == [a.blocks[0][0, 1].real, a.blocks[0][0, 1].imag]
    b = AlgebraElement.from_json(data)
    for x, y in zip(a.blocks, b.blocks):
        np.testing.assert_array_equal(x, y)
