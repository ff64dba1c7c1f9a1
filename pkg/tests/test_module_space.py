import json

import numpy as np
import pytest
from conftest import assert_op_close, scalar_op
from hypothesis import given, settings
from hypothesis import strategies as st

from modop.algebra import AlgebraElement, elem_norm, matrix_unit, random_element
from modop.decomposition import range_projection
from modop.errors import ShapeMismatch, StructureViolation
from modop.module_space import (
    ModuleVector,
    OperatorMatrix,
    embed,
    inner_product,
    op_adjoint,
    op_apply,
    op_norm,
    random_operator,
    random_vector,
    unembed,
    vector_norm,
)

shapes = st.lists(st.integers(1, 3), min_size=1, max_size=3).map(tuple)
ranks = st.integers(1, 4)
seeds = st.integers(0, 2**32 - 1)


def cvec(values):
    return ModuleVector.from_entries(AlgebraElement((1,), [[[v]]]) for v in values)


def trace(a):
    return sum(np.trace(b) for b in a.blocks)


class TestInnerProduct:
    def test_scalar_case(self):
        ip = inner_product(cvec([1, 1j]), cvec([1j, 0]))
        assert ip.blocks[0][0, 0] == pytest.approx(1j)

    def test_zero(self, rng):
        y = random_vector((2, 1), 3, rng)
        assert elem_norm(inner_product(ModuleVector.zero((2, 1), 3), y)) == 0

    def test_matrix_units(self):
        x = ModuleVector.from_entries([matrix_unit(2, 0, 0)])
        y = ModuleVector.from_entries([matrix_unit(2, 0, 1)])
        np.testing.assert_array_equal(inner_product(x, y).blocks[0], matrix_unit(2, 0, 1).blocks[0])

    def test_shape_mismatch(self, rng):
        with pytest.raises(ShapeMismatch):
            inner_product(random_vector((1,), 2, rng), random_vector((1,), 3, rng))

    @given(shapes, ranks, seeds)
    @settings(max_examples=60, deadline=None)
    def test_axioms(self, shape, k, seed):
        rng = np.random.default_rng(seed)
        x, y = random_vector(shape, k, rng), random_vector(shape, k, rng)
        a = random_element(shape, rng)
        scale = 1 + vector_norm(x) * vector_norm(y) * (1 + elem_norm(a))
        assert elem_norm(inner_product(x, y * a) - inner_product(x, y) @ a) <= 1e-13 * scale
        assert elem_norm(inner_product(x, y) - inner_product(y, x).H) <= 1e-13 * scale
        xx = inner_product(x, x)
        assert all(np.linalg.eigvalsh(b).min() >= -1e-12 for b in xx.blocks)
        assert elem_norm(xx) > 0


class TestVectorNorm:
    def test_zero(self):
        assert vector_norm(ModuleVector.zero((2,), 2)) == 0

    def test_pythagoras_scalar(self):
        assert vector_norm(cvec([3, 4])) == pytest.approx(5.0)

    def test_matrix_entries(self):
        # <x,x> = E11* E11 + E21* E21 = 2 E11
        x = ModuleVector.from_entries([matrix_unit(2, 0, 0), matrix_unit(2, 1, 0)])
        np.testing.assert_array_equal(inner_product(x, x).blocks[0], [[2, 0], [0, 0]])
        assert vector_norm(x) == pytest.approx(np.sqrt(2))


class TestApply:
    def test_identity(self, rng):
        x = random_vector((1, 2), 3, rng)
        y = op_apply(OperatorMatrix.identity((1, 2), 3), x)
        for a, b in zip(x.blocks, y.blocks):
            np.testing.assert_array_equal(a, b)

    def test_zero(self, rng):
        x = random_vector((2,), 2, rng)
        assert vector_norm(OperatorMatrix.zero((2,), 2) @ x) == 0

    def test_shift(self):
        y = scalar_op([[0, 1], [0, 0]]) @ cvec([0, 1])
        np.testing.assert_array_equal([e.blocks[0][0, 0] for e in y.entries], [1, 0])

    def test_entrywise_formula(self, rng):
        T = random_operator((2, 1), 3, rng)
        x = random_vector((2, 1), 3, rng)
        y = (T @ x).entries
        grid, xs = T.entries, x.entries
        for i in range(3):
            expected = grid[i][0] @ xs[0] + grid[i][1] @ xs[1] + grid[i][2] @ xs[2]
            assert elem_norm(y[i] - expected) <= 1e-13

    @given(shapes, ranks, seeds)
    @settings(max_examples=40, deadline=None)
    def test_right_linearity(self, shape, k, seed):
        rng = np.random.default_rng(seed)
        T, x, a = random_operator(shape, k, rng), random_vector(shape, k, rng), random_element(shape, rng)
        lhs, rhs = T @ (x * a), (T @ x) * a
        assert vector_norm(lhs - rhs) <= 1e-12 * (1 + op_norm(T) * vector_norm(x) * elem_norm(a))


class TestAdjoint:
    def test_hermitian_entries(self):
        T = scalar_op([[1, 2j], [-2j, 3]])
        assert_op_close(op_adjoint(T), T, atol=0)

    def test_scalar_shift(self):
        assert_op_close(op_adjoint(scalar_op([[0, 1], [0, 0]])), scalar_op([[0, 0], [1, 0]]), atol=0)

    def test_matrix_unit_entry(self):
        T = OperatorMatrix.from_entries([[matrix_unit(2, 0, 1)]])
        np.testing.assert_array_equal(op_adjoint(T).entries[0][0].blocks[0], matrix_unit(2, 1, 0).blocks[0])

    def test_entrywise_star_transpose(self, rng):
        T = random_operator((2, 1), 3, rng)
        g, gs = T.entries, op_adjoint(T).entries
        for i in range(3):
            for j in range(3):
                assert elem_norm(gs[i][j] - g[j][i].H) == 0

    @given(shapes, ranks, seeds)
    @settings(max_examples=60, deadline=None)
    def test_adjointability(self, shape, k, seed):
        rng = np.random.default_rng(seed)
        T = random_operator(shape, k, rng)
        x, y = random_vector(shape, k, rng), random_vector(shape, k, rng)
        gap = inner_product(T @ x, y) - inner_product(x, op_adjoint(T) @ y)
        assert elem_norm(gap) <= 1e-13 * (1 + op_norm(T)) * vector_norm(x) * vector_norm(y)


class TestEmbed:
    def test_identity(self):
        np.testing.assert_array_equal(embed(OperatorMatrix.identity((2, 1), 2)), np.eye(6))

    def test_matrix_units_rank_two(self):
        # A = M2, k = 2: a 4x4 matrix whose (p, q) 2x2 sub-block is entry T_pq
        grid = [[matrix_unit(2, 0, 1), matrix_unit(2, 1, 1)],
                [AlgebraElement.zero((2,)), matrix_unit(2, 1, 0)]]
        M = embed(OperatorMatrix.from_entries(grid))
        expected = np.zeros((4, 4))
        expected[0, 1] = expected[1, 3] = expected[3, 2] = 1
        np.testing.assert_array_equal(M, expected)

    @given(shapes, ranks, seeds)
    @settings(max_examples=60, deadline=None)
    def test_star_isomorphism(self, shape, k, seed):
        rng = np.random.default_rng(seed)
        T, S = random_operator(shape, k, rng), random_operator(shape, k, rng)
        tol = 1e-13 * (1 + op_norm(T)) * (1 + op_norm(S))
        assert np.linalg.norm(embed(T @ S) - embed(T) @ embed(S)) <= tol
        assert np.linalg.norm(embed(T + S) - embed(T) - embed(S)) <= tol
        np.testing.assert_array_equal(embed(op_adjoint(T)), embed(T).conj().T)
        assert op_norm(T) == pytest.approx(np.linalg.norm(embed(T), 2), rel=1e-13)
        assert_op_close(unembed(embed(T), shape, k), T, atol=0)

    def test_unembed_rejects_off_structure(self):
        M = np.eye(3)
        M[0, 2] = 1e-3
        with pytest.raises(StructureViolation):
            unembed(M, (1, 2), 1)
        M[0, 2] = 1e-16
        unembed(M, (1, 2), 1)

    def test_unembed_size(self):
        with pytest.raises(ShapeMismatch):
            unembed(np.eye(4), (1, 2), 1)


class TestOpNorm:
    def test_examples(self):
        assert op_norm(OperatorMatrix.identity((2,), 3)) == pytest.approx(1)
        assert op_norm(OperatorMatrix.zero((2,), 3)) == 0
        oracle = np.linalg.svd(np.array([[0, 2], [0, 0]]), compute_uv=False)[0]
        assert op_norm(scalar_op([[0, 2], [0, 0]])) == pytest.approx(oracle)

    def test_sup_over_unit_vectors(self, rng):
        shape, k = (2, 1), 3
        T = random_operator(shape, k, rng)
        norm = op_norm(T)
        for _ in range(200):
            x = random_vector(shape, k, rng)
            x = x * (1 / vector_norm(x))
            assert vector_norm(T @ x) <= norm * (1 + 1e-12)
        # the top right singular vector of the heaviest block attains the norm
        i = int(np.argmax([np.linalg.norm(b, 2) for b in T.blocks]))
        v = np.linalg.svd(T.blocks[i])[2][0].conj()
        blocks = [np.zeros((k * n, n), dtype=complex) for n in shape]
        blocks[i][:, 0] = v
        x = ModuleVector(shape, k, blocks)
        assert vector_norm(x) == pytest.approx(1.0)
        assert vector_norm(T @ x) == pytest.approx(norm, rel=1e-12)


class TestProjectionLemma:
    def test_range_projection_is_module_projection(self, rng):
        shape, k = (2, 1), 3
        G = random_operator(shape, k, rng)
        T = G.like([b[:, :-1] @ b[:-1, :] for b in G.blocks])  # rank deficient
        P = range_projection(T)
        I = OperatorMatrix.identity(shape, k)
        x = (I - P) @ random_vector(shape, k, rng)
        w = P @ random_vector(shape, k, rng)
        assert elem_norm(inner_product(x, w)) <= 1e-12 * vector_norm(x) * vector_norm(w)
        a = random_element(shape, rng)
        assert vector_norm(P @ (w * a) - (P @ w) * a) <= 1e-12 * (1 + elem_norm(a)) * vector_norm(w)

    def test_orthogonality_via_traces(self, rng):
        shape, k = (2, 2), 2
        x, w = random_vector(shape, k, rng), random_vector(shape, k, rng)
        units = [matrix_unit(n, i, j, shape, b) for b, n in enumerate(shape)
                 for i in range(n) for j in range(n)]
        traces = np.array([trace(inner_product(x, w * a)) for a in units])
        assert np.abs(traces).max() > 1e-3
        # <x, w a> traces recover every entry of <x, w>
        ip = inner_product(x, w)
        rebuilt = []
        for b, n in enumerate(shape):
            rebuilt.append(np.array([[trace(inner_product(x, w * matrix_unit(n, j, i, shape, b)))
                                      for j in range(n)] for i in range(n)]))
        for got, want in zip(rebuilt, ip.blocks):
            np.testing.assert_allclose(got, want, atol=1e-13)


def test_json_roundtrip(rng):
    T = random_operator((2, 1), 2, rng)
    data = json.loads(json.dumps(T.to_json()))
    assert data["rank"] == 2 and data["shape"] == [2, 1]
    assert len(data["entries"]) == 2 and data["entries"][1][0]["shape"] == [2, 1]
    assert_op_close(OperatorMatrix.from_json(data), T, atol=0)
    x = random_vector((2, 1), 2, rng)
    y = ModuleVector.from_json(json.loads(json.dumps(x.to_json())))
    assert vector_norm(x - y) == 0


def test_json_rank_mismatch(rng):
    data = random_operator((1,), 2, rng).to_json()
    data["rank"] = 3
    with pytest.raises(ShapeMismatch):
        OperatorMatrix.from_json(data)
