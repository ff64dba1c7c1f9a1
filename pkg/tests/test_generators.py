import numpy as np
import pytest
from conftest import assert_op_close, scalar_op

from modop.decomposition import abs_op
from modop.generators import (
    gen_commutant_element,
    gen_compressed,
    gen_intertwined_pair,
    gen_kaplansky_instance,
    gen_positive,
    gen_random_normal,
    gen_random_operator,
    gen_random_unitary,
    gen_rank_deficient,
    gen_unitary_commuting_with,
    random_shape,
    sample_fixed_point_T,
)
from modop.module_space import OperatorMatrix, op_adjoint, op_norm
from modop.normality import commutator_residual, is_normal, kaplansky_check, unitarity_residual

SHAPE, K = (2, 1), 2


@pytest.mark.parametrize("make", [
    lambda s: gen_random_operator(SHAPE, K, s),
    lambda s: gen_random_normal(SHAPE, K, s, kernel_fraction=0.3),
    lambda s: gen_random_unitary(SHAPE, K, s),
    lambda s: gen_positive(SHAPE, K, s),
    lambda s: gen_rank_deficient(SHAPE, K, s),
    lambda s: gen_compressed(SHAPE, K, s),
    lambda s: gen_kaplansky_instance(s, "generic")[1],
    lambda s: gen_kaplansky_instance(s, "commuting")[1],
    lambda s: gen_intertwined_pair(SHAPE, K, s)[1],
])
def test_bit_identical_for_same_seed(make):
    a, b = make(11), make(11)
    for x, y in zip(a.blocks, b.blocks):
        assert x.tobytes() == y.tobytes()
    c = make(12)
    assert any(x.shape != y.shape or x.tobytes() != y.tobytes() for x, y in zip(a.blocks, c.blocks))


def test_random_shape_respects_bounds():
    rng = np.random.default_rng(0)
    for _ in range(200):
        shape, k = random_shape(rng, max_block=3, max_blocks=3, max_rank=4, max_embed=24)
        assert 1 <= k <= 4 and all(1 <= n <= 3 for n in shape.block_dims)
        assert k * shape.total_dim <= 24


def test_random_operator_rarely_normal():
    non_normal = sum(not is_normal(gen_random_operator((1,), 2, seed)) for seed in range(100))
    assert non_normal >= 95


def test_random_normal_is_normal():
    for seed in range(50):
        T = gen_random_normal(SHAPE, 3, seed, kernel_fraction=0.3)
        assert is_normal(T).residual <= 1e-12


def test_random_unitary():
    for seed in range(20):
        assert unitarity_residual(gen_random_unitary(SHAPE, 3, seed)) <= 1e-12


def test_compressed_joint_kernel():
    T = gen_compressed((3,), 2, 5)
    assert not is_normal(T) or op_norm(T) == 0


class TestCommutant:
    def test_identity_gives_arbitrary(self):
        I = OperatorMatrix.identity((2,), 2)
        S = gen_commutant_element(I, 3)
        assert commutator_residual(S, I) == 0

    def test_distinct_diagonal_gives_diagonal(self):
        S = gen_commutant_element(scalar_op(np.diag([1, 2])), 4)
        b = S.blocks[0]
        assert abs(b[0, 1]) <= 1e-13 and abs(b[1, 0]) <= 1e-13

    def test_normal_pair(self):
        for seed in range(20):
            T = gen_random_normal(SHAPE, 2, seed, kernel_fraction=0.3)
            S = gen_commutant_element(T, seed)
            assert commutator_residual(S, T) <= 1e-12
            assert commutator_residual(S, op_adjoint(T)) <= 1e-12

    def test_abs_flavour(self):
        T = gen_random_operator(SHAPE, 2, 6)
        S = gen_commutant_element(T, 7, of="abs")
        assert commutator_residual(S, abs_op(T)) <= 1e-12

    def test_unknown(self):
        with pytest.raises(ValueError):
            gen_commutant_element(OperatorMatrix.identity((1,), 1), 0, of="nope")


def test_unitary_commuting_with_positive():
    for seed in range(20):
        P = gen_positive(SHAPE, 2, seed, kernel_fraction=0.4)
        U = gen_unitary_commuting_with(P, seed)
        assert unitarity_residual(U) <= 1e-10
        assert op_norm(U @ P - P @ U) <= 1e-10 * (1 + op_norm(P))


class TestKaplanskyInstances:
    def test_archetype_family(self):
        T = scalar_op(np.diag([1, 2]))
        M = scalar_op([[0, 1], [1, 0]])
        S = T.like([np.linalg.inv(T.blocks[0])]) @ M
        assert_op_close(S, scalar_op([[0, 1], [0.5, 0]]), atol=0)
        assert not is_normal(S @ T)

    def test_preconditions_hold(self):
        for seed in range(40):
            for branch in ("generic", "commuting"):
                T, S = gen_kaplansky_instance(seed, branch)
                assert is_normal(T) and is_normal(T @ S)
                assert min(np.abs(np.linalg.eigvals(b)).min() for b in T.blocks) >= 0.5 - 1e-12

    def test_commuting_branch_verdict(self):
        for seed in range(20):
            rep = kaplansky_check(*gen_kaplansky_instance(seed, "commuting"))
            assert (rep.lhs, rep.rhs) == (True, True)

    def test_generic_branch_finds_asymmetry(self):
        verdicts = [kaplansky_check(*gen_kaplansky_instance(s, "generic")) for s in range(20)]
        assert any(v.lhs is False and v.rhs is False for v in verdicts)

    def test_unknown_branch(self):
        with pytest.raises(ValueError):
            gen_kaplansky_instance(0, "sideways")


def test_intertwined_pair_has_intertwiners():
    from modop.normality import solve_intertwiners

    for seed in range(10):
        T, S = gen_intertwined_pair(SHAPE, 2, seed)
        assert is_normal(T) and is_normal(S)
        assert len(solve_intertwiners(T, S)) >= len(SHAPE)


class TestFixedPoints:
    def test_identity_gives_hermitian(self):
        I = OperatorMatrix.identity(SHAPE, 2)
        T = sample_fixed_point_T(I, 1)
        assert op_norm(T) > 0
        assert op_norm(T - op_adjoint(T)) <= 1e-12 * op_norm(T)

    def test_minus_identity_gives_skew(self):
        T = sample_fixed_point_T(OperatorMatrix.identity(SHAPE, 2) * -1, 2)
        assert op_norm(T) > 0
        assert op_norm(T + op_adjoint(T)) <= 1e-12 * op_norm(T)
        assert is_normal(T)

    def test_random_unitary(self):
        for seed in range(30):
            U = gen_random_unitary(SHAPE, 2, seed)
            T = sample_fixed_point_T(U, seed)
            assert op_norm(T - U @ op_adjoint(T)) <= 1e-12 * (1 + op_norm(T))
            assert is_normal(T)
