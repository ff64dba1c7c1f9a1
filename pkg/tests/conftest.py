import numpy as np
import pytest

from modop.module_space import OperatorMatrix


def scalar_op(M, shape=(1,)):
    return OperatorMatrix.from_scalar_matrix(np.asarray(M, dtype=complex), shape)


def assert_op_close(A, B, atol=1e-12):
    assert A.shape == B.shape and A.rank == B.rank
    for a, b in zip(A.blocks, B.blocks):
        np.testing.assert_allclose(a, b, atol=atol, rtol=0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)
