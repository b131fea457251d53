import numpy as np
import pytest
from scipy.linalg import block_diag

from artifact.cstar import MatrixCStarAlgebra, ParentMismatchError, center_dimension, pinv_sqrt


@pytest.fixture
def A():
    return MatrixCStarAlgebra((1, 2, 3))


def dense(x):
    return block_diag(*x.blocks)


def test_arithmetic_matches_dense_matrices(A):
    rng = np.random.default_rng(0)
    x, y = A.random(rng), A.random(rng)
    assert np.allclose(dense(x @ y), dense(x) @ dense(y))
    assert np.allclose(dense(x + y * 2), dense(x) + 2 * dense(y))
    assert np.allclose(dense(x.adj()), dense(x).conj().T)


def test_norm_is_largest_singular_value(A):
    x = A.random(np.random.default_rng(1))
    assert np.isclose(x.norm(), np.linalg.norm(dense(x), 2))


def test_positivity_and_inverse_square_root(A):
    x = A.random(np.random.default_rng(2))
    p = x.adj() @ x
    assert p.is_positive() and p.is_selfadjoint()
    r = pinv_sqrt(p)
    assert (r @ p @ r).close(A.identity(), tol=1e-8)
    assert not (A.identity() * -1).is_positive()


def test_unitaries_and_center(A):
    u = A.random_unitary(np.random.default_rng(3))
    assert (u.adj() @ u).close(A.identity())
    assert center_dimension(A) == A.center_dim == 3
    assert all(z.is_central() for z in A.center_basis())


def test_matrix_units_and_dimension(A):
    assert len(A.basis()) == A.dim == 1 + 4 + 9
    e = A.matrix_unit(2, 0, 1)
    assert (e @ e.adj()).close(A.matrix_unit(2, 0, 0))


def test_mixed_parents_are_rejected(A):
    B = MatrixCStarAlgebra((2,))
    with pytest.raises(ParentMismatchError):
        A.identity() + B.identity()
