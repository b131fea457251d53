import numpy as np
import pytest
from scipy.linalg import null_space

from artifact.bimodule import (BimoduleError, FgpBimodule, conjugate, direct_sum, hom_dimension,
                               intertwiner_space, left_pp_basis, left_reconstruction_defect,
                               relative_tensor, right_reconstruction_defect, trivial_bimodule,
                               watatani_index, zigzag_defects)
from artifact.cstar import MatrixCStarAlgebra

A = MatrixCStarAlgebra((1, 2), label="A")
B = MatrixCStarAlgebra((3, 1), label="B")


def phi(a):
    c, X = a.blocks
    return [np.block([[c, np.zeros((1, 2))], [np.zeros((2, 1)), X]]), c.copy()]


def psi(a):
    c, X = a.blocks
    return [np.block([[X, np.zeros((2, 1))], [np.zeros((1, 2)), c]]), c.copy()]


@pytest.fixture(scope="module")
def K():
    return FgpBimodule.from_homomorphism(A, B, 1, phi, label="K")


@pytest.fixture(scope="module")
def L():
    return FgpBimodule.from_homomorphism(A, B, 1, psi, label="L")


def brute_hom_dimension(K, L):
    """Dimension of {T : T = q T p, T phi_K(g) = phi_L(g) T} solved as one linear system."""
    shapes = [(L.n * d, K.n * d) for d in K.right.block_dims]
    sizes = [r * c for r, c in shapes]
    total = sum(sizes)
    rows = []
    pK, pL = K.projection(), L.projection()

    def unpack(v):
        out, o = [], 0
        for (r, c), s in zip(shapes, sizes):
            out.append(v[o:o + s].reshape(r, c))
            o += s
        return out

    def apply(fn):
        cols = []
        for k in range(total):
            e = np.zeros(total)
            e[k] = 1
            cols.append(np.concatenate([m.reshape(-1) for m in fn(unpack(e))]))
        return np.stack(cols, axis=1)

    rows.append(apply(lambda T: [t - q @ t @ p for t, q, p in zip(T, pL, pK)]))
    for g in K.left.generators():
        fk, fl = K.phi(g), L.phi(g)
        rows.append(apply(lambda T, fk=fk, fl=fl: [t @ a - b @ t for t, a, b in zip(T, fk, fl)]))
    return null_space(np.vstack(rows)).shape[1]


def test_hom_dimension_matches_brute_force(K, L):
    KL = direct_sum(K, L)
    for X, Y in [(K, K), (K, L), (KL, K), (KL, KL)]:
        assert hom_dimension(X, Y) == brute_hom_dimension(X, Y) == len(intertwiner_space(X, Y))


def test_intertwiners_are_bimodular(K, L):
    for f in intertwiner_space(K, L):
        assert f.bimodularity_defect() < 1e-10


def test_inner_product_identities(K):
    rng = np.random.default_rng(0)
    xi, eta = K.random_vector(rng), K.random_vector(rng)
    b = B.random(rng)
    a = A.random(rng)
    assert (K.right_inner(xi, K.right_act(eta, b)) - K.right_inner(xi, eta) @ b).norm() < 1e-10
    assert (K.right_inner(K.left_act(a, xi), eta) - K.right_inner(xi, K.left_act(a.adj(), eta))).norm() < 1e-10
    assert K.right_inner(xi, xi).is_positive()
    assert right_reconstruction_defect(K, xi) < 1e-10


def test_relative_tensor_inner_product(K):
    Kbar = conjugate(K).module
    T = relative_tensor(K, Kbar)
    rng = np.random.default_rng(1)
    x1, x2 = K.random_vector(rng), K.random_vector(rng)
    y1, y2 = Kbar.random_vector(rng), Kbar.random_vector(rng)
    lhs = T.module.right_inner(T.vector(x1, y1), T.vector(x2, y2))
    rhs = Kbar.right_inner(y1, Kbar.left_act(K.right_inner(x1, x2), y2))
    assert (lhs - rhs).norm() < 1e-10


def test_conjugate_zigzag(K):
    first, second = zigzag_defects(conjugate(K))
    assert first < 1e-10 and second < 1e-10


def test_left_basis_reconstructs(K):
    basis = left_pp_basis(K)
    xi = K.random_vector(np.random.default_rng(2))
    assert left_reconstruction_defect(K, xi, basis) < 1e-10


def test_trivial_bimodule_has_index_one():
    T = trivial_bimodule(A)
    assert (watatani_index(T) - A.identity()).norm() < 1e-10


def test_non_homomorphism_is_rejected():
    with pytest.raises(BimoduleError):
        FgpBimodule.from_homomorphism(A, B, 1, lambda a: [2 * m for m in phi(a)])


def test_generation_probe(K):
    from artifact.bimodule import generates
    rng = np.random.default_rng(3)
    assert generates(K, K.random_vector(rng))
    assert not generates(K, K.zero_vector())
    # A vector supported in one isotypic piece cannot reach the others.
    e = K.left.central_projection(0)
    assert not generates(K, K.left_act(e, K.random_vector(rng)))
