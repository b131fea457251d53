import sys
from pathlib import Path

import numpy as np
import pytest

from artifact.algebra_object import build_group_algebra_object
from artifact.crossed_product import (BimoduleAction, CrossedProduct, WindowOverflowError, coefficient_distance,
                                      hilbert_coordinates, multiplier_bound, operator_norm_estimate,
                                      windowed_gram)
from artifact.models.cuntz import cuntz_crossed_product
from artifact.models.groups import FiniteGroup, GroupActionModel, klein_sign_cocycle
from artifact.tensor_cat import CategoryData

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402


def setup(name, action, cocycle=None, subgroup=None):
    G = FiniteGroup.by_name(name) if cocycle is None else cocycle[0]
    w = None if cocycle is None else cocycle[1]
    model = GroupActionModel.inner(G, w) if action == "inner" else GroupActionModel.permutation(G, 2, w)
    cat = CategoryData.from_group_model(model)
    obj = build_group_algebra_object(cat, subgroup, w)
    return model, CrossedProduct(BimoduleAction(cat), obj)


CASES = [("Z3", "permutation", None), ("S3", "inner", None), ("Z2xZ2", "inner", klein_sign_cocycle()),
         ("Z2xZ2", "permutation", klein_sign_cocycle())]


def terms(P, x):
    return {g: P.action.to_algebra(vs[0]) for g, vs in x.terms.items()}


@pytest.mark.parametrize("name,action,cocycle", CASES)
def test_regular_representation_is_multiplicative(name, action, cocycle):
    model, P = setup(name, action, cocycle)
    rng = np.random.default_rng(0)
    for _ in range(3):
        x, y = P.random_element(rng), P.random_element(rng)
        R = lambda z: oracles.regular_representation(model, terms(P, z))  # noqa: E731
        assert np.abs(R(P.mul(x, y)) - R(x) @ R(y)).max() < 1e-10
        assert np.abs(R(P.star(x)) - R(x).conj().T).max() < 1e-10
        assert np.abs(oracles.dense(P.expectation(x)) - oracles.identity_block(model, R(x))).max() < 1e-10


def test_subgroup_object_is_a_subalgebra():
    model, P = setup("S3", "permutation", subgroup=[0, 3, 4])
    rng = np.random.default_rng(1)
    x, y = P.random_element(rng), P.random_element(rng)
    assert set(P.mul(x, y).support) <= {0, 3, 4}


@pytest.mark.parametrize("name,action,cocycle", CASES)
def test_unit_modules_and_expectation(name, action, cocycle):
    model, P = setup(name, action, cocycle)
    rng = np.random.default_rng(2)
    x = P.random_element(rng)
    a, b = P.action.algebra_random(rng), P.action.algebra_random(rng)
    assert P.close(P.mul(P.one(), x), x) and P.close(P.mul(x, P.one()), x)
    assert P.close(P.left_mul(a, x), P.mul(P.from_algebra(a), x))
    assert P.close(P.right_mul(x, b), P.mul(x, P.from_algebra(b)))
    E = P.expectation(P.mul(P.mul(P.from_algebra(a), x), P.from_algebra(b)))
    assert (E - a @ P.expectation(x) @ b).norm() < 1e-10
    assert (P.expectation(P.star(x)) - P.expectation(x).adj()).norm() < 1e-10


@pytest.mark.parametrize("name,action,cocycle", CASES)
def test_module_inner_and_hilbert_coordinates(name, action, cocycle):
    model, P = setup(name, action, cocycle)
    rng = np.random.default_rng(3)
    x, y = P.random_element(rng), P.random_element(rng)
    assert (P.module_inner(x, y) - P.inner(x, y)).norm() < 1e-10
    labels = list(P.window)
    basis = P.basis(labels)[:12]
    X = np.stack([hilbert_coordinates(P, b, labels) for b in basis], axis=1)
    assert np.abs(X.conj().T @ X - windowed_gram(P, basis)).max() < 1e-10


def test_multiplier_bound_dominates():
    model, P = setup("S3", "permutation")
    rng = np.random.default_rng(4)
    y = P.random_element(rng)
    C = multiplier_bound(P, y)
    lower = operator_norm_estimate(P, y)["norm_lower_bound"]
    assert lower ** 2 <= C * (1 + 1e-9)
    for _ in range(5):
        x = P.random_element(rng)
        yx = P.mul(y, x)
        gap = P.inner(x, x) * C - P.inner(yx, yx)
        assert min(np.linalg.eigvalsh((m + m.conj().T) / 2).min() for m in gap.blocks) > -1e-9


def test_window_overflow_is_raised():
    P = cuntz_crossed_product(2, 1)
    x = P.homogeneous(1, P.action.cyclic_vector(1))
    with pytest.raises(WindowOverflowError):
        P.mul(x, x)


def test_coefficient_distance_is_a_metric():
    model, P = setup("Z3", "permutation")
    rng = np.random.default_rng(5)
    x, y = P.random_element(rng), P.random_element(rng)
    assert coefficient_distance(x, x) == 0
    assert np.isclose(coefficient_distance(x, y), coefficient_distance(y, x))


def test_relation_systems_on_a_free_action():
    from artifact.bimodule import hom_dimension
    from artifact.crossed_product import delta_roundtrip_check, frobenius_dim_check, peter_weyl_report
    model, P = setup("Z3", "permutation")
    e = P.category.simples[P.category.unit]
    norm = hom_dimension(e, e)
    for c in P.window:
        rep = frobenius_dim_check(P, c, normalizer=norm)
        assert rep["passed"] and rep["normalized_dims"] == (1.0, 1.0)
    pw = peter_weyl_report(P, normalizer=norm)
    assert pw["matches_fibers"] and pw["complete"]
    assert delta_roundtrip_check(P, normalizer=norm)["passed"]


def test_pqn_report_for_a_homogeneous_element():
    from artifact.crossed_product import pqn_membership_report
    model, P = setup("Z3", "permutation")
    x = P.homogeneous(1, P.action.random(1, np.random.default_rng(6)))
    rep = pqn_membership_report(P, x)
    assert rep["generates_labels"] == [P.category.names[1]]
    assert rep["x_in_Kx_residual"] < 1e-9
    assert rep["components"][P.category.names[1]]["ratio_to_fiber"] == 1.0


def test_galois_projections_are_compatible():
    from artifact.algebra_object import galois_lattice
    from artifact.crossed_product import galois_compatibility
    model, P = setup("S3", "permutation")
    for D in galois_lattice(P.obj).nodes:
        assert galois_compatibility(P, D, samples=3)["passed"]
