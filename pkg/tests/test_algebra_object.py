import sys
from pathlib import Path

import numpy as np
import pytest

from artifact.algebra_object import (LatticeOverflowError, build_cuntz_algebra_object,
                                     build_group_algebra_object, check_algebra_object, closure,
                                     galois_lattice, trivial_object)
from artifact.models.groups import CocycleError, FiniteGroup, GroupActionModel, klein_sign_cocycle
from artifact.tensor_cat import CategoryData

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402


def category(name):
    return CategoryData.from_group_model(GroupActionModel.inner(FiniteGroup.by_name(name)))


@pytest.mark.parametrize("name", ["Z2", "Z4", "S3", "D8", "Q8"])
def test_group_algebra_axioms(name):
    rep = check_algebra_object(build_group_algebra_object(category(name)))
    assert rep["passed"], rep["defects"]


def test_twisted_klein_axioms():
    G, w = klein_sign_cocycle()
    cat = CategoryData.from_group_model(GroupActionModel.inner(G, w))
    assert check_algebra_object(build_group_algebra_object(cat, None, w))["passed"]


def test_non_cocycle_is_reported_with_its_triple():
    cat = category("Z3")
    w = np.ones((3, 3), dtype=complex)
    w[1, 1] = 1j
    with pytest.raises(CocycleError) as err:
        build_group_algebra_object(cat, None, w)
    assert "(" in str(err.value)


def test_non_subgroup_support_is_rejected():
    with pytest.raises(ValueError):
        build_group_algebra_object(category("Z4"), [0, 1])


def test_cuntz_object_and_trivial_object():
    assert check_algebra_object(build_cuntz_algebra_object(3))["passed"]
    T = trivial_object(category("Z3"))
    assert T.support == [0]


@pytest.mark.parametrize("name", ["Z6", "D8", "Q8", "Z2xZ2xZ2"])
def test_galois_lattice_against_subset_enumeration(name):
    G = FiniteGroup.by_name(name)
    lat = galois_lattice(build_group_algebra_object(category(name)))
    assert set(lat.supports()) == oracles.subgroups_by_subsets(G)
    rep = lat.report()
    # Hasse edges are exactly the covering relations of subset inclusion.
    sup = lat.supports()
    covers = {(j, i) for i in range(len(sup)) for j in range(len(sup))
              if sup[j] < sup[i] and not any(sup[j] < s < sup[i] for s in sup)}
    assert {tuple(e) for e in rep["hasse_edges"]} == covers


def test_closure_of_a_generator_is_the_cyclic_subgroup():
    B = build_group_algebra_object(category("Z6"))
    D = closure(B, {2: [np.ones(1)]})
    assert set(D.support) == {0, 2, 4}


def test_lattice_budget_overflow():
    with pytest.raises(LatticeOverflowError):
        galois_lattice(build_group_algebra_object(category("S4")), cap=10)
