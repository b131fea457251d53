import numpy as np
import pytest

from artifact.models.groups import (CocycleError, FiniteGroup, GroupActionModel, check_cocycle,
                                    klein_sign_cocycle, natural_permutation_model, projective_representation)


@pytest.mark.parametrize("name,order,abelian", [("Z6", 6, True), ("S3", 6, False), ("D8", 8, False),
                                                ("Q8", 8, False), ("A4", 12, False), ("SL23", 24, False),
                                                ("Z2xZ2", 4, True)])
def test_named_groups(name, order, abelian):
    G = FiniteGroup.by_name(name)
    assert G.order == order and G.is_abelian() == abelian
    for g in G.elements:
        assert G.mul(g, G.inv(g)) == 0
        for h in G.elements:
            for k in G.elements:
                assert G.mul(G.mul(g, h), k) == G.mul(g, G.mul(h, k))


def test_unknown_name():
    with pytest.raises(ValueError):
        FiniteGroup.by_name("X5")


def test_klein_cocycle_gives_a_projective_representation():
    G, w = klein_sign_cocycle()
    check_cocycle(G, w)
    U = projective_representation(G, w)
    for g in G.elements:
        for h in G.elements:
            assert np.allclose(U[g] @ U[h], w[g, h] * U[G.mul(g, h)])
    # The class is nontrivial: the generators anticommute in any realization.
    assert not np.allclose(U[1] @ U[2], U[2] @ U[1])


def test_bad_cocycle_reports_a_triple():
    G = FiniteGroup.by_name("Z3")
    w = np.ones((3, 3), dtype=complex)
    w[1, 1] = 1j
    with pytest.raises(CocycleError):
        check_cocycle(G, w)


def test_actions_are_homomorphisms():
    G = FiniteGroup.by_name("S3")
    for model in (GroupActionModel.inner(G), GroupActionModel.permutation(G, 2), natural_permutation_model(3)):
        assert model.check() < 1e-10
    assert GroupActionModel.permutation(G).acts_freely
    assert not natural_permutation_model(3).acts_freely
    assert not GroupActionModel.inner(G).is_free
