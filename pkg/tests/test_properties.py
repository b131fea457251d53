"""Randomized algebraic identities over seeds and models."""

import sys
from functools import lru_cache
from pathlib import Path

import numpy as np
from hypothesis import given, settings, strategies as st

from artifact.algebra_object import build_group_algebra_object
from artifact.crossed_product import BimoduleAction, CrossedProduct, coefficient_distance
from artifact.models.cuntz import crossed_to_words, cuntz_crossed_product
from artifact.models.groups import FiniteGroup, GroupActionModel
from artifact.tensor_cat import CategoryData

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402

FAST = settings(max_examples=15, deadline=None)


@lru_cache(maxsize=None)
def group_product(name, action):
    G = FiniteGroup.by_name(name)
    model = GroupActionModel.inner(G) if action == "inner" else GroupActionModel.permutation(G)
    cat = CategoryData.from_group_model(model)
    return CrossedProduct(BimoduleAction(cat), build_group_algebra_object(cat))


@lru_cache(maxsize=None)
def cuntz(n):
    return cuntz_crossed_product(n, 2)


models = st.sampled_from([("Z2", "inner"), ("Z3", "permutation"), ("S3", "permutation"), ("Z2xZ2", "inner")])


@FAST
@given(models, st.integers(0, 2 ** 32 - 1))
def test_associative_and_star_antimultiplicative(m, seed):
    P = group_product(*m)
    rng = np.random.default_rng(seed)
    x, y, z = (P.random_element(rng) for _ in range(3))
    assert coefficient_distance(P.mul(P.mul(x, y), z), P.mul(x, P.mul(y, z))) < 1e-9
    assert coefficient_distance(P.star(P.mul(x, y)), P.mul(P.star(y), P.star(x))) < 1e-9
    assert coefficient_distance(P.star(P.star(x)), x) < 1e-12


@FAST
@given(models, st.integers(0, 2 ** 32 - 1), st.floats(1e-6, 1e3))
def test_expectation_positive_and_homogeneous(m, seed, scale):
    P = group_product(*m)
    x = P.random_element(np.random.default_rng(seed)) * scale
    e = P.inner(x, x)
    lo = min(np.linalg.eigvalsh((b + b.conj().T) / 2).min() for b in e.blocks)
    assert lo >= -1e-12 * max(1.0, e.norm())
    assert e.norm() > 0


@FAST
@given(st.sampled_from([2, 3]), st.integers(0, 2 ** 32 - 1), st.integers(-1, 1), st.integers(-1, 1))
def test_cuntz_products_follow_word_rules(n, seed, l, m):
    P = cuntz(n)
    rng = np.random.default_rng(seed)
    x, y = P.random_element(rng, labels=[l]), P.random_element(rng, labels=[m])
    want = oracles.word_mul(crossed_to_words(P, x), crossed_to_words(P, y))
    assert oracles.word_close(crossed_to_words(P, P.mul(x, y)), want, n, tol=1e-9)


@FAST
@given(st.sampled_from(["Z4", "Z2xZ2", "S3", "D8", "Q8", "A4"]))
def test_subgroup_oracles_agree(name):
    from artifact.models.groups import subgroups
    G = FiniteGroup.by_name(name)
    assert set(subgroups(G)) == oracles.subgroups_by_extension(G)
