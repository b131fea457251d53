import sys
from pathlib import Path

import numpy as np
import pytest

from artifact.models.cuntz import (UHF, SizeOverflowError, build_cuntz_core, corner_block, crossed_to_words,
                                   cuntz_crossed_product, partial_trace, shift, shift1)

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402


@pytest.fixture(scope="module")
def P():
    return cuntz_crossed_product(2, 2)


def generator(P, i, star=False):
    """``s_i`` is ``s_i s_1^*`` (degree 0) times ``s_1`` (degree -1)."""
    n = P.action.n
    x = P.homogeneous(-1, UHF.letter(n, 1, i, 0).promote(P.action.depth))
    return P.star(x) if star else x


def test_generators_satisfy_cuntz_relations(P):
    n = P.action.n
    s = [generator(P, i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            prod = P.mul(P.star(s[i]), s[j])
            want = P.one() if i == j else P.zero()
            assert P.close(prod, want, 1e-12)
    total = P.zero()
    for i in range(n):
        total = total + P.mul(s[i], P.star(s[i]))
    assert P.close(total, P.one(), 1e-12)


def test_generators_match_words(P):
    n = P.action.n
    for i in range(n):
        assert oracles.word_close(crossed_to_words(P, generator(P, i)), {((i,), ()): 1}, n)


def test_products_match_word_oracle(P):
    rng = np.random.default_rng(0)
    n = P.action.n
    for _ in range(6):
        x = P.random_element(rng, labels=[int(rng.integers(-1, 2))])
        y = P.random_element(rng, labels=[int(rng.integers(-1, 2))])
        wx, wy = crossed_to_words(P, x), crossed_to_words(P, y)
        assert oracles.word_close(crossed_to_words(P, P.mul(x, y)), oracles.word_mul(wx, wy), n)
        assert oracles.word_close(crossed_to_words(P, P.star(x)), oracles.word_adj(wx), n)


def test_gauge_expectation_keeps_degree_zero(P):
    rng = np.random.default_rng(1)
    x = P.random_element(rng, labels=[-1, 0, 1])
    e = P.expectation(x)
    assert np.allclose(e.mat, x.terms[0][0].mat)


def test_tower_maps():
    rng = np.random.default_rng(2)
    a = UHF.random(2, 2, rng)
    assert (partial_trace(shift(a)) - a * 2).norm() < 1e-12
    assert (corner_block(shift1(a)) - a).norm() < 1e-12
    assert (a.promote(4) @ UHF.scalar(2, 1.0) - a.promote(4)).norm() < 1e-12


@pytest.mark.parametrize("n,k", [(2, 2), (2, 4), (3, 3)])
def test_core_report(n, k):
    core = build_cuntz_core(n, k)
    rep = core.report()
    assert rep["index_defect"] < 1e-10 and np.isclose(rep["index_scalar"], n * n)
    assert rep["end_dimension"] == n * n
    pair = core.corner_pairings()
    assert all(v < 1e-12 for (i, j), v in pair.items() if i != j)
    assert all(v > 1e-6 for (i, j), v in pair.items() if i == j)
    assert core.corner_generation()


def test_size_bound():
    with pytest.raises(SizeOverflowError):
        build_cuntz_core(3, 7)
