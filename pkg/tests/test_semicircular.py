import sys
from pathlib import Path

import numpy as np
import pytest

from artifact.models.semicircular import DegreeOverflowError, SemicircularModel, fock_build

sys.path.insert(0, str(Path(__file__).parent))
import oracles  # noqa: E402


def test_scalar_moments_count_noncrossing_pairings():
    F = fock_build(SemicircularModel.scalar(8))
    for m in range(1, 9):
        assert abs(F.moment([0] * m)[0, 0] - oracles.noncrossing_pairings(m)) < 1e-10


def test_degree_cap_is_enforced():
    F = fock_build(SemicircularModel.scalar(4))
    with pytest.raises(DegreeOverflowError):
        F.moment([0] * 5)


def test_block_model_is_completely_positive_with_covariance():
    model = SemicircularModel.block_example(2)
    assert model.cp_defect() < 1e-10
    F = fock_build(model)
    assert F.covariance_defect() < 1e-10


def test_kraus_round_trip():
    model = SemicircularModel.block_example(2)
    rebuilt = SemicircularModel.from_kraus(model.kraus(), degree_cap=2)
    rng = np.random.default_rng(0)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    for i in model.index_set:
        for j in model.index_set:
            assert np.abs(rebuilt.eta(i, j, x) - model.eta(i, j, x)).max() < 1e-10


def test_fourth_moment_formula():
    """E(X a X b X c X) sums the two non-crossing pairings of four letters."""
    rng = np.random.default_rng(1)
    kraus = [[rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))] for _ in range(2)]
    model = SemicircularModel.from_kraus(kraus, degree_cap=4)
    F = fock_build(model)
    a, b, c = (rng.standard_normal((2, 2)) for _ in range(3))
    eta = lambda x: model.eta(0, 0, x)  # noqa: E731
    want = eta(a) @ b @ eta(c) + eta(a @ eta(b) @ c)
    assert np.abs(F.moment([0, a, 0, b, 0, c, 0]) - want).max() < 1e-10


def test_discreteness_witness_agrees():
    F = fock_build(SemicircularModel.block_example(2))
    assert all(F.discreteness_witness(i)["equal"] for i in (0, 1))
