import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokensort.analysis import (
    LatentGaussianProfile,
    ambiguity_error,
    ambiguity_sets,
    empirical_constants,
    neighbor_error_bound,
    rank_probability_matrix,
    sorting_error,
    swap_probability,
    tridiagonal_P,
    uniform_ambiguity_P,
    validate_probability_matrix,
)
from tokensort.core import SortedSequence, TokenSet
from tokensort.latentsort import init_model
from tokensort.sorters import mean_squared_keys


def test_validate_probability_matrix():
    validate_probability_matrix(np.eye(3))
    with pytest.raises(ValueError):
        validate_probability_matrix(np.array([[0.5, 0.4], [0.5, 0.5]]))
    with pytest.raises(ValueError):
        validate_probability_matrix(np.ones((2, 3)))


def test_ambiguity_sets_distinct_keys():
    ts = TokenSet(np.random.default_rng(0).normal(size=(5, 2)))
    groups = ambiguity_sets(ts, np.array([0.1, 0.2, 0.3, 0.4, 0.5]))
    assert groups == [[0], [1], [2], [3], [4]]


def test_ambiguity_sets_mean_squared_symmetric_pair():
    ts = TokenSet(np.array([[1.0, 0.0], [0.0, 1.0]]))
    groups = ambiguity_sets(ts, mean_squared_keys(ts.values))
    assert groups == [[0, 1]]


def test_ambiguity_sets_summation_keys():
    vals = np.array([[0.3, 0.7], [0.7, 0.3], [0.0, 0.0]])
    ts = TokenSet(vals)
    groups = ambiguity_sets(ts, vals.sum(axis=1))
    assert sorted(map(sorted, groups)) == [[0, 1], [2]]


def test_ambiguity_sets_transitive_closure():
    # chain 0 ~ 1 ~ 2 under tol even though |k0 - k2| > tol
    ts = TokenSet(np.zeros((3, 1)))
    keys = np.array([0.0, 0.5e-9, 1.0e-9])
    groups = ambiguity_sets(ts, keys, tol=0.6e-9)
    assert groups == [[0, 1, 2]]


def test_uniform_P_row_stochastic():
    p = uniform_ambiguity_P([[0, 2], [1]], 3)
    validate_probability_matrix(p)
    assert p[0, 0] == p[0, 2] == 0.5
    assert p[1, 1] == 1.0


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_ambiguity_error_equals_matrix_form(seed):
    # mean-over-group error and ||P Y - Y||_F^2 are the same quantity
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 21))
    vals = rng.normal(size=(m, 3))
    keys = np.sort(rng.choice(np.linspace(0, 1, max(2, m // 2)), size=m))
    ts = TokenSet(vals)
    groups = ambiguity_sets(ts, keys)
    seq = SortedSequence(vals)
    p = uniform_ambiguity_P(groups, m)
    assert ambiguity_error(seq, groups) == pytest.approx(
        sorting_error(p, seq), abs=1e-12)


def test_sorting_error_identity_P():
    seq = SortedSequence(np.random.default_rng(1).normal(size=(4, 2)))
    assert sorting_error(np.eye(4), seq) == 0.0


def test_swap_probability_degenerate():
    assert swap_probability(0.0, 0.0, 1.0, 0.0) == 1.0  # h_i surely below h_j
    assert swap_probability(1.0, 0.0, 0.0, 0.0) == 0.0
    assert swap_probability(0.5, 0.0, 0.5, 0.0) == 0.5


def test_swap_probability_against_erfc_oracle():
    # closed form: P(h_i < h_j) = Phi((mu_j - mu_i) / sqrt(v_i + v_j))
    cases = [(0.0, 1.0, 1.0, 1.0), (0.3, 0.2, -0.1, 0.05), (2.0, 0.5, 2.0, 0.5)]
    for mi, vi, mj, vj in cases:
        z = (mj - mi) / math.sqrt(vi + vj)
        ref = 0.5 * math.erfc(-z / math.sqrt(2))
        assert swap_probability(mi, vi, mj, vj) == pytest.approx(ref, abs=1e-12)


def test_rank_matrix_two_elements():
    prof = LatentGaussianProfile(np.array([0.0, 1.0]), np.array([0.5, 0.5]))
    p = rank_probability_matrix(prof)
    c = swap_probability(1.0, 0.5, 0.0, 0.5)  # P(h_1 < h_0)
    assert p[0, 0] == pytest.approx(1 - c)
    assert p[1, 1] == pytest.approx(1 - c)
    assert p[0, 1] == pytest.approx(c)


def test_rank_matrix_monte_carlo_m2():
    rng = np.random.default_rng(123)
    mu = np.array([0.2, 0.5])
    var = np.array([0.3, 0.1])
    p = rank_probability_matrix(LatentGaussianProfile(mu, var))
    draws = rng.normal(mu, np.sqrt(var), size=(1_000_000, 2))
    emp = np.mean(draws[:, 0] < draws[:, 1])
    assert p[0, 0] == pytest.approx(emp, abs=0.005)


def test_rank_matrix_monte_carlo_m3():
    rng = np.random.default_rng(321)
    mu = np.array([0.0, 0.4, 1.0])
    var = np.array([0.2, 0.3, 0.1])
    p = rank_probability_matrix(LatentGaussianProfile(mu, var))
    draws = rng.normal(mu, np.sqrt(var), size=(200_000, 3))
    ranks = np.argsort(np.argsort(draws, axis=1), axis=1)
    # at M >= 3 the pairwise comparisons are correlated (they share h_i), so
    # treating them as independent is an approximation: close, not exact
    for k in range(3):
        for i in range(3):
            emp = np.mean(ranks[:, i] == k)
            assert p[k, i] == pytest.approx(emp, abs=0.12)


def test_rank_matrix_collapse_identity():
    prof = LatentGaussianProfile(np.array([1.0, 2.0, 3.0]), np.zeros(3))
    assert np.allclose(rank_probability_matrix(prof), np.eye(3))


def test_rank_matrix_size_cap():
    prof = LatentGaussianProfile(np.arange(13.0), np.ones(13))
    with pytest.raises(ValueError):
        rank_probability_matrix(prof)


def test_rank_matrix_renormalize_rows():
    prof = LatentGaussianProfile(np.array([0.0, 0.3, 0.6]), np.full(3, 0.4))
    p = rank_probability_matrix(prof, renormalize=True)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-12)


def _well_separated_profile(rng, m):
    sigma = rng.uniform(0.005, 0.02, size=m)
    mu = np.cumsum(1.0 + rng.uniform(size=m))
    return LatentGaussianProfile(mu, sigma ** 2)


def test_tridiagonal_rows_and_columns():
    rng = np.random.default_rng(2)
    for _ in range(100):
        prof = _well_separated_profile(rng, int(rng.integers(3, 10)))
        p = tridiagonal_P(prof)
        assert np.abs(p.sum(axis=0) - 1).max() < 1e-15  # exact by construction
        assert np.abs(p.sum(axis=1) - 1).max() < 1e-9   # approximation regime


def test_tridiagonal_row_residual_at_moderate_separation():
    # with overlapping neighbors the row sums visibly deviate from 1: the
    # construction is only column-stochastic in general
    prof = LatentGaussianProfile(np.array([0.0, 0.5, 1.0, 1.5]), np.full(4, 0.2))
    p = tridiagonal_P(prof)
    assert np.abs(p.sum(axis=0) - 1).max() < 1e-15
    assert np.abs(p.sum(axis=1) - 1).max() > 1e-3


def test_tridiagonal_collapse_identity():
    prof = LatentGaussianProfile(np.array([0.0, 1.0, 2.0]), np.full(3, 1e-13))
    assert np.allclose(tridiagonal_P(prof), np.eye(3), atol=1e-9)


def test_tridiagonal_requires_ascending_means():
    with pytest.raises(ValueError):
        tridiagonal_P(LatentGaussianProfile(np.array([1.0, 0.0]), np.ones(2)))


def test_neighbor_bound_ordering_fuzz():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        m = int(rng.integers(3, 9))
        prof = LatentGaussianProfile(
            np.cumsum(rng.uniform(0.2, 2.0, size=m)), rng.uniform(0.01, 0.5, size=m))
        p = tridiagonal_P(prof)
        y = SortedSequence(rng.normal(size=(m, int(rng.integers(1, 4)))))
        exact, upper = neighbor_error_bound(y, p)
        assert exact <= upper + 1e-12


def test_neighbor_bound_rejects_non_tridiagonal():
    y = SortedSequence(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        neighbor_error_bound(y, np.full((3, 3), 1 / 3))


def test_empirical_constants_shapes():
    m = init_model(2, hidden_sizes=(8,), seed=0)
    data = TokenSet(np.random.default_rng(0).uniform(size=(50, 2)))
    out = empirical_constants(m, data, samples=200, seed=1)
    assert set(out) == {"K_e", "K_d", "B"}
    assert all(v >= 0 for v in out.values())
