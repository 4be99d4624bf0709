"""Scoring rules and calibration diagnostics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from heliocast.errors import InputError
from heliocast.verification import (
    aggregate_scores,
    band_depth_rank,
    crps_gaussian,
    crps_sample,
    interval_score,
    make_histogram,
    pit,
    point_scores,
)


def test_crps_of_perfect_point_forecast_is_zero():
    assert crps_sample(np.array([3.0]), 3.0) == 0.0


def test_crps_two_member_hand_computation():
    # mean |X - y| = 1; pairwise term |0-2| + |2-0| over m(m-1)=2 gives 1;
    # CRPS = 1 - 1/2 * 2 * ... = 1 - 1 = 0 is wrong: 1 - 0.5*2 = 0
    assert crps_sample(np.array([0.0, 2.0]), 1.0) == 0.0


def test_crps_sample_converges_to_gaussian_value():
    rng = np.random.default_rng(0)
    draws = rng.standard_normal(100_000)
    assert abs(crps_sample(draws, 0.0) - 0.23369) < 0.003


def test_crps_gaussian_closed_form():
    assert abs(crps_gaussian(0.0, 1.0, 0.0) - 0.23369) < 1e-4


def test_crps_gaussian_translation_invariance():
    a = crps_gaussian(2.0, 1.5, 1.0)
    b = crps_gaussian(2.0 + 7.0, 1.5, 1.0 + 7.0)
    assert abs(a - b) < 1e-12


def test_crps_gaussian_positive_homogeneity():
    assert abs(crps_gaussian(0.0, 2.0, 0.0) - 2 * 0.23369) < 2e-4


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=40),
    st.floats(-1e3, 1e3),
)
def test_crps_sample_matches_brute_force(values, obs):
    ens = np.array(values)
    m = len(ens)
    brute = np.abs(ens - obs).mean() - 0.5 * np.abs(
        ens[:, None] - ens[None, :]
    ).sum() / (m * (m - 1))
    assert crps_sample(ens, obs) == pytest.approx(brute, rel=1e-9, abs=1e-9)


def test_point_scores_trivials():
    ens = np.tile(np.array([0.0, 1.0, 2.0]), (4, 1)).T  # median 1 at each of 4 points
    obs = np.ones(4)
    mae, rmse = point_scores(ens.T if ens.shape[0] != 4 else ens, obs)
    assert mae == 0.0
    assert rmse == 0.0


def test_point_scores_single_case():
    ens = np.array([[1.0, 3.0, 5.0]])  # mean 3
    mae, rmse = point_scores(ens, np.array([1.0]))
    assert rmse == 2.0


def test_point_scores_constant_offset():
    ens = np.full((5, 10), 7.0)
    obs = np.full(5, 4.0)
    mae, rmse = point_scores(ens, obs)
    assert mae == pytest.approx(3.0)
    assert rmse == pytest.approx(3.0)


def test_pit_extremes():
    rng = np.random.default_rng(1)
    ens = np.arange(1.0, 101.0)
    assert pit(ens, 0.0, rng) == 0.0
    assert abs(pit(ens, 50.5, rng) - 0.5) < 0.01


def test_pit_is_uniform_under_calibration():
    # obs drawn from the ensemble's own discrete distribution: the randomized
    # PIT at the atoms is then exactly uniform
    rng = np.random.default_rng(2)
    pits = []
    for _ in range(10_000):
        ens = rng.standard_normal(40)
        pits.append(pit(ens, rng.choice(ens), rng))
    ks = stats.kstest(pits, "uniform").statistic
    assert ks < 1.63 / np.sqrt(10_000)  # 99th percentile of the KS null


def test_interval_width_of_standard_normal():
    q = stats.norm.ppf(np.linspace(5e-5, 1 - 5e-5, 20_000))
    width, _ = interval_score(q, 0.0, level=0.8)
    assert abs(width - 2 * 1.2816) < 0.02 * 2 * 1.2816


def test_interval_of_constant_ensemble():
    ens = np.full(50, 5.0)
    assert interval_score(ens, 5.0) == (0.0, True)
    assert interval_score(ens, 4.0) == (0.0, False)


def test_interval_coverage_is_calibrated():
    rng = np.random.default_rng(3)
    covered = []
    for _ in range(10_000):
        ens = rng.standard_normal(100)
        covered.append(interval_score(ens, rng.choice(ens))[1])
    assert abs(np.mean(covered) - 0.80) < 0.02


def test_band_depth_obs_enclosed_by_constants():
    curves = np.vstack([np.ones(10), 3 * np.ones(10)])
    rank = band_depth_rank(2 * np.ones(10), curves, np.random.default_rng(4))
    assert rank == 3


def test_band_depth_tie_broken_uniformly():
    rng = np.random.default_rng(5)
    curves = np.vstack([np.ones(6), 3 * np.ones(6), 5 * np.ones(6)])
    ranks = {band_depth_rank(3 * np.ones(6), curves, rng) for _ in range(200)}
    assert len(ranks) == 2  # obs ties exactly one member; both orders occur


def test_band_depth_rank_is_uniform_under_exchangeability():
    rng = np.random.default_rng(6)
    n_rep, m = 10_000, 9
    counts = np.zeros(m + 1)
    for _ in range(n_rep):
        pool = rng.standard_normal((m, 8))
        rank = band_depth_rank(rng.standard_normal(8), pool, rng)
        counts[rank - 1] += 1
    exp = n_rep / (m + 1)
    chi2 = ((counts - exp) ** 2 / exp).sum()
    assert chi2 < stats.chi2.ppf(0.99, m)


def test_aggregate_scores_of_perfect_deterministic_path():
    obs = np.linspace(0, 100, 72)
    traj = obs[None, :].repeat(3, axis=0)
    for statistic in ("sum", "max"):
        scores = aggregate_scores(traj, obs, statistic)
        assert scores["mae"] == 0.0 and scores["rmse"] == 0.0 and scores["crps"] == 0.0


def test_aggregate_sum_median_fixture():
    traj = np.vstack([np.ones(72), 3 * np.ones(72)])
    scores = aggregate_scores(traj, 2 * np.ones(72), "sum")
    assert scores["mae"] == 0.0  # median path sum 144 equals the observed 144


def test_coupling_changes_max_but_not_sum_mean():
    rng = np.random.default_rng(7)
    marg = rng.gamma(2.0, 10.0, size=(2000, 72))
    sorted_cols = np.sort(marg, axis=0)
    comonotone = sorted_cols
    independent = np.column_stack([rng.permutation(sorted_cols[:, j]) for j in range(72)])
    sum_mean_c = comonotone.sum(axis=1).mean()
    sum_mean_i = independent.sum(axis=1).mean()
    assert sum_mean_c == pytest.approx(sum_mean_i)
    obs = np.full(72, 20.0)
    crps_c = aggregate_scores(comonotone, obs, "max")["crps"]
    crps_i = aggregate_scores(independent, obs, "max")["crps"]
    assert abs(crps_c - crps_i) / crps_i > 0.10


def test_histogram_even_division():
    values = np.repeat(np.linspace(0.05, 0.95, 10), 7)
    hist = make_histogram(values, 10, value_range=(0.0, 1.0))
    assert np.all(hist.counts == 7)
    assert hist.counts.sum() == len(values)


def test_histogram_single_value():
    hist = make_histogram(np.array([0.31]), 20, value_range=(0.0, 1.0))
    assert (hist.counts > 0).sum() == 1


def test_histogram_reference_line():
    values = np.random.default_rng(8).uniform(size=9741)
    hist = make_histogram(values, 20, value_range=(0.0, 1.0))
    assert hist.reference == pytest.approx(487.05)


def test_aggregate_rejects_incomplete_paths():
    traj = np.ones((3, 72))
    traj[0, 0] = np.nan
    with pytest.raises(InputError):
        aggregate_scores(traj, np.ones(72), "sum")
