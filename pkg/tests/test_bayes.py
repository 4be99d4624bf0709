"""Gibbs regression sampler and predictive trajectories."""

import numpy as np
import pandas as pd
import pytest

from heliocast import graphs
from heliocast.bayes import (
    BetaPrior,
    ModelVariant,
    PosteriorDraws,
    RegressionData,
    build_design,
    build_regression_data,
    gibbs_fit,
    predict_trajectory,
    t0_fallback,
    window_fallbacks,
)
from heliocast.data import ForecastCase, partition_lead_times
from heliocast.errors import InputError


def test_design_matrix_fixtures():
    X = build_design(np.array([np.e, np.e**2]))
    assert np.allclose(X, [[1, 0, 1, 0], [0, 1, 0, 2]])
    assert np.allclose(build_design(np.array([1.0])), [[1.0, 0.0]])


def test_design_slope_block_is_log_x():
    rng = np.random.default_rng(0)
    x = rng.uniform(0.1, 100.0, size=5)
    X = build_design(x)
    assert np.allclose(np.diag(X[:, 5:]), np.log(x))


def _synthetic_data(rng, n_cases=20, n_leads=8, beta0=None, beta1=None, K=None):
    leads = np.arange(10, 10 + n_leads)
    beta0 = np.full(n_leads, 2.0) if beta0 is None else beta0
    beta1 = np.full(n_leads, 1.0) if beta1 is None else beta1
    if K is None:
        K = 4.0 * np.eye(n_leads)
        K[np.arange(n_leads - 1), np.arange(1, n_leads)] = -1.5
        K[np.arange(1, n_leads), np.arange(n_leads - 1)] = -1.5
    cov = np.linalg.inv(K)
    log_x, log_y, case_active = [], [], []
    for _ in range(n_cases):
        lx = rng.normal(5.0, 0.6, size=n_leads)
        eps = rng.multivariate_normal(np.zeros(n_leads), cov)
        log_x.append(lx)
        log_y.append(beta0 + beta1 * lx + eps)
        case_active.append(np.arange(n_leads))
    return (
        RegressionData(
            lead_times=leads,
            case_active=case_active,
            log_x=log_x,
            log_y=log_y,
        ),
        beta0,
        beta1,
        K,
    )


def test_posterior_mean_matches_ols_with_many_cases():
    rng = np.random.default_rng(1)
    data, beta0, beta1, _ = _synthetic_data(rng, n_cases=150, n_leads=4)
    draws = gibbs_fit(data, ModelVariant.from_name("full"), iters=800, burn=200, rng=rng)
    n_leads = len(data.lead_times)
    # per-lead OLS on (log x, log y)
    for j in range(n_leads):
        lx = np.array([row[j] for row in data.log_x])
        ly = np.array([row[j] for row in data.log_y])
        A = np.column_stack([np.ones_like(lx), lx])
        coef = np.linalg.lstsq(A, ly, rcond=None)[0]
        assert abs(draws.betas[:, j].mean() - coef[0]) < 0.25
        assert abs(draws.betas[:, n_leads + j].mean() - coef[1]) < 0.05


def test_simulate_and_recover_within_posterior_spread():
    rng = np.random.default_rng(2)
    data, beta0, beta1, K = _synthetic_data(rng, n_cases=20)
    draws = gibbs_fit(data, ModelVariant.from_name("full"), iters=2000, burn=500, rng=rng)
    truth = np.concatenate([beta0, beta1])
    mean = draws.betas.mean(axis=0)
    sd = draws.betas.std(axis=0)
    inside = np.abs(mean - truth) < 3 * sd
    assert inside.mean() >= 0.95


def test_fully_independent_precision_draws_are_diagonal():
    rng = np.random.default_rng(3)
    data, *_ = _synthetic_data(rng, n_cases=15, n_leads=5)
    draws = gibbs_fit(data, ModelVariant.from_name("indep"), iters=300, burn=100, rng=rng)
    off = draws.precisions - draws.precisions * np.eye(5)
    assert np.all(off == 0.0)


def test_variant_names():
    assert ModelVariant.from_name("full").residual_graph == "ar1"
    assert ModelVariant.from_name("indep-resid").residual_graph == "independent"
    with pytest.raises(InputError):
        ModelVariant.from_name("nope")


def test_t0_fallback_is_the_window_mean():
    assert t0_fallback(np.zeros(3)) == 0.0
    assert t0_fallback(np.array([2.0, 4.0])) == 3.0


def test_night_hours_fall_back_to_zero():
    # five never-producing night hours across the window -> fallback 0
    cases = []
    for d in range(5):
        y = np.full(72, np.nan)
        y[:24] = 100.0
        y[1:6] = 0.0  # leads 2..6 are night
        cases.append(
            ForecastCase(
                issue_time=pd.Timestamp("2021-06-01") + pd.Timedelta(days=d),
                x=np.ones(72),
                y_lag=np.ones(72),
                y_obs=y,
            )
        )
    fb = window_fallbacks(cases)
    assert np.array_equal(fb[1:6], np.zeros(5))
    assert np.allclose(fb[:1], 100.0)


def _point_mass_draws(leads, beta0, beta1, precision_diag):
    n = len(leads)
    K = np.diag(precision_diag)
    betas = np.concatenate([beta0, beta1])[None, :]
    return PosteriorDraws(
        lead_times=np.asarray(leads),
        betas=betas,
        precisions=K[None, :, :],
        burn_in=0,
    )


def _target_case(x, y_lag):
    return ForecastCase(
        issue_time=pd.Timestamp("2021-06-20"), x=x, y_lag=y_lag, y_obs=None
    )


def test_zero_noise_limit_recovers_the_regression_surface():
    leads = np.arange(1, 73)
    x = np.full(72, 300.0)
    draws = _point_mass_draws(leads, np.full(72, 1.5), np.full(72, 0.8), np.full(72, 1e8))
    case = _target_case(x, np.ones(72))
    part = partition_lead_times(case)
    traj = predict_trajectory(draws, case, part, np.zeros(72), 200, np.random.default_rng(4))
    expected = np.exp(1.5 + 0.8 * np.log(300.0))
    assert np.all(np.abs(traj.samples / expected - 1.0) < 1e-3)
    assert np.all(traj.samples > 0)


def test_lognormal_mean_identity_at_point_mass():
    leads = np.arange(1, 73)
    sigma2 = 1.0 / 4.0
    draws = _point_mass_draws(leads, np.full(72, 1.0), np.full(72, 1.0), np.full(72, 4.0))
    case = _target_case(np.full(72, 50.0), np.ones(72))
    part = partition_lead_times(case)
    traj = predict_trajectory(draws, case, part, np.zeros(72), 40_000, np.random.default_rng(5))
    expected = np.exp(1.0 + np.log(50.0) + sigma2 / 2.0)
    assert abs(traj.samples[:, 0].mean() / expected - 1.0) < 0.05


def test_t_zero_columns_are_constant_fallbacks():
    leads = np.arange(1, 73)
    x = np.full(72, 300.0)
    x[:10] = 0.0  # leads 1..10 deterministic
    fallbacks = np.arange(72.0)
    draws = _point_mass_draws(leads, np.zeros(72), np.ones(72), np.ones(72))
    case = _target_case(x, np.ones(72))
    part = partition_lead_times(case)
    traj = predict_trajectory(draws, case, part, fallbacks, 50, np.random.default_rng(6))
    for t in range(10):
        assert np.all(traj.samples[:, t] == fallbacks[t])
        assert traj.t_zero_values[t] == fallbacks[t]
    assert np.all(np.isnan(traj.t_zero_values[10:]))


def test_regression_data_uses_only_modeled_positive_rows():
    x = np.ones(72) * 10.0
    y_lag = np.ones(72)
    y = np.ones(72) * 5.0
    y[3] = 0.0  # zero outcome must be excluded from the log regression
    case = ForecastCase(
        issue_time=pd.Timestamp("2021-06-01"), x=x, y_lag=y_lag, y_obs=y
    )
    data = build_regression_data([case])
    assert 4 not in set(np.asarray(data.lead_times)[data.case_active[0]])
