"""Forecast verification: proper scores, calibration diagnostics, intervals.

Marginal quality is assessed with the sample CRPS (unbiased pairwise form),
MAE of the predictive median, RMSE of the predictive mean, randomized PIT
values and central prediction intervals.  Joint trajectory quality is
assessed with band-depth rank histograms and with scores of path-derived
scalars (72-hour total and maximum).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import kernels
from .errors import InputError

DAY_BLOCKS = {"day1": (1, 24), "day2": (25, 48), "day3": (49, 72)}


@dataclass(frozen=True)
class HistogramBins:
    """Counts over equal-width bins plus the flat-reference level."""

    edges: np.ndarray
    counts: np.ndarray

    @property
    def reference(self) -> float:
        return float(self.counts.sum()) / len(self.counts)


def crps_sample(ensemble: np.ndarray, obs: float) -> float:
    """Unbiased-form sample CRPS: mean|X - y| - 1/2 * mean_{i!=j}|X_i - X_j|."""
    x = np.asarray(ensemble, dtype=float)
    if x.size == 0:
        raise InputError("CRPS needs a non-empty ensemble")
    return float(np.mean(np.abs(x - obs)) - 0.5 * kernels.mean_pairwise_abs(x))


def crps_gaussian(mu: float, sigma: float, obs: float) -> float:
    """Closed-form CRPS of a normal forecast."""
    if sigma <= 0:
        raise InputError("sigma must be positive")
    z = (obs - mu) / sigma
    return float(
        sigma * (z * (2.0 * stats.norm.cdf(z) - 1.0) + 2.0 * stats.norm.pdf(z) - 1.0 / np.sqrt(np.pi))
    )


def point_scores(ensembles: np.ndarray, observations: np.ndarray) -> tuple[float, float]:
    """(MAE of predictive medians, RMSE of predictive means)."""
    ens = np.asarray(ensembles, dtype=float)
    obs = np.asarray(observations, dtype=float)
    if ens.ndim != 2 or ens.shape[0] != obs.shape[0]:
        raise InputError("ensembles must be (cases, members) aligned with observations")
    mae = float(np.mean(np.abs(np.median(ens, axis=1) - obs)))
    rmse = float(np.sqrt(np.mean((ens.mean(axis=1) - obs) ** 2)))
    return mae, rmse


def pit(ensemble: np.ndarray, obs: float, rng) -> float:
    """Randomized PIT: uniform between the left and right empirical CDF limits
    at the observation, which keeps the value uniform at discrete atoms."""
    x = np.asarray(ensemble, dtype=float)
    if x.size == 0:
        raise InputError("PIT needs a non-empty ensemble")
    m = x.size
    left = np.count_nonzero(x < obs) / m
    right = np.count_nonzero(x <= obs) / m
    if right > left:
        return float(left + rng.random() * (right - left))
    return float(left)


def interval_score(ensemble: np.ndarray, obs: float, level: float = 0.8) -> tuple[float, bool]:
    """Width of the central ``level`` interval and whether it covers obs."""
    if not 0.0 < level < 1.0:
        raise InputError("level must be inside (0, 1)")
    x = np.asarray(ensemble, dtype=float)
    lo, hi = np.quantile(x, [(1.0 - level) / 2.0, (1.0 + level) / 2.0])
    return float(hi - lo), bool(lo <= obs <= hi)


def band_depth_rank(obs_curve: np.ndarray, ensemble_curves: np.ndarray, rng) -> int:
    """Rank (1..m+1) of the observation's modified band depth in the pooled
    set of observation plus ensemble members, ties broken uniformly."""
    obs_curve = np.asarray(obs_curve, dtype=float)
    curves = np.asarray(ensemble_curves, dtype=float)
    if curves.ndim != 2 or curves.shape[0] < 2:
        raise InputError("need at least two ensemble curves")
    if curves.shape[1] != obs_curve.shape[0]:
        raise InputError("observation and ensemble dimensions differ")
    pooled = np.vstack([obs_curve[None, :], curves])
    depth = kernels.band_depth(pooled)
    d_obs = depth[0]
    less = np.count_nonzero(depth < d_obs)
    ties = np.count_nonzero(depth == d_obs)  # includes the observation itself
    return int(less + 1 + rng.integers(0, ties))


def aggregate_scores(
    trajectories: np.ndarray, observations: np.ndarray, statistic: str
) -> dict:
    """Scores of the per-path sum or max against the realized path statistic."""
    traj = np.asarray(trajectories, dtype=float)
    obs = np.asarray(observations, dtype=float)
    if traj.ndim != 2 or traj.shape[1] != obs.shape[0]:
        raise InputError("trajectories must be (m, horizon) matching observations")
    if np.any(~np.isfinite(traj)) or np.any(~np.isfinite(obs)):
        raise InputError("incomplete trajectory or observation path")
    if statistic == "sum":
        reduced, target = traj.sum(axis=1), float(obs.sum())
    elif statistic == "max":
        reduced, target = traj.max(axis=1), float(obs.max())
    else:
        raise InputError(f"unknown statistic {statistic!r}")
    mae = float(np.abs(np.median(reduced) - target))
    rmse = float(np.abs(reduced.mean() - target))
    return {
        "mae": mae,
        "rmse": rmse,
        "crps": crps_sample(reduced, target),
    }


def make_histogram(values: np.ndarray, n_bins: int, value_range=None) -> HistogramBins:
    """Equal-width histogram preserving the total count."""
    values = np.asarray(values, dtype=float)
    if n_bins < 1:
        raise InputError("need at least one bin")
    counts, edges = np.histogram(values, bins=n_bins, range=value_range)
    return HistogramBins(edges=edges, counts=counts)
