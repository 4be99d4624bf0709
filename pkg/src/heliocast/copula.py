"""Gaussian copula post-processing of marginal trajectory samples.

Marginally calibrated samples lose temporal dependence when drawn lead time
by lead time.  A rolling archive of normal scores (standard-normal quantiles
of realized PIT values) yields an empirical 72x72 correlation matrix; joint
Gaussian draws with that correlation provide rank templates used to reorder
each lead time's marginal samples, which restores dependence while leaving
every marginal distribution exactly unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .data import N_LEADS
from .errors import InputError

PIT_CLAMP = 1e-6
EIGEN_FLOOR = 1e-6


@dataclass
class ResidualArchive:
    """Rolling per-date normal scores; NaN marks lead times without a PIT."""

    window_days: int
    dates: list = field(default_factory=list)
    z: np.ndarray = field(default_factory=lambda: np.empty((0, N_LEADS)))

    def append(self, date, z_row: np.ndarray) -> None:
        row = np.asarray(z_row, dtype=float).reshape(1, N_LEADS)
        self.z = np.vstack([self.z, row])
        self.dates.append(date)
        if len(self.dates) > self.window_days:
            drop = len(self.dates) - self.window_days
            self.dates = self.dates[drop:]
            self.z = self.z[drop:]

    def __len__(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class CopulaCorrelation:
    """PSD-repaired correlation with a per-lead validity mask."""

    matrix: np.ndarray  # (72, 72)
    valid: np.ndarray  # (72,) bool


def normal_scores(pit_values: np.ndarray) -> np.ndarray:
    """Standard-normal quantiles of PITs clamped away from 0 and 1."""
    p = np.asarray(pit_values, dtype=float)
    finite = p[np.isfinite(p)]
    if np.any((finite < 0) | (finite > 1)):
        raise InputError("PIT values must lie in [0, 1]")
    clamped = np.clip(p, PIT_CLAMP, 1.0 - PIT_CLAMP)
    return stats.norm.ppf(clamped)


def _psd_repair(corr: np.ndarray) -> np.ndarray:
    """Clip eigenvalues at a small floor and restore the unit diagonal."""
    sym = (corr + corr.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    fixed = (vecs * np.maximum(vals, EIGEN_FLOOR)) @ vecs.T
    d = np.sqrt(np.diag(fixed))
    fixed = fixed / np.outer(d, d)
    np.fill_diagonal(fixed, 1.0)
    return fixed


def estimate_correlation(
    archive: ResidualArchive, structure: str = "full", min_pairs: int = 10
) -> CopulaCorrelation:
    """Pairwise-complete empirical correlation of archived normal scores.

    Entries backed by fewer than ``min_pairs`` joint observations fall back to
    independence; ``ar1-band`` tapers everything beyond lag one to zero.  The
    result is always repaired to positive semi-definiteness.
    """
    if structure not in ("full", "ar1-band"):
        raise InputError(f"unknown copula structure {structure!r}")
    Z = archive.z
    present = np.isfinite(Z)
    X = np.where(present, Z, 0.0)
    m = present.astype(float)
    n_joint = m.T @ m
    sx = X.T @ m  # sum of x_i over rows where j is present
    sxx = (X * X).T @ m
    sxy = X.T @ X
    with np.errstate(invalid="ignore", divide="ignore"):
        mean_x = sx / n_joint
        mean_y = mean_x.T
        cov = sxy / n_joint - mean_x * mean_y
        var_x = sxx / n_joint - mean_x**2
        var_y = var_x.T
        corr = cov / np.sqrt(var_x * var_y)
    corr = np.clip(np.nan_to_num(corr, nan=0.0), -1.0, 1.0)
    corr[n_joint < min_pairs] = 0.0
    if structure == "ar1-band":
        lag = np.abs(np.subtract.outer(np.arange(N_LEADS), np.arange(N_LEADS)))
        corr[lag > 1] = 0.0
    np.fill_diagonal(corr, 1.0)
    valid = np.diag(n_joint) >= min_pairs
    return CopulaCorrelation(matrix=_psd_repair(corr), valid=valid)


def couple_samples(
    marginal_samples: np.ndarray, correlation: CopulaCorrelation, rng
) -> np.ndarray:
    """Reorder each lead time's samples to follow the ranks of joint Gaussian
    draws with the estimated correlation.

    Every column of the output is a permutation of the same column of the
    input; constant columns (deterministic fallbacks) and lead times without
    a valid correlation estimate pass through untouched.
    """
    samples = np.asarray(marginal_samples, dtype=float)
    if samples.ndim != 2 or samples.shape[0] < 2:
        raise InputError("need an (m, leads) sample matrix with m >= 2")
    m, n_leads = samples.shape
    if correlation.matrix.shape != (n_leads, n_leads):
        raise InputError("correlation shape does not match the samples")
    varying = samples.min(axis=0) < samples.max(axis=0)
    active = np.nonzero(correlation.valid & varying)[0]
    out = samples.copy()
    if len(active) == 0:
        return out
    sub = correlation.matrix[np.ix_(active, active)]
    try:
        L = np.linalg.cholesky(sub)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("correlation matrix is not PSD; repair it upstream") from exc
    Z = rng.standard_normal((m, len(active))) @ L.T
    ranks = np.argsort(np.argsort(Z, axis=0, kind="stable"), axis=0, kind="stable")
    for k, col in enumerate(active):
        out[:, col] = np.sort(samples[:, col], kind="stable")[ranks[:, k]]
    return out
