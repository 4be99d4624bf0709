"""Synthetic forecast and production generator with known ground truth.

Real irradiance forecasts and exchange production data are proprietary, so
verification runs against a generator that instantiates the regression model
with known parameters: a seasonal clear-sky curve modulated by a slowly
varying lognormal cloud factor gives an hourly "actual" irradiance; each
issue date sees it through independent lognormal forecast noise; production
follows the log-linear regression on the covariate the ingestion pipeline
itself recovers from the written files, with AR(1) log-scale residuals.

The generator writes the exact CSV formats consumed by the data pipeline so
end-to-end runs exercise parsing, preprocessing and the T+/T0 partition.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .data import BLOCK_HOURS, N_BLOCKS, N_LEADS, GridForecastSeries, ensemble_mean, interpolate_hourly, spatial_average
from .errors import InputError
from .util import substream

# Factors are exactly representable in binary and average to exactly 1, so the
# ensemble/spatial reduction recovers the base accumulation bit for bit.
MEMBER_FACTORS = (0.75, 1.25)
CELL_FACTORS_IN = (0.75, 1.0, 1.0, 1.25)
CELL_FACTOR_OUT = 1.5


@dataclass(frozen=True)
class TruthConfig:
    """Ground-truth parameters of the generating model."""

    beta0: np.ndarray = field(default_factory=lambda: np.zeros(N_LEADS))
    beta1: np.ndarray = field(default_factory=lambda: np.ones(N_LEADS))
    resid_phi: float = 0.3  # hourly AR(1) coefficient of log residuals
    resid_sigma: float = 0.577  # marginal sd of log residuals
    daylight_mean: float = 13.4  # mean daylight length, hours
    daylight_amp: float = 3.5  # seasonal half-swing of daylight length
    clearsky_mean: float = 500.0  # W/m^2 at noon, annual mean
    clearsky_amp: float = 250.0
    cloud_sigma: float = 0.4  # lognormal cloud-factor scale
    cloud_phi: float = 0.98  # hourly AR(1) of the cloud factor
    forecast_sigma: float = 0.15  # per-issue lognormal forecast noise
    actual_sigma: float = 0.05  # extra noise between forecast and driver
    beta0_drift: float = 0.0  # seasonal sine amplitude added to beta0
    start_doy: int = 1  # day of year of the first simulated day

    def __post_init__(self):
        if self.beta0.shape != (N_LEADS,) or self.beta1.shape != (N_LEADS,):
            raise InputError("beta0/beta1 must have one entry per lead time")
        if not 0 <= self.resid_phi < 1:
            raise InputError("resid_phi must lie in [0, 1)")
        if self.resid_sigma <= 0:
            raise InputError("resid_sigma must be positive")


def default_truth(**overrides) -> TruthConfig:
    """Truth with a mild hour-of-day shape on the coefficients."""
    hours = np.arange(1, N_LEADS + 1) % 24
    beta0 = 2.0 + 0.3 * np.sin(2 * np.pi * hours / 24.0)
    beta1 = 1.0 + 0.05 * np.cos(2 * np.pi * hours / 24.0)
    return TruthConfig(beta0=beta0, beta1=beta1, **overrides)


def residual_precision(cfg: TruthConfig, n: int) -> np.ndarray:
    """Tridiagonal precision of n consecutive hourly residuals."""
    phi, sig = cfg.resid_phi, cfg.resid_sigma
    innov = sig**2 * (1.0 - phi**2)
    K = np.zeros((n, n))
    np.fill_diagonal(K, (1.0 + phi**2) / innov)
    if n > 0:
        K[0, 0] = K[n - 1, n - 1] = 1.0 / innov
    for i in range(n - 1):
        K[i, i + 1] = K[i + 1, i] = -phi / innov
    return K


def _daylight(cfg: TruthConfig, day_of_year: np.ndarray):
    """(sunrise, sunset) as fractional hours for each day of year."""
    season = np.cos(2 * np.pi * (day_of_year - 172) / 365.25)
    length = cfg.daylight_mean + cfg.daylight_amp * season
    return 12.0 - length / 2.0, 12.0 + length / 2.0


def clear_sky(cfg: TruthConfig, day_of_year: np.ndarray, hour: np.ndarray) -> np.ndarray:
    """Deterministic diurnal irradiance shape, exactly zero outside daylight."""
    day_of_year = np.asarray(day_of_year, dtype=float)
    hour = np.asarray(hour, dtype=float)
    rise, fall = _daylight(cfg, day_of_year)
    amp = cfg.clearsky_mean + cfg.clearsky_amp * np.cos(2 * np.pi * (day_of_year - 172) / 365.25)
    frac = (hour - rise) / (fall - rise)
    inside = (frac > 0) & (frac < 1)
    return np.where(inside, amp * np.sin(np.pi * np.clip(frac, 0, 1)), 0.0)


def _actual_ghi(cfg: TruthConfig, n_hours: int, rng) -> np.ndarray:
    """Hourly irradiance: clear-sky shape times a slowly moving cloud factor."""
    u = np.empty(n_hours)
    u[0] = rng.standard_normal()
    innov = np.sqrt(1.0 - cfg.cloud_phi**2) * rng.standard_normal(n_hours - 1)
    for v in range(1, n_hours):
        u[v] = cfg.cloud_phi * u[v - 1] + innov[v - 1]
    cloud = np.exp(cfg.cloud_sigma * u - cfg.cloud_sigma**2 / 2.0)
    hours_abs = np.arange(1, n_hours + 1)
    doy = cfg.start_doy + (hours_abs - 1) // 24
    hod = hours_abs % 24
    return clear_sky(cfg, doy, hod) * cloud


def simulate_ghi(days: int, cfg: TruthConfig, rng) -> np.ndarray:
    """Per-issue-date 72-hour hourly GHI forecast rates, shape (days, 72)."""
    if days < 1:
        raise InputError("days must be at least 1")
    actual = _actual_ghi(cfg, days * 24 + 48, rng)
    forecasts = np.empty((days, N_LEADS))
    for d in range(days):
        noise = np.exp(
            cfg.forecast_sigma * rng.standard_normal(N_LEADS) - cfg.forecast_sigma**2 / 2.0
        )
        forecasts[d] = actual[d * 24: d * 24 + N_LEADS] * noise
    return forecasts


def simulate_production(ghi_hourly: np.ndarray, cfg: TruthConfig, rng) -> np.ndarray:
    """Hourly production from the regression truth with AR(1) log residuals.

    ``ghi_hourly`` is the covariate driving each hour (index v corresponds to
    lead hour v % 24 of its day); hours with zero irradiance produce exactly
    zero.
    """
    ghi = np.asarray(ghi_hourly, dtype=float)
    if np.any(ghi < 0):
        raise InputError("ghi must be non-negative")
    n = len(ghi)
    eps = np.empty(n)
    eps[0] = cfg.resid_sigma * rng.standard_normal()
    innov = cfg.resid_sigma * np.sqrt(1.0 - cfg.resid_phi**2) * rng.standard_normal(n - 1)
    for v in range(1, n):
        eps[v] = cfg.resid_phi * eps[v - 1] + innov[v - 1]
    hours_abs = np.arange(1, n + 1)
    lead = (hours_abs - 1) % 24  # index into the first day-block of beta
    day = (hours_abs - 1) // 24
    drift = cfg.beta0_drift * np.sin(2 * np.pi * day / 365.25)
    out = np.zeros(n)
    pos = ghi > 0
    xi = cfg.actual_sigma * rng.standard_normal(n)
    out[pos] = np.exp(
        cfg.beta0[lead[pos]]
        + drift[pos]
        + cfg.beta1[lead[pos]] * (np.log(ghi[pos]) + xi[pos])
        + eps[pos]
    )
    return out


def _accumulate(rates: np.ndarray) -> np.ndarray:
    """3-hourly accumulated GHI (Wh/m^2) from 72 hourly interval means."""
    return np.cumsum(rates.reshape(N_BLOCKS, BLOCK_HOURS).sum(axis=1))


def generate(days: int, seed: int, cfg: TruthConfig | None = None):
    """Full synthetic dataset.

    Returns (issue_times, accum (days, 24), xhat (days, 72), production (days*24,),
    prod_times).  Production at hour v of day d is driven by the covariate the
    ingestion pipeline recovers for that day's lead v, so the fitted model is
    correctly specified by construction.
    """
    cfg = cfg or default_truth()
    forecasts = simulate_ghi(days, cfg, substream(seed, "ghi"))
    accum = np.array([_accumulate(forecasts[d]) for d in range(days)])
    mask = np.array([f != CELL_FACTOR_OUT for f in _cell_factors()])
    xhat = np.empty((days, N_LEADS))
    for d in range(days):
        cube = _member_cell_cube(accum[d])
        series = GridForecastSeries(
            issue_time=None, member_values=cube, cells=np.arange(cube.shape[1]), steps=_steps()
        )
        xhat[d] = interpolate_hourly(spatial_average(ensemble_mean(series), mask))
    driver = np.concatenate([xhat[d, :24] for d in range(days)])
    production = simulate_production(driver, cfg, substream(seed, "production"))
    # Hourly interpolation smears positive covariate values into the dark
    # shoulder hours; the plant itself still produces nothing there.
    hours_abs = np.arange(1, days * 24 + 1)
    doy = cfg.start_doy + (hours_abs - 1) // 24
    dark = clear_sky(cfg, doy, hours_abs % 24) == 0.0
    production[dark] = 0.0
    start = pd.Timestamp("2021-01-01 00:00:00")
    issue_times = [start + pd.Timedelta(days=d) for d in range(days)]
    prod_times = [start + pd.Timedelta(hours=h) for h in range(1, days * 24 + 1)]
    return issue_times, accum, xhat, production, prod_times


def _steps() -> np.ndarray:
    return np.arange(1, N_BLOCKS + 1) * BLOCK_HOURS


def _cell_factors() -> list[float]:
    return list(CELL_FACTORS_IN) + [CELL_FACTOR_OUT]


def _member_cell_cube(accum_row: np.ndarray) -> np.ndarray:
    factors = np.array(_cell_factors())
    cube = np.empty((len(MEMBER_FACTORS), len(factors), N_BLOCKS))
    for mi, mf in enumerate(MEMBER_FACTORS):
        cube[mi] = np.outer(factors * mf, accum_row)
    return cube


def write_dataset(out_dir: str, days: int, seed: int, cfg: TruthConfig | None = None) -> None:
    """Emit forecasts.csv, production.csv, mask.csv and truth.csv."""
    cfg = cfg or default_truth()
    os.makedirs(out_dir, exist_ok=True)
    issue_times, accum, _, production, prod_times = generate(days, seed, cfg)

    rows = []
    steps = _steps()
    factors = _cell_factors()
    for d, issue in enumerate(issue_times):
        iso = issue.isoformat()
        for mi, mf in enumerate(MEMBER_FACTORS):
            for ci, cf in enumerate(factors):
                vals = accum[d] * (cf * mf)
                for si, lead in enumerate(steps):
                    rows.append((iso, mi, ci, int(lead), vals[si]))
    pd.DataFrame(
        rows, columns=["issue_time", "member", "cell", "lead_h", "ghi_accum"]
    ).to_csv(os.path.join(out_dir, "forecasts.csv"), index=False)

    pd.DataFrame(
        {"time": [t.isoformat() for t in prod_times], "mw": production}
    ).to_csv(os.path.join(out_dir, "production.csv"), index=False)

    pd.DataFrame(
        {"cell": range(len(factors)), "in_region": [int(f != CELL_FACTOR_OUT) for f in factors]}
    ).to_csv(os.path.join(out_dir, "mask.csv"), index=False)

    truth_rows = [("beta0", t + 1, cfg.beta0[t]) for t in range(N_LEADS)]
    truth_rows += [("beta1", t + 1, cfg.beta1[t]) for t in range(N_LEADS)]
    truth_rows += [
        ("resid_phi", 0, cfg.resid_phi),
        ("resid_sigma", 0, cfg.resid_sigma),
        ("forecast_sigma", 0, cfg.forecast_sigma),
        ("actual_sigma", 0, cfg.actual_sigma),
        ("beta0_drift", 0, cfg.beta0_drift),
    ]
    pd.DataFrame(truth_rows, columns=["parameter", "lead_h", "value"]).to_csv(
        os.path.join(out_dir, "truth.csv"), index=False
    )
