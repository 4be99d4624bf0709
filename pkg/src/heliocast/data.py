"""Ingestion and preprocessing of irradiance forecasts and production data.

Raw inputs are 3-hourly accumulated GHI ensemble forecasts on a grid and an
hourly regional production series.  Preprocessing reduces the ensemble to its
mean, averages in space over the in-region grid cells, and interpolates the
accumulated series to hourly interval-mean irradiance, clamped at zero.  Each
forecast issue date then becomes a :class:`ForecastCase` carrying covariates,
lagged production, realized production, and the active/fallback partition of
lead times.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

import numpy as np
import pandas as pd
from scipy.interpolate import PchipInterpolator

from .errors import DataError, InputError

N_LEADS = 72
BLOCK_HOURS = 3
N_BLOCKS = N_LEADS // BLOCK_HOURS


@dataclass(frozen=True)
class GridForecastSeries:
    """Raw accumulated-GHI forecast of one issue time.

    ``member_values`` has shape (members, cells, steps) holding GHI
    accumulated since initialization (Wh/m^2) at 3-hourly steps.
    """

    issue_time: datetime
    member_values: np.ndarray
    cells: np.ndarray
    steps: np.ndarray

    def __post_init__(self):
        if self.member_values.ndim != 3:
            raise InputError("member_values must be (members, cells, steps)")
        if np.any(self.member_values < 0):
            raise InputError("accumulated GHI must be non-negative")
        if np.any(np.diff(self.member_values, axis=2) < -1e-9):
            raise InputError("accumulated GHI must be non-decreasing in lead time")


@dataclass(frozen=True)
class ProductionSeries:
    """Hourly regional PV production (MW) at strictly increasing times."""

    times: np.ndarray  # datetime64[h] or array of datetimes
    values: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise InputError("times and values must align")
        if np.any(np.asarray(self.values) < 0):
            raise InputError("production must be non-negative")
        t = pd.DatetimeIndex(self.times)
        if len(t) > 1 and not ((t[1:] - t[:-1]) == pd.Timedelta(hours=1)).all():
            raise InputError("production series must be hourly with no gaps")


@dataclass(frozen=True)
class ForecastCase:
    """One issue date: hourly covariates, lags, and (for training) outcomes."""

    issue_time: datetime
    x: np.ndarray  # (72,) hourly interval-mean GHI forecast, W/m^2
    y_lag: np.ndarray  # (72,) most recent observed production at each valid hour
    y_obs: np.ndarray | None = None  # (72,) realized production, NaN if unknown

    def __post_init__(self):
        for name in ("x", "y_lag"):
            v = getattr(self, name)
            if v.shape != (N_LEADS,):
                raise InputError(f"{name} must have exactly {N_LEADS} entries")
            if np.any(v < 0):
                raise InputError(f"{name} must be non-negative")


@dataclass(frozen=True)
class LeadTimePartition:
    """Modeled lead times (t_plus) and deterministic-fallback ones (t_zero)."""

    t_plus: np.ndarray  # 1-based lead hours, increasing
    t_zero: np.ndarray

    def __post_init__(self):
        both = np.sort(np.concatenate([self.t_plus, self.t_zero]))
        if not np.array_equal(both, np.arange(1, N_LEADS + 1)):
            raise InputError("partition must cover lead times 1..72 exactly once")


def ensemble_mean(series: GridForecastSeries) -> np.ndarray:
    """Pointwise mean over ensemble members, shape (cells, steps)."""
    if series.member_values.shape[0] == 0:
        raise InputError("forecast has no ensemble members")
    return series.member_values.mean(axis=0)


def spatial_average(cell_values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Mean over in-region cells; works on (cells,) or (cells, steps)."""
    mask = np.asarray(mask, dtype=bool)
    cell_values = np.asarray(cell_values, dtype=float)
    if mask.shape[0] != cell_values.shape[0]:
        raise InputError("mask length must match the number of cells")
    if not mask.any():
        raise InputError("region mask selects no cells")
    return cell_values[mask].mean(axis=0)


def interpolate_hourly(accumulated: np.ndarray) -> np.ndarray:
    """Hourly interval-mean GHI from 3-hourly accumulated values.

    De-accumulates to block-mean rates, fits a shape-preserving (monotone
    limited) cubic through the rates at block midpoints, evaluates it at
    hourly midpoints and clamps negatives to zero.
    """
    acc = np.asarray(accumulated, dtype=float)
    if acc.shape != (N_BLOCKS,):
        raise InputError(f"expected {N_BLOCKS} accumulated values, got {acc.shape}")
    full = np.concatenate([[0.0], acc])
    if np.any(np.diff(full) < -1e-9):
        raise InputError("accumulated GHI must be non-decreasing")
    rates = np.diff(full) / BLOCK_HOURS
    if np.allclose(rates, rates[0]):
        return np.full(N_LEADS, max(rates[0], 0.0))
    knots = np.arange(N_BLOCKS) * BLOCK_HOURS + BLOCK_HOURS / 2.0
    hourly_mid = np.arange(N_LEADS) + 0.5
    hourly = PchipInterpolator(knots, rates, extrapolate=True)(hourly_mid)
    return np.maximum(hourly, 0.0)


def latest_observed_lag(production: ProductionSeries, issue_time: datetime) -> np.ndarray:
    """Most recent observation before issue time matching each lead's UTC hour.

    The replication identity y_lag[t] = y_lag[t+24] = y_lag[t+48] follows from
    matching on hour of day only.
    """
    times = pd.DatetimeIndex(production.times)
    issue = pd.Timestamp(issue_time)
    before = times < issue
    if before.sum() < 24:
        raise DataError(
            f"need at least 24 h of production history before {issue}, have {before.sum()}"
        )
    hist_times = times[before]
    hist_values = np.asarray(production.values)[before]
    by_hour = {}
    for t, v in zip(hist_times, hist_values):  # later entries overwrite earlier
        by_hour[t.hour] = v
    y_lag = np.empty(N_LEADS)
    for lead in range(1, N_LEADS + 1):
        hour = (issue + pd.Timedelta(hours=lead)).hour
        y_lag[lead - 1] = by_hour[hour]
    return y_lag


def partition_lead_times(case: ForecastCase) -> LeadTimePartition:
    """t_plus holds lead times with both positive lag and positive covariate."""
    leads = np.arange(1, N_LEADS + 1)
    plus = (case.y_lag > 0) & (case.x > 0)
    return LeadTimePartition(t_plus=leads[plus], t_zero=leads[~plus])


def assemble_window(cases: dict, target_date, window_days: int) -> list[ForecastCase]:
    """The ``window_days`` cases on consecutive days strictly before target.

    ``cases`` maps dates to ForecastCases with realized observations.
    """
    if window_days < 1:
        raise InputError("window_days must be at least 1")
    target = pd.Timestamp(target_date).normalize()
    window = []
    missing = []
    for back in range(window_days, 0, -1):
        day = target - pd.Timedelta(days=back)
        case = cases.get(day)
        if case is None or case.y_obs is None:
            missing.append(str(day.date()))
        else:
            window.append(case)
    if missing:
        raise DataError(
            f"training window before {target.date()} is missing dates: {', '.join(missing)}"
        )
    return window


# ---------------------------------------------------------------------------
# CSV interfaces


def load_forecasts(path) -> dict:
    """forecasts.csv -> {issue_time: GridForecastSeries}.

    Columns: issue_time (ISO-8601), member, cell, lead_h, ghi_accum.
    """
    df = pd.read_csv(path, parse_dates=["issue_time"])
    required = {"issue_time", "member", "cell", "lead_h", "ghi_accum"}
    if not required.issubset(df.columns):
        raise DataError(f"forecasts file lacks columns {sorted(required - set(df.columns))}")
    out = {}
    for issue, grp in df.groupby("issue_time"):
        members = np.sort(grp["member"].unique())
        cells = np.sort(grp["cell"].unique())
        steps = np.sort(grp["lead_h"].unique())
        cube = (
            grp.set_index(["member", "cell", "lead_h"])["ghi_accum"]
            .sort_index()
            .to_numpy()
            .reshape(len(members), len(cells), len(steps))
        )
        out[pd.Timestamp(issue).to_pydatetime()] = GridForecastSeries(
            issue_time=pd.Timestamp(issue).to_pydatetime(),
            member_values=cube,
            cells=cells,
            steps=steps,
        )
    return out


def load_production(path) -> ProductionSeries:
    """production.csv (time, mw) -> ProductionSeries."""
    df = pd.read_csv(path, parse_dates=["time"])
    if not {"time", "mw"}.issubset(df.columns):
        raise DataError("production file must have columns time, mw")
    df = df.sort_values("time")
    return ProductionSeries(times=df["time"].to_numpy(), values=df["mw"].to_numpy(float))


def load_mask(path) -> np.ndarray:
    """mask.csv (cell, in_region) -> boolean mask ordered by cell id."""
    df = pd.read_csv(path)
    if not {"cell", "in_region"}.issubset(df.columns):
        raise DataError("mask file must have columns cell, in_region")
    return df.sort_values("cell")["in_region"].to_numpy(int).astype(bool)


def hourly_covariates(series: GridForecastSeries, mask: np.ndarray) -> np.ndarray:
    """Full preprocessing of one raw forecast: ensemble mean, spatial mean,
    hourly interpolation."""
    per_cell = ensemble_mean(series)
    regional = spatial_average(per_cell, mask)
    return interpolate_hourly(regional)


def build_cases(
    forecasts: dict, production: ProductionSeries, mask: np.ndarray
) -> dict:
    """Assemble dated ForecastCases from raw inputs, keyed by issue date."""
    prod_index = pd.DatetimeIndex(production.times)
    prod_values = np.asarray(production.values, dtype=float)
    lookup = dict(zip(prod_index, prod_values))
    cases = {}
    for issue, series in sorted(forecasts.items()):
        issue_ts = pd.Timestamp(issue)
        try:
            x = hourly_covariates(series, mask)
            y_lag = latest_observed_lag(production, issue_ts)
        except DataError:
            continue  # not enough history yet
        valid = [issue_ts + pd.Timedelta(hours=h) for h in range(1, N_LEADS + 1)]
        y_obs = np.array([lookup.get(v, np.nan) for v in valid])
        cases[issue_ts.normalize()] = ForecastCase(
            issue_time=issue_ts.to_pydatetime(),
            x=x,
            y_lag=y_lag,
            y_obs=y_obs,
        )
    return cases
