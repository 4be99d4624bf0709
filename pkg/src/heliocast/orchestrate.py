"""End-to-end forecast runs: rolling fit, predict, couple, verify, report.

For every forecast date the orchestrator assembles the rolling training
window, fits the regression by Gibbs sampling, draws predictive trajectories,
optionally restores temporal dependence through the Gaussian copula whose
correlation comes from a longer rolling archive of normal scores, and scores
the result against realized production.  All randomness derives from one root
seed through labelled substreams, so identical configurations reproduce
identical outputs byte for byte.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from . import bayes, copula, data, verification
from .errors import DataError, InputError
from .util import substream

DEFAULT_PIT_BINS = 20


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one forecast run."""

    data_dir: str = "."
    out_dir: str = "out"
    model: str = "indep"
    window_days: int = 20
    copula_window_days: int = 100
    gibbs_iters: int = 2000
    gibbs_burn: int = 500
    samples: int = 1000
    copula_on: bool = True
    copula_structure: str = "full"
    seed: int = 0
    start_date: str | None = None
    end_date: str | None = None
    write_trajectories: bool = True
    sweep_windows: tuple = ()

    def __post_init__(self):
        if self.window_days < 1:
            raise InputError("window_days must be >= 1")
        if self.copula_window_days < 1:
            raise InputError("copula_window_days must be >= 1")
        if not self.gibbs_iters > self.gibbs_burn >= 0:
            raise InputError("gibbs_iters must exceed gibbs_burn, and gibbs_burn must be >= 0")
        if self.samples < 1 or (self.copula_on and self.samples < 2):
            raise InputError("samples must be >= 1, and >= 2 when the copula is on")
        if self.copula_structure not in ("full", "ar1"):
            raise InputError("copula_structure must be 'full' or 'ar1'")
        bayes.ModelVariant.from_name(self.model)
        if any(w < 1 for w in self.sweep_windows):
            raise InputError("sweep windows must be >= 1")


def load_config(path: str) -> dict:
    """Flat key=value configuration file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key] = value
    return out


_BOOL_KEYS = {"copula_on", "write_trajectories"}
_INT_KEYS = {
    "window_days",
    "copula_window_days",
    "gibbs_iters",
    "gibbs_burn",
    "samples",
    "seed",
}


def config_from_mapping(mapping: dict) -> RunConfig:
    kwargs = {}
    valid = set(RunConfig.__dataclass_fields__)
    for key, value in mapping.items():
        if key not in valid:
            raise InputError(f"unknown config key {key!r}")
        if key in _BOOL_KEYS:
            if str(value).lower() not in ("true", "false", "0", "1", "on", "off"):
                raise InputError(f"config key {key} must be boolean, got {value!r}")
            kwargs[key] = str(value).lower() in ("true", "1", "on")
        elif key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError as exc:
                raise InputError(f"config key {key} must be an integer, got {value!r}") from exc
        elif key == "sweep_windows":
            if isinstance(value, str):
                kwargs[key] = tuple(int(w) for w in value.split(",") if w.strip())
            else:
                kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return RunConfig(**kwargs)


def _load_cases(cfg: RunConfig) -> dict:
    fpath = os.path.join(cfg.data_dir, "forecasts.csv")
    ppath = os.path.join(cfg.data_dir, "production.csv")
    mpath = os.path.join(cfg.data_dir, "mask.csv")
    for path in (fpath, ppath, mpath):
        if not os.path.exists(path):
            raise DataError(f"missing input file {path}")
    forecasts = data.load_forecasts(fpath)
    production = data.load_production(ppath)
    mask = data.load_mask(mpath)
    return data.build_cases(forecasts, production, mask)


def _date_range(cases: dict, cfg: RunConfig):
    dates = sorted(cases)
    if not dates:
        raise DataError("no usable forecast cases in the input data")
    start = pd.Timestamp(cfg.start_date).normalize() if cfg.start_date else dates[0]
    end = pd.Timestamp(cfg.end_date).normalize() if cfg.end_date else dates[-1]
    eval_dates = [d for d in dates if start <= d <= end]
    if not eval_dates:
        raise DataError(f"no forecast cases between {start.date()} and {end.date()}")
    warmup = []
    if cfg.copula_on:
        present = set(dates)
        warmup = [
            d
            for d in dates
            if d < start
            and (start - d).days <= cfg.copula_window_days
            and all(d - pd.Timedelta(days=k) in present for k in range(1, cfg.window_days + 1))
        ]
    return warmup, eval_dates


@dataclass
class _DayResult:
    date: pd.Timestamp
    pit_rows: list
    score_rows: list = field(default_factory=list)
    agg_rows: list = field(default_factory=list)
    bdrank_rows: list = field(default_factory=list)
    trajectory: np.ndarray | None = None


def _forecast_one(cfg: RunConfig, cases, date, archive, evaluate: bool) -> _DayResult:
    variant = bayes.ModelVariant.from_name(cfg.model)
    window = data.assemble_window(cases, date, cfg.window_days)
    target = cases[date]
    regdata = bayes.build_regression_data(window)
    fallbacks = bayes.window_fallbacks(window)
    partition = data.partition_lead_times(target)
    draws = bayes.gibbs_fit(
        regdata,
        variant,
        iters=cfg.gibbs_iters,
        burn=cfg.gibbs_burn,
        rng=substream(cfg.seed, "fit", date),
    )
    traj = bayes.predict_trajectory(
        draws, target, partition, fallbacks, cfg.samples, substream(cfg.seed, "predict", date)
    )

    y_obs = target.y_obs if target.y_obs is not None else np.full(data.N_LEADS, np.nan)
    pit_rng = substream(cfg.seed, "verify", date)
    pit_row = np.full(data.N_LEADS, np.nan)
    active = set(partition.t_plus.tolist())
    for t in range(1, data.N_LEADS + 1):
        if t in active and np.isfinite(y_obs[t - 1]):
            pit_row[t - 1] = verification.pit(traj.samples[:, t - 1], y_obs[t - 1], pit_rng)
    result = _DayResult(date=date, pit_rows=[pit_row])

    if evaluate:
        uncoupled = traj.samples
        coupled = uncoupled
        if cfg.copula_on:
            structure = "full" if cfg.copula_structure == "full" else "ar1-band"
            corr = copula.estimate_correlation(archive, structure=structure)
            coupled = copula.couple_samples(uncoupled, corr, substream(cfg.seed, "copula", date))
        result.trajectory = coupled

        date_str = str(date.date())
        for t in range(1, data.N_LEADS + 1):
            if not np.isfinite(y_obs[t - 1]):
                continue
            col = coupled[:, t - 1]
            obs = y_obs[t - 1]
            width, covered = verification.interval_score(col, obs, level=0.8)
            result.score_rows.append(
                (
                    date_str,
                    t,
                    cfg.model,
                    int(t in active),
                    verification.crps_sample(col, obs),
                    abs(float(np.median(col)) - obs),
                    (float(col.mean()) - obs) ** 2,
                    width,
                    int(covered),
                )
            )
        if np.all(np.isfinite(y_obs)):
            variants = [("univariate", uncoupled)]
            if cfg.copula_on:
                variants.append(("copula", coupled))
            for label, smp in variants:
                for statistic in ("sum", "max"):
                    scores = verification.aggregate_scores(smp, y_obs, statistic)
                    result.agg_rows.append(
                        (
                            date_str,
                            cfg.model,
                            label,
                            statistic,
                            scores["mae"],
                            scores["rmse"] ** 2,
                            scores["crps"],
                        )
                    )
                # depth over the stochastic day-1 leads; deterministic fallback
                # hours are scored pointwise, not as part of the band diagnostic
                day1 = np.array([t - 1 for t in sorted(active) if t <= 24])
                if len(day1) >= 2:
                    rank = verification.band_depth_rank(
                        y_obs[day1], smp[:, day1], substream(cfg.seed, "verify", date, label)
                    )
                    result.bdrank_rows.append((date_str, cfg.model, label, rank, cfg.samples + 1))
    return result


def run_forecast(cfg: RunConfig) -> None:
    """Rolling forecast over the configured date range, writing CSV outputs."""
    cases = _load_cases(cfg)
    warmup, eval_dates = _date_range(cases, cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)

    archive = copula.ResidualArchive(window_days=cfg.copula_window_days)
    pit_rows, score_rows, agg_rows, bdrank_rows, traj_rows, archive_rows = [], [], [], [], [], []
    for date in warmup + eval_dates:
        res = _forecast_one(cfg, cases, date, archive, evaluate=date in eval_dates)
        z_row = copula.normal_scores(res.pit_rows[0])
        archive.append(date, z_row)
        date_str = str(date.date())
        for t in range(data.N_LEADS):
            if np.isfinite(res.pit_rows[0][t]):
                pit_rows.append((date_str, t + 1, res.pit_rows[0][t]))
                archive_rows.append((date_str, t + 1, z_row[t]))
        score_rows.extend(res.score_rows)
        agg_rows.extend(res.agg_rows)
        bdrank_rows.extend(res.bdrank_rows)
        if cfg.write_trajectories and res.trajectory is not None:
            m = res.trajectory.shape[0]
            traj_rows.append(
                pd.DataFrame(
                    {
                        "date": date_str,
                        "sample_id": np.repeat(np.arange(m), data.N_LEADS),
                        "lead_h": np.tile(np.arange(1, data.N_LEADS + 1), m),
                        "mw": res.trajectory.ravel(),
                    }
                )
            )

    out = cfg.out_dir
    pd.DataFrame(
        score_rows,
        columns=[
            "date",
            "lead_h",
            "model",
            "modeled",
            "crps",
            "abs_err_med",
            "sq_err_mean",
            "width",
            "covered",
        ],
    ).to_csv(os.path.join(out, "scores.csv"), index=False)
    pd.DataFrame(
        agg_rows, columns=["date", "model", "coupling", "statistic", "mae", "se_mean", "crps"]
    ).to_csv(os.path.join(out, "agg_scores.csv"), index=False)
    pd.DataFrame(pit_rows, columns=["date", "lead_h", "pit"]).to_csv(
        os.path.join(out, "pit.csv"), index=False
    )
    pd.DataFrame(bdrank_rows, columns=["date", "model", "coupling", "rank", "pool"]).to_csv(
        os.path.join(out, "bdrank.csv"), index=False
    )
    pd.DataFrame(archive_rows, columns=["date", "lead_h", "z"]).to_csv(
        os.path.join(out, "archive.csv"), index=False
    )
    if cfg.copula_on:
        corr = copula.estimate_correlation(
            archive, structure="full" if cfg.copula_structure == "full" else "ar1-band"
        )
        rows = [
            (i + 1, j + 1, corr.matrix[i, j])
            for i in range(data.N_LEADS)
            for j in range(data.N_LEADS)
        ]
        pd.DataFrame(rows, columns=["row_lead", "col_lead", "value"]).to_csv(
            os.path.join(out, "correlation.csv"), index=False
        )
    if cfg.write_trajectories:
        frame = (
            pd.concat(traj_rows, ignore_index=True)
            if traj_rows
            else pd.DataFrame(columns=["date", "sample_id", "lead_h", "mw"])
        )
        frame.to_csv(os.path.join(out, "trajectories.csv"), index=False)
    if cfg.sweep_windows:
        run_window_sweep(cfg, cases, eval_dates)


def run_window_sweep(cfg: RunConfig, cases=None, eval_dates=None) -> pd.DataFrame:
    """Day-1 CRPS as a function of the rolling window length."""
    if cases is None:
        cases = _load_cases(cfg)
    if eval_dates is None:
        _, eval_dates = _date_range(cases, cfg)
    rows = []
    for window in cfg.sweep_windows:
        sub = replace(cfg, window_days=window, copula_on=False, sweep_windows=())
        crps_values = []
        for date in eval_dates:
            res = _forecast_one(sub, cases, date, archive=None, evaluate=True)
            crps_values.extend(r[4] for r in res.score_rows if r[1] <= 24)
        rows.append((window, float(np.mean(crps_values))))
    frame = pd.DataFrame(rows, columns=["window_days", "crps_day1"])
    os.makedirs(cfg.out_dir, exist_ok=True)
    frame.to_csv(os.path.join(cfg.out_dir, "window_sweep.csv"), index=False)
    return frame


def run_report(in_dir: str, hist_dir: str | None = None) -> pd.DataFrame:
    """Aggregate per-date scores into report.csv and calibration histograms."""
    scores_path = os.path.join(in_dir, "scores.csv")
    if not os.path.exists(scores_path):
        raise DataError(f"missing {scores_path}; run the forecast step first")
    scores = pd.read_csv(scores_path)
    agg = pd.read_csv(os.path.join(in_dir, "agg_scores.csv"))
    rows = []
    model = scores["model"].iloc[0] if len(scores) else "unknown"
    for block, (lo, hi) in verification.DAY_BLOCKS.items():
        sub = scores[(scores["lead_h"] >= lo) & (scores["lead_h"] <= hi)]
        if len(sub) == 0:
            continue
        rows.append(("mae", block, model, sub["abs_err_med"].mean()))
        rows.append(("rmse", block, model, float(np.sqrt(sub["sq_err_mean"].mean()))))
        rows.append(("crps", block, model, sub["crps"].mean()))
        # Interval metrics only where the forecast is stochastic; deterministic
        # zero-production hours have zero-width intervals that say nothing.
        stoch = sub[sub["modeled"] == 1]
        if len(stoch):
            rows.append(("interval_width", block, model, stoch["width"].mean()))
            rows.append(("interval_coverage", block, model, stoch["covered"].mean()))
    for (coupling, statistic), sub in agg.groupby(["coupling", "statistic"]):
        label = f"{model}-{coupling}"
        rows.append(("mae", statistic, label, sub["mae"].mean()))
        rows.append(("rmse", statistic, label, float(np.sqrt(sub["se_mean"].mean()))))
        rows.append(("crps", statistic, label, sub["crps"].mean()))
    report = pd.DataFrame(rows, columns=["metric", "block", "model", "value"])
    report.to_csv(os.path.join(in_dir, "report.csv"), index=False)

    if hist_dir is not None:
        os.makedirs(hist_dir, exist_ok=True)
        pit = pd.read_csv(os.path.join(in_dir, "pit.csv"))
        hist = verification.make_histogram(
            pit["pit"].to_numpy(), DEFAULT_PIT_BINS, value_range=(0.0, 1.0)
        )
        _write_histogram(hist, os.path.join(hist_dir, "pit_hist"), "PIT")
        bd = pd.read_csv(os.path.join(in_dir, "bdrank.csv"))
        for coupling, sub in bd.groupby("coupling"):
            pool = int(sub["pool"].iloc[0])
            hist = verification.make_histogram(
                sub["rank"].to_numpy(float), DEFAULT_PIT_BINS, value_range=(0.5, pool + 0.5)
            )
            _write_histogram(
                hist,
                os.path.join(hist_dir, f"band_depth_hist_{coupling}"),
                f"Band depth rank ({coupling})",
            )
    return report


def _write_histogram(hist: verification.HistogramBins, stem: str, title: str) -> None:
    frame = pd.DataFrame(
        {"bin_lo": hist.edges[:-1], "bin_hi": hist.edges[1:], "count": hist.counts}
    )
    frame.to_csv(stem + ".csv", index=False)
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 3))
    ax.bar(
        hist.edges[:-1],
        hist.counts,
        width=np.diff(hist.edges),
        align="edge",
        color="#4878a8",
        edgecolor="white",
    )
    ax.axhline(hist.reference, linestyle="--", color="black", linewidth=1)
    ax.set_title(title)
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(stem + ".svg")
    plt.close(fig)
