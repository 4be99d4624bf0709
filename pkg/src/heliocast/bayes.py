"""Multivariate log-Gaussian regression of production on log irradiance.

Per active lead time t the model is

    log(Y_t) = beta0_t + beta1_t * log(x_t) + eps_t,

with the residual vector Gaussian with banded precision K shared across the
training window.  Inference alternates a Gaussian conditional for the stacked
coefficients and a G-Wishart conditional for K.  Lead times whose lagged
production or covariate is zero are never regressed; their prediction is the
training-window mean of observed production at that hour.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import graphs
from .data import N_LEADS, ForecastCase, LeadTimePartition, partition_lead_times
from .errors import InputError, NumericalError

VARIANT_NAMES = {
    "full": ("ar1", "ar1"),
    "indep": ("independent", "independent"),
    "indep-resid": ("ar1", "independent"),
}


@dataclass(frozen=True)
class ModelVariant:
    """Graph structure of the coefficient prior and of the residuals."""

    coefficient_graph: str
    residual_graph: str

    def __post_init__(self):
        if self.coefficient_graph not in ("independent", "ar1"):
            raise InputError(f"bad coefficient graph {self.coefficient_graph!r}")
        if self.residual_graph not in ("independent", "ar1", "ar2"):
            raise InputError(f"bad residual graph {self.residual_graph!r}")

    @classmethod
    def from_name(cls, name: str) -> "ModelVariant":
        if name not in VARIANT_NAMES:
            raise InputError(f"unknown model variant {name!r}, expected {sorted(VARIANT_NAMES)}")
        return cls(*VARIANT_NAMES[name])


@dataclass(frozen=True)
class BetaPrior:
    """Gaussian prior over (beta0 block, beta1 block).

    Intercepts are centred at 0 and slopes at 1 (unit log-log elasticity) with
    marginal standard deviation ``sd``; under an ar1 coefficient graph,
    neighbouring lead times within a block are correlated ``rho`` per hour of
    lead-time separation, with no coupling across the two blocks.
    """

    mean0: float = 0.0
    mean1: float = 1.0
    sd: float = 10.0
    rho: float = 0.5


@dataclass(frozen=True)
class RegressionData:
    """Stacked training rows over the union of active lead times."""

    lead_times: np.ndarray  # (U,) union of t_plus over cases, increasing
    case_active: list  # per case: indices into lead_times
    log_x: list  # per case: (n_s,) log covariates
    log_y: list  # per case: (n_s,) log production

    @property
    def n_coef(self) -> int:
        return 2 * len(self.lead_times)

    @property
    def n_cases(self) -> int:
        return len(self.case_active)


@dataclass(frozen=True)
class PosteriorDraws:
    """Retained Gibbs draws; betas ordered [beta0 block, beta1 block]."""

    lead_times: np.ndarray
    betas: np.ndarray  # (R, 2U)
    precisions: np.ndarray  # (R, U, U)
    burn_in: int


@dataclass(frozen=True)
class PredictiveTrajectory:
    """Ensemble of 72-hour production paths in MW."""

    samples: np.ndarray  # (m, 72)
    t_zero_values: np.ndarray  # (72,) fallback, NaN on modeled leads


def build_design(x_active: np.ndarray) -> np.ndarray:
    """Design block [I | Diag(log x)] for one case's active lead times."""
    x = np.asarray(x_active, dtype=float)
    if np.any(x <= 0):
        raise InputError("design covariates must be strictly positive")
    n = len(x)
    return np.hstack([np.eye(n), np.diag(np.log(x))])


def build_regression_data(cases: list[ForecastCase]) -> RegressionData:
    """Training rows from dated cases; a row exists where the case's lead time
    is in t_plus and production was observed positive (zeros and gaps are
    treated as missing)."""
    if not cases:
        raise InputError("no training cases")
    active_sets = []
    for case in cases:
        part = partition_lead_times(case)
        if case.y_obs is None:
            raise InputError("training cases need realized observations")
        ok = np.isfinite(case.y_obs) & (case.y_obs > 0)
        leads = part.t_plus[ok[part.t_plus - 1]]
        active_sets.append(leads)
    union = np.unique(np.concatenate(active_sets)) if active_sets else np.array([], int)
    pos = {lead: i for i, lead in enumerate(union)}
    case_active, log_x, log_y = [], [], []
    for case, leads in zip(cases, active_sets):
        if len(leads) == 0:
            continue
        case_active.append(np.array([pos[t] for t in leads]))
        log_x.append(np.log(case.x[leads - 1]))
        log_y.append(np.log(case.y_obs[leads - 1]))
    return RegressionData(lead_times=union, case_active=case_active, log_x=log_x, log_y=log_y)


def _beta_prior_terms(prior: BetaPrior, variant: ModelVariant, lead_times: np.ndarray):
    """Prior mean vector and precision matrix over [beta0, beta1]."""
    u = len(lead_times)
    mean = np.concatenate([np.full(u, prior.mean0), np.full(u, prior.mean1)])
    if variant.coefficient_graph == "independent" or u == 1:
        prec_block = np.eye(u) / prior.sd**2
    else:
        gaps = np.abs(lead_times[:, None] - lead_times[None, :])
        corr = prior.rho ** gaps.astype(float)
        prec_block = np.linalg.inv(prior.sd**2 * corr)
    prec = np.zeros((2 * u, 2 * u))
    prec[:u, :u] = prec_block
    prec[u:, u:] = prec_block
    return mean, prec


def _case_groups(data: RegressionData):
    """Group cases sharing an active set so per-iteration work is O(groups)."""
    groups = {}
    for idx, sel, lx, ly in zip(
        range(data.n_cases), data.case_active, data.log_x, data.log_y
    ):
        groups.setdefault(tuple(sel), []).append(idx)
    out = []
    for key, members in groups.items():
        sel = np.array(key, dtype=int)
        LX = np.stack([data.log_x[i] for i in members])
        LY = np.stack([data.log_y[i] for i in members])
        out.append((sel, LX, LY))
    return out


def _coverage_counts(data: RegressionData, u: int):
    """How many cases cover each lead time and each adjacent pair."""
    n_vertex = np.zeros(u)
    n_pair = np.zeros(max(u - 1, 1))
    for sel in data.case_active:
        n_vertex[sel] += 1
        present = np.zeros(u, dtype=bool)
        present[sel] = True
        n_pair[: u - 1] += present[:-1] & present[1:]
    return n_vertex, n_pair


def _chol_with_jitter(P: np.ndarray):
    """Cholesky with one bounded jitter retry, per the numerical policy."""
    try:
        return np.linalg.cholesky(P), False
    except np.linalg.LinAlgError:
        jitter = 1e-8 * np.trace(P) / P.shape[0]
        try:
            return np.linalg.cholesky(P + jitter * np.eye(P.shape[0])), True
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                f"conditional precision not positive definite after jitter {jitter:.3e}"
            ) from exc


def _draw_beta(P: np.ndarray, rhs: np.ndarray, rng) -> np.ndarray:
    L, _ = _chol_with_jitter(P)
    mean = np.linalg.solve(L.T, np.linalg.solve(L, rhs))
    z = rng.standard_normal(len(rhs))
    return mean + np.linalg.solve(L.T, z)


def gibbs_fit(
    data: RegressionData,
    variant: ModelVariant,
    prior_beta: BetaPrior | None = None,
    prior_k: graphs.GWishartSpec | None = None,
    iters: int = 2000,
    burn: int = 500,
    rng=None,
) -> PosteriorDraws:
    """Blocked Gibbs sampler alternating beta | K and K | beta.

    Each training case contributes rows only for its own active lead times;
    its residual enters the scatter embedded at those coordinates and the
    G-Wishart degrees of freedom count, per band clique, the cases actually
    covering it.
    """
    if rng is None:
        rng = np.random.default_rng()
    if not iters > burn >= 0:
        raise InputError("need iters > burn >= 0")
    if data.n_cases == 0:
        raise InputError("no usable training rows")
    prior_beta = prior_beta or BetaPrior()
    u = len(data.lead_times)
    if prior_k is None:
        prior_k = graphs.GWishartSpec(3.0, np.eye(u))
    if prior_k.n != u:
        raise InputError(f"prior scale must be {u}x{u}")

    m0, P0 = _beta_prior_terms(prior_beta, variant, data.lead_times)
    groups = _case_groups(data)
    n_vertex, n_pair = _coverage_counts(data, u)
    res_graph = graphs.build_graph(variant.residual_graph, data.lead_times)
    links = np.diag(res_graph.adjacency, k=1).astype(bool) if u > 1 else np.zeros(0, bool)
    delta_vertex = prior_k.df + n_vertex
    delta_pair = prior_k.df + n_pair[: u - 1] if u > 1 else np.zeros(0)

    # Per-group sufficient statistics that never change across iterations.
    precomp = []
    for sel, LX, LY in groups:
        precomp.append(
            (
                sel,
                LX.shape[0],  # group size
                LX.sum(axis=0),
                LX,  # (g, n_s) log covariates
                LY,
                (LX[:, :, None] * LX[:, None, :]).sum(axis=0),  # sum of outer(lx, lx)
                (LY[:, :, None] * LX[:, None, :]).sum(axis=0),  # sum of outer(ly, lx)
                LY.sum(axis=0),
            )
        )

    K = np.eye(u)
    n_keep = iters - burn
    betas = np.empty((n_keep, 2 * u))
    precisions = np.empty((n_keep, u, u))
    beta = m0.copy()

    for it in range(iters):
        # --- beta | K ---------------------------------------------------
        P = P0.copy()
        rhs = P0 @ m0
        for sel, g, lx_sum, LX, LY, M_ll, M_yl, ly_sum in precomp:
            Ks = K[np.ix_(sel, sel)]
            block00 = g * Ks
            block01 = Ks * lx_sum[None, :]
            block11 = Ks * M_ll
            idx0 = sel
            idx1 = u + sel
            P[np.ix_(idx0, idx0)] += block00
            P[np.ix_(idx0, idx1)] += block01
            P[np.ix_(idx1, idx0)] += block01.T
            P[np.ix_(idx1, idx1)] += block11
            rhs[idx0] += Ks @ ly_sum
            rhs[idx1] += (Ks * M_yl.T).sum(axis=1)
        beta = _draw_beta(P, rhs, rng)

        # --- K | beta ----------------------------------------------------
        scatter = np.zeros((u, u))
        for sel, g, lx_sum, LX, LY, M_ll, M_yl, ly_sum in precomp:
            E = LY - beta[sel][None, :] - beta[u + sel][None, :] * LX
            scatter[np.ix_(sel, sel)] += E.T @ E
        D_post = prior_k.scale + scatter
        K = graphs._sample_chain(delta_vertex, delta_pair, D_post, links, rng, 1)[0]

        if it >= burn:
            betas[it - burn] = beta
            precisions[it - burn] = K

    return PosteriorDraws(
        lead_times=data.lead_times, betas=betas, precisions=precisions, burn_in=burn
    )


def t0_fallback(train_production: np.ndarray) -> float:
    """Mean observed production at one lead time over the training window."""
    values = np.asarray(train_production, dtype=float)
    if values.size == 0:
        raise InputError("fallback needs a non-empty training window")
    return float(np.nanmean(values)) if np.any(np.isfinite(values)) else 0.0


def window_fallbacks(cases: list[ForecastCase]) -> np.ndarray:
    """Per-lead-time fallback values (MW) from the window's observations."""
    stack = np.stack([c.y_obs for c in cases])
    out = np.zeros(N_LEADS)
    for t in range(N_LEADS):
        col = stack[:, t]
        out[t] = np.nanmean(col) if np.any(np.isfinite(col)) else 0.0
    return out


def predict_trajectory(
    draws: PosteriorDraws,
    case: ForecastCase,
    partition: LeadTimePartition,
    fallbacks: np.ndarray,
    m: int,
    rng,
) -> PredictiveTrajectory:
    """Posterior-predictive production paths.

    Each sample picks one retained (beta, K) draw, adds Gaussian residual
    noise on the log scale and exponentiates.  Lead times in t_zero, or active
    lead times never seen in training, take the deterministic fallback.
    """
    if m < 1:
        raise InputError("need at least one sample")
    if len(draws.betas) == 0:
        raise NumericalError("posterior holds no retained draws")
    known = {lead: i for i, lead in enumerate(draws.lead_times)}
    active = np.array([t for t in partition.t_plus if t in known], dtype=int)
    samples = np.tile(fallbacks, (m, 1))
    t_zero_values = fallbacks.copy()
    if len(active) > 0:
        t_zero_values[active - 1] = np.nan
        sel = np.array([known[t] for t in active])
        lx = np.log(case.x[active - 1])
        u = len(draws.lead_times)
        pick = rng.integers(0, len(draws.betas), size=m)
        chol_cache = {}
        for j in range(m):
            i = pick[j]
            beta = draws.betas[i]
            L = chol_cache.get(i)
            if L is None:
                Ksub = draws.precisions[i][np.ix_(sel, sel)]
                L, _ = _chol_with_jitter(Ksub)
                chol_cache[i] = L
            mean = beta[sel] + beta[u + sel] * lx
            eps = np.linalg.solve(L.T, rng.standard_normal(len(sel)))
            samples[j, active - 1] = np.exp(mean + eps)
    return PredictiveTrajectory(samples=samples, t_zero_values=t_zero_values)
