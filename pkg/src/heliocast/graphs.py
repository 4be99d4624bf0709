"""Banded conditional-independence graphs and G-Wishart sampling.

Precision matrices of the log-production residuals live on the active lead
times of a forecast case and are constrained to a banded graph: vertices i, j
are joined only when both the index distance and the lead-time distance are
within the band order.  Such graphs are unions of interval cliques along the
natural lead-time order, hence decomposable, which allows exact sampling.

The G-Wishart density used throughout is

    p(K) \propto |K|^{(delta - 2)/2} exp(-tr(D K) / 2)

on the cone of symmetric positive-definite matrices with K[i, j] = 0 off the
graph.  On a complete graph of size p this is the standard Wishart with
df = delta + p - 1 and scale D^{-1}; for p = 1 it is the gamma distribution
with shape delta/2 and rate D/2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import InputError, UnsupportedStructureError

GRAPH_KINDS = {"independent": 0, "ar1": 1, "ar2": 2}


@dataclass(frozen=True)
class PrecisionGraph:
    """Symmetric adjacency over ordered lead-time vertices."""

    lead_times: np.ndarray
    adjacency: np.ndarray  # (n, n) bool, zero diagonal

    @property
    def n(self) -> int:
        return len(self.lead_times)

    def edges(self) -> list[tuple[int, int]]:
        """Edge list as 0-based (i, j) pairs with i < j."""
        i, j = np.nonzero(np.triu(self.adjacency, k=1))
        return list(zip(i.tolist(), j.tolist()))


@dataclass(frozen=True)
class GWishartSpec:
    """Degrees of freedom and scale matrix of a G-Wishart law."""

    df: float
    scale: np.ndarray

    def __post_init__(self):
        scale = np.atleast_2d(np.asarray(self.scale, dtype=float))
        object.__setattr__(self, "scale", scale)
        if not self.df > 2:
            raise InputError(f"G-Wishart df must exceed 2, got {self.df}")
        if scale.shape[0] != scale.shape[1]:
            raise InputError("scale matrix must be square")
        if not np.allclose(scale, scale.T):
            raise InputError("scale matrix must be symmetric")

    @property
    def n(self) -> int:
        return self.scale.shape[0]


def build_graph(kind: str, lead_times) -> PrecisionGraph:
    """Band graph over ``lead_times``: (i, j) joined iff both the index gap
    and the lead-time gap are at most the band order (0 for independent)."""
    if kind not in GRAPH_KINDS:
        raise InputError(f"unknown graph kind {kind!r}, expected one of {sorted(GRAPH_KINDS)}")
    lt = np.asarray(lead_times)
    if lt.ndim != 1 or (len(lt) > 1 and not np.all(np.diff(lt) > 0)):
        raise InputError("lead_times must be strictly increasing")
    order = GRAPH_KINDS[kind]
    idx = np.arange(len(lt))
    gap_idx = np.abs(idx[:, None] - idx[None, :])
    gap_lt = np.abs(lt[:, None] - lt[None, :])
    adj = (gap_idx <= order) & (gap_lt <= order) & (gap_idx > 0)
    return PrecisionGraph(lead_times=lt, adjacency=adj)


def _interval_cliques(adj: np.ndarray) -> list[tuple[int, int]]:
    """Maximal cliques [lo, hi] of a monotone interval graph.

    Verifies that each vertex's later neighbourhood is a contiguous interval
    forming a clique with non-decreasing right ends; band graphs always pass.
    """
    n = adj.shape[0]
    if n == 0:
        return []
    hi = np.empty(n, dtype=int)
    for i in range(n):
        later = np.nonzero(adj[i, i + 1:])[0]
        if len(later) == 0:
            hi[i] = i
            continue
        if later[-1] != len(later) - 1:
            raise UnsupportedStructureError("graph is not a banded interval graph")
        hi[i] = i + 1 + later[-1]
        block = adj[i: hi[i] + 1, i: hi[i] + 1]
        if not np.all(block | np.eye(hi[i] - i + 1, dtype=bool)):
            raise UnsupportedStructureError("later neighbourhoods must be cliques")
    if np.any(np.diff(hi) < 0):
        raise UnsupportedStructureError("interval ends must be non-decreasing")
    cliques = []
    for i in range(n):
        if cliques and cliques[-1][1] >= hi[i]:
            continue  # dominated by an earlier clique
        cliques.append((i, int(hi[i])))
    return cliques


def _bartlett_wishart(df: float, scale: np.ndarray, rng, size: int) -> np.ndarray:
    """Batch of Wishart(df, scale) draws, shape (size, p, p)."""
    p = scale.shape[0]
    L = np.linalg.cholesky(scale)
    A = np.zeros((size, p, p))
    ii = np.arange(p)
    A[:, ii, ii] = np.sqrt(rng.chisquare(df - ii, size=(size, p)))
    tril = np.tril_indices(p, k=-1)
    A[:, tril[0], tril[1]] = rng.standard_normal((size, p * (p - 1) // 2))
    T = L @ A
    return T @ np.swapaxes(T, 1, 2)


def _sample_chain(
    delta_vertex: np.ndarray,
    delta_pair: np.ndarray,
    scale: np.ndarray,
    links: np.ndarray,
    rng,
    size: int,
) -> np.ndarray:
    """Exact draws when every maximal clique has size <= 2.

    ``links[i]`` marks an edge between vertices i and i+1; the graph is then a
    disjoint union of paths and K is assembled directly from the Gaussian
    Markov-chain parameterisation, giving exact zeros off the band.
    ``delta_vertex``/``delta_pair`` allow per-clique degrees of freedom so the
    Gibbs sampler can weight partially observed lead times correctly; for a
    plain G-Wishart draw they are all equal.
    """
    n = len(delta_vertex)
    K = np.zeros((size, n, n))
    starts = np.ones(n, dtype=bool)
    starts[1:] = ~links
    # Chain-start marginals: 1/sigma_i^2 ~ gamma(delta_i/2, rate D_ii/2).
    d_start = np.diag(scale)[starts]
    prec_start = rng.gamma(delta_vertex[starts] / 2.0, 2.0 / d_start, size=(size, starts.sum()))
    K[:, starts, starts] += prec_start

    pair_idx = np.nonzero(links)[0]
    if len(pair_idx) > 0:
        a = np.diag(scale)[pair_idx]
        c = np.diag(scale)[pair_idx + 1]
        b = scale[pair_idx, pair_idx + 1]
        det = a * c - b * b
        if np.any(det <= 0):
            raise InputError("scale matrix is not positive definite on the band")
        # V = inv(D_C) for each pair clique, Cholesky in closed form.
        v11, v21, v22 = c / det, -b / det, a / det
        l11 = np.sqrt(v11)
        l21 = v21 / l11
        l22 = np.sqrt(v22 - l21 * l21)
        nu = delta_pair[pair_idx] + 1.0
        a11 = np.sqrt(rng.chisquare(nu, size=(size, len(pair_idx))))
        a21 = rng.standard_normal((size, len(pair_idx)))
        a22 = np.sqrt(rng.chisquare(nu - 1.0, size=(size, len(pair_idx))))
        t11 = l11 * a11
        t21 = l21 * a11 + l22 * a21
        t22 = l22 * a22
        k11 = t11 * t11
        k21 = t21 * t11
        k22 = t21 * t21 + t22 * t22
        # Regression form of the 2x2 clique: z_{i+1} = B z_i + N(0, lam).
        B = -k21 / k22
        lam = 1.0 / k22
        K[:, pair_idx + 1, pair_idx + 1] += 1.0 / lam
        K[:, pair_idx, pair_idx] += B * B / lam
        K[:, pair_idx, pair_idx + 1] = -B / lam
        K[:, pair_idx + 1, pair_idx] = -B / lam
    return K


def _sample_cliquewise(
    spec: GWishartSpec, cliques: list[tuple[int, int]], rng, size: int
) -> np.ndarray:
    """Sequential clique sampler for general interval cliques.

    Builds the covariance clique by clique (new block regressed on the
    separator), completes it by conditional independence, inverts, and
    restores the analytic zeros off the graph.
    """
    n = spec.n
    D = spec.scale
    sigma = np.zeros((size, n, n))
    lo0, hi0 = cliques[0]
    c0 = slice(lo0, hi0 + 1)
    W = _bartlett_wishart(spec.df + (hi0 - lo0), np.linalg.inv(D[c0, c0]), rng, size)
    sigma[:, c0, c0] = np.linalg.inv(W)
    done = hi0 + 1
    for lo, hi in cliques[1:]:
        p = hi - lo + 1
        W = _bartlett_wishart(spec.df + p - 1, np.linalg.inv(D[lo: hi + 1, lo: hi + 1]), rng, size)
        star = np.linalg.inv(W)
        ns = done - lo  # separator size: vertices lo..done-1
        s_loc = slice(0, ns)
        r_loc = slice(ns, p)
        B = star[:, r_loc, s_loc] @ np.linalg.inv(star[:, s_loc, s_loc])
        lam = star[:, r_loc, r_loc] - B @ star[:, s_loc, r_loc]
        sep = slice(lo, done)
        new = slice(done, hi + 1)
        prev = slice(0, done)
        sigma[:, new, prev] = B @ sigma[:, sep, prev]
        sigma[:, prev, new] = np.swapaxes(sigma[:, new, prev], 1, 2)
        sigma[:, new, new] = lam + B @ sigma[:, sep, new]
        done = hi + 1
    K = np.linalg.inv(sigma)
    return K


def sample_gwishart(spec: GWishartSpec, graph: PrecisionGraph, rng, size: int | None = None):
    """Exact G-Wishart draw(s) on a decomposable band graph.

    Returns an (n, n) matrix, or (size, n, n) when ``size`` is given.  The
    zero pattern of every draw matches the graph exactly.
    """
    n = graph.n
    if spec.n != n:
        raise InputError(f"scale is {spec.n}x{spec.n} but graph has {n} vertices")
    nsamp = 1 if size is None else int(size)
    cliques = _interval_cliques(graph.adjacency)
    if n == 0:
        K = np.zeros((nsamp, 0, 0))
    elif max(hi - lo + 1 for lo, hi in cliques) <= 2:
        links = np.diag(graph.adjacency, k=1).astype(bool) if n > 1 else np.zeros(0, bool)
        delta = np.full(n, float(spec.df))
        K = _sample_chain(delta, delta.copy(), spec.scale, links, rng, nsamp)
    else:
        K = _sample_cliquewise(spec, cliques, rng, nsamp)
        mask = graph.adjacency | np.eye(n, dtype=bool)
        K = np.where(mask, (K + np.swapaxes(K, 1, 2)) / 2.0, 0.0)
    return K[0] if size is None else K


def gwishart_posterior(prior: GWishartSpec, residual_scatter, n_obs: int) -> GWishartSpec:
    """Conjugate update: df' = df + n_obs, scale' = scale + scatter."""
    scatter = np.atleast_2d(np.asarray(residual_scatter, dtype=float))
    if scatter.shape != prior.scale.shape:
        raise InputError("scatter shape does not match the prior scale")
    if not np.allclose(scatter, scatter.T):
        raise InputError("residual scatter must be symmetric")
    if n_obs < 0:
        raise InputError("n_obs must be non-negative")
    return GWishartSpec(df=prior.df + n_obs, scale=prior.scale + scatter)


def is_positive_definite(K: np.ndarray) -> bool:
    """Smallest Cholesky pivot check."""
    try:
        np.linalg.cholesky(K)
        return True
    except np.linalg.LinAlgError:
        return False
