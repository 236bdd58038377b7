"""Exact Bayesian change-point analysis for piecewise-linear trends.

A configuration of m change points splits an N-point grid into m + 1
segments; the trend is continuous piecewise-linear with knot ordinates as
free parameters (hat-function basis).  With a flat improper prior on the
ordinates and a Jeffreys 1/sigma prior on the Gaussian noise scale, the
marginal likelihood of a configuration E with M = m + 2 knots is

    log p(y | E) = -1/2 log det(G^T G) - (N - M)/2 log rho
                   + lgamma((N - M)/2) - (N - M)/2 log pi - log 2

where G is the hat design matrix and rho the least-squares residual sum
of squares (floored at 1e-12 of the centered sum of squares so exact fits
stay finite).  The additive constant follows from the stated priors and
is always included, so evidences are comparable across different m.

The posterior over all Z_m = binomial(N - 2, m) configurations is
computed by exact enumeration (no sampling): a streaming scan accumulates
the log normalizer and the top configurations, and a second pass folds
posterior weights into per-ordinal marginal distributions and into
piecewise-polynomial moment tables from which the posterior mean curve
and its standard deviation can be evaluated anywhere, including beyond
the observed range.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .backend import get_backend
from .combinatorics import comb_table, count_configurations, rank, unrank

__all__ = [
    "AnalysisGrid",
    "MarginalPDF",
    "SegmentFit",
    "TopConfiguration",
    "CPPosterior",
    "BudgetError",
    "DEFAULT_BUDGET",
    "log_evidence",
    "posterior",
    "marginal_pdfs",
    "segment_fit",
    "top_configurations",
    "log_model_evidence",
    "resolve_workers",
]

DEFAULT_BUDGET = 500_000_000
HARD_RANK_LIMIT = 2**62
DEFAULT_STORE_LIMIT = 2**22
DEFAULT_TOP_CACHE = 64
_NATIVE_MAX_CPS = 64


class BudgetError(RuntimeError):
    """Raised when an analysis would enumerate more configurations than allowed."""


@dataclass(frozen=True)
class AnalysisGrid:
    """Strictly increasing time grid with one observation per point.

    Times are typically trading-day indices of the source series (so a
    thinned series keeps its original spacing information); any strictly
    increasing float grid is accepted.
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64)
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if t.ndim != 1 or v.ndim != 1:
            raise ValueError("times and values must be one-dimensional")
        if t.shape[0] != v.shape[0]:
            raise ValueError(
                f"times and values lengths differ: {t.shape[0]} vs {v.shape[0]}"
            )
        if t.shape[0] < 3:
            raise ValueError(f"grid needs at least 3 points, got {t.shape[0]}")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(v)):
            raise ValueError("times and values must be finite")
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        t.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def n_points(self) -> int:
        return int(self.times.shape[0])


@dataclass(frozen=True)
class MarginalPDF:
    """Marginal posterior of the j-th change point's grid location.

    ``mass[i]`` is the posterior probability that the ordinal-th change
    point (1-based) sits at grid index i; boundary entries are zero.
    """

    ordinal: int
    mass: np.ndarray

    def map_index(self) -> int:
        """Grid index of the marginal mode (earliest index on ties)."""
        return int(np.argmax(self.mass))


@dataclass(frozen=True)
class SegmentFit:
    """Posterior mean trend and uncertainty evaluated on a set of times."""

    eval_times: np.ndarray
    mean: np.ndarray
    sigma: np.ndarray | None
    band_multiplier: float

    @property
    def lower(self) -> np.ndarray:
        if self.sigma is None:
            raise ValueError("fit was computed without uncertainty bands")
        return self.mean - self.band_multiplier * self.sigma

    @property
    def upper(self) -> np.ndarray:
        if self.sigma is None:
            raise ValueError("fit was computed without uncertainty bands")
        return self.mean + self.band_multiplier * self.sigma


class TopConfiguration(NamedTuple):
    config: tuple[int, ...]
    probability: float
    percentile: float  # (1-based position in the probability ordering) / Z_m


@dataclass
class CPPosterior:
    """Result of an exact change-point enumeration.

    ``log_evidences`` holds the per-rank log evidences only when the
    configuration count is at most ``store_limit``; larger analyses keep
    streamed summaries (normalizer, marginals, moment tables, top cache)
    so memory stays O(N + top_cache) regardless of Z_m.
    """

    grid: AnalysisGrid
    m: int
    count: int
    log_norm: float  # log sum of per-configuration evidences
    log_Z: float  # log model evidence: log_norm - log(count) (uniform prior)
    map_rank: int
    map_config: tuple[int, ...]
    rho_floor: float
    workers: int
    backend: str
    var_available: bool
    marginals: np.ndarray | None = None  # (m, N) posterior mass per ordinal
    log_evidences: np.ndarray | None = None
    top_logs: np.ndarray = field(default_factory=lambda: np.empty(0))
    top_ranks: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    time_offset: float = 0.0
    value_offset: float = 0.0
    fit_const: np.ndarray | None = None
    fit_slope: np.ndarray | None = None
    fit_q0: np.ndarray | None = None
    fit_q1: np.ndarray | None = None
    fit_q2: np.ndarray | None = None

    @property
    def map_probability(self) -> float:
        return float(np.exp(self.top_logs[0] - self.log_norm))


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else TRENDSCAN_THREADS, else CPU count."""
    if workers is None:
        env = os.environ.get("TRENDSCAN_THREADS")
        if env:
            try:
                workers = int(env)
            except ValueError:
                raise ValueError(f"TRENDSCAN_THREADS={env!r} is not an integer") from None
        else:
            workers = os.cpu_count() or 1
    workers = int(workers)
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


class _Problem:
    """Centered series, prefix sums and constants shared by the kernels."""

    def __init__(self, grid: AnalysisGrid):
        self.grid = grid
        n = grid.n_points
        self.time_offset = float(grid.times.mean())
        self.value_offset = float(grid.values.mean())
        t = np.ascontiguousarray(grid.times - self.time_offset)
        y = np.ascontiguousarray(grid.values - self.value_offset)
        self.t = t
        zero = np.zeros(1)
        self.pt = np.concatenate([zero, np.cumsum(t)])
        self.ptt = np.concatenate([zero, np.cumsum(t * t)])
        self.py = np.concatenate([zero, np.cumsum(y)])
        self.pty = np.concatenate([zero, np.cumsum(t * y)])
        self.syy = float(y @ y)
        self.rho_floor = max(1e-12 * self.syy, 1e-300)
        self.n = n

    def log_const(self, m: int) -> float:
        dof = self.n - (m + 2)
        return math.lgamma(dof / 2.0) - (dof / 2.0) * math.log(math.pi) - math.log(2.0)


def _validate_m(grid: AnalysisGrid, m) -> int:
    if not isinstance(m, (int, np.integer)):
        raise TypeError(f"m must be an integer, got {type(m).__name__}")
    m = int(m)
    if m < 0:
        raise ValueError(f"m must be >= 0, got {m}")
    if grid.n_points < m + 3:
        raise ValueError(
            f"grid of {grid.n_points} points cannot hold {m} change points "
            f"(needs at least {m + 3} points)"
        )
    return m


def _pick_backend(name: str | None, m: int) -> tuple[str, object]:
    mod = get_backend(name)
    label = "python" if mod.__name__.endswith("_kernel_py") else "native"
    if label == "native" and m > _NATIVE_MAX_CPS:
        mod = get_backend("python")
        label = "python"
    return label, mod


def _chunk_bounds(total: int, workers: int) -> list[tuple[int, int]]:
    parts = min(workers, total)
    edges = [total * i // parts for i in range(parts + 1)]
    return [(edges[i], edges[i + 1]) for i in range(parts)]


def log_evidence(grid: AnalysisGrid, config: Sequence[int],
                 backend: str | None = None) -> float:
    """Log marginal likelihood of one change-point configuration.

    ``config`` is a strictly increasing sequence of interior grid indices
    (1 .. N-2); an empty sequence scores the single-segment model.
    Values are mean-centered internally, so the result is invariant under
    adding a constant to the series, and the residual floor is relative,
    so posteriors are invariant under positive rescaling.
    """
    m = _validate_m(grid, len(config))
    r = rank(config, grid.n_points)  # validates the configuration
    prob = _Problem(grid)
    _, mod = _pick_backend(backend, m)
    ctab = comb_table(grid.n_points, m)
    run_max, _, _, _ = mod.scan_chunk(
        prob.t, prob.pt, prob.ptt, prob.py, prob.pty, prob.syy, m, r, r + 1,
        prob.rho_floor, prob.log_const(m), ctab, 1)
    return float(run_max)


def posterior(grid: AnalysisGrid, m: int, *, workers: int | None = None,
              budget: int | None = DEFAULT_BUDGET,
              store_limit: int = DEFAULT_STORE_LIMIT,
              top_cache: int = DEFAULT_TOP_CACHE,
              want_marginals: bool = True, want_fit: bool = True,
              backend: str | None = None) -> CPPosterior:
    """Exact posterior over all placements of m change points.

    Enumerates every configuration in lexicographic order, in contiguous
    rank chunks (one per worker, merged in chunk order so results are
    reproducible for a fixed worker count).  Refuses analyses whose
    configuration count exceeds ``budget`` (default 5e8); pass
    ``budget=None`` to lift the cap, which still leaves the hard int64
    rank limit of 2**62.
    """
    m = _validate_m(grid, m)
    n = grid.n_points
    Z = count_configurations(n, m)
    if budget is not None and Z > budget:
        raise BudgetError(
            f"{Z} configurations for m={m} on {n} points exceeds the budget "
            f"of {budget}; thin the series to a coarser stride, lower m, or "
            f"raise the budget explicitly"
        )
    if Z > HARD_RANK_LIMIT:
        raise BudgetError(
            f"{Z} configurations exceeds the 2**62 rank arithmetic limit; "
            f"thin the series to a coarser stride or lower m"
        )
    workers = resolve_workers(workers)
    label, mod = _pick_backend(backend, m)
    prob = _Problem(grid)
    ctab = comb_table(n, m)
    log_const = prob.log_const(m)
    chunks = _chunk_bounds(Z, workers)
    cache = max(1, min(int(top_cache), Z))
    store = np.empty(Z) if Z <= max(0, int(store_limit)) else None

    def scan(bounds):
        r0, r1 = bounds
        sl = store[r0:r1] if store is not None else None
        return mod.scan_chunk(prob.t, prob.pt, prob.ptt, prob.py, prob.pty,
                              prob.syy, m, r0, r1, prob.rho_floor, log_const,
                              ctab, cache, sl)

    parallel = label == "native" and len(chunks) > 1
    if parallel:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            partials = list(pool.map(scan, chunks))
    else:
        partials = [scan(c) for c in chunks]

    g_max = max(p[0] for p in partials)
    g_sum = 0.0
    for p in partials:
        if p[1] > 0.0:
            g_sum += p[1] * math.exp(p[0] - g_max)
    log_norm = g_max + math.log(g_sum)

    all_logs = np.concatenate([p[2] for p in partials])
    all_ranks = np.concatenate([p[3] for p in partials])
    order = np.lexsort((all_ranks, -all_logs))[:cache]
    top_logs = np.ascontiguousarray(all_logs[order])
    top_ranks = np.ascontiguousarray(all_ranks[order])
    map_rank = int(top_ranks[0])
    map_config = unrank(map_rank, n, m)

    var_available = (n - (m + 2) - 2) > 0
    post = CPPosterior(
        grid=grid, m=m, count=Z, log_norm=float(log_norm),
        log_Z=float(log_norm - math.log(Z)), map_rank=map_rank,
        map_config=map_config, rho_floor=prob.rho_floor, workers=workers,
        backend=label, var_available=var_available,
        log_evidences=store, top_logs=top_logs, top_ranks=top_ranks,
        time_offset=prob.time_offset, value_offset=prob.value_offset,
    )
    if not (want_marginals or want_fit):
        return post

    want_var = var_available

    def accumulate(bounds):
        r0, r1 = bounds
        marg = np.zeros((m, n))
        dc = np.zeros(n)
        ds = np.zeros(n)
        q0 = np.zeros(n)
        q1 = np.zeros(n)
        q2 = np.zeros(n)
        mod.accumulate_chunk(prob.t, prob.pt, prob.ptt, prob.py, prob.pty,
                             prob.syy, m, r0, r1, prob.rho_floor, log_const,
                             log_norm, want_var, ctab, marg, dc, ds, q0, q1, q2)
        return marg, dc, ds, q0, q1, q2

    if parallel:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(accumulate, chunks))
    else:
        parts = [accumulate(c) for c in chunks]

    totals = [np.zeros((m, n)), np.zeros(n), np.zeros(n),
              np.zeros(n), np.zeros(n), np.zeros(n)]
    for part in parts:
        for tot, arr in zip(totals, part):
            tot += arr
    marg, dc, ds, q0, q1, q2 = totals

    if want_marginals:
        post.marginals = marg
    if want_fit:
        post.fit_const = np.cumsum(dc)[: n - 1]
        post.fit_slope = np.cumsum(ds)[: n - 1]
        if want_var:
            post.fit_q0 = np.cumsum(q0)[: n - 1]
            post.fit_q1 = np.cumsum(q1)[: n - 1]
            post.fit_q2 = np.cumsum(q2)[: n - 1]
    return post


def marginal_pdfs(post: CPPosterior) -> list[MarginalPDF]:
    """Per-ordinal marginal posterior distributions over grid locations."""
    if post.marginals is None:
        raise ValueError(
            "posterior was computed with want_marginals=False; re-run with "
            "marginal accumulation enabled"
        )
    return [MarginalPDF(ordinal=j + 1, mass=post.marginals[j].copy())
            for j in range(post.m)]


def segment_fit(post: CPPosterior, eval_times: np.ndarray | None = None,
                band_multiplier: float = 3.0,
                include_bands: bool = True) -> SegmentFit:
    """Posterior mean trend, optionally with uncertainty bands.

    The mean mixes every configuration's least-squares piecewise-linear
    curve by posterior weight; ``sigma`` is the posterior standard
    deviation of the curve value, mixing within-configuration parameter
    uncertainty (Student marginals of the knot ordinates) with the spread
    across configurations.  Bands need N - M - 2 > 0; with fewer points
    call with include_bands=False to get the mean alone.  Evaluation
    times outside the grid extend the boundary segments linearly.
    """
    if post.fit_const is None:
        raise ValueError(
            "posterior was computed with want_fit=False; re-run with fit "
            "accumulation enabled"
        )
    if include_bands and not post.var_available:
        raise ValueError(
            f"uncertainty bands need N - M - 2 > 0 (N={post.grid.n_points}, "
            f"M={post.m + 2}); pass include_bands=False for the mean curve"
        )
    if band_multiplier <= 0:
        raise ValueError(f"band multiplier must be positive, got {band_multiplier}")
    grid = post.grid
    if eval_times is None:
        eval_times = grid.times
    x = np.asarray(eval_times, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("eval_times must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise ValueError("eval_times must be finite")
    n = grid.n_points
    iv = np.clip(np.searchsorted(grid.times, x, side="right") - 1, 0, n - 2)
    xc = x - post.time_offset
    mean_c = post.fit_const[iv] + post.fit_slope[iv] * xc
    sigma = None
    if include_bands:
        m2 = post.fit_q0[iv] + post.fit_q1[iv] * xc + post.fit_q2[iv] * xc * xc
        sigma = np.sqrt(np.maximum(m2 - mean_c * mean_c, 0.0))
    return SegmentFit(eval_times=x.copy(), mean=mean_c + post.value_offset,
                      sigma=sigma, band_multiplier=float(band_multiplier))


def top_configurations(post: CPPosterior, k: int) -> list[TopConfiguration]:
    """The k most probable configurations, with probabilities and percentiles.

    Ordered by probability descending, ties broken toward the
    lexicographically earlier configuration.  percentile is the 1-based
    position divided by the total count (the MAP of a 8385-configuration
    analysis has percentile 1/8385).  Requests beyond the posterior's top
    cache fall back to stored per-configuration evidences when available.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    k = min(k, post.count)
    if k <= post.top_logs.shape[0]:
        logs = post.top_logs[:k]
        ranks = post.top_ranks[:k]
    elif post.log_evidences is not None:
        order = np.lexsort((np.arange(post.count), -post.log_evidences))[:k]
        logs = post.log_evidences[order]
        ranks = order.astype(np.int64)
    else:
        raise ValueError(
            f"only the top {post.top_logs.shape[0]} configurations are cached "
            f"for this analysis size; re-run posterior() with top_cache >= {k}"
        )
    n = post.grid.n_points
    out = []
    for i in range(k):
        out.append(TopConfiguration(
            config=unrank(int(ranks[i]), n, post.m),
            probability=float(np.exp(logs[i] - post.log_norm)),
            percentile=(i + 1) / post.count,
        ))
    return out


def log_model_evidence(grid: AnalysisGrid, m: int, *, workers: int | None = None,
                       budget: int | None = DEFAULT_BUDGET,
                       backend: str | None = None) -> float:
    """Log evidence of the m-change-point model class.

    Averages configuration evidences under the uniform configuration
    prior: log (1/Z_m sum_E p(y | E)).  Comparable across m, so ratios
    give Bayes factors (e.g. against the straight-line class m=0).
    """
    post = posterior(grid, m, workers=workers, budget=budget, backend=backend,
                     want_marginals=False, want_fit=False, top_cache=1,
                     store_limit=0)
    return post.log_Z
