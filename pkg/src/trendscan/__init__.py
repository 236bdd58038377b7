"""Exact Bayesian change-point analysis for piecewise-linear trends.

The package enumerates every change-point configuration of a fixed
order m over a series of N points, computes each configuration's
marginal likelihood in closed form under a continuous piecewise-linear
model with flat priors on the knot ordinates and Jeffreys prior on the
noise scale, and streams the enumeration into exact posterior summaries:
the normalizer, per-ordinal change-point marginals, the MAP and top-k
configurations, and the posterior mean trend with credibility bands.

A financial preprocessing pipeline (price panel -> returns -> local
normalization -> rolling mean market correlation -> thinning) produces
the kind of series the analysis was designed for, and an online layer
re-analyzes growing segments to measure detection horizons.

Two interchangeable enumeration kernels are provided: a compiled
extension (``trendscan._native``) and a pure-NumPy fallback
(``trendscan._kernel_py``); see :mod:`trendscan.backend`.
"""

__version__ = "0.1.0"

from .backend import available_backends, default_backend, get_backend
from .changepoint import (DEFAULT_BUDGET, HARD_RANK_LIMIT, AnalysisGrid,
                          BudgetError, CPPosterior, MarginalPDF, SegmentFit,
                          TopConfiguration, log_evidence, log_model_evidence,
                          marginal_pdfs, posterior, resolve_workers,
                          segment_fit, top_configurations)
from .combinatorics import (count_configurations, iter_configurations, rank,
                            successor, unrank)
from .online import (SegmentAnalysis, SegmentSpec, SensitivityResult,
                     analyze_segment, sensitivity_horizon, update_series)
from .preprocess import (DEFAULT_CENTER_OFFSET, DEFAULT_CORR_WINDOW,
                         DEFAULT_NORM_WINDOW, CorrelationSeries, ReturnPanel,
                         compute_returns, load_series, locally_normalize,
                         mean_correlation, save_series, thin,
                         window_correlation_matrix)
from .prices import (PricePanel, filter_coverage, interpolate_missing,
                     load_price_csv, restrict_period, save_price_csv)

__all__ = [
    "__version__",
    # change-point analysis
    "AnalysisGrid", "CPPosterior", "MarginalPDF", "SegmentFit",
    "TopConfiguration", "BudgetError", "DEFAULT_BUDGET", "HARD_RANK_LIMIT",
    "posterior", "log_evidence", "log_model_evidence", "marginal_pdfs",
    "segment_fit", "top_configurations", "resolve_workers",
    # configuration combinatorics
    "count_configurations", "unrank", "rank", "successor",
    "iter_configurations",
    # backends
    "available_backends", "default_backend", "get_backend",
    # price ingestion
    "PricePanel", "load_price_csv", "save_price_csv", "restrict_period",
    "filter_coverage", "interpolate_missing",
    # preprocessing
    "ReturnPanel", "CorrelationSeries", "compute_returns",
    "locally_normalize", "mean_correlation", "window_correlation_matrix",
    "thin", "save_series", "load_series",
    "DEFAULT_NORM_WINDOW", "DEFAULT_CORR_WINDOW", "DEFAULT_CENTER_OFFSET",
    # online analysis
    "SegmentSpec", "SegmentAnalysis", "SensitivityResult", "analyze_segment",
    "update_series", "sensitivity_horizon",
]
