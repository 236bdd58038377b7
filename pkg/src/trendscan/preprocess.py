"""Returns, local normalization, and the mean-correlation series.

The pipeline turns a complete price panel into a single scalar series:

1. simple returns R_t = (P_{t+1} - P_t) / P_t, stamped at t;
2. local normalization r_t = (R_t - <R>_n) / std_n(R), where the mean and
   (population) standard deviation run over the trailing n-day window
   ending at t -- this strips slow-moving volatility so windows from calm
   and turbulent periods are comparable; the first n - 1 rows have no
   full window and are dropped;
3. for every length-tau window of normalized returns, the mean Pearson
   correlation over ticker pairs, stamped at a fixed offset inside the
   window (default the 21st day of a 42-day window).

Each stage validates its own preconditions, so the functions can also be
used standalone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .artifacts import fmt_float, read_json, write_json
from .prices import PricePanel

__all__ = [
    "ReturnPanel",
    "CorrelationSeries",
    "compute_returns",
    "locally_normalize",
    "mean_correlation",
    "window_correlation_matrix",
    "thin",
    "save_series",
    "load_series",
]

DEFAULT_NORM_WINDOW = 13
DEFAULT_CORR_WINDOW = 42
DEFAULT_CENTER_OFFSET = 20

# a window is degenerate when its spread is this far below its level
_DEGENERATE_REL = 1e-12


@dataclass(frozen=True)
class ReturnPanel:
    """Dates x tickers return matrix (raw or locally normalized)."""

    dates: np.ndarray  # datetime64[D]
    tickers: tuple[str, ...]
    returns: np.ndarray  # float64 (n_dates, n_tickers)
    normalized: bool = False
    norm_window: int | None = None

    def __post_init__(self):
        d = np.asarray(self.dates, dtype="datetime64[D]")
        r = np.asarray(self.returns, dtype=np.float64)
        if r.shape != (d.shape[0], len(self.tickers)):
            raise ValueError(
                f"returns shape {r.shape} does not match "
                f"{d.shape[0]} dates x {len(self.tickers)} tickers"
            )
        if not np.all(np.isfinite(r)):
            raise ValueError("returns must be finite")
        d.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "dates", d)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "returns", r)

    @property
    def n_dates(self) -> int:
        return int(self.dates.shape[0])


@dataclass(frozen=True)
class CorrelationSeries:
    """Scalar mean-correlation series stamped on trading dates."""

    dates: np.ndarray  # datetime64[D], strictly increasing
    values: np.ndarray  # float64
    window_length: int | None = None
    center_offset: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        d = np.asarray(self.dates, dtype="datetime64[D]")
        v = np.asarray(self.values, dtype=np.float64)
        if d.shape != v.shape or d.ndim != 1:
            raise ValueError("dates and values must be 1-D and equally long")
        if d.shape[0] == 0:
            raise ValueError("series is empty")
        if np.any(np.diff(d) <= np.timedelta64(0, "D")):
            raise ValueError("series dates must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise ValueError("series values must be finite")
        d.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "dates", d)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return int(self.dates.shape[0])


def compute_returns(panel: PricePanel) -> ReturnPanel:
    """Simple returns (P_{t+1} - P_t) / P_t, stamped at t.

    Needs a complete panel of positive prices (run interpolate_missing
    first); output has one row fewer than the panel.
    """
    if not panel.is_complete():
        raise ValueError(
            "panel has missing values; run interpolate_missing before "
            "computing returns"
        )
    if panel.n_dates < 2:
        raise ValueError("need at least 2 dates to compute returns")
    bad = panel.prices <= 0
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"non-positive price {panel.prices[i, j]} for "
            f"{panel.tickers[j]} on {panel.dates[i]}"
        )
    p = panel.prices
    rets = (p[1:] - p[:-1]) / p[:-1]
    return ReturnPanel(dates=panel.dates[:-1], tickers=panel.tickers,
                       returns=rets)


def locally_normalize(rp: ReturnPanel, n: int = DEFAULT_NORM_WINDOW) -> ReturnPanel:
    """Standardize each return by its trailing n-day window.

    r_t = (R_t - mean) / std over the window [t-n+1, t], population std.
    The first n - 1 rows are dropped.  A window whose spread is
    negligible relative to its level (constant returns) is an error,
    since the ratio would be meaningless.
    """
    if rp.normalized:
        raise ValueError("returns are already locally normalized")
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"normalization window must be an integer >= 2, got {n}")
    if rp.n_dates < n:
        raise ValueError(
            f"series of {rp.n_dates} returns is shorter than the "
            f"normalization window {n}"
        )
    win = np.lib.stride_tricks.sliding_window_view(rp.returns, n, axis=0)
    mu = win.mean(axis=-1)
    sd = win.std(axis=-1)
    tol = _DEGENERATE_REL * np.maximum(1.0, np.abs(mu))
    bad = sd <= tol
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise ValueError(
            f"constant returns in the {n}-day window ending "
            f"{rp.dates[i + n - 1]} for {rp.tickers[j]}; local "
            f"normalization is undefined there"
        )
    out = (rp.returns[n - 1 :] - mu) / sd
    return ReturnPanel(dates=rp.dates[n - 1 :], tickers=rp.tickers,
                       returns=out, normalized=True, norm_window=int(n))


def _standardize_window(block: np.ndarray, tickers, stamp) -> np.ndarray:
    mu = block.mean(axis=0)
    sd = block.std(axis=0)
    bad = sd <= _DEGENERATE_REL * np.maximum(1.0, np.abs(mu))
    if bad.any():
        j = int(np.argmax(bad))
        raise ValueError(
            f"{tickers[j]} is constant in the correlation window stamped "
            f"{stamp}; its Pearson correlations are undefined"
        )
    return (block - mu) / sd


def mean_correlation(rp: ReturnPanel, tau: int = DEFAULT_CORR_WINDOW,
                     center_offset: int = DEFAULT_CENTER_OFFSET,
                     include_diagonal: bool = False) -> CorrelationSeries:
    """Mean pairwise Pearson correlation over a rolling tau-day window.

    For each window the tickers are standardized within the window and
    the mean over ordered pairs i != j is taken (include_diagonal=True
    averages over all pairs including i == i, which adds a constant
    1/n_tickers pull toward 1).  The value is stamped on the date at
    ``center_offset`` inside the window.  Uses the identity
    sum_{ij} C_ij = (1/tau) * sum_t (sum_i z_it)^2, so no correlation
    matrix is materialized.
    """
    if rp.n_dates == 0:
        raise ValueError("return panel is empty")
    if len(rp.tickers) < 2 and not include_diagonal:
        raise ValueError("need at least 2 tickers for off-diagonal correlations")
    if not isinstance(tau, (int, np.integer)) or tau < 2:
        raise ValueError(f"correlation window must be an integer >= 2, got {tau}")
    if not 0 <= center_offset < tau:
        raise ValueError(
            f"center_offset must lie inside the window [0, {tau}), got "
            f"{center_offset}"
        )
    if rp.n_dates < tau:
        raise ValueError(
            f"series of {rp.n_dates} rows is shorter than the correlation "
            f"window {tau}"
        )
    K = len(rp.tickers)
    n_win = rp.n_dates - tau + 1
    values = np.empty(n_win)
    for w in range(n_win):
        stamp = rp.dates[w + center_offset]
        z = _standardize_window(rp.returns[w : w + tau], rp.tickers, stamp)
        row_sums = z.sum(axis=1)
        total = float(row_sums @ row_sums) / tau  # = sum_{i,j} C_ij
        if include_diagonal:
            values[w] = total / (K * K)
        else:
            values[w] = (total - K) / (K * (K - 1))
    meta = {
        "n_tickers": K,
        "include_diagonal": bool(include_diagonal),
        "norm_window": rp.norm_window,
        "stride": 1,
    }
    return CorrelationSeries(dates=rp.dates[center_offset : center_offset + n_win],
                             values=values, window_length=int(tau),
                             center_offset=int(center_offset), meta=meta)


def window_correlation_matrix(rp: ReturnPanel, start: int, tau: int) -> np.ndarray:
    """Full Pearson correlation matrix of one window (diagnostic)."""
    if not 0 <= start <= rp.n_dates - tau:
        raise ValueError(
            f"window [{start}, {start + tau}) outside series of {rp.n_dates}"
        )
    stamp = rp.dates[start]
    z = _standardize_window(rp.returns[start : start + tau], rp.tickers, stamp)
    return (z.T @ z) / tau


def thin(series: CorrelationSeries, stride: int) -> CorrelationSeries:
    """Every stride-th point, keeping the first; stride 1 is the identity."""
    if not isinstance(stride, (int, np.integer)) or stride < 1:
        raise ValueError(f"stride must be an integer >= 1, got {stride}")
    meta = dict(series.meta)
    meta["stride"] = int(meta.get("stride", 1)) * int(stride)
    return CorrelationSeries(dates=series.dates[::stride],
                             values=series.values[::stride],
                             window_length=series.window_length,
                             center_offset=series.center_offset, meta=meta)


def save_series(series: CorrelationSeries, csv_path, meta_path=None,
                extra_meta: dict | None = None) -> None:
    """Write 'date,mean_correlation' CSV plus a JSON metadata sidecar."""
    csv_path = Path(csv_path)
    lines = ["date,mean_correlation"]
    for d, v in zip(series.dates, series.values):
        lines.append(f"{d},{fmt_float(v)}")
    csv_path.write_text("\n".join(lines) + "\n")
    meta = {
        "window_length": series.window_length,
        "center_offset": series.center_offset,
        "n_points": len(series),
    }
    meta.update(series.meta)
    if extra_meta:
        meta.update(extra_meta)
    if meta_path is None:
        meta_path = csv_path.with_suffix(".meta.json")
    write_json(meta_path, meta)


def load_series(csv_path, meta_path=None) -> CorrelationSeries:
    """Read a series CSV (with its sidecar when present)."""
    csv_path = Path(csv_path)
    lines = csv_path.read_text().splitlines()
    if not lines or lines[0].strip() != "date,mean_correlation":
        raise ValueError(
            f"{csv_path}: expected header 'date,mean_correlation', got "
            f"{lines[0].strip() if lines else ''!r}"
        )
    dates = []
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ValueError(f"{csv_path}:{lineno}: expected 2 fields, got {len(parts)}")
        try:
            dates.append(np.datetime64(parts[0].strip(), "D"))
        except ValueError:
            raise ValueError(
                f"{csv_path}:{lineno}: unparseable date {parts[0].strip()!r}"
            ) from None
        try:
            values.append(float(parts[1]))
        except ValueError:
            raise ValueError(
                f"{csv_path}:{lineno}: non-numeric value {parts[1].strip()!r}"
            ) from None
    if not dates:
        raise ValueError(f"{csv_path}: no data rows")
    meta = {}
    window_length = None
    center_offset = None
    if meta_path is None:
        candidate = csv_path.with_suffix(".meta.json")
        meta_path = candidate if candidate.exists() else None
    if meta_path is not None:
        meta = read_json(meta_path)
        window_length = meta.pop("window_length", None)
        center_offset = meta.pop("center_offset", None)
        meta.pop("n_points", None)
    return CorrelationSeries(dates=np.array(dates, dtype="datetime64[D]"),
                             values=np.array(values), window_length=window_length,
                             center_offset=center_offset, meta=meta)
