"""Adaptive (on-line) segment analysis and detection-horizon search.

Retrospective analysis thins the whole series once; the on-line view
instead fixes a segment start, thins from that anchor at a finer stride,
and re-runs the exact analysis as the segment end advances -- the
question being how soon after a structural break the first-change-point
marginal concentrates near it.

All index arithmetic happens on the source series' own stamp axis
(trading days), which is also the unit of the detection tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .changepoint import (AnalysisGrid, CPPosterior, MarginalPDF, SegmentFit,
                          marginal_pdfs, posterior, segment_fit)
from .preprocess import CorrelationSeries

__all__ = [
    "SegmentSpec",
    "SegmentAnalysis",
    "SensitivityResult",
    "analyze_segment",
    "update_series",
    "sensitivity_horizon",
]

DEFAULT_ONLINE_STRIDE = 10


def _locate(series: CorrelationSeries, when, what: str) -> int:
    """Index of the first stamp on or after ``when``."""
    d = np.datetime64(when, "D")
    idx = int(np.searchsorted(series.dates, d, side="left"))
    if idx >= len(series):
        raise ValueError(
            f"{what} {d} falls after the last stamp {series.dates[-1]}"
        )
    return idx


@dataclass(frozen=True)
class SegmentSpec:
    """A [start, end] window of a correlation series, thinned from the start.

    Thinned stamps are source indices start_index, start_index + stride,
    ... <= end_index; the anchor never moves when the end advances, so
    growing a segment only appends points.
    """

    source: CorrelationSeries
    start: Any
    end: Any
    stride: int = DEFAULT_ONLINE_STRIDE

    def __post_init__(self):
        if not isinstance(self.stride, (int, np.integer)) or self.stride < 1:
            raise ValueError(f"stride must be an integer >= 1, got {self.stride}")
        start = np.datetime64(self.start, "D")
        end = np.datetime64(self.end, "D")
        if end < start:
            raise ValueError(f"segment end {end} precedes start {start}")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "end", end)
        object.__setattr__(self, "stride", int(self.stride))
        si = _locate(self.source, start, "segment start")
        ei = int(np.searchsorted(self.source.dates, end, side="right")) - 1
        if ei < si:
            raise ValueError(
                f"no stamps inside [{start}, {end}]"
            )
        object.__setattr__(self, "_start_index", si)
        object.__setattr__(self, "_end_index", ei)

    @property
    def start_index(self) -> int:
        return self._start_index

    @property
    def end_index(self) -> int:
        return self._end_index

    def thinned_indices(self) -> np.ndarray:
        return np.arange(self._start_index, self._end_index + 1, self.stride,
                         dtype=np.int64)

    @property
    def n_points(self) -> int:
        return int(self.thinned_indices().shape[0])

    def stamp_dates(self) -> np.ndarray:
        return self.source.dates[self.thinned_indices()]

    def to_grid(self) -> AnalysisGrid:
        idx = self.thinned_indices()
        return AnalysisGrid(times=idx.astype(np.float64),
                            values=self.source.values[idx])


@dataclass(frozen=True)
class SegmentAnalysis:
    spec: SegmentSpec
    post: CPPosterior
    marginals: list[MarginalPDF]
    fit: SegmentFit

    def map_dates(self) -> np.ndarray:
        """Calendar dates of the MAP change points."""
        idx = self.spec.thinned_indices()[list(self.post.map_config)]
        return self.spec.source.dates[idx]


def analyze_segment(spec: SegmentSpec, m: int, **posterior_kwargs) -> SegmentAnalysis:
    """Exact change-point analysis of one thinned segment.

    The grid keeps the source-series indices as times, so change-point
    locations read directly as positions in the full series.  Uncertainty
    bands are included when the segment is long enough (N - m - 4 > 0)
    and omitted otherwise.
    """
    n = spec.n_points
    if n < m + 3:
        raise ValueError(
            f"segment has {n} thinned points; m={m} needs at least {m + 3} "
            f"(extend the segment or lower the stride)"
        )
    post = posterior(spec.to_grid(), m, **posterior_kwargs)
    fit = segment_fit(post, include_bands=post.var_available)
    return SegmentAnalysis(spec=spec, post=post,
                           marginals=marginal_pdfs(post), fit=fit)


def update_series(spec: SegmentSpec, new_end, source: CorrelationSeries | None = None
                  ) -> SegmentSpec:
    """Advance a segment's end to ``new_end`` (strictly later stamps required).

    When ``source`` is given it must extend the spec's series (identical
    stamps and values on the overlap); this is the path for newly arrived
    data.  The start anchor and stride are preserved, so the previous
    thinned stamps are a prefix of the new ones.
    """
    if source is None:
        source = spec.source
    else:
        old = spec.source
        if len(source) < len(old):
            raise ValueError("updated series is shorter than the current one")
        if not np.array_equal(source.dates[: len(old)], old.dates) or not np.array_equal(
                source.values[: len(old)], old.values):
            raise ValueError(
                "updated series does not extend the current one (overlap differs)"
            )
    new = SegmentSpec(source=source, start=spec.start, end=new_end,
                      stride=spec.stride)
    if new.end_index <= spec.end_index:
        raise ValueError(
            f"new end {np.datetime64(new_end, 'D')} adds no stamps beyond "
            f"{spec.source.dates[spec.end_index]}"
        )
    return new


@dataclass(frozen=True)
class SensitivityResult:
    """Outcome of the detection-horizon search for one onset.

    horizon_days counts source stamps between the onset and the first
    segment end whose leading change-point marginal peaks within
    tolerance_days of the onset; None when no evaluated segment end
    detected it.  ``trace`` keeps one row per evaluated candidate.
    """

    onset: np.datetime64
    m: int
    stride: int
    tolerance_days: int
    detected: bool
    detection_cut: np.datetime64 | None
    horizon_days: int | None
    map_location: np.datetime64 | None
    stamp_lag_days: int | None
    trace: list[dict] = field(default_factory=list)


def sensitivity_horizon(source: CorrelationSeries, start, onset, m: int = 1,
                        tolerance_days: int = 100,
                        stride: int = DEFAULT_ONLINE_STRIDE,
                        workers: int | None = None, budget=None,
                        backend: str | None = None) -> SensitivityResult:
    """How many days of post-onset data the detection needs.

    Candidate segment ends are the anchored thinned stamps at or after the
    onset (with enough points for m change points).  Candidates are
    evaluated in order of increasing end; for each, the marginal of the
    first change point is computed exactly and its mode compared to the
    onset.  The scan stops at the first hit, so the reported horizon is
    never earlier than a rejected candidate.
    """
    if m < 1:
        raise ValueError(f"sensitivity search needs m >= 1, got {m}")
    if tolerance_days < 0:
        raise ValueError(f"tolerance_days must be >= 0, got {tolerance_days}")
    if not isinstance(stride, (int, np.integer)) or stride < 1:
        raise ValueError(f"stride must be an integer >= 1, got {stride}")
    start_idx = _locate(source, start, "segment start")
    onset_idx = _locate(source, onset, "onset")
    if onset_idx <= start_idx:
        raise ValueError(
            f"onset {np.datetime64(onset, 'D')} must fall after the segment "
            f"start stamp {source.dates[start_idx]}"
        )
    last = len(source) - 1
    all_stamps = np.arange(start_idx, last + 1, stride, dtype=np.int64)
    need = m + 3
    cand_mask = (all_stamps >= onset_idx) & (np.arange(len(all_stamps)) + 1 >= need)
    candidates = all_stamps[cand_mask]
    if candidates.shape[0] == 0:
        raise ValueError(
            f"no viable segment end: the series has too few stamps after the "
            f"onset for m={m} at stride {stride}"
        )
    lag = None
    if source.window_length is not None and source.center_offset is not None:
        lag = int(source.window_length) - 1 - int(source.center_offset)

    kwargs = {"workers": workers, "backend": backend,
              "want_fit": False, "want_marginals": True}
    if budget is not None:
        kwargs["budget"] = budget
    trace: list[dict] = []
    detected = False
    detection_cut = None
    horizon = None
    map_loc = None
    for cut in candidates:
        idx = np.arange(start_idx, cut + 1, stride, dtype=np.int64)
        grid = AnalysisGrid(times=idx.astype(np.float64),
                            values=source.values[idx])
        post = posterior(grid, m, **kwargs)
        mass = post.marginals[0]
        local = int(np.argmax(mass))  # earliest grid index on ties
        map_src = int(idx[local])
        hit = abs(map_src - onset_idx) <= tolerance_days
        trace.append({
            "cut_index": int(cut),
            "cut_date": source.dates[cut],
            "map_index": map_src,
            "map_date": source.dates[map_src],
            "map_mass": float(mass[local]),
            "hit": bool(hit),
        })
        if hit:
            detected = True
            detection_cut = source.dates[cut]
            horizon = int(cut - onset_idx)
            map_loc = source.dates[map_src]
            break
    return SensitivityResult(
        onset=source.dates[onset_idx], m=int(m), stride=int(stride),
        tolerance_days=int(tolerance_days), detected=detected,
        detection_cut=detection_cut, horizon_days=horizon,
        map_location=map_loc, stamp_lag_days=lag, trace=trace)
