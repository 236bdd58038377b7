"""Price panel loading and cleaning.

Input is a wide CSV: a ``date`` column of ISO-8601 calendar dates, one
column per ticker, empty cells for missing quotes.  The cleaning pipeline
is: load -> (optionally restrict the period) -> drop low-coverage tickers
-> fill the remaining gaps by linear interpolation on the date axis, with
constant extension at the boundaries.  After filling, every price must be
positive; later stages divide by prices.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import date
from pathlib import Path

import numpy as np

__all__ = [
    "PricePanel",
    "load_price_csv",
    "save_price_csv",
    "filter_coverage",
    "interpolate_missing",
    "restrict_period",
]


@dataclass(frozen=True)
class PricePanel:
    """Dates x tickers price matrix; NaN marks a missing quote."""

    dates: np.ndarray  # datetime64[D], strictly increasing
    tickers: tuple[str, ...]
    prices: np.ndarray  # float64, shape (len(dates), len(tickers))

    def __post_init__(self):
        d = np.asarray(self.dates, dtype="datetime64[D]")
        p = np.asarray(self.prices, dtype=np.float64)
        if d.ndim != 1:
            raise ValueError("dates must be one-dimensional")
        if p.shape != (d.shape[0], len(self.tickers)):
            raise ValueError(
                f"prices shape {p.shape} does not match "
                f"{d.shape[0]} dates x {len(self.tickers)} tickers"
            )
        if d.shape[0] == 0:
            raise ValueError("panel has no rows")
        if np.any(np.diff(d) <= np.timedelta64(0, "D")):
            raise ValueError("dates must be strictly increasing")
        d.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "dates", d)
        object.__setattr__(self, "tickers", tuple(self.tickers))
        object.__setattr__(self, "prices", p)

    @property
    def n_dates(self) -> int:
        return int(self.dates.shape[0])

    @property
    def n_tickers(self) -> int:
        return len(self.tickers)

    def coverage(self) -> np.ndarray:
        """Fraction of non-missing quotes per ticker."""
        return np.isfinite(self.prices).mean(axis=0)

    def missing_fraction(self) -> float:
        """Overall fraction of missing cells."""
        return float(np.isnan(self.prices).mean())

    def is_complete(self) -> bool:
        return bool(np.all(np.isfinite(self.prices)))


def load_price_csv(path) -> PricePanel:
    """Load a wide price CSV.

    Rows may arrive in any order and are sorted by date; duplicate dates,
    unparseable dates, and non-numeric non-empty cells are errors that
    name the offending row and column.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: file is empty") from None
        if not header or header[0].strip() != "date":
            raise ValueError(
                f"{path}: first header column must be 'date', got "
                f"{header[0].strip() if header else ''!r}"
            )
        tickers = tuple(h.strip() for h in header[1:])
        if not tickers:
            raise ValueError(f"{path}: no ticker columns")
        if any(not t for t in tickers):
            raise ValueError(f"{path}: empty ticker name in header")
        if len(set(tickers)) != len(tickers):
            dupes = sorted({t for t in tickers if tickers.count(t) > 1})
            raise ValueError(f"{path}: duplicate ticker columns {dupes}")
        dates: list[date] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(tickers) + 1:
                raise ValueError(
                    f"{path}:{lineno}: expected {len(tickers) + 1} fields, "
                    f"got {len(row)}"
                )
            raw_date = row[0].strip()
            try:
                d = date.fromisoformat(raw_date)
            except ValueError:
                raise ValueError(
                    f"{path}:{lineno}: unparseable date {raw_date!r}"
                ) from None
            vals = []
            for tick, cell in zip(tickers, row[1:]):
                cell = cell.strip()
                if not cell:
                    vals.append(np.nan)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ValueError(
                        f"{path}:{lineno}: non-numeric value {cell!r} for "
                        f"{tick} on {d.isoformat()}"
                    ) from None
            dates.append(d)
            rows.append(vals)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    seen: dict[date, int] = {}
    for d in dates:
        seen[d] = seen.get(d, 0) + 1
    dupes = sorted(d.isoformat() for d, c in seen.items() if c > 1)
    if dupes:
        raise ValueError(f"{path}: duplicate dates {dupes}")
    darr = np.array(dates, dtype="datetime64[D]")
    parr = np.array(rows, dtype=np.float64)
    order = np.argsort(darr, kind="stable")
    return PricePanel(dates=darr[order], tickers=tickers, prices=parr[order])


def save_price_csv(panel: PricePanel, path) -> None:
    """Write a panel back to the wide CSV format (empty cell = missing)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", *panel.tickers])
        for i in range(panel.n_dates):
            row = [str(panel.dates[i])]
            for v in panel.prices[i]:
                row.append("" if np.isnan(v) else format(v, ".17g"))
            writer.writerow(row)


def restrict_period(panel: PricePanel, start=None, end=None) -> PricePanel:
    """Rows with start <= date <= end (either bound may be omitted)."""
    mask = np.ones(panel.n_dates, dtype=bool)
    if start is not None:
        mask &= panel.dates >= np.datetime64(start, "D")
    if end is not None:
        mask &= panel.dates <= np.datetime64(end, "D")
    if not mask.any():
        raise ValueError("no rows remain in the requested period")
    return PricePanel(dates=panel.dates[mask], tickers=panel.tickers,
                      prices=panel.prices[mask])


def filter_coverage(panel: PricePanel, min_fraction: float = 0.995) -> PricePanel:
    """Keep tickers whose fraction of non-missing quotes is >= min_fraction."""
    if not 0.0 < min_fraction <= 1.0:
        raise ValueError(f"min_fraction must be in (0, 1], got {min_fraction}")
    frac = panel.coverage()
    keep = frac >= min_fraction
    if not keep.any():
        raise ValueError(
            f"no ticker reaches coverage {min_fraction}; best is "
            f"{frac.max():.4f}"
        )
    tickers = tuple(t for t, k in zip(panel.tickers, keep) if k)
    return PricePanel(dates=panel.dates, tickers=tickers,
                      prices=panel.prices[:, keep])


def interpolate_missing(panel: PricePanel) -> PricePanel:
    """Fill gaps per ticker: linear between observations, constant at the ends.

    Interpolation runs on the row index (trading-day axis), not calendar
    gaps.  A ticker needs at least 2 observations.  All observed prices
    must be positive; the filled panel then is too, which later return
    computations rely on.  Already-complete panels pass through unchanged
    (the operation is idempotent).
    """
    prices = np.array(panel.prices)
    idx = np.arange(panel.n_dates, dtype=np.float64)
    for j, tick in enumerate(panel.tickers):
        col = prices[:, j]
        obs = np.isfinite(col)
        n_obs = int(obs.sum())
        if n_obs < 2:
            raise ValueError(
                f"ticker {tick} has {n_obs} observation(s); need at least 2 "
                f"to interpolate"
            )
        bad = obs & (col <= 0)
        if bad.any():
            first = int(np.argmax(bad))
            raise ValueError(
                f"ticker {tick} has non-positive price {col[first]} on "
                f"{panel.dates[first]}"
            )
        if n_obs < panel.n_dates:
            prices[:, j] = np.interp(idx, idx[obs], col[obs])
    return PricePanel(dates=panel.dates, tickers=panel.tickers, prices=prices)
