"""Lexicographic enumeration of change-point configurations.

A configuration of m change points on an N-point grid is a strictly
increasing m-tuple of interior grid indices drawn from {1, ..., N-2}
(the two boundary points always carry knots and are never change
points).  Configurations are ordered lexicographically, and the
functions here count, rank, unrank and advance them without ever
materializing the full set, so the enumeration scales to hundreds of
millions of configurations.
"""
from __future__ import annotations

import math
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "count_configurations",
    "unrank",
    "rank",
    "successor",
    "iter_configurations",
    "comb_table",
]


def _interior_size(n_points: int, m: int) -> int:
    if not isinstance(n_points, (int, np.integer)):
        raise TypeError(f"n_points must be an integer, got {type(n_points).__name__}")
    if not isinstance(m, (int, np.integer)):
        raise TypeError(f"m must be an integer, got {type(m).__name__}")
    if n_points < 3:
        raise ValueError(f"grid needs at least 3 points, got {n_points}")
    if m < 0:
        raise ValueError(f"number of change points must be >= 0, got {m}")
    return int(n_points) - 2


def count_configurations(n_points: int, m: int) -> int:
    """Number of ways to place m change points on an n_points grid.

    Equals binomial(n_points - 2, m): change points live on the interior
    indices {1, ..., n_points - 2}.  Returns 0 when m exceeds the number
    of interior points.  Exact integer arithmetic throughout.
    """
    n_int = _interior_size(n_points, m)
    if m > n_int:
        return 0
    return math.comb(n_int, m)


def unrank(rank_index: int, n_points: int, m: int) -> tuple[int, ...]:
    """Configuration at position ``rank_index`` in lexicographic order.

    Parameters
    ----------
    rank_index : int
        Zero-based lexicographic rank, 0 <= rank_index < Z_m.
    n_points : int
        Grid size N.
    m : int
        Number of change points.

    Returns
    -------
    tuple of int
        Strictly increasing interior indices, each in [1, n_points - 2].
    """
    n_int = _interior_size(n_points, m)
    total = count_configurations(n_points, m)
    if not 0 <= rank_index < total:
        raise ValueError(
            f"rank {rank_index} out of range for {total} configurations"
        )
    r = int(rank_index)
    out = []
    v = 1
    remaining = m
    while remaining > 0:
        # configurations starting at v: choose the rest from the values above v
        c = math.comb(n_int - v, remaining - 1)
        if r < c:
            out.append(v)
            remaining -= 1
        else:
            r -= c
        v += 1
    return tuple(out)


def rank(config: Sequence[int], n_points: int) -> int:
    """Lexicographic rank of a configuration (inverse of :func:`unrank`)."""
    cfg = _validate_config(config, n_points)
    m = len(cfg)
    n_int = n_points - 2
    r = 0
    prev = 0
    for j, e in enumerate(cfg):
        for v in range(prev + 1, e):
            r += math.comb(n_int - v, m - j - 1)
        prev = e
    return r


def successor(config: Sequence[int], n_points: int) -> tuple[int, ...] | None:
    """Next configuration in lexicographic order, or None at the last one."""
    cfg = list(_validate_config(config, n_points))
    m = len(cfg)
    n_int = n_points - 2
    # rightmost position that can still advance; positions to its right reset
    for j in range(m - 1, -1, -1):
        if cfg[j] < n_int - (m - 1 - j):
            cfg[j] += 1
            for i in range(j + 1, m):
                cfg[i] = cfg[i - 1] + 1
            return tuple(cfg)
    return None


def iter_configurations(
    n_points: int, m: int, start_rank: int = 0
) -> Iterator[tuple[int, ...]]:
    """Yield configurations in lexicographic order starting at start_rank."""
    total = count_configurations(n_points, m)
    if total == 0 or start_rank >= total:
        return
    cfg: tuple[int, ...] | None = unrank(start_rank, n_points, m)
    while cfg is not None:
        yield cfg
        cfg = successor(cfg, n_points)


def comb_table(n_points: int, m: int) -> np.ndarray:
    """Binomial table C[a, b] = binomial(a, b) for the enumeration kernels.

    Shape (n_points - 1, m + 1), dtype int64.  Requires the configuration
    count itself to fit signed 64-bit rank arithmetic; larger intermediate
    binomials (possible when m is close to the interior size) are clipped
    at 2**62, which preserves every rank comparison because all ranks are
    strictly below the clip.
    """
    n_int = _interior_size(n_points, m)
    if m > 0 and m <= n_int and math.comb(n_int, m) >= 2**62:
        raise OverflowError("configuration count does not fit in int64 rank arithmetic")
    clip = 2**62
    rows: list[list[int]] = [[1] + [0] * m]
    for a in range(1, n_int + 1):
        prev = rows[-1]
        row = [1] + [0] * m
        for b in range(1, min(a, m) + 1):
            row[b] = min(prev[b - 1] + prev[b], clip)
        rows.append(row)
    return np.array(rows, dtype=np.int64)


def _validate_config(config: Sequence[int], n_points: int) -> tuple[int, ...]:
    n_int = _interior_size(n_points, len(config))
    cfg = tuple(int(e) for e in config)
    prev = 0
    for e in cfg:
        if not 1 <= e <= n_int:
            raise ValueError(
                f"change point {e} outside interior range [1, {n_int}]"
            )
        if e <= prev:
            raise ValueError(f"change points must be strictly increasing, got {cfg}")
        prev = e
    return cfg
