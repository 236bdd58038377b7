"""Vectorized NumPy implementation of the evidence-scan kernels.

This module mirrors the compiled extension (``trendscan._native``) and is
used when the extension is unavailable, and as a cross-check backend.  Both
passes work on half-open lexicographic rank ranges so the caller can chunk
the enumeration across workers and merge partial results in chunk order.

The segment model places knots at grid index 0, the m change points, and
index N-1.  The design matrix of hat (linear interpolation) bases has a
tridiagonal Gram matrix whose entries are differences of prefix sums, so
each configuration costs O(m) regardless of N.
"""
from __future__ import annotations

import numpy as np

BATCH = 16384


def _batch_config(ranks: np.ndarray, n_int: int, m: int, ctab: np.ndarray) -> np.ndarray:
    """Unrank a vector of lexicographic ranks into interior-index tuples.

    Uses the complement duality between lexicographic and colexicographic
    order so the whole batch is unranked with m searchsorted passes.
    Returns shape (len(ranks), m), values in [1, n_int].
    """
    B = ranks.shape[0]
    if m == 0:
        return np.zeros((B, 0), dtype=np.int64)
    Z = int(ctab[n_int, m])
    rr = (Z - 1) - ranks.astype(np.int64)
    c = np.empty((B, m), dtype=np.int64)
    for j in range(m, 0, -1):
        col = ctab[:, j]
        idx = np.searchsorted(col, rr, side="right") - 1
        rr = rr - col[idx]
        c[:, j - 1] = idx
    return (n_int - 1) - c[:, ::-1] + 1


def _factorize(t, pt, ptt, py, pty, m, E):
    """Tridiagonal Gram system and its LDL^T factorization for a batch.

    Returns (K, ta, tb, inv, d, lfac, z) where K holds the knot indices,
    d/lfac are the LDL^T factors and z = L^{-1} rhs.
    """
    n = t.shape[0]
    B = E.shape[0]
    M = m + 2
    K = np.empty((B, M), dtype=np.int64)
    K[:, 0] = 0
    if m:
        K[:, 1 : m + 1] = E
    K[:, M - 1] = n - 1
    a = K[:, :-1]
    b = K[:, 1:]
    rend = b.copy()
    rend[:, -1] = n  # last segment is closed: includes grid point N-1
    ta = t[a]
    tb = t[b]
    inv = 1.0 / (tb - ta)
    cnt = (rend - a).astype(np.float64)
    St = pt[rend] - pt[a]
    Stt = ptt[rend] - ptt[a]
    Sy = py[rend] - py[a]
    Sty = pty[rend] - pty[a]
    inv2 = inv * inv
    vv = (cnt * tb * tb - 2.0 * tb * St + Stt) * inv2
    uu = (cnt * ta * ta - 2.0 * ta * St + Stt) * inv2
    uv = ((ta + tb) * St - Stt - cnt * ta * tb) * inv2
    vy = (tb * Sy - Sty) * inv
    uy = (Sty - ta * Sy) * inv
    diag = np.zeros((B, M))
    diag[:, :-1] += vv
    diag[:, 1:] += uu
    rhs = np.zeros((B, M))
    rhs[:, :-1] += vy
    rhs[:, 1:] += uy
    d = np.empty((B, M))
    lfac = np.empty((B, M - 1))
    z = np.empty((B, M))
    d[:, 0] = diag[:, 0]
    z[:, 0] = rhs[:, 0]
    for i in range(1, M):
        l = uv[:, i - 1] / d[:, i - 1]
        lfac[:, i - 1] = l
        d[:, i] = diag[:, i] - uv[:, i - 1] * l
        z[:, i] = rhs[:, i] - l * z[:, i - 1]
    return K, ta, tb, inv, d, lfac, z


def _log_evidence_batch(t, pt, ptt, py, pty, syy, m, E, rho_floor, log_const):
    n = t.shape[0]
    dof = n - (m + 2)
    K, ta, tb, inv, d, lfac, z = _factorize(t, pt, ptt, py, pty, m, E)
    logdet = np.log(d).sum(axis=1)
    quad = (z * z / d).sum(axis=1)
    rho = np.maximum(syy - quad, rho_floor)
    le = -0.5 * logdet - 0.5 * dof * np.log(rho) + log_const
    return le, K, ta, tb, inv, d, lfac, z, rho


def scan_chunk(t, pt, ptt, py, pty, syy, m, r0, r1, rho_floor, log_const, ctab,
               top_k, store=None):
    """Evidence scan over ranks [r0, r1).

    Returns (run_max, run_sum, top_logs, top_ranks): streaming log-sum-exp
    state (log normalizer of the chunk is run_max + log(run_sum)) and the
    chunk's top_k configurations by (log evidence desc, rank asc).  When
    ``store`` is given it receives the per-rank log evidences.
    """
    n = t.shape[0]
    n_int = n - 2
    run_max = -np.inf
    run_sum = 0.0
    top_logs = np.empty(0)
    top_ranks = np.empty(0, dtype=np.int64)
    pos = r0
    while pos < r1:
        hi = min(pos + BATCH, r1)
        ranks = np.arange(pos, hi, dtype=np.int64)
        E = _batch_config(ranks, n_int, m, ctab)
        le = _log_evidence_batch(t, pt, ptt, py, pty, syy, m, E,
                                 rho_floor, log_const)[0]
        if store is not None:
            store[pos - r0 : hi - r0] = le
        bmax = float(le.max())
        if bmax > run_max:
            run_sum = run_sum * np.exp(run_max - bmax) + float(np.exp(le - bmax).sum())
            run_max = bmax
        else:
            run_sum += float(np.exp(le - run_max).sum())
        cand_logs = np.concatenate([top_logs, le])
        cand_ranks = np.concatenate([top_ranks, ranks])
        order = np.lexsort((cand_ranks, -cand_logs))[: int(top_k)]
        top_logs = cand_logs[order]
        top_ranks = cand_ranks[order]
        pos = hi
    return run_max, run_sum, top_logs, top_ranks


def accumulate_chunk(t, pt, ptt, py, pty, syy, m, r0, r1, rho_floor, log_const,
                     log_norm, want_var, ctab, marg, d_const, d_slope,
                     d_q0, d_q1, d_q2):
    """Posterior-weighted accumulation over ranks [r0, r1).

    Adds into the caller's arrays: ``marg[j, i]`` gains the posterior mass
    of configurations whose j-th change point sits at grid index i, and the
    d_* arrays gain difference-array contributions of the per-interval
    polynomial coefficients of the posterior mean (const, slope) and, when
    ``want_var``, of the posterior second moment (q0 + q1 t + q2 t**2).
    """
    n = t.shape[0]
    n_int = n - 2
    dof = n - (m + 2)
    pos = r0
    while pos < r1:
        hi = min(pos + BATCH, r1)
        ranks = np.arange(pos, hi, dtype=np.int64)
        E = _batch_config(ranks, n_int, m, ctab)
        le, K, ta, tb, inv, d, lfac, z, rho = _log_evidence_batch(
            t, pt, ptt, py, pty, syy, m, E, rho_floor, log_const)
        w = np.exp(le - log_norm)
        for j in range(m):
            np.add.at(marg[j], E[:, j], w)
        M = m + 2
        beta = np.empty_like(z)
        beta[:, M - 1] = z[:, M - 1] / d[:, M - 1]
        for i in range(M - 2, -1, -1):
            beta[:, i] = z[:, i] / d[:, i] - lfac[:, i] * beta[:, i + 1]
        if want_var:
            Sd = np.empty_like(d)
            So = np.empty_like(lfac)
            Sd[:, M - 1] = 1.0 / d[:, M - 1]
            for i in range(M - 2, -1, -1):
                So[:, i] = -lfac[:, i] * Sd[:, i + 1]
                Sd[:, i] = 1.0 / d[:, i] + lfac[:, i] * lfac[:, i] * Sd[:, i + 1]
            s2 = np.maximum(rho, 0.0) / (dof - 2)
        for j in range(m + 1):
            bl = beta[:, j]
            br = beta[:, j + 1]
            taj = ta[:, j]
            tbj = tb[:, j]
            ivj = inv[:, j]
            aK = K[:, j]
            bK = K[:, j + 1]
            a_lin = (bl * tbj - br * taj) * ivj
            b_lin = (br - bl) * ivj
            np.add.at(d_const, aK, w * a_lin)
            np.add.at(d_const, bK, -(w * a_lin))
            np.add.at(d_slope, aK, w * b_lin)
            np.add.at(d_slope, bK, -(w * b_lin))
            if want_var:
                Waa = Sd[:, j]
                Wbb = Sd[:, j + 1]
                Wab = So[:, j]
                iv2 = ivj * ivj
                q2 = b_lin * b_lin + s2 * (Waa + Wbb - 2.0 * Wab) * iv2
                q1 = 2.0 * a_lin * b_lin + 2.0 * s2 * (
                    (taj + tbj) * Wab - tbj * Waa - taj * Wbb) * iv2
                q0 = a_lin * a_lin + s2 * (
                    tbj * tbj * Waa + taj * taj * Wbb - 2.0 * taj * tbj * Wab) * iv2
                np.add.at(d_q0, aK, w * q0)
                np.add.at(d_q0, bK, -(w * q0))
                np.add.at(d_q1, aK, w * q1)
                np.add.at(d_q1, bK, -(w * q1))
                np.add.at(d_q2, aK, w * q2)
                np.add.at(d_q2, bK, -(w * q2))
        pos = hi
