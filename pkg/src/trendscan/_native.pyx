# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled evidence-scan kernels.

Sequential enumeration of change-point configurations in lexicographic
rank order with O(m) work per configuration: the hat-basis Gram matrix is
tridiagonal and all inner products are differences of prefix sums.  The
module mirrors ``trendscan._kernel_py`` (same function signatures, same
streaming semantics) and releases the GIL inside the scan loops so chunks
can run on a thread pool.
"""
from libc.math cimport INFINITY, exp, log

import numpy as np

DEF MAX_KNOTS = 66  # supports up to 64 change points; the caller routes larger m elsewhere


cdef inline void _unrank_into(long long rank, long long n_int, long long m,
                              long long[:, ::1] ctab, long long* e) nogil:
    # direct lexicographic unranking against the binomial table
    cdef long long r = rank, v = 1, j = 0, rem = m, c
    while rem > 0:
        c = ctab[n_int - v, rem - 1]
        if r < c:
            e[j] = v
            j += 1
            rem -= 1
        else:
            r -= c
        v += 1


cdef inline bint _advance(long long* e, long long n_int, long long m) nogil:
    # lexicographic successor; returns 0 past the last configuration
    cdef long long j = m - 1, i
    while j >= 0 and e[j] == n_int - (m - 1 - j):
        j -= 1
    if j < 0:
        return 0
    e[j] += 1
    for i in range(j + 1, m):
        e[i] = e[i - 1] + 1
    return 1


cdef inline double _config_factors(double[::1] t, double[::1] pt, double[::1] ptt,
                                   double[::1] py, double[::1] pty,
                                   long long n, long long m, long long* e,
                                   double* d, double* lf, double* z) nogil:
    # assemble the tridiagonal system for one configuration and factorize;
    # returns log det(G^T G); d/lf/z receive the LDL^T factors and L^{-1} rhs
    cdef:
        long long M = m + 2, j, a, b, rend
        double diag[MAX_KNOTS]
        double off[MAX_KNOTS]
        double rhs[MAX_KNOTS]
        double ta, tb, iv, iv2, cnt, St, Stt, Sy, Sty
        double vv, uu, uv, vy, uy, l, logdet
    for j in range(m + 1):
        a = 0 if j == 0 else e[j - 1]
        b = n - 1 if j == m else e[j]
        rend = n if j == m else b
        ta = t[a]
        tb = t[b]
        iv = 1.0 / (tb - ta)
        iv2 = iv * iv
        cnt = <double> (rend - a)
        St = pt[rend] - pt[a]
        Stt = ptt[rend] - ptt[a]
        Sy = py[rend] - py[a]
        Sty = pty[rend] - pty[a]
        vv = (cnt * tb * tb - 2.0 * tb * St + Stt) * iv2
        uu = (cnt * ta * ta - 2.0 * ta * St + Stt) * iv2
        uv = ((ta + tb) * St - Stt - cnt * ta * tb) * iv2
        vy = (tb * Sy - Sty) * iv
        uy = (Sty - ta * Sy) * iv
        if j == 0:
            diag[0] = vv
            rhs[0] = vy
        else:
            diag[j] += vv
            rhs[j] += vy
        diag[j + 1] = uu
        rhs[j + 1] = uy
        off[j] = uv
    d[0] = diag[0]
    z[0] = rhs[0]
    logdet = log(d[0])
    for j in range(1, M):
        l = off[j - 1] / d[j - 1]
        lf[j - 1] = l
        d[j] = diag[j] - off[j - 1] * l
        z[j] = rhs[j] - l * z[j - 1]
        logdet += log(d[j])
    return logdet


cdef inline double _log_evidence_one(double[::1] t, double[::1] pt, double[::1] ptt,
                                     double[::1] py, double[::1] pty, double syy,
                                     long long n, long long m, long long* e,
                                     double rho_floor, double log_const,
                                     double* d, double* lf, double* z,
                                     double* rho_out) nogil:
    cdef long long M = m + 2, i
    cdef double logdet, quad = 0.0, rho, dof = <double> (n - M)
    logdet = _config_factors(t, pt, ptt, py, pty, n, m, e, d, lf, z)
    for i in range(M):
        quad += z[i] * z[i] / d[i]
    rho = syy - quad
    rho_out[0] = rho
    if rho < rho_floor:
        rho = rho_floor
    return -0.5 * logdet - 0.5 * dof * log(rho) + log_const


cdef inline void _top_insert(double* tl, long long* tr, long long* n_top,
                             long long cap, double le, long long rk) nogil:
    cdef long long i
    if n_top[0] < cap:
        i = n_top[0]
        n_top[0] += 1
    else:
        if le <= tl[cap - 1]:
            return
        i = cap - 1
    while i > 0 and tl[i - 1] < le:
        tl[i] = tl[i - 1]
        tr[i] = tr[i - 1]
        i -= 1
    tl[i] = le
    tr[i] = rk


def scan_chunk(double[::1] t, double[::1] pt, double[::1] ptt, double[::1] py,
               double[::1] pty, double syy, long long m, long long r0,
               long long r1, double rho_floor, double log_const,
               long long[:, ::1] ctab, long long top_k, store=None):
    """Evidence scan over ranks [r0, r1); see the NumPy twin for semantics."""
    if m > MAX_KNOTS - 2:
        raise ValueError("compiled kernel supports at most 64 change points")
    cdef:
        long long n = t.shape[0], n_int = n - 2
        long long e[MAX_KNOTS]
        double d[MAX_KNOTS]
        double lf[MAX_KNOTS]
        double z[MAX_KNOTS]
        double run_max = -INFINITY, run_sum = 0.0, le, rho
        long long pos, n_top = 0
        bint has_store = store is not None
        double[::1] sv
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    tl_arr = np.empty(top_k, dtype=np.float64)
    tr_arr = np.empty(top_k, dtype=np.int64)
    cdef double[::1] tl = tl_arr
    cdef long long[::1] tr = tr_arr
    sv = store if has_store else np.empty(0, dtype=np.float64)
    if r1 <= r0:
        return -INFINITY, 0.0, tl_arr[:0], tr_arr[:0]
    with nogil:
        _unrank_into(r0, n_int, m, ctab, e)
        for pos in range(r0, r1):
            le = _log_evidence_one(t, pt, ptt, py, pty, syy, n, m, e,
                                   rho_floor, log_const, d, lf, z, &rho)
            if has_store:
                sv[pos - r0] = le
            if le > run_max:
                if run_max == -INFINITY:
                    run_sum = 1.0
                else:
                    run_sum = run_sum * exp(run_max - le) + 1.0
                run_max = le
            else:
                run_sum += exp(le - run_max)
            _top_insert(&tl[0], &tr[0], &n_top, top_k, le, pos)
            if pos + 1 < r1:
                _advance(e, n_int, m)
    return run_max, run_sum, tl_arr[:n_top], tr_arr[:n_top]


def accumulate_chunk(double[::1] t, double[::1] pt, double[::1] ptt, double[::1] py,
                     double[::1] pty, double syy, long long m, long long r0,
                     long long r1, double rho_floor, double log_const,
                     double log_norm, bint want_var, long long[:, ::1] ctab,
                     double[:, ::1] marg, double[::1] d_const, double[::1] d_slope,
                     double[::1] d_q0, double[::1] d_q1, double[::1] d_q2):
    """Posterior-weighted accumulation over ranks [r0, r1); adds into the arrays."""
    if m > MAX_KNOTS - 2:
        raise ValueError("compiled kernel supports at most 64 change points")
    cdef:
        long long n = t.shape[0], n_int = n - 2, M = m + 2
        long long e[MAX_KNOTS]
        double d[MAX_KNOTS]
        double lf[MAX_KNOTS]
        double z[MAX_KNOTS]
        double beta[MAX_KNOTS]
        double Sd[MAX_KNOTS]
        double So[MAX_KNOTS]
        double le, rho, w, s2, ta, tb, iv, iv2, a_lin, b_lin
        double Waa, Wbb, Wab, q0v, q1v, q2v
        long long pos, i, j, a, b
        double dofm2 = <double> (n - M - 2)
    if r1 <= r0:
        return
    with nogil:
        _unrank_into(r0, n_int, m, ctab, e)
        for pos in range(r0, r1):
            le = _log_evidence_one(t, pt, ptt, py, pty, syy, n, m, e,
                                   rho_floor, log_const, d, lf, z, &rho)
            w = exp(le - log_norm)
            for j in range(m):
                marg[j, e[j]] += w
            beta[M - 1] = z[M - 1] / d[M - 1]
            for i in range(M - 2, -1, -1):
                beta[i] = z[i] / d[i] - lf[i] * beta[i + 1]
            if want_var:
                if rho < 0.0:
                    rho = 0.0
                s2 = rho / dofm2
                Sd[M - 1] = 1.0 / d[M - 1]
                for i in range(M - 2, -1, -1):
                    So[i] = -lf[i] * Sd[i + 1]
                    Sd[i] = 1.0 / d[i] + lf[i] * lf[i] * Sd[i + 1]
            for j in range(m + 1):
                a = 0 if j == 0 else e[j - 1]
                b = n - 1 if j == m else e[j]
                ta = t[a]
                tb = t[b]
                iv = 1.0 / (tb - ta)
                a_lin = (beta[j] * tb - beta[j + 1] * ta) * iv
                b_lin = (beta[j + 1] - beta[j]) * iv
                d_const[a] += w * a_lin
                d_const[b] -= w * a_lin
                d_slope[a] += w * b_lin
                d_slope[b] -= w * b_lin
                if want_var:
                    iv2 = iv * iv
                    Waa = Sd[j]
                    Wbb = Sd[j + 1]
                    Wab = So[j]
                    q2v = b_lin * b_lin + s2 * (Waa + Wbb - 2.0 * Wab) * iv2
                    q1v = 2.0 * a_lin * b_lin + 2.0 * s2 * (
                        (ta + tb) * Wab - tb * Waa - ta * Wbb) * iv2
                    q0v = a_lin * a_lin + s2 * (
                        tb * tb * Waa + ta * ta * Wbb - 2.0 * ta * tb * Wab) * iv2
                    d_q0[a] += w * q0v
                    d_q0[b] -= w * q0v
                    d_q1[a] += w * q1v
                    d_q1[b] -= w * q1v
                    d_q2[a] += w * q2v
                    d_q2[b] -= w * q2v
            if pos + 1 < r1:
                _advance(e, n_int, m)
