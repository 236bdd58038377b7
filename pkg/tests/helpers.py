"""Independent reference implementations used as test oracles.

Everything here is deliberately naive: explicit design matrices built
with ``np.interp``, dense linear algebra, itertools enumeration, and
direct numerical integration.  None of it shares code with the package
kernels, so agreement is meaningful.

Both the package and this oracle center times and values before
factorizing; centering is part of the model's stated translation
invariance, not of the algorithm under test.
"""
from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.special import gammaln, logsumexp


def hat_matrix(times: np.ndarray, knots: list[int]) -> np.ndarray:
    """Design matrix of the continuous piecewise-linear interpolant.

    Column j is the hat function that is 1 at knot j and 0 at the other
    knots, evaluated at every ``times`` entry.  Built via np.interp so it
    shares nothing with the prefix-sum construction.
    """
    times = np.asarray(times, dtype=float)
    kt = times[np.asarray(knots, dtype=int)]
    cols = []
    for j in range(len(knots)):
        e = np.zeros(len(knots))
        e[j] = 1.0
        cols.append(np.interp(times, kt, e))
    return np.column_stack(cols)


def oracle_log_evidence(times, values, config) -> float:
    """Closed-form log evidence from explicit dense linear algebra."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(t)
    tc = t - t.mean()
    yc = y - y.mean()
    knots = [0] + [int(c) for c in config] + [n - 1]
    big_m = len(knots)
    g = hat_matrix(tc, knots)
    beta, *_ = np.linalg.lstsq(g, yc, rcond=None)
    rho = float(((yc - g @ beta) ** 2).sum())
    rho = max(rho, max(1e-12 * float(yc @ yc), 1e-300))
    sld = np.linalg.slogdet(g.T @ g)[1]
    dof = n - big_m
    return (-0.5 * sld - 0.5 * dof * math.log(rho)
            + float(gammaln(dof / 2.0)) - 0.5 * dof * math.log(math.pi)
            - math.log(2.0))


def quadrature_log_evidence(times, values, config, n_beta=32, n_sigma=240):
    """Brute-force numeric marginalization over ordinates and noise scale.

    Gauss-Legendre product grid over the M knot ordinates (flat prior)
    nested inside a log-spaced trapezoid over sigma (Jeffreys 1/sigma
    prior).  Only practical for M = 3, which covers the m = 1 checks.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(t)
    tc = t - t.mean()
    yc = y - y.mean()
    knots = [0] + [int(c) for c in config] + [n - 1]
    big_m = len(knots)
    if big_m != 3:
        raise ValueError("quadrature oracle supports exactly one change point")
    g = hat_matrix(tc, knots)
    beta_hat, *_ = np.linalg.lstsq(g, yc, rcond=None)
    rho = float(((yc - g @ beta_hat) ** 2).sum())
    s_star = math.sqrt(max(rho, 1e-30) / max(n - big_m, 1))
    cov_unit = np.linalg.inv(g.T @ g)
    sd_unit = np.sqrt(np.diag(cov_unit))

    nodes, weights = np.polynomial.legendre.leggauss(n_beta)
    ls_grid = np.linspace(math.log(s_star) - 8.0, math.log(s_star) + 8.0,
                          n_sigma)
    h = ls_grid[1] - ls_grid[0]
    w3 = (weights[:, None, None] * weights[None, :, None]
          * weights[None, None, :])
    outer = np.empty(n_sigma)
    for i, ls in enumerate(ls_grid):
        sig = math.exp(ls)
        half = 8.0 * sd_unit * sig
        axes = [beta_hat[j] + half[j] * nodes for j in range(3)]
        b0, b1, b2 = np.meshgrid(*axes, indexing="ij")
        resid = (yc[None, None, None, :]
                 - b0[..., None] * g[:, 0]
                 - b1[..., None] * g[:, 1]
                 - b2[..., None] * g[:, 2])
        ll = (-(n / 2.0) * math.log(2.0 * math.pi * sig * sig)
              - (resid ** 2).sum(-1) / (2.0 * sig * sig))
        mx = ll.max()
        outer[i] = (mx + math.log(float((np.exp(ll - mx) * w3).sum()))
                    + math.log(half[0] * half[1] * half[2]))
    mx = outer.max()
    return float(mx + math.log(np.exp(outer - mx).sum() * h))


def all_configs(n: int, m: int):
    return list(itertools.combinations(range(1, n - 1), m))


def oracle_posterior(times, values, m):
    """Exhaustive posterior: per-config log evidence, normalizer, marginals.

    Returns a dict with keys configs, log_ev, log_norm, probs, marginals
    (m, N), map_config.
    """
    t = np.asarray(times, dtype=float)
    n = len(t)
    configs = all_configs(n, m)
    log_ev = np.array([oracle_log_evidence(times, values, c)
                       for c in configs])
    log_norm = float(logsumexp(log_ev))
    probs = np.exp(log_ev - log_norm)
    marg = np.zeros((m, n))
    for c, p in zip(configs, probs):
        for j, e in enumerate(c):
            marg[j, e] += p
    order = int(np.argmax(log_ev))  # first max = lexicographically earliest
    return {
        "configs": configs,
        "log_ev": log_ev,
        "log_norm": log_norm,
        "probs": probs,
        "marginals": marg,
        "map_config": configs[order],
    }


def oracle_fit_moments(times, values, m, eval_x=None):
    """Posterior mean and second moment of the trend at eval_x.

    Mixture over configurations of the per-config Student predictive:
    mean g(x) . beta_hat and variance s^2 g(x)^T (G^T G)^{-1} g(x) with
    s^2 = rho / (N - M - 2).  Returns (mean, variance); the variance is
    NaN when N - M - 2 <= 0 for the requested m.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    n = len(t)
    if eval_x is None:
        eval_x = t
    eval_x = np.asarray(eval_x, dtype=float)
    tm, ym = t.mean(), y.mean()
    tc, yc = t - tm, y - ym
    xc = eval_x - tm
    post = oracle_posterior(times, values, m)
    mean = np.zeros(len(eval_x))
    second = np.zeros(len(eval_x))
    for c, p in zip(post["configs"], post["probs"]):
        knots = [0] + [int(e) for e in c] + [n - 1]
        big_m = len(knots)
        g = hat_matrix(tc, knots)
        beta, *_ = np.linalg.lstsq(g, yc, rcond=None)
        rho = float(((yc - g @ beta) ** 2).sum())
        gx = _hat_eval(tc, knots, xc)
        mu = gx @ beta
        dofm2 = n - big_m - 2
        if dofm2 > 0:
            s2 = max(rho, 0.0) / dofm2
            cov = np.linalg.inv(g.T @ g)
            var = s2 * np.einsum("ij,jk,ik->i", gx, cov, gx)
        else:
            var = np.full(len(eval_x), np.nan)
        mean += p * mu
        second += p * (mu ** 2 + var)
    return mean + ym, second - mean ** 2


def _hat_eval(tc, knots, xc):
    """Hat basis at arbitrary x, extrapolating the boundary segments.

    Matches the piecewise-linear model's convention: x outside the grid
    continues the first/last segment's line.
    """
    kt = tc[np.asarray(knots, dtype=int)]
    big_m = len(knots)
    seg = np.clip(np.searchsorted(kt, xc, side="right") - 1, 0, big_m - 2)
    out = np.zeros((len(xc), big_m))
    left = kt[seg]
    right = kt[seg + 1]
    w = (xc - left) / (right - left)
    out[np.arange(len(xc)), seg] = 1.0 - w
    out[np.arange(len(xc)), seg + 1] = w
    return out


def make_noisy_series(n, seed, trend_scale=0.3, noise=0.6):
    """Integer-stamped test series with enough noise that rho stays
    comfortably above the floor for every configuration."""
    rng = np.random.default_rng(seed)
    t = np.arange(n, dtype=float)
    y = trend_scale * t + noise * rng.standard_normal(n)
    return t, y


def business_dates(start, count):
    """ISO date strings for `count` weekdays starting at `start`."""
    from datetime import date, timedelta
    out = []
    d = date.fromisoformat(start)
    while len(out) < count:
        if d.weekday() < 5:
            out.append(d.isoformat())
        d += timedelta(days=1)
    return out


def write_price_csv(path, dates, tickers, prices):
    """Minimal writer for test fixtures; empty cell for NaN."""
    with open(path, "w") as f:
        f.write("date," + ",".join(tickers) + "\n")
        for i, d in enumerate(dates):
            cells = []
            for j in range(len(tickers)):
                v = prices[i][j]
                cells.append("" if v != v else repr(float(v)))
            f.write(d + "," + ",".join(cells) + "\n")
