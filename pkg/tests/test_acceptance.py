"""Acceptance gate: one test per shipped guarantee.

Each test prints a single PASS line with its measured numbers; pytest -v
adds the per-test verdict.  The real-data check at the end is optional:
it runs only when TRENDSCAN_REFERENCE_SERIES points at a reference
mean-correlation CSV, and the suite passes without it.
"""
import math
import os
import resource
import time

import numpy as np
import pytest

from trendscan import (AnalysisGrid, log_model_evidence, posterior,
                       segment_fit, sensitivity_horizon, top_configurations)
from trendscan.combinatorics import (count_configurations, iter_configurations,
                                     rank, unrank)
from trendscan.preprocess import CorrelationSeries, load_series, thin

from helpers import (business_dates, make_noisy_series, oracle_fit_moments,
                     oracle_posterior, quadrature_log_evidence)


def test_criterion_1_configuration_counts():
    t0 = time.perf_counter()
    assert count_configurations(132, 2) == 8_385
    assert count_configurations(132, 3) == 357_760
    assert count_configurations(132, 4) == 11_358_880
    assert count_configurations(132, 5) == 286_243_776
    big = count_configurations(5267, 3)
    assert big == math.comb(5265, 3)
    assert abs(big / 2.435e10 - 1.0) < 0.01
    dt = time.perf_counter() - t0
    assert dt < 1.0
    print(f"\nACCEPTANCE 1 PASS: exact counts incl. C(5265,3)={big} "
          f"({dt * 1000:.0f} ms)")


def test_criterion_2_oracle_equivalence():
    t0 = time.perf_counter()
    cases = 0
    for m in range(0, 4):
        for n in range(m + 3, 13):
            t, y = make_noisy_series(n, seed=9000 + 13 * m + n)
            grid = AnalysisGrid(times=t, values=y)
            post = posterior(grid, m, workers=4)
            ref = oracle_posterior(t, y, m)

            assert post.count == len(ref["configs"])
            assert post.log_norm == pytest.approx(ref["log_norm"], rel=1e-12)
            assert post.map_config == ref["map_config"]
            if m:
                np.testing.assert_allclose(post.marginals, ref["marginals"],
                                           rtol=1e-12, atol=1e-15)
            tops = top_configurations(post, post.count)
            got = {tc.config: tc.probability for tc in tops}
            for cfg, p in zip(ref["configs"], ref["probs"]):
                assert got[cfg] == pytest.approx(p, rel=1e-12, abs=1e-300)
            # top-k order: non-increasing and aligned with the oracle's
            probs = [tc.probability for tc in tops]
            assert probs == sorted(probs, reverse=True)
            best = np.argsort(-ref["log_ev"], kind="stable")[:5]
            k5 = min(5, len(tops))
            assert [tops[i].config for i in range(k5)] == \
                [ref["configs"][j] for j in best[:k5]]

            fit = segment_fit(post, include_bands=post.var_available)
            mean_ref, var_ref = oracle_fit_moments(t, y, m)
            np.testing.assert_allclose(fit.mean, mean_ref, rtol=1e-12,
                                       atol=1e-13)
            if post.var_available:
                np.testing.assert_allclose(fit.sigma, np.sqrt(var_ref),
                                           rtol=1e-10, atol=1e-12)
            cases += 1
    dt = time.perf_counter() - t0
    assert dt < 30.0
    print(f"\nACCEPTANCE 2 PASS: {cases} (N,m) cases vs exhaustive oracle "
          f"at 1e-12 rel ({dt:.1f} s)")


def test_criterion_3_quadrature():
    t0 = time.perf_counter()
    rng = np.random.default_rng(31)
    checked = 0
    worst = 0.0
    while checked < 20:
        n = int(rng.integers(5, 9))
        t, y = make_noisy_series(n, seed=4000 + checked, noise=0.8)
        grid = AnalysisGrid(times=t, values=y)
        z = count_configurations(n, 1)
        cfg = unrank(int(rng.integers(0, z)), n, 1)
        from trendscan import log_evidence
        got = log_evidence(grid, cfg)
        want = quadrature_log_evidence(t, y, cfg)
        rel = abs(got - want) / abs(want)
        worst = max(worst, rel)
        assert rel < 1e-4
        checked += 1
    dt = time.perf_counter() - t0
    assert dt < 60.0
    print(f"\nACCEPTANCE 3 PASS: 20 quadrature instances, worst rel err "
          f"{worst:.2e} ({dt:.1f} s)")


def test_criterion_4_unranking_exhaustive():
    import itertools
    t0 = time.perf_counter()
    total = 0
    for n in range(3, 13):
        for m in range(0, 5):
            z = count_configurations(n, m)
            expected = list(itertools.combinations(range(1, n - 1), m))
            assert z == len(expected)
            walked = list(iter_configurations(n, m))
            assert walked == expected  # successor order
            for r in range(z):
                cfg = unrank(r, n, m)
                assert cfg == expected[r]
                assert rank(cfg, n) == r
                total += 1
    dt = time.perf_counter() - t0
    assert dt < 5.0
    print(f"\nACCEPTANCE 4 PASS: rank/unrank identity on {total} "
          f"configurations ({dt:.1f} s)")


def test_criterion_5_knee_recovery():
    t0 = time.perf_counter()
    n, knee = 60, 30
    t = np.arange(n, dtype=float)
    signal = np.maximum(t - knee, 0.0)  # slope 0 -> 1; change of 1.0
    map_hits = 0
    evidence_wins = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        y = signal + 0.05 * rng.standard_normal(n)
        grid = AnalysisGrid(times=t, values=y)
        post = posterior(grid, 1, want_fit=False)
        if abs(post.map_config[0] - knee) <= 2:
            map_hits += 1
        le1 = post.log_Z
        le0 = log_model_evidence(grid, 0)
        if le1 > le0:
            evidence_wins += 1
    dt = time.perf_counter() - t0
    assert map_hits >= 45, f"MAP within +-2 in only {map_hits}/50 seeds"
    assert evidence_wins >= 48, f"m=1 beat m=0 in only {evidence_wins}/50"
    assert dt < 120.0
    print(f"\nACCEPTANCE 5 PASS: MAP hits {map_hits}/50, evidence wins "
          f"{evidence_wins}/50 ({dt:.1f} s)")


def test_criterion_6_invariance_suite():
    t0 = time.perf_counter()
    t, y = make_noisy_series(24, seed=61)
    grid = AnalysisGrid(times=t, values=y)
    m = 2
    base = posterior(grid, m, workers=1)

    # affine invariance of the posterior over configurations
    aff = posterior(AnalysisGrid(times=t, values=3.7 * y - 2.0), m, workers=1)
    np.testing.assert_allclose(aff.marginals, base.marginals, rtol=1e-12,
                               atol=1e-14)
    bt = top_configurations(base, 20)
    at = top_configurations(aff, 20)
    assert [x.config for x in bt] == [x.config for x in at]
    np.testing.assert_allclose([x.probability for x in bt],
                               [x.probability for x in at], rtol=1e-12)

    # translation invariance of evidence differences
    from trendscan import log_evidence
    shift = posterior(AnalysisGrid(times=t, values=y + 50.0), m, workers=1)
    cfgs = [(5, 11), (3, 20), (9, 10)]
    d1 = np.diff([log_evidence(grid, c) for c in cfgs])
    d2 = np.diff([log_evidence(shift.grid, c) for c in cfgs])
    np.testing.assert_allclose(d1, d2, rtol=0, atol=1e-12)
    np.testing.assert_allclose(shift.marginals, base.marginals, rtol=1e-11,
                               atol=1e-14)

    # time-reversal equivariance: marginals flip, ordinals swap
    rev = posterior(AnalysisGrid(times=t, values=y[::-1].copy()), m,
                    workers=1)
    np.testing.assert_allclose(rev.marginals, base.marginals[::-1, ::-1],
                               rtol=1e-11, atol=1e-14)
    mirrored = tuple(sorted(23 - e for e in base.map_config))
    assert rev.map_config == mirrored

    # normalization of the posterior and of every marginal
    tops = top_configurations(base, base.count)
    assert abs(sum(x.probability for x in tops) - 1.0) <= 1e-9
    np.testing.assert_allclose(base.marginals.sum(axis=1), 1.0, rtol=0,
                               atol=1e-9)

    # worker-count determinism
    par = posterior(grid, m, workers=4)
    assert par.log_norm == pytest.approx(base.log_norm, rel=1e-12)
    np.testing.assert_allclose(par.marginals, base.marginals, rtol=1e-12,
                               atol=1e-15)
    assert par.map_config == base.map_config
    again = posterior(grid, m, workers=4)
    assert again.log_norm == par.log_norm
    assert np.array_equal(again.marginals, par.marginals)

    dt = time.perf_counter() - t0
    print(f"\nACCEPTANCE 6 PASS: affine/translation/reversal/normalization/"
          f"determinism invariants ({dt:.1f} s)")


def _large_grid():
    rng = np.random.default_rng(71)
    t = np.arange(132, dtype=float)
    y = (0.25 + 0.0015 * t + 0.002 * np.maximum(t - 90, 0.0)
         + 0.03 * rng.standard_normal(132))
    return AnalysisGrid(times=t, values=y)


def test_criterion_7_performance_at_scale():
    grid = _large_grid()

    t0 = time.perf_counter()
    p4 = posterior(grid, 4, workers=4)
    dt4 = time.perf_counter() - t0
    assert p4.count == 11_358_880
    assert dt4 <= 120.0
    assert p4.log_evidences is None  # beyond the storage cap

    t0 = time.perf_counter()
    p5 = posterior(grid, 5, workers=4)
    dt5 = time.perf_counter() - t0
    assert p5.count == 286_243_776
    assert dt5 <= 90 * 60.0
    assert p5.log_evidences is None  # no 286M-row table was materialized
    np.testing.assert_allclose(p5.marginals.sum(axis=1), 1.0, atol=1e-9)

    peak_kb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    assert peak_kb <= 2 * 1024 * 1024, f"peak RSS {peak_kb / 1024:.0f} MB"
    print(f"\nACCEPTANCE 7 PASS: m=4 in {dt4:.1f} s, m=5 in {dt5:.1f} s, "
          f"peak RSS {peak_kb / 1024:.0f} MB")


def test_criterion_8_sensitivity_horizon_family():
    t0 = time.perf_counter()
    n, decoy_end, onset = 900, 100, 200
    dates = np.array(business_dates("2004-01-02", n), dtype="datetime64[D]")
    rng = np.random.default_rng(2026)
    noise = 0.02 * rng.standard_normal(n)
    t = np.arange(n, dtype=float)
    # early downward ramp acts as a decoy change point: the MAP sits on
    # it (far from the onset) until the onset's evidence outgrows it, so
    # the measured horizon reflects signal strength, not luck
    base = -0.1 * np.minimum(t, decoy_end) / 15.0
    horizons = []
    for slope in (0.1, 0.3, 0.5):
        values = base + slope * np.maximum(t - onset, 0.0) / 15.0 + noise
        series = CorrelationSeries(dates=dates, values=values,
                                   window_length=42, center_offset=20,
                                   meta={})
        res = sensitivity_horizon(series, start=str(dates[0]),
                                  onset=str(dates[onset]), m=1,
                                  tolerance_days=40, stride=1)
        assert res.detected, f"slope {slope} never locked"
        assert res.horizon_days is not None and res.horizon_days >= 0
        horizons.append(res.horizon_days)
    assert all(a >= b for a, b in zip(horizons, horizons[1:])), horizons
    dt = time.perf_counter() - t0
    assert dt < 300.0
    print(f"\nACCEPTANCE 8 PASS: horizons {horizons} trading days for "
          f"slopes 0.1/0.3/0.5 ({dt:.1f} s)")


@pytest.mark.skipif(not os.environ.get("TRENDSCAN_REFERENCE_SERIES"),
                    reason="set TRENDSCAN_REFERENCE_SERIES to a reference "
                           "mean-correlation CSV to run the real-data check")
def test_criterion_9_real_data_first_cp_mode():
    series = load_series(os.environ["TRENDSCAN_REFERENCE_SERIES"])
    thinned = thin(series, 40)
    grid = AnalysisGrid(times=np.arange(len(thinned), dtype=float),
                        values=thinned.values)
    post = posterior(grid, 2, workers=4)
    mode_idx = int(np.argmax(post.marginals[0]))
    mode_date = thinned.dates[mode_idx]
    lo = np.datetime64("2006-10-31")
    hi = np.datetime64("2007-01-03")
    assert lo <= mode_date <= hi, f"first-CP mode at {mode_date}"
    print(f"\nACCEPTANCE 9 PASS: first-CP marginal mode at {mode_date}")
