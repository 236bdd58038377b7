"""Command-line front end.

Subcommands wire the pipeline end to end: ``preprocess`` turns a price
CSV into the mean-correlation series; ``analyze`` / ``marginals`` /
``fit`` / ``evidence`` run the exact retrospective change-point analysis
on a (thinned) series; ``online`` analyzes an anchored segment and
``sensitivity`` scans growing segments for the detection horizon.

Every run writes ``manifest.json`` with the effective parameters and
input hashes; passing that file back via ``--config`` reproduces the run
byte for byte.  Exit codes: 0 success (including a negative finding),
2 input error, 3 enumeration budget refusal.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .artifacts import read_json, sha256_file, write_csv, write_json
from .changepoint import (DEFAULT_BUDGET, AnalysisGrid, BudgetError,
                          log_model_evidence, posterior, resolve_workers,
                          segment_fit, top_configurations)
from .online import SegmentSpec, analyze_segment, sensitivity_horizon
from .preprocess import (DEFAULT_CENTER_OFFSET, DEFAULT_CORR_WINDOW,
                         DEFAULT_NORM_WINDOW, CorrelationSeries,
                         compute_returns, load_series, locally_normalize,
                         mean_correlation, save_series, thin)
from .prices import (filter_coverage, interpolate_missing, load_price_csv,
                     restrict_period)
from .svg import render_analysis_svg

__all__ = ["RunConfig", "main", "cmd_preprocess", "cmd_analyze", "cmd_online"]

_RETRO_STRIDE = 40
_ONLINE_STRIDE = 10

_DEFAULTS: dict[str, dict] = {
    "preprocess": {
        "input": None, "output_dir": ".", "coverage": 0.995,
        "norm_window": DEFAULT_NORM_WINDOW, "tau": DEFAULT_CORR_WINDOW,
        "center_offset": DEFAULT_CENTER_OFFSET, "include_diagonal": False,
        "stride": 1, "start": None, "end": None,
    },
    "analyze": {
        "input": None, "output_dir": ".", "num_cps": None, "stride": _RETRO_STRIDE,
        "top_k": 10, "band_multiplier": 3.0, "workers": None,
        "budget_override": False, "svg": False,
    },
    "marginals": {
        "input": None, "output_dir": ".", "num_cps": None, "stride": _RETRO_STRIDE,
        "workers": None, "budget_override": False,
    },
    "fit": {
        "input": None, "output_dir": ".", "num_cps": None, "stride": _RETRO_STRIDE,
        "band_multiplier": 3.0, "extend_stamps": 0, "workers": None,
        "budget_override": False,
    },
    "evidence": {
        "input": None, "output_dir": ".", "num_cps": "0,1,2", "stride": _RETRO_STRIDE,
        "workers": None, "budget_override": False,
    },
    "online": {
        "input": None, "output_dir": ".", "num_cps": 1, "stride": _ONLINE_STRIDE,
        "start": None, "end": None, "top_k": 10, "band_multiplier": 3.0,
        "workers": None, "budget_override": False, "svg": False,
    },
    "sensitivity": {
        "input": None, "output_dir": ".", "num_cps": 1, "stride": _ONLINE_STRIDE,
        "start": None, "onset": None, "tolerance_days": 100, "workers": None,
        "budget_override": False,
    },
}

_CASTERS = {
    "input": str, "output_dir": str, "start": str, "end": str, "onset": str,
    "coverage": float, "band_multiplier": float,
    "norm_window": int, "tau": int, "center_offset": int, "stride": int,
    "top_k": int, "workers": int, "tolerance_days": int, "extend_stamps": int,
    "num_cps": str,
    "include_diagonal": None, "budget_override": None, "svg": None,
}


def _cast_bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    s = str(raw).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _load_config_file(path: str) -> dict:
    """Config values from a JSON file (a manifest works) or key=value lines."""
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = None
    if obj is not None:
        if not isinstance(obj, dict):
            raise ValueError(f"{path}: JSON config must be an object")
        params = obj.get("parameters")
        return params if isinstance(params, dict) else obj
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, val = line.partition("=")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


@dataclass(frozen=True)
class RunConfig:
    """Effective parameters of one CLI run (defaults < config file < flags)."""

    command: str
    params: dict

    def __getitem__(self, key):
        return self.params[key]

    @classmethod
    def resolve(cls, command: str, args: argparse.Namespace) -> "RunConfig":
        defaults = _DEFAULTS[command]
        file_vals = {}
        config_path = getattr(args, "config", None)
        if config_path:
            file_vals = _load_config_file(config_path)
        params = {}
        for key, default in defaults.items():
            val = getattr(args, key, None)
            if val is None and key in file_vals and file_vals[key] is not None:
                raw = file_vals[key]
                caster = _CASTERS[key]
                if caster is None:
                    val = _cast_bool(raw)
                else:
                    try:
                        val = caster(raw)
                    except (TypeError, ValueError):
                        raise ValueError(
                            f"config value {key}={raw!r} is not a valid "
                            f"{caster.__name__}"
                        ) from None
            if val is None:
                val = default
            params[key] = val
        return cls(command=command, params=params)

    def require_input(self) -> Path:
        path = self.params.get("input")
        if not path:
            raise ValueError("--input is required (flag or config file)")
        return Path(path)


def _int_param(cfg: RunConfig, key: str) -> int:
    val = cfg[key]
    if val is None:
        raise ValueError(f"--{key.replace('_', '-')} is required")
    try:
        return int(val)
    except (TypeError, ValueError):
        raise ValueError(f"--{key.replace('_', '-')} must be an integer, got {val!r}") from None


def _budget(cfg: RunConfig):
    return None if cfg["budget_override"] else DEFAULT_BUDGET


def _write_manifest(out_dir: Path, cfg: RunConfig, input_path: Path,
                    extra: dict | None = None) -> None:
    manifest = {
        "command": cfg.command,
        "package": "trendscan",
        "version": __version__,
        "parameters": {k: cfg.params[k] for k in sorted(cfg.params)},
        "inputs": {str(input_path): sha256_file(input_path)},
    }
    if extra:
        manifest.update(extra)
    write_json(out_dir / "manifest.json", manifest)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _thinned_grid(series: CorrelationSeries, stride: int):
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    idx = np.arange(0, len(series), stride, dtype=np.int64)
    if idx.shape[0] < 3:
        raise ValueError(
            f"thinning {len(series)} points at stride {stride} leaves "
            f"{idx.shape[0]} points; need at least 3"
        )
    grid = AnalysisGrid(times=idx.astype(np.float64), values=series.values[idx])
    return grid, series.dates[idx]


def _config_entry(tc, times, dates, with_percentile=True) -> dict:
    entry = {
        "indices": [int(e) for e in tc.config],
        "source_indices": [int(times[e]) for e in tc.config],
        "dates": [str(dates[e]) for e in tc.config],
        "probability": tc.probability,
    }
    if with_percentile:
        entry["percentile"] = tc.percentile
    return entry


def _posterior_summary(post, dates, stride: int, top_k: int) -> dict:
    times = post.grid.times
    tops = top_configurations(post, min(top_k, post.count))
    map_entry = _config_entry(tops[0], times, dates, with_percentile=False)
    return {
        "m": post.m,
        "N": post.grid.n_points,
        "Z_m": str(post.count),
        "log_Z": post.log_Z,
        "log_norm": post.log_norm,
        "map": map_entry,
        "top": [_config_entry(tc, times, dates) for tc in tops],
        "stride": int(stride),
        "backend": post.backend,
        "workers": post.workers,
    }


def _write_marginals_csv(path: Path, post, dates) -> None:
    header = ["date"] + [f"ordinal_{j + 1}" for j in range(post.m)]
    marg = post.marginals
    rows = []
    for i in range(post.grid.n_points):
        rows.append([dates[i]] + [float(marg[j, i]) for j in range(post.m)])
    write_csv(path, header, rows)


def _write_fit_csv(path: Path, fit, dates) -> None:
    header = ["date", "mean", "sigma", "lower", "upper"]
    rows = []
    n_dates = len(dates)
    for i in range(fit.eval_times.shape[0]):
        date = dates[i] if i < n_dates else None
        if fit.sigma is None:
            rows.append([date, float(fit.mean[i]), None, None, None])
        else:
            rows.append([date, float(fit.mean[i]), float(fit.sigma[i]),
                         float(fit.lower[i]), float(fit.upper[i])])
    write_csv(path, header, rows)


def _print_top(post, dates, top_k: int) -> None:
    k = min(top_k, post.count)
    print(f"top {k} configurations:")
    for i, tc in enumerate(top_configurations(post, k), start=1):
        when = ", ".join(str(dates[e]) for e in tc.config) or "(none)"
        print(f"  {i:3d}  p={tc.probability:.6g}  "
              f"pct={100 * tc.percentile:.4g}%  {when}")


def cmd_preprocess(cfg: RunConfig) -> int:
    input_path = cfg.require_input()
    out = _out_dir(cfg)
    panel = load_price_csv(input_path)
    n_tickers_raw = panel.n_tickers
    if cfg["start"] or cfg["end"]:
        panel = restrict_period(panel, cfg["start"], cfg["end"])
    panel = filter_coverage(panel, float(cfg["coverage"]))
    panel = interpolate_missing(panel)
    returns = compute_returns(panel)
    normed = locally_normalize(returns, int(cfg["norm_window"]))
    series = mean_correlation(normed, tau=int(cfg["tau"]),
                              center_offset=int(cfg["center_offset"]),
                              include_diagonal=bool(cfg["include_diagonal"]))
    stride = int(cfg["stride"])
    if stride > 1:
        series = thin(series, stride)
    extra_meta = {
        "coverage_threshold": float(cfg["coverage"]),
        "input_sha256": sha256_file(input_path),
    }
    save_series(series, out / "mean_correlation.csv", extra_meta=extra_meta)
    _write_manifest(out, cfg, input_path)
    print(f"retained {panel.n_tickers} of {n_tickers_raw} tickers at "
          f"coverage >= {cfg['coverage']}")
    print(f"{len(series)} correlation points from {series.dates[0]} to "
          f"{series.dates[-1]} (tau={cfg['tau']}, n={cfg['norm_window']}, "
          f"stamp offset {cfg['center_offset']}, stride {stride})")
    print(f"wrote {out / 'mean_correlation.csv'}")
    return 0


def _retro_posterior(cfg: RunConfig, *, want_fit: bool = True,
                     want_marginals: bool = True, top_cache: int = 64):
    input_path = cfg.require_input()
    series = load_series(input_path)
    stride = _int_param(cfg, "stride")
    grid, dates = _thinned_grid(series, stride)
    m = _int_param(cfg, "num_cps")
    workers = resolve_workers(cfg["workers"])
    post = posterior(grid, m, workers=workers, budget=_budget(cfg),
                     want_fit=want_fit, want_marginals=want_marginals,
                     top_cache=top_cache)
    return input_path, series, grid, dates, post


def cmd_analyze(cfg: RunConfig) -> int:
    top_k = max(1, _int_param(cfg, "top_k"))
    input_path, series, grid, dates, post = _retro_posterior(
        cfg, top_cache=max(64, top_k))
    out = _out_dir(cfg)
    cfg.params["workers"] = post.workers
    write_json(out / "posterior.json",
               _posterior_summary(post, dates, cfg["stride"], top_k))
    _write_marginals_csv(out / "marginals.csv", post, dates)
    fit = segment_fit(post, band_multiplier=float(cfg["band_multiplier"]),
                      include_bands=post.var_available)
    _write_fit_csv(out / "fit.csv", fit, dates)
    if cfg["svg"]:
        marg = [post.marginals[j] for j in range(post.m)]
        lower = fit.lower if fit.sigma is not None else None
        upper = fit.upper if fit.sigma is not None else None
        svg = render_analysis_svg(grid.times, grid.values, dates,
                                  mean=fit.mean, lower=lower, upper=upper,
                                  marginals=marg)
        (out / "analysis.svg").write_text(svg)
    _write_manifest(out, cfg, input_path, extra={"backend": post.backend})
    print(f"m={post.m} on {grid.n_points} points: {post.count} configurations "
          f"evaluated (backend {post.backend}, workers {post.workers})")
    map_dates = ", ".join(str(dates[e]) for e in post.map_config) or "(none)"
    print(f"MAP: {map_dates}  (probability {post.map_probability:.6g})")
    _print_top(post, dates, top_k)
    print(f"wrote {out / 'posterior.json'}, {out / 'marginals.csv'}, "
          f"{out / 'fit.csv'}")
    return 0


def cmd_marginals(cfg: RunConfig) -> int:
    input_path, series, grid, dates, post = _retro_posterior(cfg, want_fit=False)
    out = _out_dir(cfg)
    cfg.params["workers"] = post.workers
    _write_marginals_csv(out / "marginals.csv", post, dates)
    _write_manifest(out, cfg, input_path, extra={"backend": post.backend})
    print(f"m={post.m} on {grid.n_points} points: {post.count} configurations")
    print(f"wrote {out / 'marginals.csv'}")
    return 0


def cmd_fit(cfg: RunConfig) -> int:
    input_path, series, grid, dates, post = _retro_posterior(
        cfg, want_marginals=False)
    out = _out_dir(cfg)
    cfg.params["workers"] = post.workers
    extend = max(0, _int_param(cfg, "extend_stamps"))
    eval_times = grid.times
    if extend:
        gap = grid.times[-1] - grid.times[-2]
        extra = grid.times[-1] + gap * np.arange(1, extend + 1)
        eval_times = np.concatenate([grid.times, extra])
    fit = segment_fit(post, eval_times=eval_times,
                      band_multiplier=float(cfg["band_multiplier"]),
                      include_bands=post.var_available)
    _write_fit_csv(out / "fit.csv", fit, dates)
    _write_manifest(out, cfg, input_path, extra={"backend": post.backend})
    if not post.var_available:
        print("note: too few points for uncertainty bands; mean curve only")
    print(f"wrote {out / 'fit.csv'}")
    return 0


def cmd_evidence(cfg: RunConfig) -> int:
    input_path = cfg.require_input()
    series = load_series(input_path)
    stride = _int_param(cfg, "stride")
    grid, dates = _thinned_grid(series, stride)
    raw = str(cfg["num_cps"])
    try:
        ms = sorted({int(p) for p in raw.split(",") if p.strip() != ""})
    except ValueError:
        raise ValueError(
            f"--num-cps for evidence takes comma-separated integers, got {raw!r}"
        ) from None
    if not ms:
        raise ValueError("--num-cps lists no model orders")
    if 0 not in ms:
        ms.insert(0, 0)  # straight-line baseline for Bayes factors
    workers = resolve_workers(cfg["workers"])
    cfg.params["workers"] = workers
    budget = _budget(cfg)
    results = {}
    for m in ms:
        results[m] = log_model_evidence(grid, m, workers=workers, budget=budget)
    base = results[0]
    out = _out_dir(cfg)
    models = [{"m": m, "log_model_evidence": results[m],
               "log_bayes_factor_vs_m0": results[m] - base} for m in ms]
    best = max(ms, key=lambda m: results[m])
    write_json(out / "evidence.json",
               {"N": grid.n_points, "stride": int(stride),
                "models": models, "best_m": int(best)})
    _write_manifest(out, cfg, input_path)
    print(f"model comparison on {grid.n_points} points (stride {stride}):")
    for m in ms:
        lbf = results[m] - base
        print(f"  m={m}: log evidence {results[m]:.6f}  "
              f"log BF vs m=0: {lbf:+.6f}")
    print(f"best m: {best}")
    print(f"wrote {out / 'evidence.json'}")
    return 0


def cmd_online(cfg: RunConfig) -> int:
    input_path = cfg.require_input()
    series = load_series(input_path)
    if not cfg["start"] or not cfg["end"]:
        raise ValueError("--start and --end are required for online analysis")
    spec = SegmentSpec(source=series, start=cfg["start"], end=cfg["end"],
                       stride=_int_param(cfg, "stride"))
    m = _int_param(cfg, "num_cps")
    workers = resolve_workers(cfg["workers"])
    top_k = max(1, _int_param(cfg, "top_k"))
    sa = analyze_segment(spec, m, workers=workers, budget=_budget(cfg),
                         top_cache=max(64, top_k))
    post = sa.post
    cfg.params["workers"] = post.workers
    dates = spec.stamp_dates()
    out = _out_dir(cfg)
    summary = _posterior_summary(post, dates, spec.stride, top_k)
    summary["segment"] = {
        "start": str(spec.start), "end": str(spec.end),
        "start_index": spec.start_index, "end_index": spec.end_index,
        "n_points": spec.n_points,
    }
    write_json(out / "segment_posterior.json", summary)
    _write_marginals_csv(out / "segment_marginals.csv", post, dates)
    _write_fit_csv(out / "segment_fit.csv", sa.fit, dates)
    if cfg["svg"]:
        marg = [post.marginals[j] for j in range(post.m)]
        lower = sa.fit.lower if sa.fit.sigma is not None else None
        upper = sa.fit.upper if sa.fit.sigma is not None else None
        svg = render_analysis_svg(post.grid.times, post.grid.values, dates,
                                  mean=sa.fit.mean, lower=lower, upper=upper,
                                  marginals=marg)
        (out / "segment_analysis.svg").write_text(svg)
    _write_manifest(out, cfg, input_path, extra={"backend": post.backend})
    print(f"segment {spec.start}..{spec.end}: {spec.n_points} thinned points "
          f"at stride {spec.stride} ({post.count} configurations)")
    map_dates = ", ".join(str(d) for d in sa.map_dates()) or "(none)"
    print(f"MAP: {map_dates}  (probability {post.map_probability:.6g})")
    print(f"wrote {out / 'segment_posterior.json'}, "
          f"{out / 'segment_marginals.csv'}, {out / 'segment_fit.csv'}")
    return 0


def cmd_sensitivity(cfg: RunConfig) -> int:
    input_path = cfg.require_input()
    series = load_series(input_path)
    if not cfg["start"] or not cfg["onset"]:
        raise ValueError("--start and --onset are required for the "
                         "sensitivity scan")
    m = _int_param(cfg, "num_cps")
    workers = resolve_workers(cfg["workers"])
    cfg.params["workers"] = workers
    res = sensitivity_horizon(series, cfg["start"], cfg["onset"], m=m,
                              tolerance_days=_int_param(cfg, "tolerance_days"),
                              stride=_int_param(cfg, "stride"),
                              workers=workers, budget=_budget(cfg))
    out = _out_dir(cfg)
    report = {
        "onset": str(res.onset),
        "detected": res.detected,
        "detection_cut": None if res.detection_cut is None else str(res.detection_cut),
        "horizon_trading_days": res.horizon_days,
        "map_location": None if res.map_location is None else str(res.map_location),
        "m": res.m,
        "stride": res.stride,
        "tolerance_days": res.tolerance_days,
        "stamp_lag_days": res.stamp_lag_days,
        "candidates_evaluated": len(res.trace),
        "series_hash": sha256_file(input_path),
    }
    write_json(out / "sensitivity.json", report)
    write_csv(out / "sensitivity_trace.csv", ["cut_date", "map_date", "map_mass"],
              [[row["cut_date"], row["map_date"], row["map_mass"]]
               for row in res.trace])
    _write_manifest(out, cfg, input_path)
    if res.detected:
        print(f"onset {res.onset}: detected at segment end {res.detection_cut} "
              f"after {res.horizon_days} trading days "
              f"(MAP at {res.map_location}, tolerance {res.tolerance_days})")
    else:
        print(f"onset {res.onset}: criterion never met within the series "
              f"({len(res.trace)} candidates evaluated)")
    print(f"wrote {out / 'sensitivity.json'}, {out / 'sensitivity_trace.csv'}")
    return 0


def _add_common(p, *names):
    if "input" in names:
        p.add_argument("--input", help="input CSV path")
    if "output_dir" in names:
        p.add_argument("--output-dir", dest="output_dir",
                       help="directory for artifacts (default '.')")
    if "config" in names:
        p.add_argument("--config", help="key=value file or JSON/manifest with "
                                        "defaults (flags win)")
    if "workers" in names:
        p.add_argument("--workers", type=int,
                       help="worker threads (default: TRENDSCAN_THREADS or CPU count)")
    if "budget_override" in names:
        p.add_argument("--budget-override", dest="budget_override",
                       action="store_true", default=None,
                       help="lift the enumeration budget cap")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trendscan",
        description="Exact Bayesian change-point analysis of mean market "
                    "correlation trends")
    parser.add_argument("--version", action="version",
                        version=f"trendscan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess",
                       help="price CSV -> mean-correlation series")
    _add_common(p, "input", "output_dir", "config")
    p.add_argument("--coverage", type=float, help="min fraction of quotes per ticker")
    p.add_argument("--norm-window", dest="norm_window", type=int,
                   help="local normalization window (days)")
    p.add_argument("--tau", type=int, help="correlation window length (days)")
    p.add_argument("--center-offset", dest="center_offset", type=int,
                   help="stamp offset inside the window (0-based)")
    p.add_argument("--include-diagonal", dest="include_diagonal",
                   action="store_true", default=None,
                   help="average over all pairs including i==i")
    p.add_argument("--stride", type=int, help="thin the output series")
    p.add_argument("--start", help="first date to keep (ISO)")
    p.add_argument("--end", help="last date to keep (ISO)")
    p.set_defaults(handler=cmd_preprocess)

    for name, help_text in (("analyze", "posterior, marginals and fit"),
                            ("marginals", "marginal change-point PDFs only"),
                            ("fit", "posterior mean trend and bands only")):
        p = sub.add_parser(name, help=help_text)
        _add_common(p, "input", "output_dir", "config", "workers",
                    "budget_override")
        p.add_argument("--num-cps", dest="num_cps", help="number of change points")
        p.add_argument("--stride", type=int, help="thinning stride (default 40)")
        if name == "analyze":
            p.add_argument("--top-k", dest="top_k", type=int,
                           help="configurations to list (default 10)")
            p.add_argument("--svg", action="store_true", default=None,
                           help="also render a self-contained SVG")
        if name in ("analyze", "fit"):
            p.add_argument("--band-multiplier", dest="band_multiplier",
                           type=float, help="credibility band width (default 3)")
        if name == "fit":
            p.add_argument("--extend-stamps", dest="extend_stamps", type=int,
                           help="extrapolate this many stamps past the end")
        p.set_defaults(handler={"analyze": cmd_analyze,
                                "marginals": cmd_marginals,
                                "fit": cmd_fit}[name])

    p = sub.add_parser("evidence", help="model comparison across m")
    _add_common(p, "input", "output_dir", "config", "workers", "budget_override")
    p.add_argument("--num-cps", dest="num_cps",
                   help="comma-separated m values (default 0,1,2)")
    p.add_argument("--stride", type=int, help="thinning stride (default 40)")
    p.set_defaults(handler=cmd_evidence)

    p = sub.add_parser("online", help="anchored segment analysis")
    _add_common(p, "input", "output_dir", "config", "workers", "budget_override")
    p.add_argument("--num-cps", dest="num_cps", help="number of change points (default 1)")
    p.add_argument("--stride", type=int, help="segment stride (default 10)")
    p.add_argument("--start", help="segment start date (ISO)")
    p.add_argument("--end", help="segment end date (ISO)")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--band-multiplier", dest="band_multiplier", type=float)
    p.add_argument("--svg", action="store_true", default=None,
                   help="also render a self-contained SVG")
    p.set_defaults(handler=cmd_online)

    p = sub.add_parser("sensitivity", help="detection-horizon scan")
    _add_common(p, "input", "output_dir", "config", "workers", "budget_override")
    p.add_argument("--num-cps", dest="num_cps", help="number of change points (default 1)")
    p.add_argument("--stride", type=int, help="segment stride (default 10)")
    p.add_argument("--start", help="segment start date (ISO)")
    p.add_argument("--onset", help="candidate onset date (ISO)")
    p.add_argument("--tolerance-days", dest="tolerance_days", type=int,
                   help="detection tolerance in trading days (default 100)")
    p.set_defaults(handler=cmd_sensitivity)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.resolve(args.command, args)
        return args.handler(cfg)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
