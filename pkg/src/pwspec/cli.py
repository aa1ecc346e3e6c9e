"""Command-line interface.

Exit codes: 0 success, 1 computational failure (nonconvergence), 2 usage or
validation error. Every run writes its outputs only after all computation has
finished.
"""

import argparse
import sys

import numpy as np
import scipy

from . import __version__
from .inference import PermutationFailure, bayesian_ci, segment_difference, stationarity_test
from .io import (UsageError, csv_text, dump_json, output_dir, parse_float_list, read_channels,
                 read_config, select_channel, write_outputs)
from .periodogram import (PeriodogramSet, TimeSeries, eeg_grid, local_periodograms, normalize_series,
                          periodogram)
from .selection import METHODS, select
from .simulation import LOCAL_PROCESSES, STATIONARY_PROCESSES, BenchmarkConfig, benchmark
from .whittle import NotConvergedError, fit_ssanova, fit_stationary

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

TV_METHODS = ("DM", "DV", "IM", "LS")
MIN_BLOCKS = 4

# config-file key -> argparse destination
GRID_KEYS = {"grid.K": "K", "grid.J": "J", "grid.freqs": "freqs", "grid.blocks": "blocks",
             "grid.eeg": "eeg_grid", "block_demean": "block_demean"}
COMMON_KEYS = {"out": "out", "seed": "seed", "method": "method", "level": "level",
               "sampling_rate": "sampling_rate", "column": "column"}
CONFIG_KEYS = {
    "estimate": {**COMMON_KEYS, "lambda": "lam"},
    "estimate-tv": {**COMMON_KEYS, **GRID_KEYS, "lambda": "lam", "theta": "theta",
                    "normalize": "normalize"},
    "test-stationarity": {**COMMON_KEYS, **GRID_KEYS, "n_perm": "n_perm", "fast": "fast",
                          "normalize": "normalize"},
    "compare": {**COMMON_KEYS, **GRID_KEYS, "normalize": "normalize"},
    "simulate": {"out": "out", "seed": "seed", "process": "process", "T": "T",
                 "grid.K": "K", "grid.J": "J", "methods": "methods", "reps": "reps",
                 "preset": "preset"},
}

PRESETS = {
    "table1": dict(process="AR3", T=128, methods="LS,IM,DM,DV,PO", reps=200),
    "table1-ma4": dict(process="MA4", T=128, methods="LS,IM,DM,DV,PO", reps=200),
    "table2": dict(process="LS1", T=1024, K=32, J=32, methods="LS,DM,DV", reps=30),
}

DEFAULTS = {"seed": 0, "level": 0.95, "sampling_rate": 1.0, "column": "0", "method": "DM",
            "n_perm": 199, "fast": False, "block_demean": True, "eeg_grid": False,
            "normalize": False, "reps": 100}


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


CONVERTERS = {"seed": int, "level": float, "sampling_rate": float, "K": int, "J": int,
              "n_perm": int, "reps": int, "T": int, "lam": float, "fast": _bool,
              "block_demean": _bool, "eeg_grid": _bool, "normalize": _bool}


def build_parser():
    p = argparse.ArgumentParser(prog="pwspec", description="Spline spectral estimation by "
                                "penalized Whittle likelihood.")
    p.add_argument("--version", action="version", version=f"pwspec {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, method=True):
        sp.add_argument("--out", help="output directory (default: $PWSPEC_OUT or ./pwspec-out)")
        sp.add_argument("--config", help="flat key = value file; flags override it")
        sp.add_argument("--seed", type=int)
        if method:
            sp.add_argument("--method", help=f"one of {', '.join(METHODS)}")
            sp.add_argument("--level", type=float, help="band level (default 0.95)")
            sp.add_argument("--column", help="channel index or header name (default 0)")
            sp.add_argument("--sampling-rate", dest="sampling_rate", type=float,
                            help="samples per second, for the Hz axis")

    def grid(sp):
        sp.add_argument("--K", type=int, help="number of frequencies")
        sp.add_argument("--J", type=int, help="number of time blocks")
        sp.add_argument("--freqs", help="explicit comma-separated frequencies in [0, 1]")
        sp.add_argument("--blocks", help="explicit comma-separated block boundaries")
        sp.add_argument("--eeg-grid", dest="eeg_grid", action="store_const", const=True,
                        help="32 x 64 grid for 60000-sample recordings")
        sp.add_argument("--no-block-demean", dest="block_demean", action="store_const",
                        const=False)
        sp.add_argument("--normalize", action="store_const", const=True,
                        help="subtract the across-channel mean first")

    sp = sub.add_parser("estimate", help="stationary log-spectrum")
    sp.add_argument("input")
    common(sp)
    sp.add_argument("--lambda", dest="lam", type=float, help="fixed smoothing parameter")

    sp = sub.add_parser("estimate-tv", help="time-varying log-spectrum")
    sp.add_argument("input")
    common(sp)
    grid(sp)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--theta", help="four comma-separated weights (with --lambda)")

    sp = sub.add_parser("test-stationarity", help="permutation test for stationarity")
    sp.add_argument("input")
    common(sp)
    grid(sp)
    sp.add_argument("--n-perm", dest="n_perm", type=int)
    sp.add_argument("--fast", action="store_const", const=True,
                    help="keep the observed smoothing parameters for all permutations")

    sp = sub.add_parser("compare", help="pre- versus baseline-segment difference map")
    sp.add_argument("pre")
    sp.add_argument("base")
    common(sp)
    grid(sp)

    sp = sub.add_parser("simulate", help="relative-efficiency benchmark")
    common(sp, method=False)
    sp.add_argument("--preset", choices=sorted(PRESETS))
    sp.add_argument("--process", help=", ".join(STATIONARY_PROCESSES + LOCAL_PROCESSES))
    sp.add_argument("--T", type=int)
    sp.add_argument("--K", type=int)
    sp.add_argument("--J", type=int)
    sp.add_argument("--methods", help="comma-separated subset of " + ",".join(METHODS))
    sp.add_argument("--reps", type=int)
    return p


def resolve(args):
    """Merge config file values under command-line flags and apply defaults."""
    allowed = CONFIG_KEYS[args.command]
    opts = {}
    if args.config:
        for key, value in read_config(args.config).items():
            if key not in allowed:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            dest = allowed[key]
            conv = CONVERTERS.get(dest, str)
            try:
                opts[dest] = conv(value)
            except ValueError:
                raise UsageError(f"bad value for {key}: {value!r}") from None
    for key, value in vars(args).items():
        if value is not None and key not in ("command", "config"):
            opts[key] = value
    if args.command == "simulate" and "preset" in opts:
        for key, value in PRESETS[opts["preset"]].items():
            opts.setdefault(key, value)
    for key, value in DEFAULTS.items():
        if key in allowed.values():
            opts.setdefault(key, value)
    return opts


# ---------------------------------------------------------------------------
# validation helpers


def _check_method(method, allowed):
    if method not in allowed:
        raise UsageError(f"invalid method {method!r}; choose from {', '.join(allowed)}")


def _check_level(level):
    if not 0 < level < 1:
        raise UsageError("level must lie in (0, 1)")


def _load_series(path, opts):
    names, values = read_channels(path)
    if opts.get("normalize") and values.shape[1] > 1:
        chans = normalize_series([values[:, i] for i in range(values.shape[1])])
        values = np.column_stack([c.values for c in chans])
    x = select_channel(names, values, opts["column"])
    if not opts["sampling_rate"] > 0:
        raise UsageError("sampling rate must be positive")
    return TimeSeries(x, opts["sampling_rate"])


def _build_grid(x, opts):
    T = x.T
    kw = {"block_demean": opts["block_demean"]}
    if opts["eeg_grid"]:
        freqs, blocks, times = eeg_grid(T=T)
        kw.update(freqs=freqs, blocks=blocks, times=times)
    else:
        if "freqs" in opts:
            kw["freqs"] = parse_float_list(opts["freqs"])
        if "blocks" in opts:
            kw["blocks"] = [int(b) for b in parse_float_list(opts["blocks"])]
        kw["K"], kw["J"] = opts.get("K"), opts.get("J")
        for name in ("K", "J"):
            if kw[name] is not None and kw[name] < 1:
                raise UsageError(f"{name} must be positive")
    try:
        grid = local_periodograms(x, **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if grid.J < MIN_BLOCKS:
        raise UsageError(f"time-varying estimation needs J >= {MIN_BLOCKS}, got {grid.J}")
    return grid


def _metadata(command, opts):
    return {"package": "pwspec", "version": __version__, "numpy": np.__version__,
            "scipy": scipy.__version__, "command": command,
            "config": {k: v for k, v in sorted(opts.items()) if k != "out"}}


def _fit_summary(res_or_fit):
    fit = getattr(res_or_fit, "fit", res_or_fit)
    out = {"lambda": fit.lam, "converged": fit.converged, "iterations": fit.iterations,
           "n": fit.n, "kind": fit.kind}
    if hasattr(fit, "theta") and fit.theta is not None:
        out["theta"] = fit.theta
        out["d"] = fit.d
    else:
        out["d"] = fit.d
    return out


def _check_fixed_parameters(opts):
    if "theta" in opts and "lam" not in opts:
        raise UsageError("--theta requires --lambda")
    if "lam" in opts:
        if not opts["lam"] > 0:
            raise UsageError("lambda must be positive")
        theta = parse_float_list(opts.get("theta", "1,1,1,1"))
        if len(theta) != 4 or any(t < 0 for t in theta):
            raise UsageError("theta needs four nonnegative values")
        opts["theta"] = ",".join(repr(t) for t in theta)


def _fit_tv(grid, opts):
    if "lam" in opts:
        return fit_ssanova(grid, opts["lam"], parse_float_list(opts["theta"]))
    res = select(grid, opts["method"])
    if res.nonconverged or res.fit is None:
        raise NotConvergedError(res.message or "fit did not converge")
    return res.fit


# ---------------------------------------------------------------------------
# commands: each returns a job that performs the computation and yields files


def prepare_estimate(opts):
    _check_method(opts["method"], METHODS)
    _check_level(opts["level"])
    if "lam" in opts and not opts["lam"] > 0:
        raise UsageError("lambda must be positive")
    x = _load_series(opts["input"], opts)
    if x.T < 8:
        raise UsageError(f"need at least 8 samples, got {x.T}")
    x = normalize_series([x])[0]

    def job():
        full = periodogram(x)
        # mean correction zeroes the w = 0 ordinate, so it carries no information
        pg = PeriodogramSet(full.freqs[1:], full.values[1:])
        if "lam" in opts:
            fit = fit_stationary(pg, opts["lam"])
        else:
            res = select(pg, opts["method"])
            if res.nonconverged:
                raise NotConvergedError(res.message or "fit did not converge")
            fit = res.fit
        if not fit.converged:
            raise NotConvergedError("fit did not converge")
        band = bayesian_ci(fit, full.freqs, level=opts["level"])
        half = full.freqs <= 0.5
        hz = full.freqs * x.sampling_rate_hz
        bundle = {"metadata": _metadata("estimate", opts), "fit": _fit_summary(fit),
                  "method": "fixed" if "lam" in opts else opts["method"], "T": full.T}
        return {
            "estimate.json": dump_json(bundle),
            "spectrum.csv": csv_text(["omega", "g_hat"],
                                     zip(full.freqs[half], band.center[half])),
            "band.csv": csv_text(["omega", "hz", "g_hat", "lower", "upper"],
                                 zip(full.freqs, hz, band.center, band.lower, band.upper)),
        }
    return job


def prepare_estimate_tv(opts):
    _check_method(opts["method"], TV_METHODS)
    _check_level(opts["level"])
    _check_fixed_parameters(opts)
    x = _load_series(opts["input"], opts)
    grid = _build_grid(x, opts)

    def job():
        fit = _fit_tv(grid, opts)
        if not fit.converged:
            raise NotConvergedError("fit did not converge")
        w, u = fit.system.points
        bundle = {"metadata": _metadata("estimate-tv", opts), "fit": _fit_summary(fit),
                  "K": grid.K, "J": grid.J, "freqs": grid.freqs, "times": grid.times,
                  "block_bounds": grid.block_bounds}
        return {
            "estimate_tv.json": dump_json(bundle),
            "surface.csv": csv_text(["omega", "hz", "u", "g_hat"],
                                    zip(w, w * x.sampling_rate_hz, u, fit.fitted)),
        }
    return job


def prepare_test_stationarity(opts):
    if opts["n_perm"] < 99:
        raise UsageError(f"n_perm must be at least 99, got {opts['n_perm']}")
    x = _load_series(opts["input"], opts)
    grid = _build_grid(x, opts)

    def job():
        res = stationarity_test(grid, n_perm=opts["n_perm"], seed=opts["seed"],
                                fast=opts["fast"])
        bundle = {"metadata": _metadata("test-stationarity", opts), "result": res.to_dict(),
                  "K": grid.K, "J": grid.J}
        return {"stationarity.json": dump_json(bundle)}
    return job


def prepare_compare(opts):
    _check_method(opts["method"], TV_METHODS)
    _check_level(opts["level"])
    x_pre = _load_series(opts["pre"], opts)
    x_base = _load_series(opts["base"], opts)
    g_pre, g_base = _build_grid(x_pre, opts), _build_grid(x_base, opts)
    if (g_pre.freqs.shape != g_base.freqs.shape or g_pre.times.shape != g_base.times.shape
            or not np.allclose(g_pre.freqs, g_base.freqs)
            or not np.allclose(g_pre.times, g_base.times)):
        raise UsageError("the two inputs give incompatible grids")

    def job():
        fit_pre, fit_base = _fit_tv(g_pre, opts), _fit_tv(g_base, opts)
        dm = segment_difference(fit_pre, fit_base, level=opts["level"])
        bundle = {"metadata": _metadata("compare", opts), "pre": _fit_summary(fit_pre),
                  "base": _fit_summary(fit_base), "n_significant": int(dm.significant.sum()),
                  "n_positive": int(np.sum(dm.sign > 0)), "n_negative": int(np.sum(dm.sign < 0)),
                  "K": g_pre.K, "J": g_pre.J}
        hz = dm.freqs * x_pre.sampling_rate_hz
        return {
            "compare.json": dump_json(bundle),
            "difference.csv": csv_text(["omega", "hz", "u", "delta", "significant", "sign"],
                                       zip(dm.freqs, hz, dm.times, dm.delta, dm.significant,
                                           dm.sign)),
        }
    return job


def prepare_simulate(opts):
    if "process" not in opts or "T" not in opts:
        raise UsageError("simulate needs --process and --T (or --preset)")
    methods = [m.strip() for m in str(opts.get("methods", ",".join(METHODS))).split(",")
               if m.strip()]
    if opts["process"] in LOCAL_PROCESSES:
        methods = [m for m in methods if m != "PO"] if "methods" not in opts else methods
    try:
        config = BenchmarkConfig(process=opts["process"], T=opts["T"], methods=methods,
                                 reps=opts["reps"], seed=opts["seed"], K=opts.get("K"),
                                 J=opts.get("J"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    def job():
        report = benchmark(config)
        meta = _metadata("simulate", opts)
        return {
            "simulation.json": dump_json({"metadata": meta,
                                          "report": _report_dict(report)}),
            "simulation.txt": report.table() + "\n",
            "timing.json": dump_json(report.timing),
        }
    return job


def _report_dict(report):
    return {"config": report.config, "mse": report.mse, "nonconverged": report.nonconverged,
            "median_re": report.median_re, "mean_re": report.mean_re, "pairs": report.pairs}


PREPARE = {"estimate": prepare_estimate, "estimate-tv": prepare_estimate_tv,
           "test-stationarity": prepare_test_stationarity, "compare": prepare_compare,
           "simulate": prepare_simulate}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        opts = resolve(args)
        out = output_dir(opts.get("out"))
        job = PREPARE[args.command](opts)
    except UsageError as exc:
        print(f"pwspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        files = job()
    except (NotConvergedError, PermutationFailure, np.linalg.LinAlgError) as exc:
        print(f"pwspec: computation failed: {exc}", file=sys.stderr)
        diag = {"metadata": _metadata(args.command, opts), "status": "failed",
                "error": type(exc).__name__, "message": str(exc)}
        write_outputs(out, {"diagnostic.json": dump_json(diag)})
        return EXIT_FAILURE
    for path in write_outputs(out, files):
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
