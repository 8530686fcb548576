"""Command-line front end.

    dynsplit run          --preset example1 --scheme lie --steps 20 --out traj.csv
    dynsplit convergence  --preset example1 --scheme weighted --theta 0.3 --out conv.csv
    dynsplit reproduce    table1 --out results/

Exit codes: 0 success, 2 configuration error, 3 numerical or fit error,
4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .analysis import ConvergenceReport, detect_plateau, fit_order, measure_errors
from .errors import ConfigurationError, DynsplitError
from .experiments import TABLES, reproduce_table
from .splitting import iterate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def fmt(x: float) -> str:
    """17 significant digits; round-trips a double exactly."""
    return format(float(x), ".16e")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _open_out(path):
    if path is None or path == "-":
        return _Stdout()
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="", encoding="utf-8")


class _Stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()
        return False


def sample_indices(n_interior: int, count: int) -> np.ndarray:
    """Evenly spread interior indices used for CSV output (all when count >= n_interior)."""
    if count >= n_interior:
        return np.arange(n_interior)
    return np.unique(np.round(np.linspace(0, n_interior - 1, count)).astype(int))


# -- subcommands ----------------------------------------------------------------


def cmd_run(cfg: cfgmod.RunConfig) -> int:
    prob = cfgmod.build_problem(cfg)
    p = prob.params
    idx = sample_indices(p.n_interior, cfg.columns)
    tau = prob.t_max / cfg.steps
    header = ["t"] + [f"u(x={fmt(x)})" for x in p.x[idx]] + ["v_left", "v_right"]
    with _open_out(cfg.out) as fh:
        w = _writer(fh)
        w.writerow(header)
        for k, state in enumerate(iterate(prob, cfg.scheme, cfg.steps)):
            w.writerow([fmt(k * tau)] + [fmt(a) for a in state.u[idx]] + [fmt(a) for a in state.v])
    return EXIT_OK


def write_sweep(path, entries, window):
    lo, hi = window if window is not None else (-1, -2)
    with _open_out(path) as fh:
        w = _writer(fh)
        w.writerow(["tau", "ln_tau", "error", "ln_error", "in_fit_window"])
        for i, (tau, err) in enumerate(entries):
            ln_err = fmt(math.log(err)) if err > 0 else "nan"
            w.writerow([fmt(tau), fmt(math.log(tau)), fmt(err), ln_err, int(lo <= i <= hi)])


def cmd_convergence(cfg: cfgmod.RunConfig, entries=None) -> int:
    """Sweep, write the CSV, then fit.  ``entries`` bypasses the sweep (for synthetic data)."""
    if entries is None:
        entries = measure_errors(cfgmod.build_spec(cfg))
    window = cfg.fit_window or detect_plateau(entries, cfg.plateau_threshold)
    try:
        slope, intercept = fit_order(entries, window)
    except ArithmeticError:
        write_sweep(cfg.out, entries, None)
        raise
    write_sweep(cfg.out, entries, window)
    report = ConvergenceReport(tuple(entries), tuple(window), slope, intercept, cfg.scheme)
    summary = {
        "scheme": cfg.scheme.kind.value,
        "theta": cfg.scheme.theta if cfg.scheme.kind.value == "weighted" else None,
        "slope": report.slope,
        "intercept": report.intercept,
        "window": list(report.fit_window),
        "n_points": len(entries),
    }
    out = sys.stderr if cfg.out in (None, "-") else sys.stdout
    print(f"scheme      {cfg.scheme.label}", file=out)
    print(f"fit window  {window[0]}..{window[1]} "
          f"(tau {entries[window[0]][0]:.6g} .. {entries[window[1]][0]:.6g})", file=out)
    print(f"order       {slope:.4f}", file=out)
    print(f"intercept   {intercept:.4f}", file=out)
    print("SUMMARY " + json.dumps(summary, sort_keys=True), file=out)
    return EXIT_OK


def cmd_reproduce(which: str, out_dir, nx=None) -> int:
    setup, results, sweeps = reproduce_table(which, nx=nx)
    out_dir = Path(out_dir) if out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        for label, entries in sweeps.items():
            safe = label.replace("(", "_").replace(")", "")
            write_sweep(out_dir / f"{which}_{safe}.csv", entries, detect_plateau(entries))
    rows = []
    failed = False
    for r in results:
        computed = r.computed
        failed |= computed is None
        rows.append([
            r.row.scheme.kind.value,
            fmt(r.row.scheme.theta) if r.row.scheme.kind.value == "weighted" else "",
            r.row.regime,
            r.report.fit_window[0] if r.report else "",
            r.report.fit_window[1] if r.report else "",
            fmt(r.row.published),
            fmt(computed) if computed is not None else "",
            fmt(abs(computed - r.row.published)) if computed is not None else "",
            int(r.row.gated),
        ])
    if out_dir is not None:
        with open(out_dir / f"{which}.csv", "w", newline="", encoding="utf-8") as fh:
            w = _writer(fh)
            w.writerow(["scheme", "theta", "regime", "fit_lo", "fit_hi",
                        "published_order", "computed_order", "abs_diff", "gated"])
            w.writerows(rows)

    print(f"{which}: {setup.preset}, nx={nx or setup.nx}, t_max={setup.t_max:g}, "
          f"tau = t_max*2^-k for k={setup.dyadic[0]}..{setup.dyadic[1]}, reference={setup.reference}")
    print(f"{'scheme':<16}{'regime':<9}{'published':>10}{'computed':>10}{'|diff|':>9}")
    for r in results:
        if r.report is None:
            print(f"{r.row.scheme.label:<16}{r.row.regime:<9}{r.row.published:>10.4f}  FAILED: {r.error}")
            continue
        note = "" if r.row.gated else "  (report only)"
        print(f"{r.row.scheme.label:<16}{r.row.regime:<9}{r.row.published:>10.4f}"
              f"{r.computed:>10.4f}{abs(r.computed - r.row.published):>9.4f}{note}")
    return EXIT_NUMERIC if failed else EXIT_OK


# -- argument handling -----------------------------------------------------------


def _common(parser):
    parser.add_argument("--config", metavar="PATH", help="YAML config file")
    parser.add_argument("--preset", choices=["example1", "example2"])
    parser.add_argument("--scheme", choices=["lie", "strang", "weighted", "naive"])
    parser.add_argument("--theta", type=float)
    parser.add_argument("--nx", type=int)
    parser.add_argument("--tmax", type=float)
    parser.add_argument("--out", metavar="PATH")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dynsplit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="write one trajectory as CSV")
    _common(run)
    run.add_argument("--steps", type=int, help="number of time steps")
    run.add_argument("--columns", type=int, help="number of x samples per row")

    conv = sub.add_parser("convergence", help="error sweep and fitted order")
    _common(conv)
    conv.add_argument("--tau-dyadic", nargs=2, type=int, metavar=("K_MIN", "K_MAX"))
    conv.add_argument("--fit-window", nargs=2, type=int, metavar=("I_MIN", "I_MAX"))

    rep = sub.add_parser("reproduce", help="recompute an order table")
    rep.add_argument("which", choices=sorted(TABLES))
    rep.add_argument("--out", metavar="DIR", help="directory for CSV output")
    rep.add_argument("--nx", type=int, help="override the spatial resolution")
    return parser


def config_from_args(args) -> cfgmod.RunConfig:
    doc = {}
    if args.config:
        doc = cfgmod.load_document(Path(args.config).read_text(encoding="utf-8"))

    def section(key):
        sec = doc.get(key)
        if sec is None:
            sec = doc[key] = {}
        if not isinstance(sec, dict):
            raise cfgmod.ConfigValidationError(key, "expected a mapping")
        return sec

    if args.preset:
        doc["problem"] = args.preset
    if args.scheme:
        section("scheme")["name"] = args.scheme
    if args.theta is not None:
        section("scheme")["theta"] = args.theta
    if args.nx is not None:
        section("params")["nx"] = args.nx
    if args.tmax is not None:
        section("params")["t_max"] = args.tmax
    if args.out:
        section("output")["path"] = args.out
    if getattr(args, "steps", None) is not None:
        doc["steps"] = args.steps
    if getattr(args, "columns", None) is not None:
        section("output")["columns"] = args.columns
    if getattr(args, "tau_dyadic", None):
        doc["sweep"] = {"dyadic": list(args.tau_dyadic)}
    if getattr(args, "fit_window", None):
        section("fit")["window"] = list(args.fit_window)
    return cfgmod.validate(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            if args.nx is not None and (args.nx < 4 or args.nx & (args.nx - 1)):
                raise cfgmod.ConfigValidationError("--nx", f"must be a power of two >= 4, got {args.nx}")
            return cmd_reproduce(args.which, args.out, nx=args.nx)
        cfg = config_from_args(args)
        if args.command == "run":
            return cmd_run(cfg)
        return cmd_convergence(cfg)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DynsplitError, ArithmeticError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
