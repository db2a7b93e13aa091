"""Command-line front end.

Subcommands: ``estimate``, ``report``, ``simulate``, ``phi-table``, ``weights``.
Exit codes: 0 success, 2 input/validation error, 3 numerical failure.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import mc_lab, optimal_weights, panel
from .errors import InputError, NumericalError
from .special_fn import PhiTable, build_phi_table

log = logging.getLogger("rangecorr")

CACHE_ENV = "RANGECORR_CACHE_DIR"
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def cache_dir():
    return Path(os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "rangecorr")


def cache_path(step):
    return cache_dir() / f"phi_table_{round(1.0 / step)}.csv"


def load_phi_table(step=0.001, use_cache=True):
    """Load the cached table for ``step``, rebuilding (and re-caching) when absent or unusable."""
    path = cache_path(step)
    if use_cache and path.exists():
        try:
            table = PhiTable.from_csv(path)
            if table.step == 1.0 / round(1.0 / step):
                return table
            log.warning("cached phi table %s has step %g, rebuilding", path, table.step)
        except (InputError, NumericalError, OSError) as exc:
            log.warning("ignoring corrupted phi table cache %s (%s); rebuilding", path, exc)
    table = build_phi_table(step)
    if use_cache:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            table.to_csv(path)
        except OSError as exc:
            log.warning("could not write phi table cache %s (%s)", path, exc)
    return table


def _emit(text, out):
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _csv_rows(header, rows):
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(v if isinstance(v, str) else f"{v:.10g}" for v in r))
    return "\n".join(lines) + "\n"


def cmd_phi_table(args):
    table = build_phi_table(args.step)
    out = Path(args.out) if args.out else cache_path(args.step)
    out.parent.mkdir(parents=True, exist_ok=True)
    table.to_csv(out)
    print(f"wrote {len(table)} rows to {out}", file=sys.stderr)


def cmd_weights(args):
    V = optimal_weights.build_covariance_matrix()
    m, y = optimal_weights.constraint_vectors()
    w = optimal_weights.solve_weights(V, m, y)
    closed = optimal_weights.closed_form_weights()
    variance = optimal_weights.estimator_variance(w, V)
    labels = optimal_weights.Z_LABELS
    if args.format == "json":
        doc = {
            "labels": list(labels),
            "V": V.tolist(),
            "m": m.tolist(),
            "y": y.tolist(),
            "w": w.w.tolist(),
            "w_closed_form": closed.w.tolist(),
            "max_abs_difference": float(np.max(np.abs(w.w - closed.w))),
            "minimized_variance": variance,
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return
    text = [f"# minimized variance: {variance:.17g}"]
    text.append(_csv_rows(["term", "m", "y", "w", "w_closed_form"],
                          [(lab, m[k], y[k], w.w[k], closed.w[k]) for k, lab in enumerate(labels)]).rstrip())
    text.append("# section: V")
    text.append(_csv_rows(["term", *labels], [(lab, *V[k]) for k, lab in enumerate(labels)]).rstrip())
    _emit("\n".join(text) + "\n", args.out)


def cmd_simulate(args):
    process = args.process
    if process == "bm" and args.drift:
        process = "bm_drift"
    template = mc_lab.SimConfig(
        process=process,
        drift=args.drift if process == "bm_drift" else 0.0,
        vg_kappa=args.vg_kappa,
        n_paths=args.paths,
        n_steps=args.steps,
        seed=args.seed,
    )
    table = load_phi_table(args.step)
    rhos = args.rho if args.rho else mc_lab.DEFAULT_RHOS
    rows = mc_lab.run_table(template, table, rhos, workers=args.workers)
    if args.format == "json":
        doc = {"config": {**template.__dict__, "rho": list(rhos)}, "rows": mc_lab.rows_as_dicts(rows)}
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return
    comments = [f"process={process} paths={args.paths} steps={args.steps} seed={args.seed}"]
    if process == "bm_drift":
        comments.append(f"drift={args.drift:g}")
    if process == "vg":
        comments.append(f"vg_kappa={args.vg_kappa:g}")
    _emit(mc_lab.table_csv(rows, comments), args.out)


def _bundle(args):
    p = panel.load_panel(args.input, args.columns)
    return p, panel.cmd_estimate(p, load_phi_table(args.step))


def cmd_estimate(args):
    p, bundle = _bundle(args)
    if args.daily_cov:
        lines = ["date,asset_a,asset_b,cov"]
        n = len(p.names)
        for date, mat in panel.daily_covariances(p):
            for i in range(n):
                for j in range(i, n):
                    lines.append(f"{date.isoformat()},{p.names[i]},{p.names[j]},{mat[i, j]:.10g}")
        Path(args.daily_cov).write_text("\n".join(lines) + "\n")
    if args.format == "json":
        _emit(json.dumps(panel.bundle_dict(bundle), indent=2) + "\n", args.out)
    else:
        _emit(panel.bundle_csv(bundle), args.out)


def cmd_report(args):
    _, bundle = _bundle(args)
    rows = panel.plot_rows(bundle)
    if args.format == "json":
        _emit(json.dumps(rows, indent=2) + "\n", args.out)
        return
    header = [f"# {h}" for h in panel.bundle_header(bundle)]
    body = _csv_rows(list(rows[0]) if rows else ["pair"], [tuple(r.values()) for r in rows])
    _emit("\n".join(header) + "\n" + body, args.out)


def build_parser():
    parser = argparse.ArgumentParser(prog="rangecorr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--step", type=float, default=0.001, help="phi table grid step")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out", help="output file (default stdout)")

    for name, func in (("estimate", cmd_estimate), ("report", cmd_report)):
        p = sub.add_parser(name, help=f"{name} correlations from OHLC CSV files")
        p.add_argument("--input", nargs="+", required=True, help="one CSV per asset, asset name = file stem")
        p.add_argument("--columns", help="header names for date,open,high,low,close")
        common(p)
        if name == "estimate":
            p.add_argument("--daily-cov", help="also write per-day rank-2 covariance matrices to this CSV")
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="Monte Carlo table of simple vs range estimator")
    p.add_argument("--process", choices=("bm", "vg"), default="bm")
    p.add_argument("--drift", type=float, default=0.0)
    p.add_argument("--vg-kappa", type=float, default=0.5)
    p.add_argument("--paths", type=int, default=20_000)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--rho", type=float, nargs="+")
    p.add_argument("--seed", type=int, default=mc_lab.SimConfig.seed)
    p.add_argument("--workers", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("phi-table", help="build and cache the bias-map table")
    p.add_argument("--step", type=float, default=0.001)
    p.add_argument("--out", help="output CSV (default: cache directory)")
    p.set_defaults(func=cmd_phi_table)

    p = sub.add_parser("weights", help="dump V, m, y and the optimal weights")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_weights)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
