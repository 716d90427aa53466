"""Command-line driver.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import analytic_mi_gauss
from .estimators import EstimatorConfig, estimate
from .harness import (
    BOOTSTRAP_DUPLICATES,
    DEFAULT_N_GRID,
    ExperimentConfig,
    bootstrap_mi,
    fit_inverse_n,
    run_ci_experiment,
)
from .ingest import DEFAULT_DATE_COLUMN, DEFAULT_PRICE_COLUMN, align_pairs, load_price_csv, log_returns, pearson
from .neighbors import BACKEND
from .sampling import DistributionSpec, Sample, apply_transform, sample

LARGE_N = 100_000
LN2 = math.log(2.0)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(float(t)) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _add_dist_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("distribution")
    g.add_argument("--dist", choices=("normal", "lognormal", "student"), default="normal")
    g.add_argument("--rho", type=float, default=0.5)
    g.add_argument("--nu", type=float, default=3.0, help="degrees of freedom (student only)")
    g.add_argument("--mu1", type=float, default=0.0)
    g.add_argument("--mu2", type=float, default=0.0)
    g.add_argument("--sigma1", type=float, default=1.0)
    g.add_argument("--sigma2", type=float, default=1.0)
    g.add_argument("--transform", choices=("none", "cube", "cuberoot", "exp"), default="none")
    g.add_argument("--spec-file", help="JSON or key=value distribution file; overrides the flags above")


def _add_estimator_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("estimator")
    g.add_argument("--estimator", choices=("ksg", "plugin"), default="ksg")
    g.add_argument("--k", type=int, default=4, help="neighbours for ksg")
    g.add_argument("--bins", type=int, default=None, help="bins per axis for plugin (default ceil(N^(1/3)) in [8, 256])")
    g.add_argument("--mm", action="store_true", help="Miller-Madow correction for plugin")
    g.add_argument("--dedup", action="store_true", help="jitter exact duplicates before ksg")


def _add_output_flags(p: argparse.ArgumentParser, formats=("csv", "json")) -> None:
    p.add_argument("--out", help="output file (default: stdout, no manifest)")
    p.add_argument("--format", choices=formats, default=formats[0])
    p.add_argument("--units", choices=("nats", "bits"), default="nats")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mibench", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mibench {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="CI experiment over an N grid")
    _add_dist_flags(p)
    _add_estimator_flags(p)
    p.add_argument("--n-grid", type=_int_list, default=DEFAULT_N_GRID)
    p.add_argument("--replicates", type=int, default=None,
                   help="R per N (default 1000 up to 1e4, 100 up to 1e5, 10 beyond)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quantiles", type=float, nargs=2, default=(0.05, 0.95), metavar=("LO", "HI"))
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--allow-large", action="store_true", help=f"permit N > {LARGE_N} (slow)")
    _add_output_flags(p)

    p = sub.add_parser("stocks", help="MI between the log returns of two price files")
    p.add_argument("csv_a")
    p.add_argument("csv_b")
    p.add_argument("--date-col", default=DEFAULT_DATE_COLUMN)
    p.add_argument("--price-col", default=DEFAULT_PRICE_COLUMN)
    p.add_argument("--transform-a", choices=("none", "cube", "cuberoot", "exp"), default="none")
    p.add_argument("--transform-b", choices=("none", "cube", "cuberoot", "exp"), default="none")
    _add_estimator_flags(p)
    p.add_argument("--bootstrap", type=int, default=50, metavar="B")
    p.add_argument("--duplicates", choices=BOOTSTRAP_DUPLICATES, default="collapse",
                   help="how ksg treats pairs repeated by resampling")
    p.add_argument("--lengths", type=_int_list, default=None,
                   help="data-length prefixes (default: log-spaced up to the full length)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_output_flags(p)

    p = sub.add_parser("extrapolate", help="fit mean estimate against 1/N")
    p.add_argument("results", help="sweep output (csv or json)")
    p.add_argument("--append", metavar="PATH", help="write the rows with a bias_corrected column")
    p.add_argument("--json", action="store_true", help="print the fit as JSON")

    p = sub.add_parser("simulate", help="write one seeded sample as x,y CSV")
    _add_dist_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout, no manifest)")

    p = sub.add_parser("estimate", help="estimate MI of an x,y CSV")
    p.add_argument("input")
    p.add_argument("--x-col", default="x")
    p.add_argument("--y-col", default="y")
    _add_estimator_flags(p)
    p.add_argument("--units", choices=("nats", "bits"), default="nats")

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", help="write to this path instead of the recorded one")

    return parser


def _spec_from_args(args) -> DistributionSpec:
    if args.spec_file:
        text = Path(args.spec_file).read_text()
        if text.lstrip().startswith("{"):
            return DistributionSpec.from_json(text)
        return DistributionSpec.from_keyvalue(text)
    return DistributionSpec(
        family=args.dist,
        rho=args.rho,
        mu=(args.mu1, args.mu2),
        sigma=(args.sigma1, args.sigma2),
        nu=args.nu if args.dist == "student" else None,
        transform=args.transform,
    )


def _estimator_from_args(args) -> EstimatorConfig:
    return EstimatorConfig(kind=args.estimator, k=args.k, bins=args.bins, miller_madow=args.mm, dedup=args.dedup)


def _write_output(text: str, out: str | None) -> list[str]:
    if out is None:
        sys.stdout.write(text)
        return []
    Path(out).parent.mkdir(parents=True, exist_ok=True)
    Path(out).write_text(text)
    return [str(out)]


def _manifest_path(out: str) -> Path:
    return Path(str(out) + ".manifest.json")


def _write_manifest(argv: list[str], command: str, config: dict, outputs: list[str],
                    started: dt.datetime, extra: dict | None = None) -> None:
    if not outputs:
        return
    manifest = {
        "command": command,
        "argv": argv,
        "config": config,
        "master_seed": config.get("master_seed", config.get("seed")),
        "version": __version__,
        "backend": BACKEND,
        "started": started.isoformat(),
        "finished": dt.datetime.now(dt.timezone.utc).isoformat(),
        "outputs": outputs,
    }
    if extra:
        manifest.update(extra)
    _manifest_path(outputs[0]).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_sweep(args, argv, parser) -> int:
    try:
        spec = _spec_from_args(args)
        est = _estimator_from_args(args)
        config = ExperimentConfig(
            spec=spec, estimator=est, n_grid=args.n_grid, replicates=args.replicates,
            master_seed=args.seed, quantiles=tuple(args.quantiles),
        )
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    if config.n_grid[-1] > LARGE_N and not args.allow_large:
        parser.error(f"N={config.n_grid[-1]} exceeds {LARGE_N}; pass --allow-large to run it")
    if args.workers < 1:
        parser.error("--workers must be >= 1")

    started = dt.datetime.now(dt.timezone.utc)
    result = run_ci_experiment(config, workers=args.workers)
    scale = LN2 if args.units == "bits" else 1.0
    text = result.to_csv(scale) if args.format == "csv" else result.to_json(scale)
    outputs = _write_output(text, args.out)
    cfg = config.to_dict()
    cfg.update(units=args.units, format=args.format)
    _write_manifest(argv, "sweep", cfg, outputs, started,
                    {"wall_time": {str(c.n): c.wall_time for c in result.cells}})
    return 0


def default_lengths(n: int) -> tuple[int, ...]:
    grid = [m for m in (100, 200, 500, 1000, 2000, 5000, 10_000, 20_000, 50_000, 100_000) if m < n]
    return tuple(grid + [n])


def stocks_table(s: Sample, est: EstimatorConfig, B: int, lengths, seed: int, workers: int = 1,
                 duplicates: str = "collapse") -> list[dict]:
    rows = []
    for m in lengths:
        if m < 2 or m > s.n:
            raise ValueError(f"data length {m} outside [2, {s.n}]")
        head = s.head(m)
        rho = pearson(head)
        rows.append({
            "N": m,
            "pearson": rho,
            "gaussian_mi": analytic_mi_gauss(rho).value,
            "estimate": bootstrap_mi(head, B, est, seed, workers=workers, duplicates=duplicates),
        })
    return rows


def cmd_stocks(args, argv, parser) -> int:
    try:
        est = _estimator_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    if args.bootstrap < 1:
        parser.error("--bootstrap must be >= 1")

    started = dt.datetime.now(dt.timezone.utc)
    a = load_price_csv(args.csv_a, args.date_col, args.price_col)
    b = load_price_csv(args.csv_b, args.date_col, args.price_col)
    s = align_pairs(log_returns(a), log_returns(b))
    if args.transform_a != "none":
        s = apply_transform(s, args.transform_a, axes="x")
    if args.transform_b != "none":
        s = apply_transform(s, args.transform_b, axes="y")
    lengths = args.lengths or default_lengths(s.n)
    rows = stocks_table(s, est, args.bootstrap, lengths, args.seed, args.workers, args.duplicates)

    scale = LN2 if args.units == "bits" else 1.0
    for r in rows:
        r["gaussian_mi"] /= scale
        r["estimate"] /= scale
    meta = {
        "symbols": [a.symbol, b.symbol],
        "transforms": [args.transform_a, args.transform_b],
        "estimator": est.label(),
        "k_or_bins": est.k if est.kind == "ksg" else (est.bins or "auto"),
        "bootstrap": args.bootstrap,
        "duplicates": args.duplicates,
        "seed": args.seed,
        "units": args.units,
    }
    if args.format == "csv":
        buf = io.StringIO()
        cols = ("N", "pearson", "gaussian_mi", "estimate")
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({c: repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols})
        text = buf.getvalue()
    else:
        text = json.dumps(dict(meta, rows=rows), indent=2, sort_keys=True) + "\n"
    outputs = _write_output(text, args.out)
    last = rows[-1]
    print(
        f"{a.symbol} vs {b.symbol}: N={last['N']} pearson={last['pearson']:.6f} "
        f"gaussian_mi={last['gaussian_mi']:.6f} {est.label()}_mi={last['estimate']:.6f} {args.units}",
        file=sys.stderr,
    )
    _write_manifest(argv, "stocks", dict(meta, lengths=list(lengths), files=[args.csv_a, args.csv_b]),
                    outputs, started)
    return 0


def read_results(path) -> list[dict]:
    """Rows of a sweep result file (csv or json) with numeric N and mean."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        rows = json.loads(text)["cells"]
    else:
        rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise ValueError(f"{path}: no result rows")
    out = []
    for i, row in enumerate(rows, 2):
        try:
            r = {k: v for k, v in row.items() if k != "estimates"}
            r["N"] = int(row["N"])
            r["mean"] = float(row["mean"])
        except (KeyError, TypeError, ValueError):
            raise ValueError(f"{path}: row {i} lacks numeric N/mean columns") from None
        out.append(r)
    return out


def cmd_extrapolate(args, argv, parser) -> int:
    started = dt.datetime.now(dt.timezone.utc)
    rows = read_results(args.results)
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        key = (r.get("family", ""), r.get("transform", ""), r.get("estimator", ""))
        groups.setdefault(key, []).append(r)

    fits = {}
    for key, grp in groups.items():
        fit = fit_inverse_n([r["N"] for r in grp], [r["mean"] for r in grp])
        fits[key] = fit
        if not args.json:
            label = "/".join(k for k in key if k) or "results"
            print(f"{label}: intercept={fit.intercept:.6f} slope={fit.slope:.6g} "
                  f"rms_residual={fit.rms_residual:.3g} points={len(grp)}")
    if args.json:
        print(json.dumps([
            {"family": k[0], "transform": k[1], "estimator": k[2], "intercept": f.intercept,
             "slope": f.slope, "rms_residual": f.rms_residual, "points": [list(p) for p in f.points]}
            for k, f in fits.items()
        ], indent=2, sort_keys=True))

    if args.append:
        fieldnames = list(rows[0].keys()) + ["bias_corrected"]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            fit = fits[(r.get("family", ""), r.get("transform", ""), r.get("estimator", ""))]
            out = {k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()}
            out["bias_corrected"] = repr(fit.corrected(r["N"], r["mean"]))
            w.writerow(out)
        outputs = _write_output(buf.getvalue(), args.append)
        _write_manifest(argv, "extrapolate", {"results": args.results}, outputs, started)
    return 0


def cmd_simulate(args, argv, parser) -> int:
    try:
        spec = _spec_from_args(args)
    except (ValueError, OSError) as exc:
        parser.error(str(exc))
    if args.n < 1:
        parser.error("--n must be >= 1")
    started = dt.datetime.now(dt.timezone.utc)
    s = sample(spec, args.n, args.seed)
    buf = io.StringIO()
    buf.write("x,y\n")
    for x, y in zip(s.x.tolist(), s.y.tolist()):
        buf.write(f"{x!r},{y!r}\n")
    outputs = _write_output(buf.getvalue(), args.out)
    _write_manifest(argv, "simulate", {"spec": spec.to_dict(), "n": args.n, "seed": args.seed}, outputs, started)
    return 0


def read_xy_csv(path, x_col: str = "x", y_col: str = "y") -> Sample:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or x_col not in reader.fieldnames or y_col not in reader.fieldnames:
            raise ValueError(f"{path}: need columns {x_col!r} and {y_col!r}")
        xs, ys = [], []
        for row in reader:
            try:
                xs.append(float(row[x_col]))
                ys.append(float(row[y_col]))
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{reader.line_num}: non-numeric value") from None
    return Sample(np.array(xs), np.array(ys), {"file": str(path)})


def cmd_estimate(args, argv, parser) -> int:
    try:
        est = _estimator_from_args(args)
    except ValueError as exc:
        parser.error(str(exc))
    s = read_xy_csv(args.input, args.x_col, args.y_col)
    value = estimate(s, est)
    if args.units == "bits":
        value /= LN2
    print(repr(value))
    return 0


def cmd_replay(args, argv, parser) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    recorded = list(manifest["argv"])
    if args.out is not None:
        flag = "--append" if manifest["command"] == "extrapolate" else "--out"
        if flag in recorded:
            recorded[recorded.index(flag) + 1] = args.out
        else:
            recorded += [flag, args.out]
    return main(recorded)


COMMANDS = {
    "sweep": cmd_sweep,
    "stocks": cmd_stocks,
    "extrapolate": cmd_extrapolate,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "replay": cmd_replay,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        return COMMANDS[args.command](args, argv, subparser)
    except SystemExit as exc:
        return int(exc.code or 0)
    except Exception as exc:  # runtime failure: report and exit 1
        print(f"mibench {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
