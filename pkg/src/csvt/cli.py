"""Command-line entry point: ``csvt {estimate,realdata,demo,verify,simulate}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys

from . import harness, ingest, theory
from .estimator import EstimateReport, parse_tn_rule


def _num(x) -> str:
    if x is None or (isinstance(x, float) and not math.isfinite(x)):
        return "null"
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def dumps17(obj) -> str:
    """JSON text with every float written to 17 significant digits."""
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{dumps17(str(k))}: {dumps17(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps17(v) for v in obj) + "]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if hasattr(obj, "item"):  # numpy scalar
        obj = obj.item()
    return _num(obj)


def _report_dict(report: EstimateReport, top: int | None = None) -> dict:
    sv = [float(s) for s in report.singular_values]
    th = report.threshold
    return {
        "k_hat": report.k_hat,
        "r": report.r,
        "p": th.p,
        "n": th.n,
        "tn": th.tn,
        "threshold": th.value,
        "strategy": report.spectrum.strategy,
        "wall_time": report.wall_time,
        "singular_values": sv if top is None else sv[:top],
    }


def _print_report(report: EstimateReport, as_json: bool, top: int, out=None):
    out = out or sys.stdout
    if as_json:
        print(dumps17(_report_dict(report)), file=out)
        return
    th = report.threshold
    print(f"K_hat      {report.k_hat}", file=out)
    print(f"r          {report.r}", file=out)
    print(f"p, n       {th.p}, {th.n}", file=out)
    print(f"threshold  {th.value:.6f}  (t_n = {th.tn:.6f})", file=out)
    shown = ", ".join(f"{s:.6g}" for s in report.singular_values[:top])
    print(f"top sv     {shown}", file=out)
    print(f"time       {report.wall_time:.6f} s  [{report.spectrum.strategy}]", file=out)


def _csv_spec(args) -> ingest.CsvSpec:
    return ingest.CsvSpec(
        delimiter=args.delimiter,
        has_header=args.header,
        label_column=args.label_col,
        orientation=args.orientation,
    )


def cmd_estimate(args) -> int:
    report = ingest.estimate_file(args.input, _csv_spec(args), parse_tn_rule(args.tn), args.strategy)
    _print_report(report, args.json, args.top)
    return 0


def cmd_realdata(args) -> int:
    preset = ingest.PRESETS[args.preset]
    spec = _csv_spec(args) if args.label_col is not None or args.header else None
    result = ingest.preset_check(preset, args.input, spec)
    if result.status == "SKIPPED":
        print(f"{preset.name}: SKIPPED (no file at {args.input})")
        return 0
    r = result.report
    print(f"{preset.name}: {result.status}  n={r.threshold.n} p={r.threshold.p} "
          f"true K={preset.true_k} K_hat={r.k_hat} expected={preset.expected_k_hat} "
          f"time={r.wall_time:.6f}s")
    return 0 if result.passed else 1


def cmd_demo(args) -> int:
    rows = theory.demo_table(args.which, args.seed)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["index", "sigma_raw", "sigma_centered", "threshold"])
        for row in rows:
            writer.writerow([row["index"], _num(row["sigma_raw"]), _num(row["sigma_centered"]),
                             _num(row["threshold"])])
    finally:
        if args.output:
            out.close()
    return 0


def cmd_verify(args) -> int:
    results = theory.run_verification(args.seed)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.detail}")
    return 0 if all(r.passed for r in results) else 1


def cmd_simulate(args) -> int:
    if args.experiment == "custom":
        print("custom grids are only available from Python", file=sys.stderr)
        return 2
    grid = harness.full_grid(args.experiment) if args.grid == "full" else harness.desk_grid(args.experiment)
    cfg = harness.ExperimentConfig(
        args.experiment, grid, reps=args.reps, master_seed=args.seed,
        scale=args.scale, threads=args.threads, strategy=args.strategy,
    )
    rows = harness.run_experiment(cfg)
    if args.output:
        harness.emit_results(rows, args.output, args.format)
    for row in rows:
        status = f"accuracy={row.accuracy:.2f}" if row.error is None else f"ERROR {row.error}"
        extra = f" gamma={row.gamma:g}" if row.gamma != 1.0 else ""
        if row.eta_max is not None:
            extra += f" eta_max={row.eta_max:g}"
        print(f"{row.experiment} n={row.n} p={row.p} K={row.K} beta={row.beta:g}{extra} "
              f"{status} mean_time={row.mean_wall_time:.4f}s")
    return 2 if any(r.error for r in rows) else 0


def _add_csv_flags(sp):
    sp.add_argument("--input", required=True, help="delimited text file")
    sp.add_argument("--delimiter", default=",")
    sp.add_argument("--header", action="store_true", help="first non-blank line is a header")
    sp.add_argument("--label-col", type=int, default=None, help="column index to drop (negative counts from end)")
    sp.add_argument("--orientation", choices=("rows", "cols"), default="rows",
                    help="rows: one sample per line (default); cols: one sample per column")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="csvt", description="Estimate the number of Gaussian mixture components.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("estimate", help="estimate K for a data file")
    _add_csv_flags(sp)
    sp.add_argument("--tn", default="log", help="'log' for ln(n) or a number")
    sp.add_argument("--strategy", choices=("auto", "direct", "gram"), default="auto")
    sp.add_argument("--top", type=int, default=10, help="singular values to show")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("realdata", help="check a benchmark dataset against its recorded K_hat")
    sp.add_argument("--preset", choices=sorted(ingest.PRESETS), required=True)
    _add_csv_flags(sp)
    sp.set_defaults(func=cmd_realdata)

    sp = sub.add_parser("demo", help="singular-value tables for the worked examples")
    sp.add_argument("--which", choices=("fig1", "pathology", "remark2"), required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", default=None)
    sp.set_defaults(func=cmd_demo)

    sp = sub.add_parser("verify", help="run the numerical bound checks")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", help="run a simulation experiment")
    sp.add_argument("--experiment", choices=harness.EXPERIMENTS, required=True)
    sp.add_argument("--grid", choices=("desk", "full"), default="desk")
    sp.add_argument("--scale", type=float, default=1.0, help="multiplier on n and p, in (0, 1]")
    sp.add_argument("--reps", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--strategy", choices=("auto", "direct", "gram"), default="auto")
    sp.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"csvt: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
