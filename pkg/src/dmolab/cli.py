"""Command-line entry point: ``dmolab run|summarize|plot-data|weights``."""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import yaml

from .core import ContractError
from .decomposition import generate_weights
from .harness import (
    ExperimentConfig,
    emit_plot_data,
    read_trace,
    run_experiment,
    summarize,
    trace_path,
    write_summary,
)


def parse_seeds(text: str) -> list[int]:
    """``"1..10"``, ``"1,2,5"`` or a mix like ``"1..3,7"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    return seeds


# CLI flag dest -> ExperimentConfig field
RUN_FLAGS = {
    "problem": "problem",
    "algo": "algorithm",
    "tau": "tau_t",
    "pop": "n_pop",
    "schedule": "schedule",
    "seeds": "seeds",
    "warmup": "warmup_gens",
    "ref_size": "ref_size",
    "ref_seed": "ref_seed",
    "out": "out_path",
    "per_generation": "per_generation",
    "hv_samples": "hv_samples",
    "timing": "timing",
    "halved_form": "halved_form",
    "no_hv": "record_hv",
}


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        with open(args.config) as fh:
            data.update(yaml.safe_load(fh) or {})
        if isinstance(data.get("seeds"), str):
            data["seeds"] = parse_seeds(data["seeds"])
    for dest, key in RUN_FLAGS.items():
        val = getattr(args, dest)
        if val is None:
            continue
        if dest == "seeds":
            val = parse_seeds(val)
        if dest == "no_hv":
            val = not val
        data[key] = val
    return ExperimentConfig.from_mapping(data)


def cmd_run(args) -> int:
    config = build_config(args)
    run_experiment(config)
    if config.out_path:
        print(trace_path(config))
    return 0


def cmd_summarize(args) -> int:
    rows = []
    for p in args.traces:
        rows.extend(read_trace(p))
    table = summarize(rows)
    write_summary(table, args.out or sys.stdout)
    return 0


def cmd_plot_data(args) -> int:
    rows = []
    for p in args.traces:
        rows.extend(read_trace(p))
    for path in emit_plot_data(rows, args.out):
        print(path)
    return 0


def cmd_weights(args) -> int:
    ws = generate_weights(args.m)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow([f"w{i + 1}" for i in range(ws.m)])
        w.writerows([[repr(float(v)) for v in row] for row in ws.vectors])
    finally:
        if args.out:
            fh.close()
    if args.out:
        print(f"{len(ws)} weight vectors -> {args.out}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dmolab")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run seeded experiments and write a trace CSV")
    run.add_argument("--config", help="YAML/JSON file with ExperimentConfig keys")
    run.add_argument("--problem")
    run.add_argument("--algo")
    run.add_argument("--tau", type=int)
    run.add_argument("--pop", type=int)
    run.add_argument("--schedule", choices=["eq10", "eq13", "custom"])
    run.add_argument("--seeds", help="e.g. 1..10 or 1,2,3")
    run.add_argument("--warmup", type=int)
    run.add_argument("--ref-size", type=int)
    run.add_argument("--ref-seed", type=int)
    run.add_argument("--out")
    run.add_argument("--hv-samples", type=int)
    run.add_argument("--per-generation", action="store_true", default=None)
    run.add_argument("--timing", action="store_true", default=None)
    run.add_argument("--halved-form", action="store_true", default=None)
    run.add_argument("--no-hv", action="store_true", default=None)
    run.set_defaults(func=cmd_run)

    summ = sub.add_parser("summarize", help="median/IQR table from trace CSVs")
    summ.add_argument("traces", nargs="+")
    summ.add_argument("--out")
    summ.set_defaults(func=cmd_summarize)

    plot = sub.add_parser("plot-data", help="median IGD trajectories per problem and tau")
    plot.add_argument("traces", nargs="+")
    plot.add_argument("--out", required=True)
    plot.set_defaults(func=cmd_plot_data)

    wts = sub.add_parser("weights", help="dump the weight vectors for m objectives")
    wts.add_argument("--m", type=int, required=True)
    wts.add_argument("--out")
    wts.set_defaults(func=cmd_weights)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
