"""``bench`` command line: run an experiment, write per-sample and aggregate CSVs."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .bench import (
    BenchConfig,
    aggregate,
    parse_levels,
    run_criteria,
    run_success_rate,
    write_csv,
    CRITERIA_HEADER,
    SUCCESS_HEADER,
)
from .criteria import KanataniConfig
from .scenegen import SceneGenConfig

CRITERIA_KEYS = ("ds", "d1", "dk", "te_ns", "ts_ns", "t1_ns", "tk_ns", "ik")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Fundamental-matrix error criteria benchmark.")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name, text in (
        ("success-rate", "trials needed by the correspondence generator"),
        ("criteria", "accuracy and timing of SED, Sampson and Kanatani against RE"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--levels", default="decades:-6:6", help='comma list, or "decades:lo:hi"')
        p.add_argument("--reps", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, type=Path)
        p.add_argument(
            "--variant",
            choices=("gp", "parametric", "both"),
            default="both" if name == "success-rate" else "gp",
            help="generator seed mode(s)",
        )
        p.add_argument("--favg", type=float, default=SceneGenConfig.f_avg, help="mean focal length")
        p.add_argument("--max-trials", type=int, default=200)
        p.add_argument("--rek-delta", type=float, default=1e-6)
        p.add_argument("--rek-max-iters", type=int, default=1000)
        p.add_argument("--aggregate", type=Path, help="write mean/std per level here")
        p.add_argument("--gnuplot", type=Path, help="write a gnuplot script plotting the aggregate CSV")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config(args) -> BenchConfig:
    if args.reps < 1:
        raise ValueError("--reps must be >= 1")
    variants = ("gp", "parametric") if args.variant == "both" else (args.variant,)
    if args.gnuplot and not args.aggregate:
        raise ValueError("--gnuplot needs --aggregate")
    if args.experiment == "criteria" and args.variant == "both":
        raise ValueError("criteria takes a single --variant (gp or parametric)")
    return BenchConfig(
        scene=SceneGenConfig(f_avg=args.favg),
        max_trials=args.max_trials,
        kanatani=KanataniConfig(delta=args.rek_delta, max_iterations=args.rek_max_iters),
        variants=variants,
        criteria_variant=variants[0],
    )


def gnuplot_script(aggregate_path: Path, keys, output: str = "bench.png") -> str:
    """Mean +- std against a log-scale RE axis, one plot per key."""
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set logscale x",
        "set format x '10^{%L}'",
        "set xlabel 'RE (pixels)'",
        f"set terminal pngcairo size 900,{300 * len(keys)}",
        f"set output '{output}'",
        f"set multiplot layout {len(keys)},1",
    ]
    for key in keys:
        lines += [
            f"set ylabel '{key}'",
            f"plot '{aggregate_path}' using 1:(strcol(2) eq '{key}' ? $3 : 1/0):4 with yerrorlines title '{key}'",
        ]
    lines.append("unset multiplot")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        levels = parse_levels(args.levels)
        cfg = _config(args)
    except ValueError as exc:
        print(f"bench: configuration error: {exc}", file=sys.stderr)
        return 2

    if args.experiment == "success-rate":
        records = run_success_rate(levels, args.reps, cfg, args.seed)
        header, keys, group_by = SUCCESS_HEADER, ("trials",), "variant"
    else:
        records = run_criteria(levels, args.reps, cfg, args.seed)
        header, keys, group_by = CRITERIA_HEADER, CRITERIA_KEYS, None
    records.sort(key=lambda r: (r.re_level, getattr(r, "variant", ""), r.rep))
    write_csv(records, args.out, header=header)

    if args.aggregate:
        rows = aggregate(records, keys, group_by=group_by) if records else []
        write_csv(rows, args.aggregate, header=("re_level", "key", "mean", "std", "n"))
        if args.gnuplot:
            plot_keys = sorted({r.key for r in rows})
            args.gnuplot.write_text(gnuplot_script(args.aggregate, plot_keys))
    return 0


if __name__ == "__main__":
    sys.exit(main())
