"""Command-line front end: run single experiments, sweeps, and page loads."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .errors import SosimError, UsageError
from .harness import (
    SWEEP_AXES,
    improvement_pct,
    parse_config,
    run_experiment,
    run_sweep,
    write_csv,
)
from .simulator import SCHEDULERS


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config file")
    parser.add_argument("--seed", type=int, default=None, help="override root seed")
    parser.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    parser.add_argument(
        "--mode", choices=["oracle", "estimated"], default=None,
        help="parameter feed: true source parameters or rolling-window estimates",
    )
    parser.add_argument(
        "--baseline", choices=list(SCHEDULERS), default=None,
        help="also run this scheduler on identical sources and report improvement",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sosim", description="Multipath object scheduling experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    _add_common(run)

    sweep = sub.add_parser("sweep", help="sweep one axis of an experiment")
    _add_common(sweep)
    sweep.add_argument("--axis", required=True, choices=list(SWEEP_AXES))
    sweep.add_argument(
        "--values", required=True,
        help="comma-separated axis values, e.g. 1,5,10,20,50",
    )
    sweep.add_argument(
        "--axis-path", type=int, default=1,
        help="path index whose stddev a sigma sweep varies (default 1)",
    )

    page = sub.add_parser("page", help="run a page-load experiment")
    _add_common(page)
    page.add_argument("--page-spec", default=None, help="override page spec file")
    page.add_argument(
        "--ordering", choices=["priority", "fifo"], default=None,
        help="dispatch pending objects by priority or in request order",
    )
    return parser


def _load_config(args):
    config = parse_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.mode is not None:
        overrides["mode"] = args.mode
    if getattr(args, "ordering", None) is not None:
        overrides["ordering"] = args.ordering
    if getattr(args, "page_spec", None) is not None:
        overrides["page_spec"] = args.page_spec
        overrides.setdefault("object_size", None)
    return replace(config, **overrides) if overrides else config


def _emit(rows, out) -> None:
    if out is None:
        write_csv(rows, sys.stdout)
    else:
        write_csv(rows, out)


def _with_baseline(row, config, baseline):
    if baseline:
        ref = run_experiment(replace(config, scheduler=baseline, label=""))
        row.improvement_mean_pct = improvement_pct(ref.mean_delay_ms, row.mean_delay_ms)
        row.improvement_p95_pct = improvement_pct(ref.p95_delay_ms, row.p95_delay_ms)
    return row


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        if args.command == "run":
            _emit([_with_baseline(run_experiment(config), config, args.baseline)], args.out)
        elif args.command == "sweep":
            values = [v for v in args.values.split(",") if v]
            rows = run_sweep(
                config,
                axis=args.axis,
                values=[float(v) if args.axis != "object_size" else int(v) for v in values],
                baseline=args.baseline,
                axis_path=args.axis_path,
            )
            _emit(rows, args.out)
        else:  # page
            if config.page_spec is None:
                raise UsageError("page command needs page_spec in the config or --page-spec")
            _emit([_with_baseline(run_experiment(config), config, args.baseline)], args.out)
    except SosimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
