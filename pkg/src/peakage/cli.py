"""Command-line entry point.

    peakage analytic --lambda 0.1:0.9:0.1 --p 0.1,0.5,1
    peakage sweep --lambda 0.1,0.5,0.9 --peaks 200000 --seed 42 --out report.csv
    peakage validate ...          # sweep that also fails when nothing was scored
    peakage plotdata --analytic-only --lambda 0.01:0.99:0.01

Exit codes: 0 all cells pass, 1 validation failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional, Sequence

from .core import ANALYTIC_POLICIES, Policy
from .exceptions import PeakAgeError
from .stats import aggregate_sweep
from .sweep import (
    ANALYTIC_COLUMNS,
    PLOT_COLUMNS,
    SWEEP_COLUMNS,
    SweepSpec,
    cmd_analytic,
    cmd_plotdata,
    cmd_sweep,
    comparison_dicts,
    to_csv,
    to_json,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("peakage")


class UsageError(Exception):
    pass


def parse_grid(text: str) -> List[float]:
    """``"0.1,0.5"`` or ``"start:stop:step"`` (stop inclusive), comma-combinable."""
    values: List[float] = []
    for item in str(text).split(","):
        item = item.strip()
        if not item:
            continue
        if ":" in item:
            parts = item.split(":")
            if len(parts) != 3:
                raise UsageError(f"range must be start:stop:step, got {item!r}")
            start, stop, step = map(float, parts)
            if step <= 0 or stop < start:
                raise UsageError(f"bad range {item!r}")
            count = int(round((stop - start) / step)) + 1
            values.extend(round(start + k * step, 12) for k in range(count))
        else:
            values.append(float(item))
    if not values:
        raise UsageError(f"empty grid {text!r}")
    return values


def parse_policies(text) -> List[Policy]:
    items = text if isinstance(text, list) else str(text).split(",")
    if len(items) == 1 and str(items[0]).strip().lower() == "all":
        return list(ANALYTIC_POLICIES)
    try:
        return [Policy.parse(str(item)) for item in items if str(item).strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with any of the options below; flags win")
    common.add_argument("--lambda", dest="lam", help="arrival rates: list or start:stop:step")
    common.add_argument("--mu", type=float, help="service rate (default 1)")
    common.add_argument("--p", help="delivery probabilities (default 0.1,0.5,1)")
    common.add_argument("--policies", help="comma list or 'all' (default: the five analytic ones)")
    common.add_argument("--peaks", type=int, help="post-warm-up peaks per cell (default 200000)")
    common.add_argument("--batches", type=int, help="batch-means batches (default 32)")
    common.add_argument("--warmup", type=int, help="warm-up peaks (default max(1000, 1%%))")
    common.add_argument("--seed", type=int, help="master seed (default 42)")
    common.add_argument("--max-events", type=int, help="event budget per cell")
    common.add_argument("--jobs", type=int, help="worker processes (default 1)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--analytic-only", action="store_true", default=None)
    common.add_argument("--allow-unstable-lcfs-pre", action="store_true", default=None)
    common.add_argument("--event-log", help="directory for one CSV event log per simulated cell")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="peakage", description="Peak age of information for lossy M/M/1 update queues.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analytic", parents=[common], help="evaluate the closed forms on a grid")
    sub.add_parser("sweep", parents=[common], help="simulate and compare with the closed forms")
    sub.add_parser("validate", parents=[common], help="strict sweep")
    sub.add_parser("plotdata", parents=[common], help="long-format rows for plotting")
    return parser


_SPEC_KEYS = {
    "lam": "lambdas", "lambda": "lambdas", "mu": "mu", "p": "ps", "policies": "policies",
    "peaks": "peaks", "batches": "batches", "warmup": "warmup", "seed": "seed",
    "max_events": "max_events", "jobs": "jobs", "analytic_only": "analytic_only",
    "allow_unstable_lcfs_pre": "allow_unstable_lcfs_pre", "event_log": "event_log",
}


def _coerce(key: str, value):
    if key == "lambdas" or key == "ps":
        return tuple(value) if isinstance(value, list) else tuple(parse_grid(value))
    if key == "policies":
        return tuple(parse_policies(value))
    return value


def resolve(args: argparse.Namespace):
    """Merge the config file and flags into (SweepSpec, out, format)."""
    settings = {}
    out, fmt = None, "csv"
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        for key, value in raw.items():
            key = key.replace("-", "_")
            if key == "out":
                out = value
            elif key == "format":
                fmt = value
            elif key in _SPEC_KEYS:
                settings[_SPEC_KEYS[key]] = _coerce(_SPEC_KEYS[key], value)
            else:
                raise UsageError(f"unknown config key {key!r}")
    for key, target in _SPEC_KEYS.items():
        value = getattr(args, key, None)
        if value is not None:
            settings[target] = _coerce(target, value)
    if args.out is not None:
        out = args.out
    if args.format is not None:
        fmt = args.format
    if fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {fmt!r}")
    try:
        spec = SweepSpec(**settings)
    except (PeakAgeError, TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return spec, out, fmt


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _render(rows, columns, fmt) -> str:
    return to_json(rows, columns) if fmt == "json" else to_csv(rows, columns)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        spec, out, fmt = resolve(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2

    if args.command == "analytic":
        _emit(_render(cmd_analytic(spec), ANALYTIC_COLUMNS, fmt), out)
        return EXIT_OK

    if args.command == "plotdata":
        rows = cmd_plotdata(spec)
        columns = PLOT_COLUMNS[:4] if spec.analytic_only else PLOT_COLUMNS
        _emit(_render(rows, columns, fmt), out)
        return EXIT_OK

    outcome = cmd_sweep(spec)
    _emit(_render(comparison_dicts(outcome.rows), SWEEP_COLUMNS, fmt), out)
    scored = [r for r in outcome.rows if r.verdict]
    if scored:
        summary = aggregate_sweep(scored)
        worst = summary.worst
        print(f"{summary.passed} passed, {summary.failed} failed, max |z| = "
              f"{summary.max_abs_z:.3g} ({worst.policy} lam={worst.lam:g} p={worst.p:g})",
              file=sys.stderr)
        for row in outcome.failed:
            print(f"FAIL {row.policy} lam={row.lam:g} mu={row.mu:g} p={row.p:g}: "
                  f"sim {row.sim_mean:.6g} +- {row.sim_se:.3g} vs analytic "
                  f"{row.analytic_paoi:.6g}", file=sys.stderr)
    elif args.command == "validate":
        print("no cells were scored", file=sys.stderr)
        return EXIT_FAIL
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
