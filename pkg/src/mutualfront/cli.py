"""Command line entry point.

Exit codes: 0 success (a Blowup classification is a success), 2 bad config,
3 numerical instability, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from . import __version__
from .config import (
    ParseError,
    SchemaVersionMismatch,
    ValidationError,
    config_from_dict,
    read_config_file,
)
from .experiments import (
    certify_experiment,
    compare_experiment,
    regime_exit_ok,
    resume_experiment,
    run_convergence,
    run_experiment,
    run_sweep,
)
from .presets import PRESETS, preset_dict
from .solver import ConfigError

EXIT_OK, EXIT_CONFIG, EXIT_UNSTABLE, EXIT_IO = 0, 2, 3, 4

_MODES = ("run", "compare", "certify-fast", "sweep", "convergence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mutualfront",
                                     description="Delayed mutualistic reaction-diffusion with two free fronts.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in _MODES:
        p = sub.add_parser(mode)
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", type=Path, help="TOML experiment config")
        src.add_argument("--preset", choices=PRESETS, help="built-in experiment")
        p.add_argument("--out", type=Path, help="output directory (default: [output] dir)")
        p.add_argument("--no-timestamp", action="store_true", help="omit generated_at from JSON reports")
        p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    p = sub.add_parser("resume")
    p.add_argument("--snapshot", type=Path, required=True)
    p.add_argument("--t-end", type=float, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--no-timestamp", action="store_true")
    p.add_argument("--threads", type=int, default=1, help="accepted for symmetry; unused")
    return parser


def _load(args):
    raw = read_config_file(args.config) if args.config else preset_dict(args.preset)
    raw["mode"] = args.command
    return config_from_dict(raw)


def _err(msg: str) -> None:
    print(f"mutualfront: {msg}", file=sys.stderr)


def _dispatch(args) -> int:
    stamp = not args.no_timestamp
    if args.command == "resume":
        _, report = resume_experiment(args.snapshot, args.t_end, args.out, timestamp=stamp)
        print(report.classification.value)
        return EXIT_OK if regime_exit_ok(report) else EXIT_UNSTABLE

    cfg = _load(args)
    out = args.out or Path(cfg.output_dir)
    if args.threads < 1:
        raise ValidationError("--threads must be at least 1")
    if args.command == "run":
        _, report = run_experiment(cfg, out, timestamp=stamp)
        print(report.classification.value)
        return EXIT_OK if regime_exit_ok(report) else EXIT_UNSTABLE
    if args.command == "compare":
        lower, upper, report = compare_experiment(cfg, out, timestamp=stamp)
        print("ordered" if report.ok else f"ordering violated ({report.violations} violations)")
        bad = {lower.terminated, upper.terminated} & {"unstable"}
        return EXIT_UNSTABLE if bad else EXIT_OK
    if args.command == "certify-fast":
        _, dom, report = certify_experiment(cfg, out, timestamp=stamp)
        print(f"{report.classification.value}; domination {'holds' if dom.ok else 'fails'}"
              f" ({dom.violations} violations)")
        return EXIT_OK if regime_exit_ok(report) else EXIT_UNSTABLE
    if args.command == "sweep":
        rows = run_sweep(cfg, out, threads=args.threads)
        for r in rows:
            if r["error"]:
                _err(f"cell {r['values']}: {r['error']}")
        print(f"{len(rows)} cells written to {Path(out) / 'sweep.csv'}")
        return EXIT_OK
    if args.command == "convergence":
        tables = run_convergence(cfg, out)
        for kind, rows in tables.items():
            last = rows[-1]
            print(f"{kind}: order_u={_show(last['order_u'])} order_front={_show(last['order_front'])}")
        return EXIT_OK
    raise AssertionError(args.command)


def _show(x: float) -> str:
    return "n/a" if math.isnan(x) else f"{x:.3f}"


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ParseError, SchemaVersionMismatch, ValidationError, ConfigError, KeyError) as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        _err(f"file not found: {exc.filename}")
        return EXIT_CONFIG if getattr(args, "config", None) else EXIT_IO
    except RuntimeError as exc:
        _err(f"runtime error: {exc}")
        return EXIT_UNSTABLE
    except OSError as exc:
        _err(f"I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
