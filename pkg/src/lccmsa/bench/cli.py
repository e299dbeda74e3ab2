"""Command-line entry point: ``bench run``, ``bench report`` and ``bench kleeminty``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..errors import ConfigError
from .report import emit_report, read_runs
from .runner import KLEE_MINTY, load_config, master_seed, run_suite, validate_config


def _u64(text: str) -> int:
    val = int(text, 0)
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return val


def _positive(text: str) -> int:
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return val


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description="Benchmark the linearly constrained CMSA-ES.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a JSON-configured experiment grid")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--seed", type=_u64, default=None, help="master seed (overrides LCCMSA_SEED and the config)")
    run.add_argument("--jobs", type=_positive, default=1)

    rep = sub.add_parser("report", help="recompute ecdf/art/summary from runs.csv")
    rep.add_argument("--in", dest="in_dir", required=True, type=Path)

    km = sub.add_parser("kleeminty", help="run the Klee-Minty cube sweep")
    km.add_argument("--min-dim", type=_positive, default=1)
    km.add_argument("--max-dim", type=_positive, default=15)
    km.add_argument("--out", required=True, type=Path)
    km.add_argument("--instances", type=_positive, default=1)
    km.add_argument("--seed", type=_u64, default=None)
    km.add_argument("--jobs", type=_positive, default=1)
    return parser


def _run(config: dict, out: Path, seed, jobs: int) -> int:
    records = run_suite(config, seed=master_seed(config, seed), jobs=jobs)
    summary = emit_report(records, out)
    for entry in summary["problems"]:
        err = entry["rel_error"] if entry["rel_error"] is not None else entry["abs_error"]
        kind = "rel" if entry["rel_error"] is not None else "abs"
        print(f"{entry['problem']:<28} D={entry['dim']:<3} best={entry['f_best']:.6e} {kind}_err={err:.3e}")
    print(f"wrote {len(records)} runs to {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _run(load_config(args.config), args.out, args.seed, args.jobs)
        if args.command == "report":
            records = read_runs(args.in_dir / "runs.csv")
            emit_report(records, args.in_dir)
            print(f"rewrote report for {len(records)} runs in {args.in_dir}")
            return 0
        if args.min_dim > args.max_dim:
            raise ConfigError("--min-dim must not exceed --max-dim")
        config = validate_config({"problems": [{"name": KLEE_MINTY,
                                                "dims": list(range(args.min_dim, args.max_dim + 1)),
                                                "instances": args.instances}]})
        return _run(config, args.out, args.seed, args.jobs)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"bench: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
