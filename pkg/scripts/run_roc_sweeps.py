#!/usr/bin/env python3
"""Run every experiment plan in a directory and write one CSV per plan.

Plans with an snr_grid sweep the link SNR at the base false-alarm set-point;
the rest sweep the false-alarm grid. Output files are named after the plan.
"""

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from rpauth.harness import emit_csv, load_plan, run_roc, run_snr
from rpauth.specfn import DomainError
from rpauth.worldmodel import ConfigError


def run_one(path: Path, out_dir: Path, args) -> Path:
    plan = load_plan(path)
    if args.trials is not None:
        plan = replace(plan, trials=args.trials)
    if args.seed is not None:
        plan = replace(plan, seed=args.seed)
    points = (run_snr if plan.snr_grid else run_roc)(plan, workers=args.workers)
    out = out_dir / (path.stem + ".csv")
    emit_csv(points, out)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--plans", type=Path, default=Path(__file__).parent / "plans",
                    help="directory of plan files (default: scripts/plans)")
    ap.add_argument("--out", type=Path, default=Path("results"),
                    help="output directory (default: ./results)")
    ap.add_argument("--trials", type=int, default=None,
                    help="override each plan's trial count")
    ap.add_argument("--seed", type=int, default=None,
                    help="override each plan's seed")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    plan_paths = sorted(args.plans.glob("*.toml"))
    if not plan_paths:
        print(f"no plan files under {args.plans}", file=sys.stderr)
        return 2
    args.out.mkdir(parents=True, exist_ok=True)
    for path in plan_paths:
        t0 = time.time()
        try:
            out = run_one(path, args.out, args)
        except (ConfigError, DomainError, OSError) as exc:
            print(f"{path.name}: error: {exc}", file=sys.stderr)
            return 2
        print(f"{path.name} -> {out}  ({time.time() - t0:.1f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
