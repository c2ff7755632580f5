"""Seconds per step with friction and plasticity on versus elastic only.

    python3 demos/benchmark.py [--sizes 2000 7000] [--out demo_out/bench]
"""

import argparse
import warnings
from pathlib import Path

from wrinklesim import metrics
from wrinklesim.solver import StepSizeWarning

ap = argparse.ArgumentParser()
ap.add_argument("--sizes", type=int, nargs="+", default=[2000])
ap.add_argument("--steps", type=int, default=50)
ap.add_argument("--out", default="demo_out/bench")
args = ap.parse_args()
warnings.simplefilter("ignore", StepSizeWarning)

rows = metrics.timing_report(args.sizes, steps=args.steps)
Path(args.out).mkdir(parents=True, exist_ok=True)
metrics.write_timing_csv(Path(args.out) / "timing.csv", rows)
for r in rows:
    print(f"{r['vertices']:6d} vertices  models {'on ' if r['model_on'] else 'off'}  {r['sec_per_step']:.4f} s/step")
for v, o in metrics.timing_overhead(rows).items():
    print(f"overhead at {v} vertices: {100 * o:.1f}%")
