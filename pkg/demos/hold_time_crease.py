"""Fold a cotton flap, hold it for 1 s or 500 s, release, and compare the crease left behind.

    python3 demos/hold_time_crease.py [--n 31] [--out demo_out/crease]

The 500 s hold is time accelerated: it takes the same 50 solver steps as the
1 s hold, but the friction dwell clocks advance by 10 s per step.
"""

import argparse
import warnings

from wrinklesim import scenario as sc
from wrinklesim.solver import StepSizeWarning

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=31)
ap.add_argument("--material", default="cotton")
ap.add_argument("--out", default="demo_out/crease")
args = ap.parse_args()
warnings.simplefilter("ignore", StepSizeWarning)

for hold in (1.0, 500.0):
    res = sc.run(sc.single_wrinkle_friction(args.material, hold, n=args.n))
    held, final = res.record("held"), res.record("final")
    sc.write_outputs(res, f"{args.out}/hold_{hold:g}s")
    print(f"hold {hold:5g} s: held {held['crease_mean_abs_dev']:.3f} rad -> residual "
          f"{final['crease_mean_abs_dev']:.3f} rad over {final['crease_hinges']} crease hinges "
          f"(recovery {final['crease_recovery_pct']:.1f}%)")
