"""Recovery percentage against log hold time for cotton and polyester.

    python3 demos/recovery_curve.py [--n 31] [--out demo_out/recovery]

Cotton's friction threshold keeps rising with dwell time, so longer holds
leave more of the crease behind.  Polyester's stick window is tiny and it
springs back almost completely whatever the hold.
"""

import argparse
import warnings
from pathlib import Path

from wrinklesim import metrics, scenario as sc
from wrinklesim.solver import StepSizeWarning

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=31)
ap.add_argument("--holds", type=float, nargs="+", default=[1, 10, 100, 1000])
ap.add_argument("--out", default="demo_out/recovery")
args = ap.parse_args()
warnings.simplefilter("ignore", StepSizeWarning)
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

for mat in ("cotton", "polyester"):
    rows = metrics.recovery_curve(sc.single_wrinkle_friction, mat, args.holds, n=args.n)
    metrics.write_recovery_csv(out / f"recovery_curve_{mat}.csv", rows)
    print(mat)
    for r in rows:
        bar = "#" * int(max(r["recovery_pct"], 0) / 2)
        print(f"  log10 t = {r['log10_hold']:4.1f}  {r['recovery_pct']:6.1f}%  {bar}")
