"""Reaction torque of a cloth tube under a small twist at two step sizes.

    python3 demos/twist_torque.py [--out demo_out/twist]

At h = 0.01 s the friction guard reports that hinge angles jump past the
stick window in single steps.  At h = 0.001 s the torque trace is smooth.
"""

import argparse
import math
import warnings
from pathlib import Path

from wrinklesim import metrics, scenario as sc
from wrinklesim.solver import StepSizeWarning

ap = argparse.ArgumentParser()
ap.add_argument("--material", default="cotton")
ap.add_argument("--out", default="demo_out/twist")
args = ap.parse_args()
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

for h in (0.01, 0.001):
    script = sc.cylinder_twist(args.material, 1.0, angle=math.radians(5), h=h, untwist=False)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", StepSizeWarning)
        res = sc.run(script)
    tq = metrics.reaction_torque(res)
    sc.write_torque_csv(out / f"torque_h{h:g}.csv", res.torque)
    print(f"h = {h:g} s: peak torque {abs(tq[:, 2]).max():.3e} N m, largest step jump "
          f"{100 * metrics.max_jump_ratio(tq[:, 2]):.2f}% of peak, step-size warnings: {len(caught)}")
