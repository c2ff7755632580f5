"""Wrinkle measurements: recovery percentage, recovery-vs-hold curves, torque and timing tables."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from . import scenario as sc

MIN_DEFORMATION = 1e-6  # rad


class MetricError(ValueError):
    pass


def recovery_percentage(theta_held, theta_final, theta_rest) -> float:
    """``100 (1 - |theta_final - rest| / |theta_held - rest|)``.

    Arrays are averaged before the ratio, so a hinge set gives one number.
    """
    held = float(np.mean(np.abs(np.asarray(theta_held, dtype=float) - theta_rest)))
    final = float(np.mean(np.abs(np.asarray(theta_final, dtype=float) - theta_rest)))
    if held <= MIN_DEFORMATION:
        raise MetricError(f"no held deformation to recover from (|theta_held - theta_rest| = {held:.3g})")
    return 100.0 * (1.0 - final / held)


def recovery_from_result(result: sc.ScenarioResult) -> float:
    """Crease-set recovery of a scenario run that marked a crease and measured ``final``."""
    rec = result.record("final")
    if "crease_mean_abs_dev" not in rec:
        raise MetricError("scenario has no crease set (no hinge deformed past the crease threshold)")
    return recovery_percentage(rec["crease_held_mean_abs_dev"], rec["crease_mean_abs_dev"], 0.0)


def recovery_curve(factory, material="cotton", hold_times=(1, 10, 100, 1000), **options) -> list[dict]:
    """Run ``factory(material, hold, **options)`` for each hold time.

    Returns rows ``{hold_s, log10_hold, recovery_pct, residual}`` sorted by
    hold time.
    """
    holds = sorted(float(t) for t in hold_times)
    if len(holds) < 2:
        raise MetricError("a recovery curve needs at least two hold times")
    if holds[0] <= 0:
        raise MetricError("hold times must be positive")
    rows = []
    for t in holds:
        res = sc.run(factory(material, t, **options))
        rows.append({"hold_s": t, "log10_hold": math.log10(t), "recovery_pct": recovery_from_result(res),
                     "residual": sc.residual(res)})
    return rows


def write_recovery_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["hold_s", "log10_hold", "recovery_pct"])
        for r in rows:
            w.writerow([repr(float(r["hold_s"])), repr(r["log10_hold"]), repr(r["recovery_pct"])])


def read_recovery_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


def reaction_torque(result: sc.ScenarioResult) -> np.ndarray:
    """(steps, 3) array of ``step, time, torque`` recorded about the script's torque axis."""
    if not result.script.get("torque"):
        raise MetricError("scenario declares no torque group")
    return np.array(result.torque, dtype=float).reshape(-1, 3)


def max_jump_ratio(torque) -> float:
    """Largest step-to-step torque change relative to the peak |torque|."""
    tq = np.asarray(torque, dtype=float)
    peak = np.max(np.abs(tq)) if len(tq) else 0.0
    if peak == 0.0 or len(tq) < 2:
        return 0.0
    return float(np.max(np.abs(np.diff(tq))) / peak)


# -- timing --------------------------------------------------------------------------

def timing_script(vertices: int, model: str, steps: int, h: float = 0.01) -> dict:
    """A flap fold on a square grid with about ``vertices`` vertices, lasting ``steps`` steps."""
    n = max(int(round(math.sqrt(vertices))), 3)
    script = sc.single_wrinkle("cotton", 1.0, n=n, h=h, model=model, name="timing")
    fold = [ev for ev in script["events"] if ev["action"] in ("pin", "handles", "move_handles")]
    fold[-1] = dict(fold[-1], duration=steps * h)
    script["events"] = fold
    return script


def timing_report(sizes=(2000,), models=("paper", "elastic"), steps: int = 50, warmup: int = 5,
                  h: float = 0.01) -> list[dict]:
    """Mean wall seconds per step over ``steps`` steps after ``warmup`` discarded ones."""
    if steps < 1 or warmup < 0:
        raise MetricError("steps must be >= 1 and warmup >= 0")
    rows = []
    for size in sizes:
        if size < 9:
            raise MetricError(f"mesh size must be >= 9 vertices (got {size})")
        for model in models:
            res = sc.run(timing_script(size, model, steps + warmup, h))
            walls = [s.wall for s in res.stats[warmup:]]
            rows.append({"vertices": len(res.sim.mesh.positions), "model_on": model != "elastic",
                         "model": model, "sec_per_step": float(np.mean(walls)), "steps": len(walls)})
    return rows


def timing_overhead(rows) -> dict:
    """Relative per-step overhead of the hysteresis models at each size."""
    out = {}
    for r in rows:
        out.setdefault(r["vertices"], {})[r["model_on"]] = r["sec_per_step"]
    return {v: t[True] / t[False] - 1.0 for v, t in out.items() if True in t and False in t}


def write_timing_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["vertices", "model_on", "sec_per_step"])
        for r in rows:
            w.writerow([r["vertices"], int(r["model_on"]), repr(r["sec_per_step"])])


def write_rows(path, rows, keys=None) -> Path:
    """Generic CSV dump of dict rows."""
    keys = keys or (list(rows[0]) if rows else [])
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return Path(path)
