"""Command line: ``wrinklesim {simulate, sweep, bench, validate}``.

Exit codes: 0 success, 1 solver or run failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import inspect
import json
import logging
import math
import sys
import warnings
from pathlib import Path

from . import __version__, metrics
from . import scenario as sc
from .material import PRESET_NAMES, resolve, validate as validate_material
from .solver import MODELS, SolverError, StepSizeWarning

log = logging.getLogger("wrinklesim")

EXIT_OK, EXIT_RUN, EXIT_CONFIG = 0, 1, 2


class ConfigError(Exception):
    pass


def _material_arg(name: str) -> str:
    try:
        mat = resolve(name)
    except (KeyError, FileNotFoundError, ValueError, TypeError) as e:
        msg = e.args[0] if isinstance(e, KeyError) else str(e)
        if not isinstance(e, KeyError):
            msg += f"; presets: {', '.join(PRESET_NAMES)}"
        raise ConfigError(msg)
    problems = validate_material(mat)
    if problems:
        raise ConfigError("invalid material: " + "; ".join(problems))
    return name


def build_script(scenario: str, material: str | None = None, hold: float | None = None, model: str | None = None,
                 h: float | None = None, n: int | None = None, seed: int | None = None,
                 jitter: float = 0.0, snapshot_every: int | None = None) -> dict:
    """A canonical scenario by name, or a JSON script file, with command line overrides applied."""
    if scenario in sc.CANONICAL:
        factory = sc.CANONICAL[scenario]
        accepted = inspect.signature(factory).parameters
        kw = {"h": h, "model": model, "n": n}
        kw = {k: v for k, v in kw.items() if v is not None}
        # the friction/plastic wrappers forward keywords to the generic fold
        if "kw" not in accepted:
            unknown = [k for k in kw if k not in accepted]
            if unknown:
                raise ConfigError(f"scenario {scenario} does not take --{unknown[0]}")
        script = factory(material or "cotton", 1.0 if hold is None else hold, **kw)
    else:
        path = Path(scenario)
        if not path.is_file():
            raise ConfigError(f"unknown scenario {scenario!r}; canonical: {', '.join(sc.CANONICAL)}, or a JSON file")
        try:
            script = sc.load_script(path)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})")
        if material is not None:
            script["material"] = material
        if model is not None or h is not None:
            script.setdefault("solver", {})
            if model is not None:
                script["solver"]["model"] = model
            if h is not None:
                script["solver"]["h"] = h
        if hold is not None:
            for ev in script.get("events", []):
                if ev.get("action") == "hold":
                    ev["clock"] = hold
    if seed is not None:
        script["seed"] = seed
        script["jitter"] = jitter
    if snapshot_every is not None:
        script["snapshot_every"] = snapshot_every
    check_script(script)
    return script


def check_script(script: dict) -> None:
    """Raise ConfigError if the script cannot be set up (without running it)."""
    try:
        sc.validate_script(script)
        mat = sc.material_of(script)
        problems = validate_material(mat)
        if problems:
            raise ConfigError("invalid material: " + "; ".join(problems))
        sc.solver_config(script)
        mesh = sc.build_mesh(script.get("mesh", {}), mat.rho)
        for ev in script["events"]:
            if "select" in ev:
                sc.select(mesh, ev["select"])
    except ConfigError:
        raise
    except KeyError as e:
        raise ConfigError(e.args[0] if e.args else str(e))
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e))


def _run_and_write(script: dict, out: Path, threads: int, extra: dict) -> sc.ScenarioResult:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", StepSizeWarning)
        result = sc.run(script, threads=threads)
    step_warnings = sorted({str(w.message) for w in caught if issubclass(w.category, StepSizeWarning)})
    for msg in step_warnings[:1]:
        print(f"warning: {msg}", file=sys.stderr)
    sc.write_outputs(result, out, extra_manifest=extra)
    return result


def cmd_simulate(args) -> int:
    if args.material is not None:
        _material_arg(args.material)
    script = build_script(args.scenario, args.material, args.hold, args.model, args.h, args.n, args.seed,
                          args.jitter, args.snapshot_every)
    out = Path(args.out)
    extra = {"command": "simulate", "scenario": args.scenario, "material": args.material, "model": args.model,
             "hold": args.hold, "threads": args.threads, "seed": args.seed}
    result = _run_and_write(script, out, args.threads, extra)
    final = result.records[-1] if result.records else {}
    summary = ", ".join(f"{k}={v:.6g}" for k, v in final.items() if isinstance(v, float))
    print(f"{script.get('name', args.scenario)}: {len(result.stats)} steps -> {out}" + (f" ({summary})" if summary else ""))
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.holds or len(args.holds) < 2:
        raise ConfigError("sweep needs at least two hold times (--holds 1 10 100 1000)")
    if any(t <= 0 for t in args.holds):
        raise ConfigError("hold times must be positive")
    materials = args.materials or ["cotton"]
    for m in materials:
        _material_arg(m)
    for m in materials:  # fail on configuration before spending time on runs
        build_script(args.scenario, m, args.holds[0], args.model, args.h, args.n)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    failed = 0
    for m in materials:
        rows = []
        for t in sorted(args.holds):
            script = build_script(args.scenario, m, t, args.model, args.h, args.n)
            try:
                res = sc.run(script, threads=args.threads)
                rec = metrics.recovery_from_result(res)
            except (SolverError, sc.ScenarioRunError, metrics.MetricError) as e:
                print(f"error: {m} hold {t:g} s: {e}", file=sys.stderr)
                failed += 1
                continue
            rows.append({"hold_s": t, "log10_hold": math.log10(t), "recovery_pct": rec})
            print(f"{m} hold {t:g} s: recovery {rec:.2f}%")
        path = out / (f"recovery_curve_{Path(m).stem}.csv" if len(materials) > 1 else "recovery_curve.csv")
        metrics.write_recovery_csv(path, rows)
    with open(out / "manifest.json", "w") as fh:
        json.dump({"version": __version__, "command": "sweep", "scenario": args.scenario, "materials": materials,
                   "holds": sorted(args.holds), "model": args.model, "h": args.h, "n": args.n,
                   "threads": args.threads}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return EXIT_RUN if failed else EXIT_OK


def cmd_bench(args) -> int:
    if any(s <= 0 for s in args.sizes):
        raise ConfigError("mesh sizes must be positive vertex counts")
    if args.steps < 1:
        raise ConfigError("--steps must be >= 1")
    try:
        rows = metrics.timing_report(args.sizes, steps=args.steps, warmup=args.warmup)
    except metrics.MetricError as e:
        raise ConfigError(str(e))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    metrics.write_timing_csv(out / "timing.csv", rows)
    for r in rows:
        print(f"{r['vertices']} vertices, models {'on ' if r['model_on'] else 'off'}: {r['sec_per_step']:.4f} s/step")
    for v, o in metrics.timing_overhead(rows).items():
        print(f"{v} vertices: overhead {100 * o:.1f}%")
    return EXIT_OK


def cmd_validate(args) -> int:
    script = build_script(args.scenario, args.material, args.hold, args.model, args.h, args.n)
    n_events = len(script["events"])
    mat = script.get("material", "cotton")
    print(f"{script.get('name', args.scenario)}: ok ({n_events} events, material {mat if isinstance(mat, str) else 'inline'})")
    if args.dump:
        json.dump(script, sys.stdout, indent=2, sort_keys=True)
        print()
    return EXIT_OK


def _common(p, hold=True):
    p.add_argument("--scenario", required=True,
                   help=f"canonical scenario ({', '.join(sc.CANONICAL)}) or path to a JSON script")
    p.add_argument("--model", choices=MODELS, default=None, help="hysteresis model (default: the script's)")
    p.add_argument("--h", type=float, default=None, help="time step in seconds")
    p.add_argument("--n", type=int, default=None, help="grid resolution per side for grid specimens")
    p.add_argument("--threads", type=int, default=1, help="thread count (recorded; reductions are deterministic)")
    if hold:
        p.add_argument("--hold", type=float, default=None, help="held time in seconds (time accelerated)")


def parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wrinklesim", description="Cloth simulation with time-dependent "
                                 "internal friction and plasticity.")
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log solver diagnostics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write OBJ snapshots, CSVs and a manifest")
    _common(p)
    p.add_argument("--material", default=None, help="preset name (cotton, denim, polyester) or material JSON")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--seed", type=int, default=None, help="seed for mesh jitter (off unless --jitter > 0)")
    p.add_argument("--jitter", type=float, default=0.0, help="rest-shape perturbation amplitude in metres")
    p.add_argument("--snapshot-every", type=int, default=None, help="also write an OBJ every N steps")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="recovery percentage over hold times, one CSV per material")
    _common(p, hold=False)
    p.add_argument("--holds", type=float, nargs="*", default=[1, 10, 100, 1000], help="hold times in seconds")
    p.add_argument("--materials", nargs="+", default=None, help="materials (default cotton)")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="seconds per step with the hysteresis models on and off")
    p.add_argument("--sizes", type=int, nargs="+", default=[2000], help="approximate vertex counts")
    p.add_argument("--steps", type=int, default=50, help="timed steps per configuration")
    p.add_argument("--warmup", type=int, default=5, help="untimed steps before timing")
    p.add_argument("--out", default="out", help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("validate", help="check a scenario and material without running")
    _common(p)
    p.add_argument("--material", default=None, help="preset name or material JSON")
    p.add_argument("--dump", action="store_true", help="print the resolved script")
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, sc.ScenarioRunError) as e:
        print(f"solver failure: {e}", file=sys.stderr)
        return EXIT_RUN


if __name__ == "__main__":
    sys.exit(main())
