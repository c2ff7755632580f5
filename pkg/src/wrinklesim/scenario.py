"""Declarative experiment scripts and the canonical specimen library.

A script is a JSON-compatible dict::

    {
      "name": "...",
      "mesh": {"type": "grid", "width": 0.3, "height": 0.3, "nx": 61, "ny": 61},
      "material": "cotton" | {...material json...},
      "material_overrides": {...},            # optional, e.g. tensile thresholds
      "solver": {"h": 0.01, "gravity": [0, 0, 0], "model": "paper", ...},
      "obstacles": {"weight": {"shape": "box", "center": [...], ...}},
      "events": [{"action": "...", "duration": 0.5, ...}, ...],
      "snapshot_every": 0,                    # steps between OBJ snapshots (0: measure events only)
    }

Events run in order.  An optional ``start`` makes the harness idle until
that time, and an event starting before the current time is a script error.
Kinematic time always advances by ``h`` per step.  Only ``hold`` changes the
material clocks: a hold of ``clock`` seconds spread over ``duration``
kinematic seconds advances the friction and plasticity clocks by
``clock / steps`` per step.  The kinematic length of a hold therefore does
not depend on the held time, so models without clocks give identical
trajectories for any hold.

Vertex selections use rest-position boxes (``{"box": [[x0, y0, z0], [x1, y1, z1]]}``),
``{"all": true}``, ``{"indices": [...]}`` or, on cylinders, ``{"ring": "top" | "bottom"}``.
"""

from __future__ import annotations

import copy
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .contact import Obstacle
from .material import MaterialParams, resolve
from .mesh import ClothMesh, build_cylinder, build_grid, perturbed, write_obj
from .solver import HandleSet, Simulator, SolverConfig, SolverError

ACTIONS = ("pin", "unpin", "handles", "move_handles", "release", "set_obstacle_pose", "hold", "wait",
           "measure", "zero_velocity")

CREASE_THRESHOLD = 0.2  # rad: hinges deformed more than this at the marked moment form the crease set


class ScenarioError(ValueError):
    pass


class ScenarioRunError(RuntimeError):
    def __init__(self, index: int, action: str, cause: Exception):
        super().__init__(f"event {index} ({action}) failed: {cause}")
        self.index = index
        self.cause = cause


@dataclass
class ScenarioResult:
    script: dict
    records: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (step, tag, positions)
    torque: list = field(default_factory=list)  # (step, time, torque)
    stats: list = field(default_factory=list)
    faces: np.ndarray | None = None
    sim: Simulator | None = None
    warnings: list = field(default_factory=list)

    def record(self, tag: str) -> dict:
        for r in self.records:
            if r["tag"] == tag:
                return r
        raise KeyError(tag)


# -- script validation and construction -------------------------------------------

def build_mesh(spec: dict, density: float) -> ClothMesh:
    kind = spec.get("type", "grid")
    if kind == "grid":
        return build_grid(spec.get("width", 0.3), spec.get("height", 0.3), spec.get("nx", 61), spec.get("ny", 61),
                          density)
    if kind == "cylinder":
        return build_cylinder(spec["radius"], spec["height"], spec["n_around"], spec["n_along"], density)
    raise ScenarioError(f"unknown mesh type {kind!r}")


def material_of(script: dict) -> MaterialParams:
    mat = resolve(script.get("material", "cotton"))
    overrides = script.get("material_overrides") or {}
    return mat.with_(**overrides) if overrides else mat


def solver_config(script: dict, **changes) -> SolverConfig:
    cfg = dict(script.get("solver") or {})
    cfg.update(changes)
    if "gravity" in cfg:
        cfg["gravity"] = tuple(cfg["gravity"])
    try:
        out = SolverConfig(**cfg)
    except TypeError as e:
        raise ScenarioError(f"bad solver settings: {e}") from None
    out.validate()
    return out


def select(mesh: ClothMesh, spec, reference: np.ndarray | None = None) -> np.ndarray:
    """Vertex indices for a selection spec (see module docstring).

    ``reference`` replaces the rest positions, e.g. the nominal shape of a
    perturbed specimen.
    """
    x = mesh.rest_positions if reference is None else reference
    if spec is None or spec.get("all"):
        return np.arange(len(x))
    if "indices" in spec:
        idx = np.asarray(spec["indices"], dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= len(x)):
            raise ScenarioError("selection references a vertex that does not exist")
        return idx
    if "box" in spec:
        lo, hi = (np.asarray(v, dtype=float) for v in spec["box"])
        eps = 1e-9
        return np.flatnonzero(np.all((x >= lo - eps) & (x <= hi + eps), axis=1))
    if "ring" in spec:
        z = x[:, 2]
        target = z.max() if spec["ring"] == "top" else z.min()
        return np.flatnonzero(np.abs(z - target) < 1e-9)
    raise ScenarioError(f"unknown selection {spec!r}")


def validate_script(script: dict) -> None:
    if "events" not in script or not isinstance(script["events"], list):
        raise ScenarioError("script needs an 'events' list")
    last = 0.0
    for i, ev in enumerate(script["events"]):
        act = ev.get("action")
        if act not in ACTIONS:
            raise ScenarioError(f"event {i}: unknown action {act!r}; valid: {', '.join(ACTIONS)}")
        if "start" in ev:
            if ev["start"] < last - 1e-9:
                raise ScenarioError(f"event {i}: events must be time ordered")
            last = ev["start"]
        if act == "hold":
            if ev.get("clock", 0) < 0 or ev.get("duration", 0) <= 0:
                raise ScenarioError(f"event {i}: hold needs clock >= 0 and duration > 0")
            if ev["clock"] < ev["duration"] and ev["clock"] > 0:
                raise ScenarioError(f"event {i}: hold time_scale = clock/duration must be >= 1")
        if ev.get("duration", 0) < 0:
            raise ScenarioError(f"event {i}: negative duration")


def _rotation(axis, angle: float) -> np.ndarray:
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    k = np.array([[0, -a[2], a[1]], [a[2], 0, -a[0]], [-a[1], a[0], 0]])
    return np.eye(3) + math.sin(angle) * k + (1 - math.cos(angle)) * (k @ k)


def _profile(frac: float, ease: bool) -> float:
    """Trajectory progress; ``ease`` starts and stops with zero velocity (smoothstep)."""
    return frac * frac * (3.0 - 2.0 * frac) if ease else frac


def _transform(points: np.ndarray, ev: dict, frac: float) -> np.ndarray:
    out = points
    if "rotate" in ev:
        r = ev["rotate"]
        R = _rotation(r["axis"], frac * r["angle"])
        p = np.asarray(r.get("point", [0, 0, 0]), dtype=float)
        out = (out - p) @ R.T + p
    if "translate" in ev:
        out = out + frac * np.asarray(ev["translate"], dtype=float)
    return out


# -- runner -----------------------------------------------------------------------------

class _Runner:
    def __init__(self, script: dict, threads: int = 1):
        validate_script(script)
        self.script = script
        self.material = material_of(script)
        self.mesh = build_mesh(script.get("mesh", {}), self.material.rho)
        self.nominal = self.mesh.rest_positions
        seed = script.get("seed")
        jitter = script.get("jitter", 0.0)
        if seed is not None and jitter > 0:
            # an imperfect rest shape, so symmetric specimens can buckle
            rng = np.random.default_rng(seed)
            self.mesh = perturbed(self.mesh, jitter * rng.standard_normal(self.mesh.positions.shape))
        self.config = solver_config(script)
        self.base_damping = self.config.damping
        self.obstacles = {}
        for name, spec in (script.get("obstacles") or {}).items():
            self.obstacles[name] = Obstacle(**spec)
        self.sim = Simulator(self.mesh, self.material, self.config, list(self.obstacles.values()))
        self.groups: dict[str, dict] = {}  # name -> {vertices, targets, stiffness}
        self.torque_spec = script.get("torque")  # {"group":..., "axis":..., "point":...}
        self.crease = None
        self.held_phi = None
        self.result = ScenarioResult(script=script, faces=self.mesh.faces, sim=self.sim)
        self.snapshot_every = int(script.get("snapshot_every", 0))

    def _sync_handles(self) -> None:
        if not self.groups:
            self.sim.handles = HandleSet()
            return
        gs = list(self.groups.values())
        self.sim.handles = HandleSet(np.concatenate([g["vertices"] for g in gs]),
                                     np.concatenate([g["targets"] for g in gs]),
                                     np.concatenate([np.broadcast_to(g["stiffness"], g["vertices"].shape) for g in gs]))

    def _torque(self) -> float:
        spec = self.torque_spec
        g = self.groups.get(spec["group"]) if spec else None
        if g is None or not len(g["vertices"]):
            return 0.0
        # handle springs evaluated at the converged end-of-step positions
        x = self.mesh.positions[g["vertices"]]
        f = g["stiffness"][:, None] * (g["targets"] - x)
        r = x - np.asarray(spec.get("point", [0, 0, 0]), dtype=float)
        axis = np.asarray(spec.get("axis", [0, 0, 1]), dtype=float)
        # torque the cloth exerts on the handles (reaction of the handle forces)
        return float(-np.sum(np.cross(r, f) @ axis))

    def _step(self, dt_clock=None, damping=None) -> None:
        self.sim.config.damping = self.base_damping if damping is None else damping
        self.sim.step(dt_clock)
        st = self.sim.stats[-1]
        if self.torque_spec:
            self.result.torque.append((st.step, st.time, self._torque()))
        if self.snapshot_every and st.step % self.snapshot_every == 0:
            self.result.snapshots.append((st.step, "", self.mesh.positions.copy()))

    def _n_steps(self, duration: float) -> int:
        return int(round(duration / self.config.h))

    def run(self) -> ScenarioResult:
        for i, ev in enumerate(self.script["events"]):
            try:
                self._event(ev)
            except SolverError as e:
                raise ScenarioRunError(i, ev["action"], e) from e
        self.result.stats = self.sim.stats
        return self.result

    def _event(self, ev: dict) -> None:
        act = ev["action"]
        damping = ev.get("damping")
        if "start" in ev:
            idle = self._n_steps(ev["start"] - self.sim.time)
            for _ in range(max(idle, 0)):
                self._step(damping=damping)
        mesh = self.mesh
        if act == "pin":
            mesh.pinned[select(mesh, ev.get("select"), self.nominal)] = True
            mesh.velocities[mesh.pinned] = 0.0
        elif act == "unpin":
            mesh.pinned[select(mesh, ev.get("select"), self.nominal)] = False
        elif act == "handles":
            v = select(mesh, ev.get("select"), self.nominal)
            self.groups[ev["group"]] = {"vertices": v, "targets": mesh.positions[v].copy(),
                                        "stiffness": np.full(len(v), float(ev.get("stiffness", 1.0)))}
            self._sync_handles()
        elif act == "move_handles":
            g = self.groups[ev["group"]]
            start = g["targets"].copy()
            n = max(self._n_steps(ev.get("duration", 0.0)), 1)
            for k in range(1, n + 1):
                g["targets"] = _transform(start, ev, _profile(k / n, ev.get("ease", False)))
                self._sync_handles()
                self._step(damping=damping)
        elif act == "release":
            names = [ev["group"]] if "group" in ev else list(self.groups)
            n = self._n_steps(ev.get("duration", 0.0))
            k0 = {nm: self.groups[nm]["stiffness"].copy() for nm in names}
            for k in range(1, n + 1):
                for nm in names:
                    self.groups[nm]["stiffness"] = k0[nm] * (1.0 - k / n)
                self._sync_handles()
                self._step(damping=damping)
            for nm in names:
                del self.groups[nm]
            self._sync_handles()
        elif act == "set_obstacle_pose":
            ob = self.obstacles[ev["obstacle"]]
            start = ob.center.copy()
            end = np.asarray(ev["center"], dtype=float)
            n = self._n_steps(ev.get("duration", 0.0))
            if n == 0:
                ob.set_pose(end)
            for k in range(1, n + 1):
                ob.set_pose(start + (end - start) * k / n, self.config.h)
                self._step(damping=damping)
            ob.velocity = np.zeros(3)
        elif act == "hold":
            n = max(self._n_steps(ev["duration"]), 1)
            for _ in range(n):
                self._step(dt_clock=ev["clock"] / n, damping=damping)
        elif act == "wait":
            for _ in range(self._n_steps(ev.get("duration", 0.0))):
                self._step(damping=damping)
        elif act == "zero_velocity":
            mesh.velocities[:] = 0.0
        elif act == "measure":
            self._measure(ev)

    def _measure(self, ev: dict) -> None:
        phi = self.sim.hinge_deviation()
        if ev.get("mark_crease"):
            self.held_phi = phi.copy()
            self.crease = np.abs(phi) > ev.get("threshold", CREASE_THRESHOLD)
        rec = {
            "tag": ev["tag"], "step": self.sim.steps, "time": self.sim.time, "clock": self.sim.clock,
            "mean_abs_dev": float(np.mean(np.abs(phi))) if len(phi) else 0.0,
            "max_abs_dev": float(np.max(np.abs(phi))) if len(phi) else 0.0,
        }
        if self.crease is not None and self.crease.any():
            c = self.crease
            rec["crease_hinges"] = int(c.sum())
            rec["crease_mean_abs_dev"] = float(np.mean(np.abs(phi[c])))
            rec["crease_held_mean_abs_dev"] = float(np.mean(np.abs(self.held_phi[c])))
            rec["crease_recovery_pct"] = 100.0 * (1.0 - rec["crease_mean_abs_dev"] / rec["crease_held_mean_abs_dev"])
        if "probe" in ev:
            v = select(self.mesh, ev["probe"], self.nominal)
            rec["probe_z"] = float(self.mesh.positions[v, 2].mean())
        rec["mean_eps_p"] = float(np.mean(np.abs(self.sim.hinge.plastic.eps_p))) if len(phi) else 0.0
        self.result.records.append(rec)
        self.result.snapshots.append((self.sim.steps, ev["tag"], self.mesh.positions.copy()))


def run(script: dict, threads: int = 1) -> ScenarioResult:
    """Execute a scenario script; solver failures carry the failing event index."""
    return _Runner(copy.deepcopy(script), threads).run()


# -- outputs -------------------------------------------------------------------------

def manifest(script: dict, **extra) -> dict:
    return {"version": __version__, "script": script, **extra}


def write_outputs(result: ScenarioResult, outdir, extra_manifest: dict | None = None,
                  solver_stats: bool = True) -> Path:
    """Write numbered OBJ snapshots, measurements.csv, torque.csv, solver_stats.csv and manifest.json."""
    out = Path(outdir)
    (out / "snapshots").mkdir(parents=True, exist_ok=True)
    for k, (step, tag, pos) in enumerate(result.snapshots):
        name = f"frame_{k:05d}_step{step:06d}" + (f"_{tag}" if tag else "") + ".obj"
        write_obj(out / "snapshots" / name, pos, result.faces)
    keys = []
    for r in result.records:
        keys += [k for k in r if k not in keys]
    with open(out / "measurements.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for r in result.records:
            w.writerow({k: _fmt(v) for k, v in r.items()})
    if result.torque:
        write_torque_csv(out / "torque.csv", result.torque)
    if solver_stats:
        with open(out / "solver_stats.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "time_s", "cg_iters", "residual", "slips", "yielded"])
            for s in result.stats:
                w.writerow([s.step, _fmt(s.time), s.cg_iters, _fmt(s.residual), s.slips, s.yielded])
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest(result.script, **(extra_manifest or {})), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return out


def write_torque_csv(path, torque) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "time_s", "torque"])
        for step, t, tq in torque:
            w.writerow([step, _fmt(t), _fmt(tq)])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def load_script(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# -- canonical specimen library -------------------------------------------------------

SETTLE_DAMPING = 10.0  # 1/s air drag after release: the specimen unloads quasi-statically
SETTLE_TIME = 10.0


def _solver(h, model, **flags) -> dict:
    return {"h": h, "gravity": [0.0, 0.0, 0.0], "model": model, **flags}


def single_wrinkle(material="cotton", hold: float = 1.0, n: int = 61, h: float = 0.01, angle: float = 1.4,
                   model: str = "paper", friction: bool = True, plastic: bool = True, name="single_wrinkle",
                   hold_duration: float = 0.5, settle_damping: float = SETTLE_DAMPING) -> dict:
    """Fold a 4 cm edge flap of a 0.3 m sheet, hold it, let go and let it settle.

    The sheet away from the crease is clamped.  Only the last 6 cm can move,
    so the crease relaxes to equilibrium quickly.
    """
    width = 0.3
    crease_x = width - 0.04
    flags = {"bending_friction": friction, "tensile_friction": friction,
             "bending_plastic": plastic, "tensile_plastic": plastic}
    return {
        "name": name,
        "mesh": {"type": "grid", "width": width, "height": width, "nx": n, "ny": n},
        "material": material,
        "solver": _solver(h, model, **flags),
        "events": [
            {"action": "pin", "select": {"box": [[-1, -1, -1], [crease_x - 0.02, 1, 1]]}},
            {"action": "handles", "group": "sheet", "select": {"box": [[crease_x - 0.02, -1, -1], [crease_x, 1, 1]]},
             "stiffness": 1.0},
            {"action": "handles", "group": "flap", "select": {"box": [[crease_x + 1e-6, -1, -1], [1, 1, 1]]},
             "stiffness": 1.0},
            {"action": "move_handles", "group": "flap", "duration": 0.5,
             "rotate": {"axis": [0, -1, 0], "point": [crease_x, 0, 0], "angle": angle}},
            {"action": "hold", "clock": hold, "duration": hold_duration},
            {"action": "measure", "tag": "held", "mark_crease": True},
            {"action": "release", "duration": 1.0, "damping": settle_damping},
            {"action": "wait", "duration": SETTLE_TIME, "damping": settle_damping},
            {"action": "measure", "tag": "final"},
        ],
    }


def single_wrinkle_friction(material="cotton", hold=1.0, **kw) -> dict:
    kw.setdefault("angle", 1.4)
    return single_wrinkle(material, hold, plastic=False, name="single_wrinkle_friction", **kw)


def single_wrinkle_plastic(material="cotton", hold=1.0, **kw) -> dict:
    kw.setdefault("angle", 2.9)
    return single_wrinkle(material, hold, friction=False, name="single_wrinkle_plastic", **kw)


def press_weight(material="cotton", hold: float = 1.0, n: int = 61, h: float = 0.01, model: str = "paper",
                 hold_duration: float = 0.5, gap: float = 0.003) -> dict:
    """Fold the edge flap back over the sheet, then flatten it with a descending weight.

    The flap handles let go once the weight sits just above the folded flap,
    so the weight alone pushes it down to ``gap`` above the sheet.
    """
    width = 0.3
    crease_x = width - 0.04
    top = 0.05
    touch = 0.04 * math.sin(2.2) + 0.002  # just above the folded flap's highest point
    box_half = [0.05, width, 0.02]
    cx = crease_x - 0.045
    return {
        "name": "press_weight",
        "mesh": {"type": "grid", "width": width, "height": width, "nx": n, "ny": n},
        "material": material,
        "solver": _solver(h, model),
        "obstacles": {"weight": {"shape": "box", "center": [cx, width / 2, top + box_half[2]],
                                 "half_extents": box_half, "k_c": 10.0, "delta": 1e-3, "mu": 0.0}},
        "events": [
            {"action": "pin", "select": {"box": [[-1, -1, -1], [crease_x - 0.02, 1, 1]]}},
            {"action": "handles", "group": "sheet", "select": {"box": [[crease_x - 0.02, -1, -1], [crease_x, 1, 1]]},
             "stiffness": 1.0},
            {"action": "handles", "group": "flap", "select": {"box": [[crease_x + 1e-6, -1, -1], [1, 1, 1]]},
             "stiffness": 1.0},
            {"action": "move_handles", "group": "flap", "duration": 0.5,
             "rotate": {"axis": [0, -1, 0], "point": [crease_x, 0, 0], "angle": 2.2}},
            {"action": "set_obstacle_pose", "obstacle": "weight", "duration": 0.3,
             "center": [cx, width / 2, touch + box_half[2]]},
            {"action": "release", "group": "flap", "duration": 0.0},
            {"action": "set_obstacle_pose", "obstacle": "weight", "duration": 0.5,
             "center": [cx, width / 2, gap + box_half[2]]},
            {"action": "hold", "clock": hold, "duration": hold_duration},
            {"action": "measure", "tag": "held", "mark_crease": True},
            {"action": "set_obstacle_pose", "obstacle": "weight", "duration": 0.5, "damping": SETTLE_DAMPING,
             "center": [cx, width / 2, 0.1 + box_half[2]]},
            {"action": "release", "duration": 1.0, "damping": SETTLE_DAMPING},
            {"action": "wait", "duration": SETTLE_TIME, "damping": SETTLE_DAMPING},
            {"action": "measure", "tag": "final"},
        ],
    }


def tensile_center_press(material="cotton", hold: float = 1.0, n: int = 31, h: float = 0.01,
                         model: str = "paper", depth: float = 0.03, hold_duration: float = 0.5) -> dict:
    """Push a sphere into the middle of an edge-clamped sheet, hold, withdraw it.

    Tensile friction and yield are given thresholds on the scale of the
    stretch this produces (the bending defaults are far too large for Green
    strains).  The probe measures the remaining sag of the centre.
    """
    width = 0.3
    c = width / 2
    r = 0.04
    edge = 1e-6
    return {
        "name": "tensile_center_press",
        "mesh": {"type": "grid", "width": width, "height": width, "nx": n, "ny": n},
        "material": material,
        "material_overrides": {"K11f": 25.0, "K22f": 25.0, "K33f": 15.0,
                               "eps0t": 0.002, "eps_inft": 0.02, "epsY0t": 0.01},
        "solver": _solver(h, model),
        "obstacles": {"press": {"shape": "sphere", "center": [c, c, r + 0.01], "radius": r,
                                "k_c": 50.0, "delta": 1e-3, "mu": 0.0}},
        "events": [
            {"action": "pin", "select": {"box": [[-1, -1, -1], [edge, 1, 1]]}},
            {"action": "pin", "select": {"box": [[width - edge, -1, -1], [1, 1, 1]]}},
            {"action": "pin", "select": {"box": [[-1, -1, -1], [1, edge, 1]]}},
            {"action": "pin", "select": {"box": [[-1, width - edge, -1], [1, 1, 1]]}},
            {"action": "set_obstacle_pose", "obstacle": "press", "duration": 1.0,
             "center": [c, c, r - depth]},
            {"action": "hold", "clock": hold, "duration": hold_duration},
            {"action": "measure", "tag": "held", "probe": {"box": [[c - 1e-3, c - 1e-3, -1], [c + 1e-3, c + 1e-3, 1]]}},
            {"action": "set_obstacle_pose", "obstacle": "press", "duration": 1.0, "damping": SETTLE_DAMPING,
             "center": [c, c, r + 0.05]},
            {"action": "wait", "duration": 3.0, "damping": SETTLE_DAMPING},
            {"action": "measure", "tag": "final", "probe": {"box": [[c - 1e-3, c - 1e-3, -1], [c + 1e-3, c + 1e-3, 1]]}},
        ],
    }


def fold_drop_container(material="cotton", hold: float = 1.0, n: int = 31, h: float = 0.01,
                        model: str = "paper", hold_duration: float = 0.5, fall: float = 1.0) -> dict:
    """Drop a sheet into a cylindrical container, let it sit, then lift it by two corners."""
    width = 0.3
    radius = 0.08
    c = width / 2
    eps = 1e-6
    return {
        "name": "fold_drop_container",
        "mesh": {"type": "grid", "width": width, "height": width, "nx": n, "ny": n},
        "material": material,
        "solver": {"h": h, "gravity": [0.0, 0.0, -9.81], "model": model, "damping": 1.0},
        "obstacles": {
            "floor": {"shape": "plane", "center": [0, 0, -0.3], "normal": [0, 0, 1], "k_c": 10.0, "mu": 0.3},
            "wall": {"shape": "cylinder", "center": [c, c, 0], "radius": radius, "axis": [0, 0, 1],
                     "inside": True, "k_c": 10.0, "mu": 0.3},
        },
        "events": [
            {"action": "wait", "duration": fall},
            {"action": "hold", "clock": hold, "duration": hold_duration},
            {"action": "measure", "tag": "held", "mark_crease": True},
            {"action": "handles", "group": "corners", "stiffness": 1.0,
             "select": {"box": [[-eps, -eps, -1], [eps, eps, 1]]}},
            {"action": "handles", "group": "corners2", "stiffness": 1.0,
             "select": {"box": [[width - eps, -eps, -1], [width + eps, eps, 1]]}},
            {"action": "move_handles", "group": "corners", "duration": 1.0, "translate": [0, 0, 0.6]},
            {"action": "move_handles", "group": "corners2", "duration": 1.0, "translate": [0, 0, 0.6]},
            {"action": "wait", "duration": 2.0},
            {"action": "measure", "tag": "final"},
        ],
    }


def cylinder_twist(material="cotton", hold: float = 1.0, angle: float = 0.25 * math.pi, h: float = 0.01,
                   n_around: int = 64, n_along: int = 32, radius: float = 0.1, height: float = 0.2,
                   model: str = "paper", twist_time: float = 1.0, untwist: bool = True,
                   hold_duration: float = 0.5, settle: float = 2.0, seed: int | None = 1,
                   jitter: float = 1e-4, **flags) -> dict:
    """Clamp both rings of a cloth tube, twist the top ring, hold, twist it back and settle.

    A perfect tube is symmetric and only shears; the seeded rest-shape
    imperfection (``jitter`` metres, Gaussian) lets it buckle.
    """
    events = [
        {"action": "pin", "select": {"ring": "bottom"}},
        {"action": "handles", "group": "top", "select": {"ring": "top"}, "stiffness": 10.0},
        {"action": "move_handles", "group": "top", "duration": twist_time, "ease": True,
         "rotate": {"axis": [0, 0, 1], "point": [0, 0, 0], "angle": angle}},
        {"action": "hold", "clock": hold, "duration": hold_duration},
        {"action": "measure", "tag": "held", "mark_crease": True},
    ]
    if untwist:
        events += [
            {"action": "move_handles", "group": "top", "duration": twist_time, "ease": True,
             "rotate": {"axis": [0, 0, 1], "point": [0, 0, 0], "angle": -angle}},
            {"action": "wait", "duration": settle, "damping": SETTLE_DAMPING},
            {"action": "measure", "tag": "final"},
        ]
    script = {
        "name": "cylinder_twist",
        "mesh": {"type": "cylinder", "radius": radius, "height": height, "n_around": n_around, "n_along": n_along},
        "material": material,
        "solver": _solver(h, model, **flags),
        "torque": {"group": "top", "axis": [0, 0, 1], "point": [0, 0, 0]},
        "events": events,
    }
    if seed is not None and jitter > 0:
        script["seed"] = seed
        script["jitter"] = jitter
    return script


CANONICAL = {
    "single_wrinkle_friction": single_wrinkle_friction,
    "single_wrinkle_plastic": single_wrinkle_plastic,
    "fold_drop_container": fold_drop_container,
    "press_weight": press_weight,
    "tensile_center_press": tensile_center_press,
    "cylinder_twist": cylinder_twist,
}


def canonical_scenarios() -> dict:
    """Name -> script factory ``f(material="cotton", hold=1.0, **options) -> script``."""
    return dict(CANONICAL)


def residual(result: ScenarioResult) -> float:
    """Mean |theta - theta_rest| over the crease set at the final measurement."""
    return result.record("final")["crease_mean_abs_dev"]
