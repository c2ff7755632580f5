"""Implicit Euler time stepping with internal friction and plasticity.

One step linearises the forces once and solves::

    (M - h^2 J_x - h J_v) dv = h (f + h J_x v)
    v += dv;  x += h v

with a block-Jacobi preconditioned conjugate gradient.  Pinned vertices are
removed from the system by filtering (their rows and columns act as
identity with a zero right-hand side).

The per-element hysteresis states are updated once per step, at the start,
from the previous converged positions.  Plasticity runs first; friction then
acts on the remaining elastic strain.  Bending states live in dihedral-angle
units ``phi = theta - theta_rest``; the force kernels convert to bending
strain with ``3 / H``.
"""

from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import baselines, friction, plasticity
from .contact import contact_forces
from .elastic import BlockPattern, ForceAccumulator, green_strain, hinge_stress_forces, stretch_stress_forces
from .material import MaterialParams
from .mesh import ClothMesh, dihedral_angles

log = logging.getLogger(__name__)

MODELS = ("paper", "dahl", "hardening_only", "elastic")


class SolverError(RuntimeError):
    pass


class CGNotConverged(SolverError):
    def __init__(self, iterations: int, residual: float):
        super().__init__(f"CG did not converge after {iterations} iterations (relative residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class NonFiniteState(SolverError):
    def __init__(self, vertex: int):
        super().__init__(f"non-finite position at vertex {vertex}")
        self.vertex = vertex


class StepSizeWarning(UserWarning):
    pass


@dataclass
class SolverConfig:
    h: float = 0.01
    cg_tol: float = 1e-6
    cg_max_iters: int = 1000
    gravity: tuple = (0.0, 0.0, -9.81)
    damping: float = 0.0  # mass proportional, 1/s
    time_scale: float = 1.0
    model: str = "paper"
    bending_friction: bool = True
    tensile_friction: bool = True
    bending_plastic: bool = True
    tensile_plastic: bool = True
    # friction guard: largest per-step dihedral change allowed, as a multiple of eps0.
    # The anchor lags one step, so a slipping hinge's friction stress can overshoot
    # its threshold by K_f |dphi|; 0.1 keeps that under a tenth of the stick window.
    guard_factor: float = 0.1

    def validate(self) -> None:
        if not self.h > 0:
            raise ValueError(f"h must be > 0 (got {self.h})")
        if not 0 < self.cg_tol < 1:
            raise ValueError(f"cg_tol must lie in (0, 1) (got {self.cg_tol})")
        if self.cg_max_iters < 1:
            raise ValueError("cg_max_iters must be >= 1")
        if not self.time_scale > 0:
            raise ValueError(f"time_scale must be > 0 (got {self.time_scale})")
        if self.damping < 0:
            raise ValueError("damping must be >= 0")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; valid: {', '.join(MODELS)}")

    @property
    def flags(self) -> dict:
        """Which hysteresis models are active: friction in {None, 'paper', 'dahl'}, plastic in {None, 'paper', 'hardening'}."""
        m = self.model
        return {
            "bending_friction": {"paper": "paper" if self.bending_friction else None, "dahl": "dahl"}.get(m),
            "tensile_friction": {"paper": "paper" if self.tensile_friction else None, "dahl": "dahl"}.get(m),
            "bending_plastic": {"paper": "paper" if self.bending_plastic else None, "hardening_only": "hardening"}.get(m),
            "tensile_plastic": {"paper": "paper" if self.tensile_plastic else None, "hardening_only": "hardening"}.get(m),
        }


@dataclass
class HandleSet:
    """Zero-length springs pulling vertices towards targets, ``f = k (target - x)``."""

    vertices: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    targets: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    stiffness: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.int64).reshape(-1)
        self.targets = np.asarray(self.targets, dtype=float).reshape(-1, 3)
        self.stiffness = np.broadcast_to(np.asarray(self.stiffness, dtype=float), self.vertices.shape).copy()
        if len(self.targets) != len(self.vertices):
            raise ValueError("one target per handle vertex required")
        if np.any(self.stiffness < 0) or not np.all(np.isfinite(self.targets)):
            raise ValueError("handle stiffness must be >= 0 and targets finite")

    def __len__(self) -> int:
        return len(self.vertices)

    def forces(self, x: np.ndarray) -> np.ndarray:
        return self.stiffness[:, None] * (self.targets - x[self.vertices])


def cg_solve(A, b: np.ndarray, free: np.ndarray | None = None, precond=None,
             tol: float = 1e-6, max_iters: int = 1000):
    """Preconditioned CG on the free DOFs; filtered DOFs come back exactly 0.

    ``A`` needs only ``@``; ``precond`` maps a residual to ``M^-1 r``
    (identity when None).  Returns ``(x, iterations, relative residual)``.
    """
    b = np.asarray(b, dtype=float)
    mask = np.ones(len(b), dtype=bool) if free is None else np.asarray(free, dtype=bool)
    r = np.where(mask, b, 0.0)
    x = np.zeros_like(r)
    bnorm = np.linalg.norm(r)
    if bnorm == 0.0:
        return x, 0, 0.0
    z = r if precond is None else np.where(mask, precond(r), 0.0)
    p = z.copy()
    rz = r @ z
    for it in range(1, max_iters + 1):
        q = np.where(mask, A @ p, 0.0)
        pq = p @ q
        if pq <= 0:
            raise SolverError(f"system matrix is not positive definite (p.Ap = {pq:.3e} at iteration {it})")
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        res = np.linalg.norm(r) / bnorm
        if res <= tol:
            return x, it, res
        z = r if precond is None else np.where(mask, precond(r), 0.0)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise CGNotConverged(max_iters, res)


def block_jacobi(data: np.ndarray, pattern: BlockPattern):
    """Inverse 3x3 diagonal blocks of a CSR matrix as a preconditioner function."""
    blocks = data[pattern.diag_map]
    inv = np.linalg.inv(blocks)

    def apply(r):
        return (inv @ r.reshape(-1, 3, 1)).ravel()

    return apply


@dataclass
class StepStats:
    step: int
    time: float
    cg_iters: int
    residual: float
    wall: float
    slips: int
    yielded: int
    max_dphi: float


@dataclass
class HingeStates:
    phi: np.ndarray  # current (unwrapped) dihedral deviation, angle units
    friction: friction.FrictionState
    plastic: plasticity.PlasticState
    dahl: baselines.DahlState


@dataclass
class FaceStates:
    friction: friction.FrictionState
    plastic: plasticity.PlasticState
    dahl: baselines.DahlState


class Simulator:
    """Owns a mesh, its material and hysteresis state, and advances it in time."""

    def __init__(self, mesh: ClothMesh, material: MaterialParams, config: SolverConfig | None = None,
                 obstacles=None, handles: HandleSet | None = None):
        self.mesh = mesh
        self.material = material
        self.config = config or SolverConfig()
        self.config.validate()
        self.obstacles = list(obstacles or [])
        self.handles = handles or HandleSet()
        self.pattern = BlockPattern(mesh.n_vertices, mesh.hinges, mesh.faces)
        self.time = 0.0
        self.clock = 0.0  # simulated material time (accelerated during holds)
        self.steps = 0
        self.stats: list[StepStats] = []
        self.guard_tripped = False
        self.last_handle_force = np.zeros((0, 3))
        nh, nf = mesh.n_hinges, mesh.n_faces
        theta, _ = dihedral_angles(mesh.positions, mesh.hinges, mesh.hinge_faces, gradient=False)
        phi = _unwrap(theta - mesh.hinge_rest.theta, np.zeros(nh))
        self.hinge = HingeStates(
            phi=phi,
            friction=friction.FrictionState.zeros(nh),
            plastic=plasticity.PlasticState.initial(nh, material.epsY0),
            dahl=baselines.DahlState.zeros(nh),
        )
        self.face = FaceStates(
            friction=friction.FrictionState.zeros((nf, 3)),
            plastic=plasticity.PlasticState.initial((nf, 3), material.tensile_epsY0),
            dahl=baselines.DahlState.zeros((nf, 3)),
        )
        self.diagnostics = None  # optional callable(sim, info) per step

    # -- state updates and forces -------------------------------------------------

    def _hinge_terms(self, acc: ForceAccumulator, x: np.ndarray, dt_clock: float, info: dict) -> None:
        mesh, mat, flags = self.mesh, self.material, self.config.flags
        rest = mesh.hinge_rest
        theta, grad = dihedral_angles(x, mesh.hinges, mesh.hinge_faces)
        phi = _unwrap(theta - rest.theta, self.hinge.phi)
        info["dphi"] = np.abs(phi - self.hinge.phi)
        self.hinge.phi = phi
        info["phi"] = phi

        phi_e = phi
        if flags["bending_plastic"]:
            ps = plasticity.plastic_step(self.hinge.plastic, phi, dt_clock, mat.Kb, mat.Kh0, mat.g, mat.tau_p,
                                         mat.epsY0, time_dependent=flags["bending_plastic"] == "paper")
            self.hinge.plastic = ps.state
            info["yielded"] = int(ps.yielded.sum())
            info["plastic_step"] = ps
            phi_e = ps.eps_e
        scale = rest.strain_scale
        stress = mat.Kb * (scale * phi_e)
        stiffness = mat.Kb

        elastic = phi - self.hinge.plastic.eps_p
        kind = flags["bending_friction"]
        if kind == "paper" and mat.Kfriction > 0:
            fs, slip = friction.friction_update(self.hinge.friction, elastic, dt_clock,
                                                mat.eps0, mat.eps_inf, mat.tau_f)
            self.hinge.friction = fs
            info["slips"] = int(slip.sum())
            # friction acts on the same hinge strain: fold it into one assembly pass
            stress = stress + mat.Kfriction * (scale * elastic - scale * fs.anchor)
            stiffness = mat.Kb + mat.Kfriction
        force, jac = hinge_stress_forces(stress, np.full(len(phi), stiffness), rest.area, rest.height, grad)
        acc.add_hinges(self.mesh.hinges, force, jac)
        if kind == "dahl" and mat.Kfriction > 0:
            old = self.hinge.dahl
            d = elastic - old.last_strain
            # stress in angle units: sigma = K_f * s, saturating at K_f * eps_inf
            ds = baselines.dahl_step(old, elastic, 1.0, mat.eps_inf)
            tangent = baselines.dahl_tangent(ds, d, 1.0, mat.eps_inf)
            self.hinge.dahl = ds
            k = rest.area * mat.Kfriction
            g = grad.reshape(len(grad), 12) * scale[:, None]
            acc.add_hinges(self.mesh.hinges, (-(k * scale * ds.sigma)[:, None] * g).reshape(-1, 4, 3),
                           -(k * tangent)[:, None, None] * g[:, :, None] * g[:, None, :])

    def _face_terms(self, acc: ForceAccumulator, x: np.ndarray, dt_clock: float, info: dict) -> None:
        mesh, mat, flags = self.mesh, self.material, self.config.flags
        area = mesh.face_rest.area
        eps, deps = green_strain(x, mesh.faces, mesh.face_rest.dm_inv)
        e_used = eps
        if flags["tensile_plastic"]:
            ps = plasticity.tensile_plastic_step(self.face.plastic, eps, dt_clock, mat,
                                                 time_dependent=flags["tensile_plastic"] == "paper")
            self.face.plastic = ps.state
            info["yielded"] = info.get("yielded", 0) + int(ps.yielded.sum())
            e_used = ps.eps_e
        K = mat.stretch_matrix
        sigma = e_used @ K.T

        elastic = eps - self.face.plastic.eps_p
        kf = mat.tensile_friction_stiffness
        kind = flags["tensile_friction"]
        if kind == "paper" and np.any(kf > 0):
            fs, slip = friction.tensile_friction_step(self.face.friction, elastic, dt_clock, mat)
            self.face.friction = fs
            info["slips"] = info.get("slips", 0) + int(slip.sum())
            sigma = sigma + kf * (elastic - fs.anchor)
            K = K + np.diag(kf)
        force, jac = stretch_stress_forces(sigma, K, area, deps)
        acc.add_faces(mesh.faces, force, jac)
        if kind == "dahl" and np.any(kf > 0):
            old = self.face.dahl
            d = elastic - old.last_strain
            ds = baselines.dahl_step(old, elastic, 1.0, mat.tensile_eps_inf)
            tangent = baselines.dahl_tangent(ds, d, 1.0, mat.tensile_eps_inf)
            self.face.dahl = ds
            G = deps.reshape(len(deps), 3, 9)
            sig = kf * ds.sigma
            f = -area[:, None] * np.einsum("fi,fik->fk", sig, G)
            K = tangent * kf
            j = -area[:, None, None] * np.einsum("fik,fi,fil->fkl", G, K, G)
            acc.add_faces(mesh.faces, f.reshape(-1, 3, 3), j)

    def assemble(self, dt_clock: float | None = None, info: dict | None = None) -> ForceAccumulator:
        """Update hysteresis states from the current positions and build forces and Jacobians."""
        cfg, mesh = self.config, self.mesh
        if dt_clock is None:
            dt_clock = cfg.h * cfg.time_scale
        info = {} if info is None else info
        x, v = mesh.positions, mesh.velocities
        acc = ForceAccumulator.zeros(self.pattern)
        if mesh.n_hinges:
            self._hinge_terms(acc, x, dt_clock, info)
        self._face_terms(acc, x, dt_clock, info)

        m = mesh.lumped_mass
        acc.f += m[:, None] * np.asarray(cfg.gravity, dtype=float)
        if cfg.damping > 0:
            acc.f -= cfg.damping * m[:, None] * v
            acc.jv_diag -= cfg.damping * m[:, None, None] * np.eye(3)
        if len(self.handles):
            hs = self.handles
            fh = hs.forces(x)
            self.last_handle_force = fh
            acc.add_vertex(hs.vertices, fh, -hs.stiffness[:, None, None] * np.eye(3))
        if self.obstacles:
            fc, jx, jv = contact_forces(x, v, m, self.obstacles, cfg.h)
            acc.f += fc
            self.pattern.scatter(acc.jx_data, self.pattern.diag_map, jx)
            acc.jv_diag += jv
        return acc

    # -- time stepping ------------------------------------------------------------

    def step(self, dt_clock: float | None = None) -> StepStats:
        """Advance one step of size ``h``; material clocks advance by ``dt_clock`` (default ``h * time_scale``)."""
        t0 = time.perf_counter()
        cfg, mesh = self.config, self.mesh
        h = cfg.h
        if dt_clock is None:
            dt_clock = h * cfg.time_scale
        info: dict = {}
        acc = self.assemble(dt_clock, info)

        _check_finite(mesh.positions, mesh.velocities, acc.f)
        v = mesh.velocities.ravel()
        Jx = acc.J_x
        rhs = h * (acc.f.ravel() + h * (Jx @ v))
        data = -h * h * acc.jx_data
        mass3 = np.repeat(mesh.lumped_mass, 3)
        data[self.pattern.dof_diag] += mass3
        if np.any(acc.jv_diag):
            self.pattern.scatter(data, self.pattern.diag_map, -h * acc.jv_diag)
        dv, iters, res = self._solve(data, rhs)

        vel = (v + dv).reshape(-1, 3)
        vel[mesh.pinned] = 0.0
        pos = mesh.positions + h * vel
        _check_finite(pos)
        mesh.velocities = vel
        mesh.positions = pos
        self.time += h
        self.clock += dt_clock
        self.steps += 1

        max_dphi = float(info["dphi"].max()) if "dphi" in info and len(info["dphi"]) else 0.0
        self._check_guard(max_dphi)
        st = StepStats(self.steps, self.time, iters, res, time.perf_counter() - t0,
                       info.get("slips", 0), info.get("yielded", 0), max_dphi)
        self.stats.append(st)
        if self.diagnostics is not None:
            self.diagnostics(self, info)
        return st

    def _solve(self, data: np.ndarray, rhs: np.ndarray):
        """PCG on the free DOFs.  Filtering pinned rows/columns is the same as
        solving the system restricted to the free vertices, which is cheaper."""
        cfg, mesh = self.config, self.mesh
        A = self.pattern.matrix(data)
        blocks = data[self.pattern.diag_map]
        pinned = mesh.pinned
        if pinned.any():
            keep = np.flatnonzero(~pinned)
            dofs = (3 * keep[:, None] + np.arange(3)).ravel()
            A = A[dofs][:, dofs]
            blocks = blocks[keep]
        inv = np.linalg.inv(blocks)

        def precond(r):
            return (inv @ r.reshape(-1, 3, 1)).ravel()

        b = rhs if not pinned.any() else rhs[dofs]
        x, iters, res = cg_solve(A, b, None, precond, cfg.cg_tol, cfg.cg_max_iters)
        if not pinned.any():
            return x, iters, res
        dv = np.zeros_like(rhs)
        dv[dofs] = x
        return dv, iters, res

    def _check_guard(self, max_dphi: float) -> None:
        if self.config.flags["bending_friction"] != "paper" or self.guard_tripped:
            return
        limit = self.config.guard_factor * self.material.eps0
        if max_dphi > limit:
            self.guard_tripped = True
            msg = (f"internal friction: a hinge angle changed by {max_dphi:.3g} rad in one step "
                   f"(limit {limit:.3g} rad, {self.config.guard_factor:g} of the stick window); the friction "
                   f"response may jump. "
                   f"Consider a smaller time step (e.g. h = {self.config.h / 10:g} s).")
            log.warning(msg)
            warnings.warn(msg, StepSizeWarning, stacklevel=3)

    # -- diagnostics --------------------------------------------------------------

    def energy(self) -> dict:
        """Kinetic, elastic (bending + stretching, plastic strain removed) and gravitational energy."""
        mesh, mat = self.mesh, self.material
        m = mesh.lumped_mass
        kin = 0.5 * float(np.sum(m[:, None] * mesh.velocities ** 2))
        rest = mesh.hinge_rest
        bend = 0.0
        if mesh.n_hinges:
            theta, _ = dihedral_angles(mesh.positions, mesh.hinges, mesh.hinge_faces, gradient=False)
            phi = _unwrap(theta - rest.theta, self.hinge.phi) - self.hinge.plastic.eps_p
            bend = float(np.sum(0.5 * rest.area * mat.Kb * (rest.strain_scale * phi) ** 2))
        eps, _ = green_strain(mesh.positions, mesh.faces, mesh.face_rest.dm_inv, gradient=False)
        e = eps - self.face.plastic.eps_p
        stretch = float(np.sum(0.5 * mesh.face_rest.area * np.einsum("fi,ij,fj->f", e, mat.stretch_matrix, e)))
        grav = -float(np.sum(m * (mesh.positions @ np.asarray(self.config.gravity, dtype=float))))
        return {"kinetic": kin, "bending": bend, "stretching": stretch, "gravity": grav,
                "total": kin + bend + stretch + grav}

    def hinge_deviation(self) -> np.ndarray:
        """Signed ``theta - theta_rest`` per hinge at the current positions (unwrapped)."""
        theta, _ = dihedral_angles(self.mesh.positions, self.mesh.hinges, self.mesh.hinge_faces, gradient=False)
        return _unwrap(theta - self.mesh.hinge_rest.theta, self.hinge.phi)


def _check_finite(*arrays: np.ndarray) -> None:
    bad = np.zeros(len(arrays[0]), dtype=bool)
    for a in arrays:
        bad |= ~np.isfinite(a).all(axis=1)
    if bad.any():
        raise NonFiniteState(int(np.flatnonzero(bad)[0]))


def _unwrap(phi: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Shift ``phi`` by multiples of 2 pi to lie within pi of ``reference``."""
    return reference + (phi - reference + np.pi) % (2 * np.pi) - np.pi
