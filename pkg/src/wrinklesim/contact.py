"""Penalty contact against analytic obstacles.

Every obstacle exposes a signed distance ``d`` and outward normal ``n`` for
query points.  A vertex closer than the offset ``delta`` gets a normal force
``k_c (delta - d) n`` and a tangential force that opposes its sliding
velocity relative to the obstacle, capped at ``mu`` times the normal force.
The tangential law is a regularised (viscous below ``v_stick``) Coulomb law so
the implicit solve stays linear.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Obstacle:
    shape: str  # plane | sphere | cylinder | box
    center: np.ndarray = field(default_factory=lambda: np.zeros(3))
    normal: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))  # plane only
    radius: float = 0.0  # sphere, cylinder
    axis: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))  # cylinder
    half_extents: np.ndarray = field(default_factory=lambda: np.ones(3))  # box (axis aligned)
    inside: bool = False  # cylinder: keep cloth inside the wall (a container)
    k_c: float = 10.0
    delta: float = 1e-3
    mu: float = 0.3
    v_stick: float = 1e-4
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        for name in ("center", "normal", "axis", "half_extents", "velocity"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.shape not in ("plane", "sphere", "cylinder", "box"):
            raise ValueError(f"unknown obstacle shape {self.shape!r}")
        if not (self.k_c > 0 and self.delta >= 0 and self.mu >= 0):
            raise ValueError("obstacle needs k_c > 0, delta >= 0, mu >= 0")
        self.normal = self.normal / np.linalg.norm(self.normal)
        self.axis = self.axis / np.linalg.norm(self.axis)

    def set_pose(self, center, dt: float | None = None) -> None:
        """Move the obstacle; with ``dt`` its velocity follows the displacement."""
        center = np.asarray(center, dtype=float)
        self.velocity = (center - self.center) / dt if dt else np.zeros(3)
        self.center = center

    def signed_distance(self, x: np.ndarray):
        """Signed distance (N,) and outward unit normal (N, 3)."""
        r = x - self.center
        if self.shape == "plane":
            return r @ self.normal, np.broadcast_to(self.normal, x.shape)
        if self.shape == "sphere":
            dist = np.linalg.norm(r, axis=1)
            n = r / np.maximum(dist, 1e-300)[:, None]
            return dist - self.radius, n
        if self.shape == "cylinder":
            radial = r - np.outer(r @ self.axis, self.axis)
            dist = np.linalg.norm(radial, axis=1)
            n = radial / np.maximum(dist, 1e-300)[:, None]
            if self.inside:
                return self.radius - dist, -n
            return dist - self.radius, n
        # box: exact distance outside, largest-face distance inside
        q = np.abs(r) - self.half_extents
        outside = np.linalg.norm(np.maximum(q, 0.0), axis=1)
        inside = np.minimum(q.max(axis=1), 0.0)
        d = outside + inside
        n = np.where(q > 0, np.sign(r) * np.maximum(q, 0.0), 0.0)
        deep = outside == 0
        if deep.any():
            k = q[deep].argmax(axis=1)
            nd = np.zeros((deep.sum(), 3))
            nd[np.arange(len(k)), k] = np.sign(r[deep, k])
            n[deep] = nd
        n = n / np.maximum(np.linalg.norm(n, axis=1), 1e-300)[:, None]
        return d, n


def contact_forces(x: np.ndarray, v: np.ndarray, mass: np.ndarray, obstacles, h: float):
    """Per-vertex contact forces with their diagonal position/velocity Jacobian blocks.

    Returns ``(f, jx, jv)`` with shapes (V, 3), (V, 3, 3), (V, 3, 3).
    """
    nv = len(x)
    f = np.zeros((nv, 3))
    jx = np.zeros((nv, 3, 3))
    jv = np.zeros((nv, 3, 3))
    for ob in obstacles:
        d, n = ob.signed_distance(x)
        pen = ob.delta - d
        hit = np.flatnonzero(pen > 0)
        if len(hit) == 0:
            continue
        nh = n[hit]
        fn = ob.k_c * pen[hit]
        nn = nh[:, :, None] * nh[:, None, :]
        f[hit] += fn[:, None] * nh
        jx[hit] -= ob.k_c * nn
        if ob.mu > 0:
            vrel = v[hit] - ob.velocity
            vt = vrel - np.einsum("ij,ij->i", vrel, nh)[:, None] * nh
            speed = np.linalg.norm(vt, axis=1)
            c = ob.mu * fn / np.maximum(speed, ob.v_stick)
            f[hit] -= c[:, None] * vt
            jv[hit] -= c[:, None, None] * (np.eye(3) - nn)
    return f, jx, jv
