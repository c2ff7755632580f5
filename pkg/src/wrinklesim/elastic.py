"""Elastic bending and StVK stretching forces with Gauss-Newton Jacobians.

All kernels are vectorised over elements.  Hinge quantities use the
``(H, 4, 3)`` gradient layout from :func:`wrinklesim.mesh.dihedral_angles`;
face quantities use ``(F, 3 components, 3 vertices, 3 xyz)`` strain
gradients.  Jacobians drop the strain Hessian, so every element block is
``-k * G^T K G`` and therefore symmetric negative semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


def bending_strain(theta, theta_bar, height):
    """Mean-curvature bending strain ``3 (theta - theta_bar) / H``."""
    return 3.0 * (np.asarray(theta) - np.asarray(theta_bar)) / np.asarray(height)


def hinge_forces(strain, stiffness, area, height, grad):
    """Forces and Jacobians of ``W = 0.5 * A * K * strain^2`` per hinge.

    ``strain`` is the bending strain the stress acts on (elastic strain for
    bending, deviation from the anchor for friction); its position gradient is
    ``(3 / H) * dtheta/dx``.  Returns forces (H, 4, 3) and Jacobians (H, 12, 12).
    """
    strain = np.asarray(strain, dtype=float)
    stiffness = np.asarray(stiffness, dtype=float)
    return hinge_stress_forces(stiffness * strain, stiffness, area, height, grad)


def hinge_stress_forces(stress, stiffness, area, height, grad):
    """Hinge forces for a given stress and tangent stiffness (both per hinge).

    Several springs acting on the same hinge strain (elastic bending plus
    friction) share one gradient, so summing their stresses and stiffnesses
    gives one Jacobian outer product instead of one per spring.
    """
    scale = 3.0 / np.asarray(height, dtype=float)
    area = np.asarray(area, dtype=float)
    g = grad.reshape(len(grad), 12) * scale[..., None]
    force = -(area * np.asarray(stress, dtype=float))[:, None] * g
    jac = -(area * np.asarray(stiffness, dtype=float))[:, None, None] * g[:, :, None] * g[:, None, :]
    return force.reshape(-1, 4, 3), jac


def bending_force(strain_elastic, Kb, area, height, grad):
    """Elastic bending force; ``strain_elastic`` already has plastic strain removed."""
    return hinge_forces(strain_elastic, np.broadcast_to(Kb, np.shape(strain_elastic)), area, height, grad)


def bending_energy(strain_elastic, Kb, area):
    return 0.5 * np.asarray(area) * Kb * np.asarray(strain_elastic) ** 2


def green_strain(positions, faces, dm_inv, gradient: bool = True):
    """Green-Lagrange strain ``(e_uu, e_vv, e_uv)`` per face.

    ``e_uv`` is the tensor component (half the engineering shear).  The
    gradient has shape (F, 3, 3, 3): strain component, face vertex, xyz.
    """
    x = positions[faces]
    ds = np.stack([x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]], axis=-1)  # (F, 3, 2)
    F = ds @ dm_inv
    fu, fv = F[:, :, 0], F[:, :, 1]
    eps = np.stack([
        0.5 * (np.einsum("ij,ij->i", fu, fu) - 1.0),
        0.5 * (np.einsum("ij,ij->i", fv, fv) - 1.0),
        0.5 * np.einsum("ij,ij->i", fu, fv),
    ], axis=1)
    if not gradient:
        return eps, None
    # shape-function gradients b_i = dF/dx_i (2-vectors per vertex)
    b1, b2 = dm_inv[:, 0, :], dm_inv[:, 1, :]
    b = np.stack([-b1 - b2, b1, b2], axis=1)  # (F, 3, 2)
    d_uu = b[:, :, 0, None] * fu[:, None, :]
    d_vv = b[:, :, 1, None] * fv[:, None, :]
    d_uv = 0.5 * (b[:, :, 0, None] * fv[:, None, :] + b[:, :, 1, None] * fu[:, None, :])
    return eps, np.stack([d_uu, d_vv, d_uv], axis=1)


def stretch_forces(strain, stiffness, area, deps):
    """Forces and Jacobians of ``W = 0.5 * A * strain^T K strain`` per face.

    ``stiffness`` is a (3, 3) matrix or a per-face (F, 3, 3) stack.
    Returns forces (F, 3, 3) and Jacobians (F, 9, 9).
    """
    K = np.asarray(stiffness, dtype=float)
    sigma = (K @ strain[:, :, None])[:, :, 0]
    return stretch_stress_forces(sigma, K, area, deps)


def stretch_stress_forces(sigma, stiffness, area, deps):
    """Face forces for stress ``sigma`` (F, 3) and tangent stiffness (3, 3) or (F, 3, 3)."""
    G = deps.reshape(len(deps), 3, 9)
    force = -area[:, None] * (sigma[:, None, :] @ G)[:, 0, :]
    jac = np.swapaxes(G, 1, 2) @ (np.asarray(stiffness, dtype=float) @ G)
    jac *= -area[:, None, None]
    return force.reshape(-1, 3, 3), jac


def stretch_force(strain_elastic, Ks, area, deps):
    return stretch_forces(strain_elastic, Ks, area, deps)


def stretch_energy(strain_elastic, Ks, area):
    return 0.5 * area * np.einsum("fi,ij,fj->f", strain_elastic, Ks, strain_elastic)


class BlockPattern:
    """Fixed CSR sparsity of the 3x3-block system for one mesh.

    Element Jacobians are scattered with ``np.bincount`` through precomputed
    index maps, which sums duplicates in a fixed order (bitwise
    deterministic).
    """

    def __init__(self, n_vertices: int, hinges: np.ndarray, faces: np.ndarray):
        self.n_vertices = n_vertices
        self.n = n = 3 * n_vertices
        hinge_rc = self._entries(hinges)
        face_rc = self._entries(faces)
        diag_rc = self._entries(np.arange(n_vertices)[:, None])
        keys = np.concatenate([k.ravel() for k in (hinge_rc, face_rc, diag_rc)])
        uniq, inverse = np.unique(keys, return_inverse=True)
        self.nnz = len(uniq)
        rows = uniq // n
        self.indices = (uniq % n).astype(np.int32)
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(rows, minlength=n))]).astype(np.int32)
        self.rows = rows
        nh, nf = hinge_rc.size, face_rc.size
        self.hinge_map = inverse[:nh].reshape(hinge_rc.shape)
        self.face_map = inverse[nh:nh + nf].reshape(face_rc.shape)
        self.diag_map = inverse[nh + nf:].reshape(diag_rc.shape)  # (V, 3, 3)
        self.dof_diag = self.diag_map[:, [0, 1, 2], [0, 1, 2]].ravel()  # data index of (d, d)

    def _entries(self, elems: np.ndarray) -> np.ndarray:
        k = elems.shape[1]
        dof = (3 * elems[:, :, None] + np.arange(3)).reshape(len(elems), 3 * k)
        return dof[:, :, None] * self.n + dof[:, None, :]

    def scatter(self, data: np.ndarray, index_map: np.ndarray, values: np.ndarray) -> None:
        data += np.bincount(index_map.ravel(), weights=values.ravel(), minlength=self.nnz)

    def matrix(self, data: np.ndarray) -> sp.csr_matrix:
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))


def scatter_vectors(out: np.ndarray, index: np.ndarray, values: np.ndarray) -> None:
    """``out[index] += values`` for (N, 3) values with repeated indices."""
    index = index.ravel()
    values = values.reshape(-1, 3)
    for c in range(3):
        out[:, c] += np.bincount(index, weights=values[:, c], minlength=len(out))


@dataclass
class ForceAccumulator:
    """Nodal forces plus the position and velocity Jacobians of one step."""

    f: np.ndarray  # (V, 3)
    jx_data: np.ndarray  # CSR data over ``pattern``
    jv_diag: np.ndarray  # (V, 3, 3) velocity Jacobian blocks (damping only)
    pattern: BlockPattern

    @classmethod
    def zeros(cls, pattern: BlockPattern) -> "ForceAccumulator":
        v = pattern.n_vertices
        return cls(np.zeros((v, 3)), np.zeros(pattern.nnz), np.zeros((v, 3, 3)), pattern)

    def add_hinges(self, hinges: np.ndarray, force: np.ndarray, jac=None, index=None) -> None:
        """Scatter per-hinge forces (H, 4, 3) and Jacobians (H, 12, 12)."""
        scatter_vectors(self.f, hinges, force)
        if jac is not None:
            m = self.pattern.hinge_map if index is None else self.pattern.hinge_map[index]
            self.pattern.scatter(self.jx_data, m, jac)

    def add_faces(self, faces: np.ndarray, force: np.ndarray, jac=None, index=None) -> None:
        scatter_vectors(self.f, faces, force)
        if jac is not None:
            m = self.pattern.face_map if index is None else self.pattern.face_map[index]
            self.pattern.scatter(self.jx_data, m, jac)

    def add_vertex(self, vertices: np.ndarray, force: np.ndarray, jac=None) -> None:
        scatter_vectors(self.f, np.asarray(vertices), force)
        if jac is not None:
            self.pattern.scatter(self.jx_data, self.pattern.diag_map[vertices], jac)

    @property
    def J_x(self) -> sp.csr_matrix:
        return self.pattern.matrix(self.jx_data)
