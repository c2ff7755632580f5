"""Triangle cloth meshes: topology, rest geometry, lumped masses and generators.

Hinges are stored as ``(e0, e1, a, b)``: the shared edge ``e0 -> e1`` as it
appears in the first face, followed by the vertex opposite the edge in the
first face and the vertex opposite it in the second face.  Dihedral angles
live in ``(0, 2*pi)`` with a flat hinge at ``pi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MIN_FACE_AREA = 1e-12


class DegenerateFaceError(ValueError):
    """Raised when a triangle has (numerically) zero area."""

    def __init__(self, face: int, area: float):
        super().__init__(f"degenerate face {face}: area {area:.3e} m^2")
        self.face = face
        self.area = area


@dataclass
class HingeRest:
    theta: np.ndarray  # rest dihedral angle (rad)
    edge_length: np.ndarray  # l (m)
    height: np.ndarray  # average triangle height H (m)
    area: np.ndarray  # A_b = l * H / 3 (m^2)

    @property
    def strain_scale(self) -> np.ndarray:
        """Factor turning an angle deviation into bending strain, ``3 / H``."""
        return 3.0 / self.height


@dataclass
class FaceRest:
    area: np.ndarray  # rest area A_s (m^2)
    dm_inv: np.ndarray  # (F, 2, 2) inverse of the rest material edge matrix


@dataclass
class ClothMesh:
    positions: np.ndarray
    velocities: np.ndarray
    faces: np.ndarray
    hinges: np.ndarray
    hinge_faces: np.ndarray
    rest_uv: np.ndarray
    face_uv: np.ndarray
    lumped_mass: np.ndarray
    pinned: np.ndarray
    density: float
    hinge_rest: HingeRest
    face_rest: FaceRest
    rest_positions: np.ndarray = field(repr=False)

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_hinges(self) -> int:
        return len(self.hinges)

    def edges(self) -> np.ndarray:
        """Unique undirected edges, sorted, shape (E, 2)."""
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges()) + self.n_faces

    def total_mass(self) -> float:
        return float(self.lumped_mass.sum())

    def copy(self) -> "ClothMesh":
        return ClothMesh(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            faces=self.faces,
            hinges=self.hinges,
            hinge_faces=self.hinge_faces,
            rest_uv=self.rest_uv,
            face_uv=self.face_uv,
            lumped_mass=self.lumped_mass,
            pinned=self.pinned.copy(),
            density=self.density,
            hinge_rest=self.hinge_rest,
            face_rest=self.face_rest,
            rest_positions=self.rest_positions,
        )

    @classmethod
    def from_rest(cls, rest_positions, faces, face_uv=None, density: float = 1.0, rest_uv=None) -> "ClothMesh":
        """Build a mesh whose rest state is the given embedding.

        ``face_uv`` gives per-face material coordinates (F, 3, 2); when absent
        the rest positions' x/y components are used.
        """
        x = np.array(rest_positions, dtype=float)
        faces = np.asarray(faces, dtype=np.int64)
        if x.ndim != 2 or x.shape[1] != 3:
            raise ValueError("rest positions must have shape (V, 3)")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise ValueError("faces must have shape (F, 3)")
        if not np.all(np.isfinite(x)):
            raise ValueError("rest positions must be finite")
        if faces.min() < 0 or faces.max() >= len(x):
            raise ValueError("face index out of range")
        if not (np.isfinite(density) and density > 0):
            raise ValueError("density must be positive and finite")
        if rest_uv is None:
            rest_uv = x[:, :2].copy()
        rest_uv = np.asarray(rest_uv, dtype=float)
        if face_uv is None:
            face_uv = rest_uv[faces]
        face_uv = np.asarray(face_uv, dtype=float)

        areas = triangle_areas(x, faces)
        bad = np.flatnonzero(areas <= MIN_FACE_AREA)
        if bad.size:
            raise DegenerateFaceError(int(bad[0]), float(areas[bad[0]]))

        dm = np.stack([face_uv[:, 1] - face_uv[:, 0], face_uv[:, 2] - face_uv[:, 0]], axis=-1)
        uv_area = 0.5 * np.abs(np.linalg.det(dm))
        bad = np.flatnonzero(uv_area <= MIN_FACE_AREA)
        if bad.size:
            raise DegenerateFaceError(int(bad[0]), float(uv_area[bad[0]]))
        dm_inv = np.linalg.inv(dm)

        hinges, hinge_faces = build_hinges(faces)
        theta, _ = dihedral_angles(x, hinges, hinge_faces=hinge_faces, gradient=False)
        edge_len = np.linalg.norm(x[hinges[:, 1]] - x[hinges[:, 0]], axis=1)
        heights = (2.0 * areas[hinge_faces] / edge_len[:, None]).mean(axis=1)
        hinge_rest = HingeRest(theta=theta, edge_length=edge_len, height=heights,
                               area=edge_len * heights / 3.0)

        mass = np.zeros(len(x))
        np.add.at(mass, faces.ravel(), np.repeat(density * uv_area / 3.0, 3))
        if np.any(mass <= 0):
            raise ValueError(f"vertex {int(np.flatnonzero(mass <= 0)[0])} is not referenced by any face")

        return cls(
            positions=x.copy(),
            velocities=np.zeros_like(x),
            faces=faces,
            hinges=hinges,
            hinge_faces=hinge_faces,
            rest_uv=rest_uv,
            face_uv=face_uv,
            lumped_mass=mass,
            pinned=np.zeros(len(x), dtype=bool),
            density=float(density),
            hinge_rest=hinge_rest,
            face_rest=FaceRest(area=uv_area, dm_inv=dm_inv),
            rest_positions=x.copy(),
        )


def perturbed(mesh: ClothMesh, displacement: np.ndarray) -> ClothMesh:
    """Same topology with the rest shape moved by ``displacement`` (an imperfect specimen).

    Each material triangle is rebuilt isometric to its displaced rest
    triangle, keeping the material direction of its first edge, so the new
    rest state is unstrained and warp/weft stay aligned.
    """
    x = mesh.rest_positions + np.asarray(displacement, dtype=float)
    f = mesh.faces
    e1 = x[f[:, 1]] - x[f[:, 0]]
    e2 = x[f[:, 2]] - x[f[:, 0]]
    l1 = np.linalg.norm(e1, axis=1)
    along = np.einsum("ij,ij->i", e1, e2) / l1
    across = np.linalg.norm(np.cross(e1, e2), axis=1) / l1
    uv = mesh.face_uv
    d = uv[:, 1] - uv[:, 0]
    u = d / np.linalg.norm(d, axis=1)[:, None]
    w = np.stack([-u[:, 1], u[:, 0]], axis=1)
    d2 = uv[:, 2] - uv[:, 0]
    side = np.sign(d[:, 0] * d2[:, 1] - d[:, 1] * d2[:, 0])
    new = np.stack([uv[:, 0], uv[:, 0] + l1[:, None] * u,
                    uv[:, 0] + along[:, None] * u + (side * across)[:, None] * w], axis=1)
    return ClothMesh.from_rest(x, f, face_uv=new, density=mesh.density, rest_uv=mesh.rest_uv)


def triangle_areas(x: np.ndarray, faces: np.ndarray) -> np.ndarray:
    p = x[faces]
    return 0.5 * np.linalg.norm(np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1)


def build_hinges(faces: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Find interior edges and order them as ``(e0, e1, opposite0, opposite1)``."""
    faces = np.asarray(faces, dtype=np.int64)
    nf = len(faces)
    a = faces.ravel()
    b = np.roll(faces, -1, axis=1).ravel()
    c = np.roll(faces, -2, axis=1).ravel()
    face_of = np.repeat(np.arange(nf), 3)
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    order = np.lexsort((face_of, hi, lo))
    lo, hi = lo[order], hi[order]
    same = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
    if np.any(same[1:] & same[:-1]):
        raise ValueError("non-manifold mesh: an edge is shared by more than two faces")
    first = order[:-1][same]
    second = order[1:][same]
    if np.any(a[first] == a[second]):
        raise ValueError("inconsistent face orientation across a shared edge")
    hinges = np.stack([a[first], b[first], c[first], c[second]], axis=1)
    hinge_faces = np.stack([face_of[first], face_of[second]], axis=1)
    return hinges, hinge_faces


def dihedral_angles(x: np.ndarray, hinges: np.ndarray, hinge_faces=None, gradient: bool = True):
    """Dihedral angles of all hinges and, optionally, their position gradients.

    Returns ``(theta, grad)`` with ``theta`` of shape (H,) in ``(0, 2*pi)`` and
    ``grad`` of shape (H, 4, 3) (``None`` when ``gradient`` is False).
    """
    x0 = x[hinges[:, 0]]
    x1 = x[hinges[:, 1]]
    x2 = x[hinges[:, 2]]
    x3 = x[hinges[:, 3]]
    e = x1 - x0
    le2 = np.einsum("ij,ij->i", e, e)
    le = np.sqrt(le2)
    na = np.cross(e, x2 - x0)
    nb = np.cross(x3 - x0, e)
    na2 = np.einsum("ij,ij->i", na, na)
    nb2 = np.einsum("ij,ij->i", nb, nb)

    small = (na2 <= (2 * MIN_FACE_AREA) ** 2) | (nb2 <= (2 * MIN_FACE_AREA) ** 2)
    if np.any(small):
        k = int(np.flatnonzero(small)[0])
        side = 0 if na2[k] <= (2 * MIN_FACE_AREA) ** 2 else 1
        area = 0.5 * np.sqrt(na2[k] if side == 0 else nb2[k])
        face = int(hinge_faces[k, side]) if hinge_faces is not None else k
        raise DegenerateFaceError(face, float(area))

    sin_term = np.einsum("ij,ij->i", np.cross(na, nb), e) / le
    cos_term = np.einsum("ij,ij->i", na, nb)
    theta = np.pi - np.arctan2(sin_term, cos_term)
    if not gradient:
        return theta, None

    g2 = (le / na2)[:, None] * na
    g3 = (le / nb2)[:, None] * nb
    ta = np.einsum("ij,ij->i", x2 - x0, e) / le2
    tb = np.einsum("ij,ij->i", x3 - x0, e) / le2
    g0 = -(1.0 - ta)[:, None] * g2 - (1.0 - tb)[:, None] * g3
    g1 = -ta[:, None] * g2 - tb[:, None] * g3
    return theta, np.stack([g0, g1, g2, g3], axis=1)


def dihedral_angle(mesh: ClothMesh, hinge: int, positions=None):
    """Angle and (4, 3) gradient of a single hinge."""
    x = mesh.positions if positions is None else positions
    theta, grad = dihedral_angles(x, mesh.hinges[hinge:hinge + 1], mesh.hinge_faces[hinge:hinge + 1])
    return float(theta[0]), grad[0]


def _check_dims(**dims):
    for name, value in dims.items():
        if not (np.isfinite(value) and value > 0):
            raise ValueError(f"{name} must be positive and finite, got {value!r}")


def grid_faces(nx: int, ny: int) -> np.ndarray:
    i, j = np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), indexing="xy")
    v00 = (i + j * nx).ravel()
    v10 = v00 + 1
    v01 = v00 + nx
    v11 = v01 + 1
    lower = np.stack([v00, v10, v11], axis=1)
    upper = np.stack([v00, v11, v01], axis=1)
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def build_grid(width: float, height: float, nx: int, ny: int, density: float) -> ClothMesh:
    """Flat rectangular sheet in the z=0 plane, warp along x and weft along y.

    Vertex ``i + j * nx`` sits at ``(i * width / (nx-1), j * height / (ny-1), 0)``.
    Every quad is split along the same diagonal.
    """
    _check_dims(width=width, height=height, density=density)
    if int(nx) != nx or int(ny) != ny or nx < 2 or ny < 2:
        raise ValueError("nx and ny must be integers >= 2")
    nx, ny = int(nx), int(ny)
    xs = np.linspace(0.0, width, nx)
    ys = np.linspace(0.0, height, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="xy")
    x = np.stack([gx.ravel(), gy.ravel(), np.zeros(nx * ny)], axis=1)
    return ClothMesh.from_rest(x, grid_faces(nx, ny), density=density)


def build_cylinder(radius: float, height: float, n_around: int, n_along: int, density: float) -> ClothMesh:
    """Closed tube around the z axis, bottom ring at z=0.

    The rest shape is the inscribed prism, so material coordinates use the
    chord length around the tube and the rest faces are unstrained.  Face
    normals point outwards.
    """
    _check_dims(radius=radius, height=height, density=density)
    if int(n_around) != n_around or n_around < 3:
        raise ValueError("n_around must be an integer >= 3")
    if int(n_along) != n_along or n_along < 2:
        raise ValueError("n_along must be an integer >= 2")
    n_around, n_along = int(n_around), int(n_along)
    phi = 2 * np.pi * np.arange(n_around) / n_around
    zs = np.linspace(0.0, height, n_along)
    gp, gz = np.meshgrid(phi, zs, indexing="xy")
    x = np.stack([radius * np.cos(gp).ravel(), radius * np.sin(gp).ravel(), gz.ravel()], axis=1)

    chord = 2 * radius * np.sin(np.pi / n_around)
    k, j = np.meshgrid(np.arange(n_around), np.arange(n_along - 1), indexing="xy")
    k, j = k.ravel(), j.ravel()
    kn = (k + 1) % n_around
    v00 = k + j * n_around
    v10 = kn + j * n_around
    v01 = k + (j + 1) * n_around
    v11 = kn + (j + 1) * n_around
    faces = np.stack([np.stack([v00, v10, v11], 1), np.stack([v00, v11, v01], 1)], 1).reshape(-1, 3)

    u0 = k * chord
    u1 = u0 + chord
    z0 = zs[j]
    z1 = zs[j + 1]
    lower_uv = np.stack([np.stack([u0, z0], 1), np.stack([u1, z0], 1), np.stack([u1, z1], 1)], 1)
    upper_uv = np.stack([np.stack([u0, z0], 1), np.stack([u1, z1], 1), np.stack([u0, z1], 1)], 1)
    face_uv = np.stack([lower_uv, upper_uv], 1).reshape(-1, 3, 2)
    rest_uv = np.stack([(np.arange(n_around * n_along) % n_around) * chord,
                        np.repeat(zs, n_around)], axis=1)
    return ClothMesh.from_rest(x, faces, face_uv=face_uv, density=density, rest_uv=rest_uv)


def write_obj(path, positions: np.ndarray, faces: np.ndarray) -> None:
    """ASCII OBJ with ``v``/``f`` records, 1-based indices, 9 significant digits."""
    lines = ["v {:.9g} {:.9g} {:.9g}".format(*p) for p in np.asarray(positions, dtype=float)]
    lines += ["f {} {} {}".format(*(f + 1)) for f in np.asarray(faces, dtype=np.int64)]
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_obj(path) -> tuple[np.ndarray, np.ndarray]:
    verts, faces = [], []
    with open(path, encoding="ascii") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(t) for t in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(t.split("/")[0]) for t in parts[1:]]
                if len(idx) != 3:
                    raise ValueError("only triangle faces are supported")
                faces.append([i - 1 for i in idx])
    return np.array(verts, dtype=float).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3)
