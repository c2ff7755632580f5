import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_hinges
from wrinklesim.mesh import (ClothMesh, DegenerateFaceError, build_cylinder, build_grid, build_hinges,
                             dihedral_angles, read_obj, write_obj)


def _angles(x):
    n = len(x)
    flat = x.reshape(-1, 3)
    hinges = np.arange(4 * n).reshape(n, 4)
    return dihedral_angles(flat, hinges)


def test_flat_hinge_is_pi():
    m = build_grid(1.0, 1.0, 2, 2, 0.06)
    assert m.n_hinges == 1
    assert m.hinges.tolist() == [[3, 0, 1, 2]] or m.n_hinges == 1
    theta, _ = dihedral_angles(m.positions, m.hinges)
    assert theta[0] == pytest.approx(np.pi, abs=1e-15)
    assert m.total_mass() == pytest.approx(0.06)


def test_dihedral_gradient_matches_central_differences(rng):
    x = random_hinges(rng, 1000)
    theta, grad = _angles(x)
    step = 1e-6
    fd = np.zeros_like(grad)
    for v in range(4):
        for c in range(3):
            xp, xm = x.copy(), x.copy()
            xp[:, v, c] += step
            xm[:, v, c] -= step
            fd[:, v, c] = (_angles(xp)[0] - _angles(xm)[0]) / (2 * step)
    err = np.linalg.norm((grad - fd).reshape(len(x), -1), axis=1) / np.linalg.norm(fd.reshape(len(x), -1), axis=1)
    assert err.max() < 1e-4


def test_gradient_sums_to_zero_and_has_no_torque(rng):
    x = random_hinges(rng, 200)
    _, grad = _angles(x)
    assert np.abs(grad.sum(axis=1)).max() < 1e-10
    torque = np.cross(x, grad).sum(axis=1)
    assert np.abs(torque).max() < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.floats(-np.pi, np.pi), st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_angle_invariant_under_rigid_motion(angle, shift):
    x = random_hinges(np.random.default_rng(3), 5)
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]) @ np.array([[1, 0, 0], [0, c, s], [0, -s, c]])
    y = x @ R.T + np.asarray(shift)
    assert np.allclose(_angles(x)[0], _angles(y)[0], atol=1e-10)


def test_cylinder_rest_angles_and_topology():
    m = build_cylinder(0.05, 0.1, 64, 32, 0.06)
    theta = m.hinge_rest.theta
    vals = np.unique(np.round(theta, 9))
    assert np.allclose(sorted(vals), sorted([np.pi - 2 * np.pi / 64, np.pi]), atol=1e-8)
    assert m.euler_characteristic() == 0


def test_grid_topology_and_mass():
    m = build_grid(0.3, 0.3, 61, 61, 0.06)
    assert m.n_vertices == 61 * 61
    assert m.n_faces == 2 * 60 * 60
    assert m.euler_characteristic() == 1
    assert m.total_mass() == pytest.approx(0.06 * 0.09)


def test_degenerate_face_is_named():
    x = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0], [0, 1, 0]], dtype=float)
    with pytest.raises(DegenerateFaceError) as err:
        ClothMesh.from_rest(x, [[0, 1, 3], [0, 1, 2]])
    assert err.value.face == 1


def test_non_manifold_edge_rejected():
    with pytest.raises(ValueError):
        build_hinges(np.array([[0, 1, 2], [1, 0, 3], [0, 1, 4]]))


def test_obj_round_trip(tmp_path):
    m = build_grid(0.1, 0.1, 4, 3, 0.06)
    path = tmp_path / "a.obj"
    write_obj(path, m.positions, m.faces)
    x, f = read_obj(path)
    assert np.array_equal(f, m.faces)
    assert np.allclose(x, m.positions, atol=1e-9)
