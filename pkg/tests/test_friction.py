import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wrinklesim.friction import FrictionState, friction_update, tensile_friction_step, threshold
from wrinklesim.material import preset

COTTON = preset("cotton")


def _state(anchor=0.0, t=0.0):
    return FrictionState(np.array(anchor, float), np.array(t, float), np.array(anchor, float), np.array(0.0))


def _thres_state(anchor, thres, eps0=0.1, eps_inf=1.7, tau=30.0):
    """State whose current threshold equals ``thres``."""
    t = -tau * np.log((eps_inf - thres) / (eps_inf - eps0))
    return _state(anchor, t), (eps0, eps_inf, tau)


def test_threshold_values():
    c = COTTON
    assert threshold(0.0, c.eps0, c.eps_inf, c.tau_f) == pytest.approx(0.1, abs=1e-12)
    assert threshold(30.0, c.eps0, c.eps_inf, c.tau_f) == pytest.approx(1.1113929, abs=1e-7)
    assert threshold(30.0, c.eps0, c.eps_inf, c.tau_f) == pytest.approx(1.7 - 1.6 * np.exp(-1), abs=1e-12)
    assert abs(threshold(50 * 30.0, c.eps0, c.eps_inf, c.tau_f) - 1.7) < 1e-9


def test_threshold_strictly_increasing():
    t = np.linspace(0, 200, 500)
    th = threshold(t, 0.1, 1.7, 30.0)
    assert np.all(np.diff(th) > 0)
    assert th.min() >= 0.1 and th.max() < 1.7


def test_stick_branch():
    s, p = _thres_state(0.0, 0.1)
    new, slip = friction_update(s, 0.05, 0.01, *p)
    assert not slip and new.anchor == 0.0 and new.t_stick == pytest.approx(s.t_stick + 0.01, abs=1e-12)


@pytest.mark.parametrize("anchor,strain,thres,expected", [(0.0, 2.0, 0.5, 1.5), (1.0, 0.2, 0.5, 0.7)])
def test_slip_branch(anchor, strain, thres, expected):
    s, p = _thres_state(anchor, thres)
    new, slip = friction_update(s, strain, 0.01, *p)
    assert slip
    assert new.anchor == pytest.approx(expected, abs=1e-9)
    assert new.t_stick == 0.0
    assert abs(strain - new.anchor) == pytest.approx(thres, abs=1e-9)


def test_time_scale_accelerates_dwell():
    s = _state()
    new, _ = friction_update(s, 0.0, 0.01, 0.1, 1.7, 30.0, time_scale=1000)
    assert new.t_stick == pytest.approx(10.0)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=200), st.floats(0.001, 10.0))
def test_feasibility_and_reset_invariants(path, h):
    s = _state()
    for eps in path:
        s, slip = friction_update(s, eps, h, 0.1, 1.7, 30.0)
        assert abs(eps - s.anchor) <= s.last_threshold + 1e-12
        assert s.t_stick >= 0
        if slip:
            assert s.t_stick == 0.0
            # the next query starts again from eps0
            assert threshold(s.t_stick, 0.1, 1.7, 30.0) == pytest.approx(0.1)


def test_slip_perturbation_non_decreasing_in_hold_time():
    needed = []
    for hold in (0.0, 1.0, 10.0, 100.0):
        s = _state(0.0, 0.0)
        s, _ = friction_update(s, 0.0, hold, 0.1, 1.7, 30.0)
        needed.append(float(threshold(s.t_stick, 0.1, 1.7, 30.0)))
    assert np.all(np.diff(needed) > 0)


def test_hysteresis_loop_has_positive_area():
    kf, kb = 2.0, 1.0
    strain = np.concatenate([np.linspace(0, 1, 200), np.linspace(1, -1, 400), np.linspace(-1, 1, 400)])
    s = _state()
    stress = []
    for e in strain:
        s, _ = friction_update(s, e, 0.0, 0.1, 0.1, 30.0)
        stress.append(kb * e + kf * (e - s.anchor))
    stress = np.array(stress)
    cyc = slice(200, None)
    area = np.sum(0.5 * (stress[cyc][1:] + stress[cyc][:-1]) * np.diff(strain[cyc]))
    assert abs(area) > 0.1


def test_determinism():
    path = np.sin(np.linspace(0, 20, 300)) * 1.5
    runs = []
    for _ in range(2):
        s = FrictionState.zeros(5)
        out = []
        for e in path:
            s, _ = friction_update(s, e * np.arange(5), 0.01, 0.1, 1.7, 30.0)
            out.append(s.anchor.copy())
        runs.append(np.array(out))
    assert np.array_equal(runs[0], runs[1])


def test_tensile_axes_independent():
    p = COTTON.with_(eps0t=0.01, eps_inft=0.05)
    s = FrictionState.zeros((1, 3))
    new, slip = tensile_friction_step(s, np.array([[0.2, 0.0, 0.0]]), 0.01, p)
    assert slip.tolist() == [[True, False, False]]
    assert new.anchor[0, 1:].tolist() == [0.0, 0.0]


def test_tensile_ramp_lags_by_threshold():
    p = COTTON.with_(eps0t=0.01, eps_inft=0.01)
    s = FrictionState.zeros((1, 3))
    for e in np.linspace(0, 0.2, 101)[1:]:
        s, _ = tensile_friction_step(s, np.array([[e, 0.0, 0.0]]), 0.01, p)
    assert s.anchor[0, 0] == pytest.approx(0.2 - 0.01, abs=1e-12)


def test_zero_force_at_anchor():
    p = COTTON
    s = FrictionState.zeros((1, 3))
    deps = np.random.default_rng(0).standard_normal((1, 3, 3, 3))
    _, _, f, _ = tensile_friction_step(s, np.zeros((1, 3)), 0.01, p, deps=deps, area=np.ones(1))
    assert np.all(f == 0)
