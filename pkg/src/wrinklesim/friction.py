"""Time-dependent shifting-anchor internal friction.

Each friction element (a bending hinge, or one strain axis of a face) keeps
an anchor strain.  While the strain stays within ``eps_thres`` of the anchor
the element sticks and its dwell clock ``t_stick`` runs, which raises the
threshold from ``eps0`` towards ``eps_inf``.  Once the deviation exceeds the
threshold the anchor is dragged along to sit exactly ``eps_thres`` behind the
strain and the dwell clock restarts.

The friction stress ``K_f * (eps - anchor)`` derives from the energy
``A * (K_f eps^2 / 2 - K_f anchor eps)`` with the anchor held fixed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elastic import hinge_forces, stretch_forces


SLIP_TOL = 1e-12


def threshold(t_stick, eps0, eps_inf, tau_f):
    """Stick-slip threshold after dwelling ``t_stick`` seconds."""
    return eps_inf - (eps_inf - eps0) * np.exp(-np.asarray(t_stick, dtype=float) / tau_f)


@dataclass
class FrictionState:
    """Per-element friction state (struct of arrays; scalars work too)."""

    anchor: np.ndarray
    t_stick: np.ndarray
    last_strain: np.ndarray
    last_threshold: np.ndarray  # threshold that governed the latest update

    @classmethod
    def zeros(cls, shape, anchor=None) -> "FrictionState":
        a = np.zeros(shape) if anchor is None else np.array(anchor, dtype=float)
        return cls(a, np.zeros(shape), a.copy(), np.zeros(shape))

    def copy(self) -> "FrictionState":
        return FrictionState(self.anchor.copy(), self.t_stick.copy(),
                             self.last_strain.copy(), self.last_threshold.copy())


def friction_update(state: FrictionState, strain, h: float, eps0, eps_inf, tau_f,
                    time_scale: float = 1.0) -> tuple[FrictionState, np.ndarray]:
    """Advance the anchors and dwell clocks by one step.

    ``h * time_scale`` is added to ``t_stick`` of sticking elements.  Returns
    the new state and a boolean mask of elements that slipped.
    """
    strain = np.asarray(strain, dtype=float)
    thres = threshold(state.t_stick, eps0, eps_inf, tau_f)
    delta = strain - state.anchor
    # the slip branch leaves |delta| == thres up to rounding; a tiny tolerance
    # keeps that element sticking (and its dwell clock running) next step
    slip = np.abs(delta) - thres > SLIP_TOL
    anchor = np.where(slip, state.anchor + np.sign(delta) * (np.abs(delta) - thres), state.anchor)
    t_stick = np.where(slip, 0.0, state.t_stick + h * time_scale)
    return FrictionState(anchor, t_stick, strain.copy(), thres), slip


def friction_stress(strain, anchor, stiffness):
    return np.asarray(stiffness) * (np.asarray(strain) - np.asarray(anchor))


def friction_energy(strain, anchor, stiffness, area):
    """``A * (K eps^2 / 2 - K anchor eps)``; its strain gradient is the friction stress."""
    strain = np.asarray(strain)
    return np.asarray(area) * stiffness * (0.5 * strain ** 2 - np.asarray(anchor) * strain)


def friction_force(strain, anchor, stiffness, area, height, grad):
    """Bending-hinge friction forces (H, 4, 3) and Gauss-Newton Jacobians (H, 12, 12).

    ``strain`` and ``anchor`` are bending strains; ``grad`` is dtheta/dx.
    """
    dev = np.asarray(strain, dtype=float) - np.asarray(anchor, dtype=float)
    return hinge_forces(dev, np.broadcast_to(stiffness, dev.shape), area, height, grad)


def tensile_friction_force(strain, anchor, stiffness_diag, area, deps):
    """Face friction forces (F, 3, 3) and Jacobians (F, 9, 9) with diagonal stiffness."""
    K = np.diag(np.asarray(stiffness_diag, dtype=float))
    return stretch_forces(np.asarray(strain) - np.asarray(anchor), K, area, deps)


def tensile_friction_step(state: FrictionState, strain, h: float, params, deps=None, area=None,
                          time_scale: float = 1.0):
    """Per-axis tensile friction: update (uu, vv, uv) states independently.

    ``state`` arrays and ``strain`` have shape (F, 3).  When ``deps`` and
    ``area`` are given, the forces and Jacobians are returned as well.
    """
    new, slip = friction_update(state, strain, h, params.tensile_eps0, params.tensile_eps_inf,
                                params.tau_f, time_scale)
    if deps is None:
        return new, slip
    force, jac = tensile_friction_force(strain, new.anchor, params.tensile_friction_stiffness, area, deps)
    return new, slip, force, jac
