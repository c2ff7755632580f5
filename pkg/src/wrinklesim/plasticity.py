"""Time-dependent hardening plasticity.

Strain splits as ``eps = eps_e + eps_p``.  Once the elastic part exceeds the
yield strain, the fraction ``K / (K + K_h)`` of the excess flows into
``eps_p``.  The hardening parameter ``K_h`` decays from ``K_h0`` towards
``K_h0 (1 - g)`` while the plastic deformation is held, so the same held
deformation keeps flowing and the plastic strain grows with hold time.

The yield strain is always ``eps_Y0 + eps_hp K_h / K``, evaluated with the
hardening parameter of the clock value the step would reach; without that,
a held deformation sits exactly on the yield surface after its first step
and the hold time would never matter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def hardening_param(t_plastic, Kh0, g, tau_p):
    return Kh0 * (1.0 - g * (1.0 - np.exp(-np.asarray(t_plastic, dtype=float) / tau_p)))


@dataclass
class PlasticState:
    eps_p: np.ndarray
    eps_hp: np.ndarray
    eps_Y: np.ndarray
    t_plastic: np.ndarray

    @classmethod
    def initial(cls, shape, epsY0) -> "PlasticState":
        return cls(np.zeros(shape), np.zeros(shape), np.full(shape, float(epsY0)), np.zeros(shape))

    def copy(self) -> "PlasticState":
        return PlasticState(self.eps_p.copy(), self.eps_hp.copy(), self.eps_Y.copy(), self.t_plastic.copy())


@dataclass
class PlasticStep:
    state: PlasticState
    yielded: np.ndarray  # bool mask
    flow: np.ndarray  # plastic increment magnitude
    Kh: np.ndarray
    eps_e: np.ndarray  # elastic strain the stress should use this step (capped at eps_Y)


def plastic_step(state: PlasticState, strain, h: float, K, Kh0, g, tau_p, epsY0,
                 time_scale: float = 1.0, time_dependent: bool = True) -> PlasticStep:
    """One update of the hardening model, vectorised over elements.

    ``K`` is the elastic stiffness of the strain measure (bending stiffness
    for hinges, axis stiffness for tensile strains).  With
    ``time_dependent=False`` the clock never runs and ``K_h`` stays at
    ``K_h0`` (the classic time-independent hardening model).
    """
    strain = np.asarray(strain, dtype=float)
    eps_e = strain - state.eps_p
    mag = np.abs(eps_e)
    same_sign = (state.eps_p == 0) | (np.sign(eps_e) == np.sign(state.eps_p))

    if time_dependent:
        t_try = np.where(same_sign, state.t_plastic + h * time_scale, 0.0)
        Kh_try = hardening_param(t_try, Kh0, g, tau_p)
    else:
        t_try = np.zeros_like(strain)
        Kh_try = np.full_like(strain, float(Kh0))
    Y_try = epsY0 + state.eps_hp * Kh_try / K
    yielded = mag > Y_try

    ratio = K / (K + Kh_try)
    flow = np.where(yielded, ratio * (mag - Y_try), 0.0)
    eps_hp = state.eps_hp + flow
    eps_p = state.eps_p + np.sign(eps_e) * flow
    t_plastic = np.where(yielded, t_try, 0.0)
    Kh = np.where(yielded, Kh_try, hardening_param(t_plastic, Kh0, g, tau_p) if time_dependent else Kh0)
    eps_Y = epsY0 + eps_hp * Kh / K

    e_new = strain - eps_p
    e_used = np.where(yielded, np.sign(e_new) * np.minimum(np.abs(e_new), eps_Y), e_new)
    new = PlasticState(eps_p, eps_hp, eps_Y, t_plastic)
    return PlasticStep(new, yielded, flow, np.broadcast_to(Kh, strain.shape).copy(), e_used)


def tensile_plastic_step(state: PlasticState, strain, h: float, params, time_scale: float = 1.0,
                         time_dependent: bool = True) -> PlasticStep:
    """Independent hardening on the (uu, vv, uv) axes of each face; arrays are (F, 3)."""
    K = np.array([params.K11, params.K22, params.K33])
    return plastic_step(state, strain, h, K, params.Kh0, params.g, params.tau_p, params.tensile_epsY0,
                        time_scale, time_dependent)
