"""Comparison models without dwell: Dahl friction and classic hardening.

Neither model has a clock, so how long a deformation is held cannot change
its state.  The Dahl law is integrated explicitly from the strain increment
of each step::

    d sigma = k_d * d eps * (1 - sigma / sigma_c * sign(d eps))
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .plasticity import PlasticState, PlasticStep, plastic_step


@dataclass
class DahlState:
    sigma: np.ndarray
    last_strain: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "DahlState":
        return cls(np.zeros(shape), np.zeros(shape))

    def copy(self) -> "DahlState":
        return DahlState(self.sigma.copy(), self.last_strain.copy())


def dahl_update(sigma, d_eps, k_d, sigma_c):
    """Explicit Dahl increment for strain change ``d_eps`` (saturates at ``+-sigma_c``)."""
    sigma = np.asarray(sigma, dtype=float)
    d_eps = np.asarray(d_eps, dtype=float)
    new = sigma + k_d * d_eps * (1.0 - sigma / sigma_c * np.sign(d_eps))
    return np.clip(new, -sigma_c, sigma_c)


def dahl_step(state: DahlState, strain, k_d, sigma_c) -> DahlState:
    strain = np.asarray(strain, dtype=float)
    sigma = dahl_update(state.sigma, strain - state.last_strain, k_d, sigma_c)
    return DahlState(sigma, strain.copy())


def dahl_tangent(state: DahlState, d_eps, k_d, sigma_c):
    """Non-negative tangent stiffness ``d sigma / d eps`` in the current direction."""
    s = np.where(np.asarray(d_eps) >= 0, 1.0, -1.0)
    return np.maximum(k_d * (1.0 - state.sigma / sigma_c * s), 0.0)


def hardening_only_step(state: PlasticState, strain, K, Kh0, epsY0) -> PlasticStep:
    """Hardening plasticity with ``K_h`` frozen at ``K_h0`` (no clock)."""
    return plastic_step(state, strain, 0.0, K, Kh0, 0.0, 1.0, epsY0, time_dependent=False)
