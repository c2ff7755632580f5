"""Material parameters and the published cotton/denim/polyester presets.

Bending and friction stiffnesses are tabulated as three times their value
(``Kb3``, ``KFriction3``); those table values are what gets stored so that a
JSON round trip is bit exact, and ``Kb``/``Kfriction`` are derived.

Bending thresholds (``eps0``, ``eps_inf``, ``epsY0``) are dihedral-angle
deviations in radians.  Tensile thresholds are Green-Lagrange strains.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class MaterialParams:
    rho: float
    Kb3: float
    K11: float
    K22: float
    K12: float
    K33: float
    KFriction3: float
    eps0: float
    eps_inf: float
    tau_f: float
    Kh0: float
    g: float
    tau_p: float
    epsY0: float
    # tensile block; None falls back to the bending counterpart
    K11f: Optional[float] = None
    K22f: Optional[float] = None
    K33f: Optional[float] = None
    eps0t: Optional[float] = None
    eps_inft: Optional[float] = None
    epsY0t: Optional[float] = None

    @property
    def Kb(self) -> float:
        return self.Kb3 / 3.0

    @property
    def Kfriction(self) -> float:
        return self.KFriction3 / 3.0

    @property
    def stretch_matrix(self) -> np.ndarray:
        return np.array([[self.K11, self.K12, 0.0],
                         [self.K12, self.K22, 0.0],
                         [0.0, 0.0, self.K33]])

    @property
    def tensile_friction_stiffness(self) -> np.ndarray:
        kf = self.Kfriction
        return np.array([kf if v is None else v for v in (self.K11f, self.K22f, self.K33f)])

    @property
    def tensile_eps0(self) -> float:
        return self.eps0 if self.eps0t is None else self.eps0t

    @property
    def tensile_eps_inf(self) -> float:
        return self.eps_inf if self.eps_inft is None else self.eps_inft

    @property
    def tensile_epsY0(self) -> float:
        return self.epsY0 if self.epsY0t is None else self.epsY0t

    def with_(self, **changes) -> "MaterialParams":
        return replace(self, **changes)

    def to_json_dict(self) -> dict:
        d = {
            "rho": self.rho, "Kb3": self.Kb3, "K11": self.K11, "K22": self.K22,
            "K12": self.K12, "K33": self.K33, "KFriction3": self.KFriction3,
            "eps0": self.eps0, "epsInf": self.eps_inf, "tauF": self.tau_f,
            "Kh0": self.Kh0, "g": self.g, "tauP": self.tau_p, "epsY0": self.epsY0,
        }
        tensile = {k: getattr(self, a) for k, a in _TENSILE_KEYS.items() if getattr(self, a) is not None}
        if tensile:
            d["tensile"] = tensile
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "MaterialParams":
        missing = [k for k in _KEYS if k not in d]
        if missing:
            raise KeyError(f"material file is missing keys: {', '.join(missing)}")
        unknown = set(d) - set(_KEYS) - {"tensile"}
        if unknown:
            raise KeyError(f"unknown material keys: {', '.join(sorted(unknown))}")
        kwargs = {attr: float(d[key]) for key, attr in _KEYS.items()}
        tensile = d.get("tensile") or {}
        bad = set(tensile) - set(_TENSILE_KEYS)
        if bad:
            raise KeyError(f"unknown tensile keys: {', '.join(sorted(bad))}")
        for key, attr in _TENSILE_KEYS.items():
            if key in tensile:
                kwargs[attr] = float(tensile[key])
        return cls(**kwargs)

    @classmethod
    def from_json(cls, text: str) -> "MaterialParams":
        return cls.from_json_dict(json.loads(text))


_KEYS = {
    "rho": "rho", "Kb3": "Kb3", "K11": "K11", "K22": "K22", "K12": "K12", "K33": "K33",
    "KFriction3": "KFriction3", "eps0": "eps0", "epsInf": "eps_inf", "tauF": "tau_f",
    "Kh0": "Kh0", "g": "g", "tauP": "tau_p", "epsY0": "epsY0",
}
_TENSILE_KEYS = {
    "K11f": "K11f", "K22f": "K22f", "K33f": "K33f",
    "eps0t": "eps0t", "epsInft": "eps_inft", "epsY0t": "epsY0t",
}

# rho, 3Kb, K11, K22, K12, K33, 3KFriction, eps0, eps_inf, tau_f, Kh0, g, tau_p, epsY0
_TABLES = {
    "specimen": {
        "cotton": (0.06, 5e-6, 50.0, 50.0, 0.2, 30.0, 1e-5, 0.1, 1.7, 30.0, 5e-6, 0.99, 30.0, 1.8),
        "denim": (0.25, 1.2e-4, 100.0, 100.0, 0.2, 20.0, 5e-5, 0.1, 1.8, 30.0, 1.2e-4, 0.99, 30.0, 2.0),
        "polyester": (0.18, 1.2e-4, 50.0, 50.0, 0.2, 30.0, 1e-7, 0.01, 0.1, 30.0, 1.2e-4, 0.99, 30.0, 3.0),
    },
    "garment": {
        "cotton": (0.1, 1e-6, 200.0, 200.0, 0.2, 20.0, 4e-6, 0.1, 1.2, 30.0, 1e-6, 0.99, 30.0, 1.5),
        "denim": (0.2, 3e-5, 200.0, 200.0, 0.2, 150.0, 6e-5, 0.2, 1.2, 30.0, 3e-5, 0.99, 30.0, 1.2),
        "polyester": (0.15, 1e-6, 100.0, 100.0, 0.2, 20.0, 7e-7, 0.1, 0.1, 30.0, 1e-6, 0.99, 30.0, 3.1),
    },
}

PRESET_NAMES = tuple(f"{m}-{t}" for t in _TABLES for m in _TABLES[t])


def preset(name: str, table: str = "specimen") -> MaterialParams:
    """Published parameter set, e.g. ``preset("denim", "garment")``.

    ``name`` may also carry the table as a suffix (``"denim-garment"``).
    """
    if "-" in name:
        name, table = name.split("-", 1)
    try:
        row = _TABLES[table][name]
    except KeyError:
        raise KeyError(f"unknown material preset {name!r}/{table!r}; valid: {', '.join(PRESET_NAMES)}") from None
    names = [f.name for f in fields(MaterialParams)][:14]
    return MaterialParams(**dict(zip(names, row)))


def validate(params: MaterialParams) -> list[str]:
    """Every violated parameter constraint, as readable messages (empty when ok)."""
    out = []
    p = asdict(params)
    for name in ("Kb3", "K11", "K22", "K33", "KFriction3", "Kh0", "K11f", "K22f", "K33f"):
        v = p[name]
        if v is not None and not (np.isfinite(v) and v >= 0):
            out.append(f"{name} must be >= 0 (got {v})")
    for name in ("rho", "tau_f", "tau_p"):
        if not (np.isfinite(p[name]) and p[name] > 0):
            out.append(f"{name} must be > 0 (got {p[name]})")
    if not (0.0 < params.g < 1.0):
        out.append(f"g ∈ (0,1) violated (got {params.g})")
    if not params.eps0 >= 0:
        out.append(f"eps0 must be >= 0 (got {params.eps0})")
    if not params.eps_inf >= params.eps0:
        out.append(f"eps_inf >= eps0 violated (eps_inf={params.eps_inf}, eps0={params.eps0})")
    if not params.epsY0 >= params.eps0:
        out.append(f"epsY0 >= eps0 violated (epsY0={params.epsY0}, eps0={params.eps0})")
    if not params.tensile_eps0 >= 0:
        out.append(f"eps0t must be >= 0 (got {params.tensile_eps0})")
    if not params.tensile_eps_inf >= params.tensile_eps0:
        out.append(f"eps_inft >= eps0t violated (eps_inft={params.tensile_eps_inf}, eps0t={params.tensile_eps0})")
    if not params.tensile_epsY0 >= params.tensile_eps0:
        out.append(f"epsY0t >= eps0t violated (epsY0t={params.tensile_epsY0}, eps0t={params.tensile_eps0})")
    return out


def load(path) -> MaterialParams:
    with open(path, encoding="utf-8") as fh:
        return MaterialParams.from_json(fh.read())


def resolve(spec) -> MaterialParams:
    """Accept a MaterialParams, a preset name, a JSON dict or a path to a JSON file."""
    if isinstance(spec, MaterialParams):
        return spec
    if isinstance(spec, dict):
        return MaterialParams.from_json_dict(spec)
    spec = str(spec)
    if spec.endswith(".json"):
        return load(spec)
    return preset(spec)
