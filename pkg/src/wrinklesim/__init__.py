"""Cloth simulation with time-dependent internal friction and plasticity."""

from .material import MaterialParams, preset, validate
from .mesh import ClothMesh, build_cylinder, build_grid, dihedral_angles, read_obj, write_obj
from .solver import HandleSet, SolverConfig, Simulator

__version__ = "0.1.0"

__all__ = [
    "ClothMesh", "HandleSet", "MaterialParams", "Simulator", "SolverConfig",
    "build_cylinder", "build_grid", "dihedral_angles", "preset", "read_obj", "validate", "write_obj",
]
