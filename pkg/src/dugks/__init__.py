"""Discrete unified gas kinetic scheme for the conservative Allen-Cahn equation."""
from .fields import DistField, Grid2D, ScalarField, VectorField
from .kinetic import KineticModel, Variant
from .lattice import D2Q9, LatticeD2Q9
from .reconstruction import FaceScheme, SchemeKind
from .solver import (
    PRESETS,
    FluxMode,
    Solver,
    SolverConfig,
    SolverDivergence,
    SolverState,
    initialize,
    step,
)

__all__ = [
    "D2Q9",
    "DistField",
    "FaceScheme",
    "FluxMode",
    "Grid2D",
    "KineticModel",
    "LatticeD2Q9",
    "PRESETS",
    "ScalarField",
    "SchemeKind",
    "Solver",
    "SolverConfig",
    "SolverDivergence",
    "SolverState",
    "Variant",
    "VectorField",
    "initialize",
    "step",
]
