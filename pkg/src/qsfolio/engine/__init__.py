"""Density-matrix evolution engine for the quantum stochastic walk."""

from .kraus import KrausSet, build_kraus, hermitian_unitary
from .evolve import (
    DensityMatrix,
    StationaryResult,
    active_backend,
    evolve_step,
    extract_weights,
    run_to_stationary,
)

__all__ = [
    "KrausSet",
    "build_kraus",
    "hermitian_unitary",
    "DensityMatrix",
    "StationaryResult",
    "active_backend",
    "evolve_step",
    "extract_weights",
    "run_to_stationary",
]
