"""Pseudospectral solver and verification lab for the periodic
Schrodinger-Benjamin-Ono system."""
from .grid import SpectralGrid, make_grid
from .integrator import StepControls, Trajectory, evolve, evolve_pair_with_difference
from .model import DiffState, InitDataSpec, SboParams, SboState, make_state

__all__ = [
    "DiffState",
    "InitDataSpec",
    "SboParams",
    "SboState",
    "SpectralGrid",
    "StepControls",
    "Trajectory",
    "evolve",
    "evolve_pair_with_difference",
    "make_grid",
    "make_state",
]
__version__ = "0.1.0"
