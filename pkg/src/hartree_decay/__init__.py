"""Hartree equation i∂ₜu = -Δu + Vu + (w*|u|²)u on a periodic box, with
diagnostics that measure dispersive decay and the constants in its proof."""

from .grid import ComplexField, GridSpec, SpectralField, Symbol, make_grid, sample
from .physics import CubicLocal, InteractionSpec, ModelSpec, PotentialSpec
from .propagator import StepPlan, Trajectory, evolve, linear_propagate, strang_step

__version__ = "0.1.0"

__all__ = [
    "ComplexField",
    "GridSpec",
    "SpectralField",
    "Symbol",
    "make_grid",
    "sample",
    "CubicLocal",
    "InteractionSpec",
    "ModelSpec",
    "PotentialSpec",
    "StepPlan",
    "Trajectory",
    "evolve",
    "linear_propagate",
    "strang_step",
]
