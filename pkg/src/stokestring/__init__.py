"""Boundary-integral simulator for a closed elastic string in 2-D Stokes flow.

The string carries bending, stretching, and surface-tension energy and is
evolved through its tangent angle, stretching function, and perimeter with
a semi-implicit pseudo-spectral scheme.  A diagnostics suite checks the
energy identity, conserved quantities, linearized velocity formulas, and
quantitative isoperimetric inequalities.
"""

from .backend import BACKEND
from .dynamics import RhsBundle, SimConfig, SimResult, run_simulation, time_step
from .geometry import (CurveState, ForceParams, equilibrium_state, make_state,
                       normalize_initial_data, reconstruct_curve)
from .spectral import PeriodicGrid, SpectralField
from .velocity import VelocityFields, curve_velocity, force_density

__version__ = "0.1.0"
__all__ = [
    "BACKEND", "CurveState", "ForceParams", "PeriodicGrid", "RhsBundle",
    "SimConfig", "SimResult", "SpectralField", "VelocityFields",
    "curve_velocity", "equilibrium_state", "force_density", "make_state",
    "normalize_initial_data", "reconstruct_curve", "run_simulation",
    "time_step", "__version__",
]
