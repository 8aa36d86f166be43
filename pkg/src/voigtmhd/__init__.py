"""Pseudo-spectral Voigt-regularized MHD on the periodic 3-torus.

Modules: ``spectral`` (grids, transforms, operators), ``dynamics`` (right-hand
side, RK4 stepping, initial data), ``diagnostics`` (energies, helicity,
equilibrium residuals), ``relax`` (long-time relaxation driver), ``growth``
(gradient-growth transport example), ``fileio`` / ``config`` / ``cli``.
"""
from .dynamics import InitialCondition, VoigtParams, VoigtState, make_state, rk4_step, voigt_rhs
from .errors import (
    CheckpointError,
    ConfigurationError,
    GridMismatchError,
    NotConvergedError,
    NotSolenoidalError,
    NumericalFailure,
    ResolutionExhausted,
    SpectralDomainError,
)
from .spectral import SpectralField, WavenumberGrid, make_grid

__all__ = [
    "CheckpointError", "ConfigurationError", "GridMismatchError", "InitialCondition",
    "NotConvergedError", "NotSolenoidalError", "NumericalFailure", "ResolutionExhausted",
    "SpectralDomainError", "SpectralField", "VoigtParams", "VoigtState", "WavenumberGrid",
    "make_grid", "make_state", "rk4_step", "voigt_rhs",
]
