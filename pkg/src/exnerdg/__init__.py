"""Entropy stable DGSEM for the 1D Saint-Venant-Exner system."""

from .dgsem import (
    THREADS_ENV,
    Mesh1D,
    Semidiscretization,
    cfl_timestep,
    entropy_rate,
    evaluate_field,
    integrate_nodal,
    interpolate_ic,
    rhs,
    total_entropy,
    uniform_mesh,
)
from .errors import ConfigurationError, PositivityError, SolverError
from .model import MPM, Grass, State, SveParams
from .sbp import gauss_rule, lgl_basis
from .timeint import TimeIntegrationConfig, TimeSeries, integrate

__version__ = "0.1.0"

__all__ = [
    "THREADS_ENV",
    "ConfigurationError",
    "Grass",
    "MPM",
    "Mesh1D",
    "PositivityError",
    "Semidiscretization",
    "SolverError",
    "State",
    "SveParams",
    "TimeIntegrationConfig",
    "TimeSeries",
    "cfl_timestep",
    "entropy_rate",
    "evaluate_field",
    "gauss_rule",
    "integrate",
    "integrate_nodal",
    "interpolate_ic",
    "lgl_basis",
    "rhs",
    "total_entropy",
    "uniform_mesh",
]
