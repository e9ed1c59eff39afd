"""Scenarios, configuration, studies and the command line."""

from .analysis import EocReport, l2_error
from .config import RunConfig
from .scenarios import SCENARIOS, Scenario
from .studies import run_convergence, run_entropy_study, run_simulation

__all__ = [
    "EocReport",
    "RunConfig",
    "SCENARIOS",
    "Scenario",
    "l2_error",
    "run_convergence",
    "run_entropy_study",
    "run_simulation",
]
