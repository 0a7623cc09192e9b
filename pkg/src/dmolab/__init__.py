"""Evolutionary optimization for problems whose number of objectives changes over time."""

from .core import ContractError, ObjectiveBounds, Population, Solution
from .dtaea import DTAEA, DtaeaConfig
from .problems import ChangeSchedule, DynamicProblem, make_problem, make_schedule

__all__ = [
    "ChangeSchedule",
    "ContractError",
    "DTAEA",
    "DtaeaConfig",
    "DynamicProblem",
    "ObjectiveBounds",
    "Population",
    "Solution",
    "make_problem",
    "make_schedule",
]

__version__ = "0.1.0"
