"""Monotone measure-preserving maps and exact optimal transport on truncated
Hilbert spaces: solvers, closed-form maps, rank functions, and seeded
Monte-Carlo experiment harnesses."""

__version__ = "0.1.0"

from . import experiments, hilbert, maps, measures, ot, ranks, regions
from .errors import ConvergenceError, InvalidInputError, SolverError

__all__ = [
    "__version__",
    "experiments",
    "hilbert",
    "maps",
    "measures",
    "ot",
    "ranks",
    "regions",
    "ConvergenceError",
    "InvalidInputError",
    "SolverError",
]
