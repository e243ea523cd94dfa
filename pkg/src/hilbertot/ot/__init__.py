"""Exact discrete optimal transport for the quadratic cost, with certificates."""
from .coupling import Coupling, DualSolution, squared_distances, verify_dual
from .assignment import solve_assignment
from .simplex import solve_transport, transportation_simplex
from .certify import MonotonicityCertificate, certify_cyclic_monotonicity, cycle_sums
from .potential import (
    GradResult,
    MaxAffinePotential,
    attaining_slopes,
    grad,
    potential_from_dual,
)
from .semidiscrete import SemidiscreteResult, cell_indices, cell_masses, semidiscrete_solve

__all__ = [
    "Coupling",
    "DualSolution",
    "squared_distances",
    "verify_dual",
    "solve_assignment",
    "solve_transport",
    "transportation_simplex",
    "MonotonicityCertificate",
    "certify_cyclic_monotonicity",
    "cycle_sums",
    "MaxAffinePotential",
    "GradResult",
    "grad",
    "attaining_slopes",
    "potential_from_dual",
    "SemidiscreteResult",
    "cell_indices",
    "cell_masses",
    "semidiscrete_solve",
]
