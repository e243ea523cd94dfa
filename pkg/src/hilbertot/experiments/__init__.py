"""Seeded Monte-Carlo experiment harnesses."""
from .stability import StabilityConfig, StabilityResult, build_reference_model, run_stability
from .counterexamples import (
    CounterexampleAResult,
    CounterexampleBResult,
    boundary_subdifferential,
    run_counterexample_a,
    run_counterexample_b,
    unbounded_family_map,
)
from .clt import CltConfig, CltReport, Sigma2Estimate, run_clt, sigma2_formula

__all__ = [
    "StabilityConfig",
    "StabilityResult",
    "build_reference_model",
    "run_stability",
    "CounterexampleAResult",
    "CounterexampleBResult",
    "boundary_subdifferential",
    "run_counterexample_a",
    "run_counterexample_b",
    "unbounded_family_map",
    "CltConfig",
    "CltReport",
    "Sigma2Estimate",
    "run_clt",
    "sigma2_formula",
]
