"""Dung beetle optimizer with fractional-order memory, chaotic initialization
and elite perturbation, plus PV parameter identification objectives."""
from ._backend import BACKEND
from .core import (
    Candidate,
    ObjectiveEvaluationError,
    ObjectiveSpec,
    Population,
    SearchSpace,
    UsageError,
    clamp_to_bounds,
    evaluate_population,
    make_rng,
)
from .dbo import VARIANTS, DboParams, OptimizerConfig, RunTrace, VariantFlags, partition_roles, run
from .fractional import gl_coefficients

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Candidate",
    "DboParams",
    "ObjectiveEvaluationError",
    "ObjectiveSpec",
    "OptimizerConfig",
    "Population",
    "RunTrace",
    "SearchSpace",
    "UsageError",
    "VARIANTS",
    "VariantFlags",
    "clamp_to_bounds",
    "evaluate_population",
    "gl_coefficients",
    "make_rng",
    "partition_roles",
    "run",
]
