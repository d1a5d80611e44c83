"""Constrained vector optimization and transactive-energy market simulation."""

from ._core import (
    DivergedError,
    DomainError,
    Error,
    ModelError,
    ParseError,
    UsageError,
    build_constraints,
    default_scenario,
    ieee37_topology_text,
    jains_gradient,
    jains_hessian_quadform,
    jains_index,
    majorizes,
    marginal_utility,
    materialize,
    min_norm_weights,
    pareto_sweep,
    run,
    run_auction,
    utility,
)

__all__ = [
    "DivergedError",
    "DomainError",
    "Error",
    "ModelError",
    "ParseError",
    "UsageError",
    "build_constraints",
    "default_scenario",
    "ieee37_topology_text",
    "jains_gradient",
    "jains_hessian_quadform",
    "jains_index",
    "majorizes",
    "marginal_utility",
    "materialize",
    "min_norm_weights",
    "pareto_sweep",
    "run",
    "run_auction",
    "utility",
]
