"""Bifurcation diagrams for -u'' = a u - f(u) - c h with Dirichlet conditions."""

from ._bifurcate import (
    ConfigError,
    DomainError,
    Error,
    ModelError,
    NonConvergence,
    Problem,
    check_hypotheses,
    count_solutions,
    detect_regime,
    diagram,
    newton_solve,
    numerical_delta,
    run,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "Error",
    "ModelError",
    "NonConvergence",
    "Problem",
    "check_hypotheses",
    "count_solutions",
    "detect_regime",
    "diagram",
    "newton_solve",
    "numerical_delta",
    "run",
]
