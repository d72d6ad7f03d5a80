"""Morse, Floer and hybrid complexes of trigonometric Hamiltonians on tori."""

from ._core import (
    FloerError,
    Pipeline,
    RunConfig,
    TrigHamiltonian,
    TrigTerm,
    action,
    cz_constant,
    cz_diagonal,
    find_orbits,
    fredholm_diag,
    gradient,
    homology_ranks,
    load_config,
    parse_config,
)

__all__ = [
    "FloerError",
    "Pipeline",
    "RunConfig",
    "TrigHamiltonian",
    "TrigTerm",
    "action",
    "cz_constant",
    "cz_diagonal",
    "find_orbits",
    "fredholm_diag",
    "gradient",
    "homology_ranks",
    "load_config",
    "parse_config",
]
