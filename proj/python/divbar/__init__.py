"""Optimal dividend barriers for a group of insurance lines under default contagion."""

from ._core import (
    ConfigError,
    ContractViolation,
    ModelParams,
    NoBoundaryError,
    PolicySolution,
    compare_explicit2,
    load_config,
    parse_config,
    run_cli,
    simulate,
    solve,
    validate,
    verify,
)

__all__ = [
    "ConfigError",
    "ContractViolation",
    "ModelParams",
    "NoBoundaryError",
    "PolicySolution",
    "compare_explicit2",
    "load_config",
    "parse_config",
    "run_cli",
    "simulate",
    "solve",
    "validate",
    "verify",
]
