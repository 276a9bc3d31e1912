"""Python access to the nsasym verification library."""

import json

from ._core import (
    ConfigError,
    ContractError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    EvaluationError,
    LandauSolution,
    a_of_b,
    b_of_A,
    heat_kernel,
    int_est_ratio,
    oseen,
    oseen_brute,
    subcommands,
)
from ._core import _run


def run(subcommand, **params):
    """Run a CLI suite in-process and return (report, timings) as dicts.

    Parameters take the same keys as the command-line flags; values are
    converted to strings and validated like flag values.
    """
    text = {k: ",".join(map(str, v)) if isinstance(v, (list, tuple)) else str(v) for k, v in params.items()}
    report, timings = _run(subcommand, text)
    return json.loads(report), json.loads(timings)


__all__ = [
    "ConfigError",
    "ContractError",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "EvaluationError",
    "LandauSolution",
    "a_of_b",
    "b_of_A",
    "heat_kernel",
    "int_est_ratio",
    "oseen",
    "oseen_brute",
    "run",
    "subcommands",
]
