"""Optimal entry and exit levels for an exponential OU price with fixed costs."""

import json

from ._xou import (
    NumericFailure,
    SolverFailure,
    TrivialProblem,
    ValidationError,
    __version__,
    calibrate,
    eigenfunctions,
    sample_path,
    solve_json,
    verify_switching,
)


def solve(mu, theta, sigma, r, c_b, c_s):
    """Solve both problems and return the record as a dict."""
    return json.loads(solve_json(mu, theta, sigma, r, c_b, c_s))


__all__ = [
    "NumericFailure",
    "SolverFailure",
    "TrivialProblem",
    "ValidationError",
    "__version__",
    "calibrate",
    "eigenfunctions",
    "sample_path",
    "solve",
    "solve_json",
    "verify_switching",
]
