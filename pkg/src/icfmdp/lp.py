"""Thin linear-programming layer over scipy's HiGHS solver.

The verification LPs here are small (a few hundred variables at most for couplings,
up to ~1e5 sparse columns for full mechanism enumeration), so a mature simplex
implementation is the right tool; this module just fixes the problem container and
the error contract.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import Infeasible, InvariantViolation, Unbounded


@dataclass
class LpProblem:
    """min or max of c @ x subject to A_eq x = b_eq, A_ub x <= b_ub, lower <= x <= upper."""

    c: np.ndarray
    a_eq: np.ndarray | sp.spmatrix | None = None
    b_eq: np.ndarray | None = None
    a_ub: np.ndarray | sp.spmatrix | None = None
    b_ub: np.ndarray | None = None
    lower: np.ndarray | float = 0.0
    upper: np.ndarray | float | None = None
    sense: str = "min"  # "min" | "max"


def lp_solve(problem: LpProblem) -> tuple[float, np.ndarray]:
    """Solve an LpProblem; returns (optimum, solution).

    Raises Infeasible or Unbounded; any other solver failure is an InvariantViolation.
    """
    if problem.sense not in ("min", "max"):
        raise ValueError(f"unknown sense {problem.sense!r}")
    c = np.asarray(problem.c, dtype=float)
    sign = 1.0 if problem.sense == "min" else -1.0
    n = c.shape[0]
    lower = np.broadcast_to(np.asarray(problem.lower, dtype=float), (n,))
    if problem.upper is None:
        bounds = [(lo, None) for lo in lower]
    else:
        upper = np.broadcast_to(np.asarray(problem.upper, dtype=float), (n,))
        bounds = list(zip(lower, upper))
    res = linprog(sign * c, A_ub=problem.a_ub, b_ub=problem.b_ub,
                  A_eq=problem.a_eq, b_eq=problem.b_eq, bounds=bounds, method="highs")
    if res.status == 2:
        raise Infeasible("linear program is infeasible")
    if res.status == 3:
        raise Unbounded("linear program is unbounded")
    if res.status != 0:
        raise InvariantViolation(f"LP solver failed with status {res.status}: {res.message}")
    return sign * float(res.fun), res.x
