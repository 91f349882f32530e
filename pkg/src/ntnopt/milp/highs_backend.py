"""scipy/HiGHS backend for LPs too large for the dense tableau."""
from __future__ import annotations

import numpy as np
from scipy.optimize import linprog

from .lp import LpNumericalError, LpProblem, LpResult, LpStatus

_STATUS_MAP = {
    0: LpStatus.OPTIMAL,
    2: LpStatus.INFEASIBLE,
    3: LpStatus.UNBOUNDED,
}


def solve_highs(problem: LpProblem) -> LpResult:
    bounds = np.column_stack([problem.lb, problem.ub])
    res = linprog(
        problem.c,
        A_ub=problem.A_ub,
        b_ub=problem.b_ub,
        A_eq=problem.A_eq,
        b_eq=problem.b_eq,
        bounds=bounds,
        method="highs",
        options={
            "presolve": True,
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    status = _STATUS_MAP.get(res.status)
    if status is None:
        raise LpNumericalError(f"HiGHS failed (status {res.status}): {res.message}")
    if status is not LpStatus.OPTIMAL:
        return LpResult(status, None, None, int(getattr(res, "nit", 0) or 0))
    return LpResult(status, np.asarray(res.x), float(res.fun), int(res.nit))
