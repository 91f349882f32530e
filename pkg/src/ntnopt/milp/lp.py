"""Linear-program container and backend dispatch.

Two interchangeable backends sit behind `lp_solve`: the in-package
bounded-variable tableau simplex (dense, deterministic, Cython-accelerated)
and scipy's HiGHS wrapper for instances too large for a dense tableau.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.sparse as sp


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class LpNumericalError(RuntimeError):
    """The LP subsolver failed numerically; never a silent wrong answer."""


class SimplexCycleError(LpNumericalError):
    """Anti-cycling iteration guard exhausted."""


@dataclass
class LpProblem:
    """min c.x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lb <= x <= ub."""

    c: np.ndarray
    A_eq: sp.csr_matrix | np.ndarray | None
    b_eq: np.ndarray | None
    A_ub: sp.csr_matrix | np.ndarray | None
    b_ub: np.ndarray | None
    lb: np.ndarray
    ub: np.ndarray

    @property
    def n_cols(self) -> int:
        return self.c.shape[0]

    @property
    def n_rows(self) -> int:
        rows = 0
        if self.A_eq is not None:
            rows += self.A_eq.shape[0]
        if self.A_ub is not None:
            rows += self.A_ub.shape[0]
        return rows


@dataclass
class LpResult:
    status: LpStatus
    x: np.ndarray | None
    objective: float | None
    iterations: int


# Above these sizes the dense tableau is wasteful; hand off to HiGHS.
DENSE_MAX_ROWS = 500
DENSE_MAX_COLS = 1000


def pick_backend(problem: LpProblem, backend: str = "auto") -> str:
    if backend in ("dense", "highs"):
        return backend
    if backend != "auto":
        raise ValueError(f"unknown LP backend: {backend!r}")
    if problem.n_rows <= DENSE_MAX_ROWS and problem.n_cols <= DENSE_MAX_COLS:
        return "dense"
    return "highs"


def lp_solve(problem: LpProblem, backend: str = "auto", tol: float = 1e-7) -> LpResult:
    """Solve an LP with the selected backend; deterministic for fixed inputs."""
    chosen = pick_backend(problem, backend)
    if chosen == "dense":
        from .simplex import solve_dense

        return solve_dense(problem, tol=tol)
    from .highs_backend import solve_highs

    return solve_highs(problem)
