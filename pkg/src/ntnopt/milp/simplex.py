"""Dense two-phase primal simplex with variable bounds.

Phase 1 starts from an all-artificial basis; phase 2 minimizes the real
objective with artificials locked at zero. Pricing is Dantzig with a
deterministic, sticky switch to Bland's rule after a degenerate streak so
termination is guaranteed; an iteration guard turns pathological cycling
into an explicit error. Hot loops live in the `kernels` module (Cython
when built, numpy otherwise).
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from . import kernels
from .kernels import AT_BASIC, AT_LOWER, AT_UPPER
from .lp import LpNumericalError, LpProblem, LpResult, LpStatus, SimplexCycleError

_DEGENERATE_STREAK_FOR_BLAND = 40
_RC_TOL = 1e-9
_PIVOT_TOL = 1e-10


class _Unbounded(Exception):
    pass


def _densify(A) -> np.ndarray | None:
    if A is None:
        return None
    if sp.issparse(A):
        return np.asarray(A.todense(), dtype=float)
    return np.asarray(A, dtype=float)


class _Tableau:
    def __init__(self, T, values, basis, status, u, max_iters):
        self.T = T
        self.values = values
        self.basis = basis
        self.status = status
        self.u = u
        self.max_iters = max_iters
        self.iters = 0
        self.m = T.shape[0] - 1

    def run_phase(self, cost_row: np.ndarray, rc_tol: float) -> None:
        T, m = self.T, self.m
        T[m, :] = cost_row - cost_row[self.basis] @ T[:m, :]
        bland = False
        streak = 0
        while True:
            q = kernels.choose_entering(T[m], self.status, self.u, rc_tol, bland)
            if q < 0:
                return
            self.iters += 1
            if self.iters > self.max_iters:
                raise SimplexCycleError(
                    f"simplex cycling guard exhausted after {self.max_iters} iterations"
                )
            from_upper = self.status[q] == AT_UPPER
            d = -T[:m, q] if from_upper else T[:m, q].copy()
            t, row, to_upper = kernels.ratio_test(
                d, self.values, self.u[self.basis], self.basis,
                self.u[q], _PIVOT_TOL, bland,
            )
            if row == -2:
                raise _Unbounded()
            if t <= _PIVOT_TOL:
                streak += 1
                if streak >= _DEGENERATE_STREAK_FOR_BLAND:
                    bland = True  # sticky: stay on Bland until the phase ends
            else:
                streak = 0
            self.values -= t * d
            if row == -1:
                self.status[q] = AT_LOWER if from_upper else AT_UPPER
                continue
            self.pivot(row, q, (self.u[q] - t) if from_upper else t, to_upper)

    def pivot(self, row: int, q: int, entering_value: float, leaving_to_upper: bool) -> None:
        T = self.T
        leaving = self.basis[row]
        self.status[leaving] = AT_UPPER if leaving_to_upper else AT_LOWER
        piv = T[row, q]
        if abs(piv) < 1e-12:
            raise LpNumericalError("vanishing pivot element in simplex")
        T[row, :] /= piv
        kernels.eliminate(T, row, q)
        self.basis[row] = q
        self.status[q] = AT_BASIC
        self.values[row] = entering_value


def solve_dense(problem: LpProblem, tol: float = 1e-7, max_iters: int | None = None) -> LpResult:
    """Solve min c.x subject to equalities, inequalities, and bounds."""
    c = np.asarray(problem.c, dtype=float)
    n = c.shape[0]
    lb = np.asarray(problem.lb, dtype=float).copy()
    ub = np.asarray(problem.ub, dtype=float).copy()
    if not np.all(np.isfinite(lb)):
        raise LpNumericalError("dense simplex requires finite lower bounds")
    if np.any(ub < lb - 1e-12):
        return LpResult(LpStatus.INFEASIBLE, None, None, 0)
    ub = np.maximum(ub, lb)

    A_eq = _densify(problem.A_eq)
    b_eq = None if problem.b_eq is None else np.asarray(problem.b_eq, dtype=float)
    A_ub = _densify(problem.A_ub)
    b_ub = None if problem.b_ub is None else np.asarray(problem.b_ub, dtype=float)
    me = 0 if A_eq is None else A_eq.shape[0]
    mu = 0 if A_ub is None else A_ub.shape[0]
    m = me + mu

    if m == 0:
        # Pure bound problem: every variable sits at whichever bound its cost favors.
        x = np.where(c > 0, lb, np.where(c < 0, ub, lb))
        if np.any(~np.isfinite(x)):
            return LpResult(LpStatus.UNBOUNDED, None, None, 0)
        return LpResult(LpStatus.OPTIMAL, x, float(c @ x), 0)

    # Assemble rows, shift x by lb, append slack columns for <= rows.
    A = np.zeros((m, n + mu))
    b = np.zeros(m)
    if me:
        A[:me, :n] = A_eq
        b[:me] = b_eq - A_eq @ lb
    if mu:
        A[me:, :n] = A_ub
        A[me:, n : n + mu] = np.eye(mu)
        b[me:] = b_ub - A_ub @ lb

    # Row equilibration (solution-preserving).
    row_scale = np.max(np.abs(A), axis=1)
    row_scale[row_scale == 0.0] = 1.0
    A /= row_scale[:, None]
    b /= row_scale

    neg = b < 0.0
    A[neg] *= -1.0
    b[neg] *= -1.0

    N = n + mu
    total = N + m  # structural + slack + artificial columns
    u = np.empty(total)
    u[:n] = ub - lb
    u[n:] = np.inf

    T = np.zeros((m + 1, total))
    T[:m, :N] = A
    T[:m, N:] = np.eye(m)

    status = np.full(total, AT_LOWER, dtype=np.int8)
    basis = np.arange(N, N + m, dtype=np.int64)
    status[basis] = AT_BASIC

    if max_iters is None:
        max_iters = 200 * (m + N) + 5000
    tab = _Tableau(T, b.copy(), basis, status, u, max_iters)

    phase1_cost = np.zeros(total)
    phase1_cost[N:] = 1.0
    try:
        tab.run_phase(phase1_cost, _RC_TOL)
    except _Unbounded:  # phase-1 objective is bounded below; must be numerical
        raise LpNumericalError("unbounded phase-1 direction") from None

    artificial_rows = np.flatnonzero(basis >= N)
    infeas = float(tab.values[artificial_rows].sum()) if artificial_rows.size else 0.0
    if infeas > 1e-7 * (1.0 + float(np.abs(b).max(initial=0.0))):
        return LpResult(LpStatus.INFEASIBLE, None, None, tab.iters)

    # Drive leftover artificials out of the basis with zero-step pivots, or
    # leave them locked at zero on redundant rows.
    for row in artificial_rows:
        cand = np.flatnonzero(np.abs(T[row, :N]) > 1e-9)
        cand = [j for j in cand if status[j] != AT_BASIC]
        if cand:
            q = int(cand[0])
            entering_value = u[q] if status[q] == AT_UPPER else 0.0
            tab.pivot(int(row), q, entering_value, leaving_to_upper=False)
    u[N:] = 0.0  # artificials may never re-enter

    phase2_cost = np.zeros(total)
    phase2_cost[:n] = c
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    try:
        tab.run_phase(phase2_cost / scale, _RC_TOL)
    except _Unbounded:
        return LpResult(LpStatus.UNBOUNDED, None, None, tab.iters)

    full = np.where(status == AT_UPPER, u, 0.0)
    full[basis] = tab.values
    x = lb + full[:n]
    np.clip(x, lb, ub, out=x)
    return LpResult(LpStatus.OPTIMAL, x, float(c @ x), tab.iters)
