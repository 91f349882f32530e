"""Independent dense-tableau simplex used only as a test oracle.

Deliberately different from the production solver: standard-form Big-M
tableau (bounds expanded to explicit rows, single phase) with pure Bland
pivoting. Slow and simple; correctness over speed.
"""
from __future__ import annotations

import numpy as np

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_BIG_M = 1e7
_EPS = 1e-9


def solve_oracle(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, lb=None, ub=None):
    """(status, x, objective) for min c.x; bounds become explicit rows."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    lb = np.zeros(n) if lb is None else np.asarray(lb, dtype=float)
    ub = np.full(n, np.inf) if ub is None else np.asarray(ub, dtype=float)

    rows_ub = []
    rhs_ub = []
    if A_ub is not None and len(A_ub):
        for row, b in zip(np.asarray(A_ub, dtype=float), np.asarray(b_ub, dtype=float)):
            rows_ub.append(row.copy())
            rhs_ub.append(float(b))
    for j in range(n):
        if np.isfinite(ub[j]):
            row = np.zeros(n)
            row[j] = 1.0
            rows_ub.append(row)
            rhs_ub.append(float(ub[j]))

    rows_eq = []
    rhs_eq = []
    if A_eq is not None and len(A_eq):
        for row, b in zip(np.asarray(A_eq, dtype=float), np.asarray(b_eq, dtype=float)):
            rows_eq.append(row.copy())
            rhs_eq.append(float(b))

    # Shift x = lb + y, y >= 0.
    shift = lb.copy()
    rhs_ub = [b - row @ shift for row, b in zip(rows_ub, rhs_ub)]
    rhs_eq = [b - row @ shift for row, b in zip(rows_eq, rhs_eq)]

    m_ub, m_eq = len(rows_ub), len(rows_eq)
    m = m_ub + m_eq
    if m == 0:
        x = np.where(c > 0, 0.0, np.inf)
        if np.any(np.isinf(x[c < 0])):
            return UNBOUNDED, None, None
        return OPTIMAL, shift, float(c @ shift)

    # Columns: y (n), slacks (m_ub), artificials (m).
    width = n + m_ub + m
    T = np.zeros((m + 1, width + 1))
    art_cols = []
    r = 0
    for i in range(m_ub):
        row, b = rows_ub[i], rhs_ub[i]
        sign = 1.0 if b >= 0 else -1.0
        T[r, :n] = sign * row
        T[r, n + i] = sign
        T[r, -1] = sign * b
        T[r, n + m_ub + r] = 1.0
        art_cols.append(n + m_ub + r)
        r += 1
    for i in range(m_eq):
        row, b = rows_eq[i], rhs_eq[i]
        sign = 1.0 if b >= 0 else -1.0
        T[r, :n] = sign * row
        T[r, -1] = sign * b
        T[r, n + m_ub + r] = 1.0
        art_cols.append(n + m_ub + r)
        r += 1

    cost = np.zeros(width)
    cost[:n] = c
    cost[n + m_ub:] = _BIG_M * max(1.0, float(np.abs(c).max()))
    basis = list(art_cols)
    T[m, :width] = cost
    for i, bv in enumerate(basis):
        T[m, :] -= cost[bv] * T[i, :]

    for _ in range(200000):
        enter = -1
        for j in range(width):  # Bland: first negative reduced cost
            if T[m, j] < -_EPS:
                enter = j
                break
        if enter < 0:
            break
        leave = -1
        best = np.inf
        for i in range(m):
            if T[i, enter] > _EPS:
                ratio = T[i, -1] / T[i, enter]
                if ratio < best - _EPS or (abs(ratio - best) <= _EPS and
                                           (leave < 0 or basis[i] < basis[leave])):
                    best = ratio
                    leave = i
        if leave < 0:
            return UNBOUNDED, None, None
        piv = T[leave, enter]
        T[leave, :] /= piv
        for i in range(m + 1):
            if i != leave and abs(T[i, enter]) > 0:
                T[i, :] -= T[i, enter] * T[leave, :]
        basis[leave] = enter
    else:
        raise RuntimeError("oracle simplex did not terminate")

    y = np.zeros(width)
    for i, bv in enumerate(basis):
        y[bv] = T[i, -1]
    if float(y[n + m_ub:].sum()) > 1e-5:
        return INFEASIBLE, None, None
    x = shift + y[:n]
    return OPTIMAL, x, float(c @ x)
