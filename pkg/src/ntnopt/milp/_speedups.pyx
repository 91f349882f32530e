# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython pivot kernels for the dense bounded-variable simplex.

Mirrors `_fallback.py`; the fused loops skip near-zero multipliers, which
matters on the sparse network-flow tableaus this package produces.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs

AT_BASIC = 0
AT_LOWER = 1
AT_UPPER = 2

ACCELERATED = True


def eliminate(double[:, ::1] T, Py_ssize_t r, Py_ssize_t q):
    """Rank-1 elimination after row r was normalized on pivot column q."""
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t n = T.shape[1]
    cdef Py_ssize_t i, j
    cdef double factor
    for i in range(m):
        if i == r:
            continue
        factor = T[i, q]
        if factor == 0.0:
            continue
        for j in range(n):
            T[i, j] -= factor * T[r, j]
    for i in range(m):
        T[i, q] = 0.0
    T[r, q] = 1.0


def choose_entering(double[::1] rc, signed char[::1] status, double[::1] u,
                    double tol, bint bland):
    """Entering column index under Dantzig or Bland pricing; -1 when optimal."""
    cdef Py_ssize_t n = rc.shape[0]
    cdef Py_ssize_t j, best = -1
    cdef double score, best_score = tol
    for j in range(n):
        if u[j] <= 0.0:
            continue
        if status[j] == 1 and rc[j] < -tol:
            score = -rc[j]
        elif status[j] == 2 and rc[j] > tol:
            score = rc[j]
        else:
            continue
        if bland:
            return j
        if score > best_score:
            best_score = score
            best = j
    return best


def ratio_test(double[::1] d, double[::1] values, double[::1] ub_basic,
               cnp.int64_t[::1] basis, double own_ub, double tol, bint bland):
    """Largest feasible step for basic values moving as `values - t * d`.

    Returns (t, blocking_row, leaves_to_upper); row -1 means the entering
    variable's own bound flips, row -2 means the direction is unbounded.
    """
    cdef Py_ssize_t m = d.shape[0]
    cdef Py_ssize_t i, row = -1
    cdef double w, limit, t_rows = INFINITY
    cdef bint upper, to_upper = False
    for i in range(m):
        w = d[i]
        if w > tol:
            limit = values[i] / w
            upper = False
        elif w < -tol and ub_basic[i] != INFINITY:
            limit = (ub_basic[i] - values[i]) / (-w)
            upper = True
        else:
            continue
        if limit < 0.0:
            limit = 0.0
        if limit < t_rows - 1e-12:
            t_rows = limit
            row = i
            to_upper = upper
        elif row >= 0 and limit <= t_rows + 1e-12:
            if limit < t_rows:
                t_rows = limit
            if bland:
                if basis[i] < basis[row]:
                    row = i
                    to_upper = upper
            elif fabs(w) > fabs(d[row]):
                row = i
                to_upper = upper
    if own_ub != INFINITY and own_ub <= t_rows:
        return own_ub, -1, False
    if row < 0:
        return INFINITY, -2, False
    return t_rows, row, to_upper
