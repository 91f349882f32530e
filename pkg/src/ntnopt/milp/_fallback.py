"""Pure-numpy pivot kernels; same contracts as the Cython `_speedups` module."""
from __future__ import annotations

import numpy as np

AT_BASIC = 0
AT_LOWER = 1
AT_UPPER = 2

ACCELERATED = False


def eliminate(T: np.ndarray, r: int, q: int) -> None:
    """Rank-1 elimination after row r was normalized on pivot column q.

    Every other row i gets T[i,:] -= T[i,q] * T[r,:]; column q becomes the
    r-th unit vector.
    """
    col = T[:, q].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    T[:, q] = 0.0
    T[r, q] = 1.0


def choose_entering(
    rc: np.ndarray, status: np.ndarray, u: np.ndarray, tol: float, bland: bool
) -> int:
    """Entering column: Dantzig (largest violation) or Bland (lowest index).

    A column is eligible when nonbasic with room to move (u > 0) and its
    reduced cost favors moving: rc < -tol at the lower bound, rc > tol at
    the upper bound. Returns -1 when none qualifies.
    """
    movable = u > 0.0
    elig_low = (status == AT_LOWER) & movable & (rc < -tol)
    elig_up = (status == AT_UPPER) & movable & (rc > tol)
    eligible = elig_low | elig_up
    if not eligible.any():
        return -1
    if bland:
        return int(np.flatnonzero(eligible)[0])
    score = np.where(eligible, np.abs(rc), -1.0)
    return int(np.argmax(score))


def ratio_test(
    d: np.ndarray,
    values: np.ndarray,
    ub_basic: np.ndarray,
    basis: np.ndarray,
    own_ub: float,
    tol: float,
    bland: bool,
) -> tuple[float, int, bool]:
    """Largest step t >= 0 for basic values moving as `values - t * d`.

    Returns (t, blocking_row, leaves_to_upper); blocking_row is -1 when the
    entering variable's own bound is the tightest limit (bound flip) and -2
    when no limit exists (unbounded direction).
    """
    inf = np.inf
    down = d > tol
    up = (d < -tol) & np.isfinite(ub_basic)
    limits = np.full(d.shape[0], inf)
    limits[down] = values[down] / d[down]
    limits[up] = (ub_basic[up] - values[up]) / (-d[up])
    np.clip(limits, 0.0, None, out=limits)

    t_rows = limits.min() if limits.size else inf
    if np.isfinite(own_ub) and own_ub <= t_rows:
        return float(own_ub), -1, False
    if not np.isfinite(t_rows):
        return inf, -2, False

    ties = np.flatnonzero(limits <= t_rows + 1e-12)
    if bland:
        row = int(ties[np.argmin(basis[ties])])
    else:
        row = int(ties[np.argmax(np.abs(d[ties]))])
    return float(t_rows), row, bool(up[row])
