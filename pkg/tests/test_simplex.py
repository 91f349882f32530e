import numpy as np
import pytest

from ntnopt.milp.kernels import ACCELERATED
from ntnopt.milp.lp import LpProblem, LpStatus, SimplexCycleError, lp_solve, pick_backend
from ntnopt.milp.simplex import solve_dense

from oracle_simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_oracle


def random_feasible_lp(rng):
    n = int(rng.integers(2, 9))
    me = int(rng.integers(0, 3))
    mu = int(rng.integers(0, 5))
    c = rng.normal(size=n)
    A_eq = rng.normal(size=(me, n)) if me else None
    A_ub = rng.normal(size=(mu, n)) if mu else None
    lb = rng.uniform(-2, 0, size=n)
    ub = lb + rng.uniform(0.5, 4, size=n)
    x0 = rng.uniform(lb, ub)  # an interior point guarantees feasibility
    b_eq = A_eq @ x0 if me else None
    b_ub = A_ub @ x0 + rng.uniform(0, 1, size=mu) if mu else None
    return LpProblem(c, A_eq, b_eq, A_ub, b_ub, lb, ub)


class TestAgainstOracle:
    def test_random_lps_match_independent_tableau(self):
        # Dual-route check: production bounded simplex vs the test-suite's
        # standalone Big-M tableau implementation.
        rng = np.random.default_rng(202)
        for _ in range(120):
            p = random_feasible_lp(rng)
            mine = solve_dense(p)
            status, x, obj = solve_oracle(p.c, p.A_eq, p.b_eq, p.A_ub, p.b_ub, p.lb, p.ub)
            assert mine.status is LpStatus.OPTIMAL
            assert status == OPTIMAL
            assert mine.objective == pytest.approx(obj, abs=1e-6)

    def test_status_agreement_on_unrestricted_instances(self):
        rng = np.random.default_rng(77)
        statuses = set()
        for _ in range(120):
            n = int(rng.integers(2, 6))
            mu = int(rng.integers(1, 4))
            c = rng.normal(size=n)
            A_ub = rng.normal(size=(mu, n))
            b_ub = rng.normal(size=mu)
            lb = np.zeros(n)
            ub = np.where(rng.random(n) < 0.4, np.inf, rng.uniform(0.5, 3, size=n))
            mine = solve_dense(LpProblem(c, None, None, A_ub, b_ub, lb, ub))
            status, _, obj = solve_oracle(c, None, None, A_ub, b_ub, lb, ub)
            statuses.add(mine.status)
            assert mine.status.value == status
            if status == OPTIMAL:
                assert mine.objective == pytest.approx(obj, abs=1e-6)
        assert statuses >= {LpStatus.OPTIMAL, LpStatus.INFEASIBLE}


class TestEdgeCases:
    def test_single_capacity_bound(self):
        # Maximize throughput on one capacitated variable.
        res = solve_dense(
            LpProblem(np.array([-1.0]), None, None, np.array([[1.0]]),
                      np.array([10.0]), np.zeros(1), np.array([np.inf]))
        )
        assert res.status is LpStatus.OPTIMAL
        assert res.x[0] == pytest.approx(10.0)

    def test_trivially_infeasible_row(self):
        res = solve_dense(
            LpProblem(np.array([1.0]), None, None, np.array([[0.0]]),
                      np.array([-1.0]), np.zeros(1), np.array([np.inf]))
        )
        assert res.status is LpStatus.INFEASIBLE

    def test_unbounded(self):
        res = solve_dense(
            LpProblem(np.array([-1.0]), None, None, None, None,
                      np.zeros(1), np.array([np.inf]))
        )
        assert res.status is LpStatus.UNBOUNDED

    def test_upper_bound_extraction(self):
        # Minimizing -x with x <= 3 leaves x nonbasic at its upper bound.
        res = solve_dense(
            LpProblem(np.array([-1.0, 0.0]), None, None,
                      np.array([[1.0, 1.0]]), np.array([5.0]),
                      np.zeros(2), np.array([3.0, np.inf]))
        )
        assert res.x[0] == pytest.approx(3.0)

    def test_crossed_bounds_infeasible(self):
        res = solve_dense(
            LpProblem(np.array([1.0]), None, None, None, None,
                      np.array([2.0]), np.array([1.0]))
        )
        assert res.status is LpStatus.INFEASIBLE

    def test_fixed_variables(self):
        res = solve_dense(
            LpProblem(np.array([1.0, 1.0]), np.array([[1.0, 1.0]]),
                      np.array([3.0]), None, None,
                      np.array([1.0, 0.0]), np.array([1.0, np.inf]))
        )
        assert res.status is LpStatus.OPTIMAL
        assert res.x[0] == pytest.approx(1.0)
        assert res.x[1] == pytest.approx(2.0)

    def test_determinism(self):
        rng = np.random.default_rng(5)
        p = random_feasible_lp(rng)
        a = solve_dense(p)
        b = solve_dense(p)
        assert np.array_equal(a.x, b.x)
        assert a.iterations == b.iterations

    def test_cycling_guard_raises(self):
        rng = np.random.default_rng(6)
        p = random_feasible_lp(rng)
        with pytest.raises(SimplexCycleError):
            solve_dense(p, max_iters=1)


class TestDispatch:
    def test_auto_picks_dense_for_small(self):
        p = LpProblem(np.zeros(3), None, None, np.zeros((2, 3)), np.zeros(2),
                      np.zeros(3), np.full(3, np.inf))
        assert pick_backend(p, "auto") == "dense"

    def test_auto_picks_highs_for_large(self):
        n = 5000
        p = LpProblem(np.zeros(n), None, None, None, None, np.zeros(n), np.full(n, np.inf))
        assert pick_backend(p, "auto") == "highs"

    def test_unknown_backend(self):
        p = LpProblem(np.zeros(1), None, None, None, None, np.zeros(1), np.ones(1))
        with pytest.raises(ValueError):
            pick_backend(p, "sparse")

    def test_backends_agree(self):
        rng = np.random.default_rng(321)
        for _ in range(25):
            p = random_feasible_lp(rng)
            dense = lp_solve(p, backend="dense")
            highs = lp_solve(p, backend="highs")
            assert dense.status is highs.status is LpStatus.OPTIMAL
            assert dense.objective == pytest.approx(highs.objective, abs=1e-6)

    def test_kernel_flag_is_boolean(self):
        assert isinstance(ACCELERATED, bool)
