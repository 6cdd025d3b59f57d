import numpy as np
import pytest

from icfmdp import Infeasible, LpProblem, Unbounded, lp_solve


def test_single_variable_max():
    p = LpProblem(c=np.array([1.0]), a_ub=np.array([[1.0]]), b_ub=np.array([0.7]),
                  sense="max")
    value, x = lp_solve(p)
    assert value == pytest.approx(0.7, abs=1e-9)
    assert x[0] == pytest.approx(0.7, abs=1e-9)


def test_transportation_corner():
    # 2x2 transportation polytope with row marginals (0.4, 0.6), column (0.5, 0.5).
    # Vertex enumeration of q00: it ranges over [max(0, 0.4 + 0.5 - 1), min(0.4, 0.5)].
    r, c = np.array([0.4, 0.6]), np.array([0.5, 0.5])
    lo_expected = max(0.0, r[0] + c[0] - 1.0)
    hi_expected = min(r[0], c[0])
    a_eq = np.array([
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0],
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
    ])
    b_eq = np.concatenate([r, c])
    obj = np.array([1.0, 0.0, 0.0, 0.0])
    lo, _ = lp_solve(LpProblem(c=obj, a_eq=a_eq, b_eq=b_eq))
    hi, _ = lp_solve(LpProblem(c=obj, a_eq=a_eq, b_eq=b_eq, sense="max"))
    assert lo == pytest.approx(lo_expected, abs=1e-9)
    assert lo == pytest.approx(0.0, abs=1e-9)
    assert hi == pytest.approx(hi_expected, abs=1e-9)


def test_infeasible():
    p = LpProblem(c=np.array([1.0]),
                  a_ub=np.array([[1.0], [-1.0]]), b_ub=np.array([0.2, -0.5]))
    with pytest.raises(Infeasible):
        lp_solve(p)


def test_unbounded():
    p = LpProblem(c=np.array([1.0]), sense="max")
    with pytest.raises(Unbounded):
        lp_solve(p)


def test_solution_satisfies_constraints(rng):
    n = 6
    a_eq = rng.random((2, n))
    x_feasible = rng.random(n)
    b_eq = a_eq @ x_feasible
    c = rng.normal(size=n)
    value, x = lp_solve(LpProblem(c=c, a_eq=a_eq, b_eq=b_eq, upper=np.full(n, 2.0)))
    assert np.abs(a_eq @ x - b_eq).max() < 1e-9
    assert np.all(x >= -1e-9) and np.all(x <= 2.0 + 1e-9)
    assert value == pytest.approx(c @ x, abs=1e-9)
