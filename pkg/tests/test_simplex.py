import numpy as np
import pytest

from layerbounds import simplex
from layerbounds.exceptions import LPError

scipy_optimize = pytest.importorskip("scipy.optimize")


def test_small_known_problem():
    # max x + y  s.t.  x + 2y <= 4, 3x + y <= 6
    res = simplex.linprog([1, 1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6], maximize=True)
    assert res.success
    assert res.fun == pytest.approx(2.8)
    np.testing.assert_allclose(res.x, [1.6, 1.2])


def test_infeasible_reports_residual():
    res = simplex.linprog([0, 0], A_eq=[[1, 1]], b_eq=[1], A_ub=[[1, 1]], b_ub=[0.5])
    assert res.status == "infeasible"
    assert res.infeasibility == pytest.approx(0.5)
    with pytest.raises(LPError):
        res.raise_for_status()


def test_unbounded():
    res = simplex.linprog([-1, 0], A_eq=[[0, 1]], b_eq=[1])
    assert res.status == "unbounded"


def test_redundant_equalities():
    A = [[1, 1, 0], [0, 1, 1], [1, 2, 1]]
    res = simplex.linprog([1, 0, 1], A_eq=A, b_eq=[1, 1, 2])
    assert res.success
    assert res.fun == pytest.approx(0.0)


def test_deterministic_path():
    rng = np.random.default_rng(3)
    A = rng.random((4, 8))
    b = A @ rng.random(8)
    c = rng.normal(size=8)
    a, b2 = simplex.linprog(c, A, b), simplex.linprog(c, A, b)
    assert a.nit == b2.nit
    np.testing.assert_array_equal(a.x, b2.x)


def test_matches_reference_solver_on_random_programs():
    rng = np.random.default_rng(1)
    for i in range(300):
        n = int(rng.integers(2, 12))
        me, mu = int(rng.integers(0, 5)), int(rng.integers(0, 6))
        A = rng.integers(-3, 4, (me, n)).astype(float)
        x0 = rng.random(n) * (rng.random(n) < 0.6)
        b = A @ x0
        if i % 3 == 0 and me > 1:
            A[-1], b[-1] = A[0] + A[1], b[0] + b[1]
        G = np.vstack([rng.normal(size=(mu, n)), np.eye(n)])
        h = np.concatenate([G[:mu] @ x0 + rng.random(mu), 1 + x0])
        c = rng.normal(size=n)
        ours = simplex.linprog(c, A, b, G, h)
        ref = scipy_optimize.linprog(c, A_eq=A if me else None, b_eq=b if me else None, A_ub=G, b_ub=h)
        assert ours.success and ref.status == 0
        assert ours.fun == pytest.approx(ref.fun, abs=1e-8)
