"""Refiner checks: analytic Jacobians against finite differences, known roots."""
import random

import numpy as np

from prange import expr as ex
from prange.numeric import ResidualProblem

from test_expr import fd_partial, random_smooth_tree

X, Y = ex.Var(0), ex.Var(1)


class TestResidual:
    def test_known_values(self):
        p = ResidualProblem([X - ex.Const(3.0)], 1)
        assert np.allclose(p.residual(np.array([5.0])), [2.0])
        assert p.sumsq(np.array([5.0])) == 4.0

    def test_invalid_point_becomes_large_finite(self):
        p = ResidualProblem([ex.Sqrt(X)], 1)
        r = p.residual(np.array([-1.0]))
        assert np.all(np.isfinite(r)) and abs(r[0]) >= 1e7

    def test_batch_keeps_nonfinite(self):
        p = ResidualProblem([ex.Sqrt(X)], 1)
        vals = p.residual_batch(np.array([[4.0], [-1.0]]))
        assert vals[0, 0] == 2.0
        assert not np.isfinite(vals[1, 0])

    def test_empty_system(self):
        p = ResidualProblem([], 3)
        x, ss, nfev = p.refine(np.array([1.0, 2.0, 3.0]))
        assert ss == 0.0 and nfev == 0


class TestJacobian:
    def test_matches_finite_differences(self):
        tree_rng = random.Random(11)
        rng = np.random.default_rng(11)
        for _ in range(20):
            dim = tree_rng.randrange(1, 4)
            exprs = [random_smooth_tree(tree_rng, dim, 3)
                     for _ in range(tree_rng.randrange(1, 4))]
            p = ResidualProblem(exprs, dim)
            x = rng.uniform(-2, 2, dim)
            jac = p.jacobian(x)
            for i, e in enumerate(p.exprs):
                for j in range(dim):
                    fd = fd_partial(e, x, j)
                    assert abs(jac[i, j] - fd) <= 1e-5 * max(1.0, abs(fd), abs(jac[i, j]))


class TestRefine:
    def test_converges_to_known_root(self):
        p = ResidualProblem([X * X - ex.Const(4.0), Y - X], 2)
        x, ss, nfev = p.refine(np.array([3.0, 0.0]))
        assert np.allclose(x, [2.0, 2.0], atol=1e-8)
        assert ss < 1e-16
        assert nfev >= 3

    def test_never_worse_than_start(self):
        eqs = [X * X + Y - ex.Const(11.0), X + Y * Y - ex.Const(7.0)]
        p = ResidualProblem(eqs, 2)
        rng = np.random.default_rng(5)
        for _ in range(20):
            x0 = rng.uniform(-6, 6, 2)
            _, ss, _ = p.refine(x0, max_nfev=8)
            assert ss <= p.sumsq(x0) + 1e-12
