"""Expression engine tests.

The derivative oracle is a central finite difference with the classic
cube-root-of-machine-epsilon step, independent of the symbolic rules.
"""
from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prange.errors import DivisionByZero, DomainError, ParseError
from prange.expr import (
    Acos, Add, CompiledSystem, Const, Cos, Div, Mul, Neg, Pow, Sin, Sqrt, Sub,
    Var, compile_exprs, differentiate, evaluate, evaluate_clamped,
    parse_expression, referenced_names, simplify, substitute, variables,
)

FD_STEP = (2.0 * np.finfo(float).eps) ** (1.0 / 3.0)


def fd_partial(e, x, i):
    """Central finite difference oracle for d e / d x_i."""
    h = FD_STEP * max(1.0, abs(x[i]))
    hi = list(x)
    lo = list(x)
    hi[i] += h
    lo[i] -= h
    return (evaluate(e, hi) - evaluate(e, lo)) / (2.0 * h)


def random_smooth_tree(rng: random.Random, dim: int, depth: int):
    """Random tree that is defined and smooth on all of R^dim.

    sqrt arguments are offset squares, arccos arguments are squashed into
    (-0.9, 0.9), and denominators are bounded away from zero, so finite
    differences are valid at any sample point.
    """
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.65:
            return Var(rng.randrange(dim))
        return Const(round(rng.uniform(-4.0, 4.0), 3))
    kind = rng.choice(["add", "sub", "mul", "div", "neg", "pow", "sqrt", "cos", "sin", "acos"])
    a = random_smooth_tree(rng, dim, depth - 1)
    if kind == "add":
        return Add(a, random_smooth_tree(rng, dim, depth - 1))
    if kind == "sub":
        return Sub(a, random_smooth_tree(rng, dim, depth - 1))
    if kind == "mul":
        return Mul(a, random_smooth_tree(rng, dim, depth - 1))
    if kind == "div":
        b = random_smooth_tree(rng, dim, depth - 1)
        return Div(a, Add(Mul(b, b), Const(0.5)))
    if kind == "neg":
        return Neg(a)
    if kind == "pow":
        return Pow(a, rng.randrange(0, 4))
    if kind == "sqrt":
        return Sqrt(Add(Mul(a, a), Const(0.25)))
    if kind == "cos":
        return Cos(a)
    if kind == "sin":
        return Sin(a)
    squashed = Div(a, Add(Mul(a, a), Const(1.0)))
    return Acos(Mul(Const(1.8), squashed))


class TestEvaluate:
    def test_polynomial(self):
        x = Var(0)
        assert evaluate((x + 3) ** 2, [2.0]) == 25.0

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            evaluate(Div(Const(1.0), Var(0)), [0.0])

    def test_sqrt_domain(self):
        with pytest.raises(DomainError):
            evaluate(Sqrt(Const(-1.0)), [])

    def test_acos_domain(self):
        with pytest.raises(DomainError):
            evaluate(Acos(Const(1.5)), [])

    def test_clamped_tolerates_roundoff(self):
        assert evaluate_clamped(Sqrt(Const(-1e-12)), []) == 0.0
        assert evaluate_clamped(Acos(Const(1.0 + 1e-12)), []) == 0.0
        with pytest.raises(DomainError):
            evaluate_clamped(Sqrt(Const(-1e-3)), [])

    def test_pow_rejects_negative_exponent(self):
        with pytest.raises(ValueError):
            Pow(Var(0), -2)


class TestDifferentiate:
    def test_sqrt_at_four(self):
        d = differentiate(Sqrt(Var(0)), 0)
        assert evaluate(d, [4.0]) == pytest.approx(0.25, abs=1e-15)

    def test_arccos_at_zero(self):
        d = differentiate(Acos(Var(0)), 0)
        assert evaluate(d, [0.0]) == pytest.approx(-1.0, abs=1e-15)

    def test_cosine_chain(self):
        e = Cos(Mul(Const(2.0), Var(0)))
        d = differentiate(e, 0)
        assert evaluate(d, [0.3]) == pytest.approx(-2.0 * math.sin(0.6), rel=1e-14)

    def test_matches_finite_differences_on_200_random_trees(self):
        rng = random.Random(1234)
        dim = 3
        checked = 0
        for _ in range(200):
            e = random_smooth_tree(rng, dim, depth=4)
            x = [rng.uniform(-2.0, 2.0) for _ in range(dim)]
            for i in range(dim):
                sym = evaluate(differentiate(e, i), x)
                fd = fd_partial(e, x, i)
                scale = max(1.0, abs(sym), abs(fd))
                assert abs(sym - fd) <= 1e-6 * scale, (e, x, i, sym, fd)
                checked += 1
        assert checked == 600

    def test_derivative_of_constant_tree(self):
        e = Add(Const(2.0), Mul(Const(3.0), Const(4.0)))
        d = differentiate(e, 0)
        assert evaluate(d, [1.0]) == 0.0


class TestSimplify:
    def test_identity_elimination(self):
        x = Var(0)
        s = simplify(Mul(Add(x, Const(0.0)), Const(1.0)))
        assert isinstance(s, Var) and s.index == 0

    def test_preserves_eval_on_1000_points(self):
        rng = random.Random(99)
        dim = 3
        total = 0
        while total < 1000:
            e = random_smooth_tree(rng, dim, depth=4)
            s = simplify(e)
            for _ in range(5):
                x = [rng.uniform(-3.0, 3.0) for _ in range(dim)]
                a = evaluate(e, x)
                b = evaluate(s, x)
                assert abs(a - b) <= 1e-12 * max(1.0, abs(a), abs(b))
                total += 1

    def test_does_not_fold_out_of_domain_constants(self):
        e = simplify(Sqrt(Const(-4.0)))
        assert isinstance(e, Sqrt)
        e = simplify(Acos(Const(2.0)))
        assert isinstance(e, Acos)

    def test_pow_zero_is_one(self):
        assert evaluate(simplify(Pow(Var(0), 0)), [7.0]) == 1.0


class TestSubstituteAndVariables:
    def test_substitute(self):
        e = Add(Var(0), Mul(Var(1), Const(2.0)))
        s = substitute(e, {1: Sqrt(Var(2))})
        assert evaluate(s, [1.0, 0.0, 9.0]) == 7.0

    def test_variables(self):
        e = Add(Var(0), Mul(Var(3), Var(0)))
        assert variables(e) == {0, 3}


class TestParser:
    SYMS = {"d1": Var(0), "d2": Var(1), "d3": Var(2)}

    def test_algebraic_identity(self):
        e = parse_expression("d1^2 + d2^2 - 1", self.SYMS)
        assert evaluate(e, [3.0, 4.0, 0.0]) == 24.0

    def test_sqrt_and_decimal(self):
        e = parse_expression("sqrt(d1) - 0.5*d3", self.SYMS)
        assert evaluate(e, [16.0, 0.0, 4.0]) == 2.0

    def test_rejects_adjacent_operators(self):
        with pytest.raises(ParseError):
            parse_expression("d1 +* 2", self.SYMS)

    def test_rejects_unknown_identifier(self):
        with pytest.raises(ParseError):
            parse_expression("d1 + bogus", self.SYMS)

    def test_rejects_negative_exponent(self):
        with pytest.raises(ParseError):
            parse_expression("d1^-2", self.SYMS)

    def test_rejects_unknown_function(self):
        with pytest.raises(ParseError):
            parse_expression("sin(d1)", self.SYMS)

    def test_precedence(self):
        e = parse_expression("2 + 3 * d1^2", self.SYMS)
        assert evaluate(e, [4.0, 0.0, 0.0]) == 50.0

    def test_unary_minus(self):
        e = parse_expression("-d1^2", self.SYMS)
        assert evaluate(e, [3.0, 0.0, 0.0]) == -9.0

    def test_parentheses(self):
        e = parse_expression("(d1 + d2) / (d3 - 1)", self.SYMS)
        assert evaluate(e, [1.0, 5.0, 4.0]) == 2.0

    def test_empty_rejected(self):
        with pytest.raises(ParseError):
            parse_expression("   ", self.SYMS)

    def test_referenced_names(self):
        assert referenced_names("sqrt(d3) + d1*d3") == ["d3", "d1"]


class TestCompiledSystem:
    def test_matches_scalar_eval(self):
        rng = random.Random(5)
        dim = 4
        exprs = [random_smooth_tree(rng, dim, depth=4) for _ in range(6)]
        cs = compile_exprs(exprs, dim)
        pts = np.array([[rng.uniform(-2, 2) for _ in range(dim)] for _ in range(50)])
        out = cs.evaluate(pts)
        assert out.shape == (50, 6)
        for r in range(50):
            for k, e in enumerate(exprs):
                ref = evaluate(e, pts[r])
                assert abs(out[r, k] - ref) <= 1e-12 * max(1.0, abs(ref))

    def test_shares_common_subtrees(self):
        x = Var(0)
        shared = Mul(x, x)
        cs = CompiledSystem([Add(shared, Const(1.0)), Sub(shared, Const(1.0))], 1)
        muls = [1 for key, _, _ in cs.program if key[0] == "Mul"]
        assert len(muls) == 1

    def test_invalid_points_become_non_finite(self):
        cs = compile_exprs([Sqrt(Var(0)), Div(Const(1.0), Var(0))], 1)
        out = cs.evaluate(np.array([[-1.0], [0.0]]))
        assert np.isnan(out[0, 0])
        assert not np.isfinite(out[1, 1])

    def test_single_point_shape(self):
        cs = compile_exprs([Add(Var(0), Const(1.0))], 2)
        out = cs.evaluate(np.array([1.0, 0.0]))
        assert out.shape == (1,)
        assert out[0] == 2.0


@st.composite
def tree_strategy(draw, depth=3):
    if depth == 0:
        if draw(st.booleans()):
            return Var(draw(st.integers(0, 2)))
        return Const(draw(st.floats(-10, 10, allow_nan=False)))
    choice = draw(st.integers(0, 5))
    a = draw(tree_strategy(depth=depth - 1))
    if choice == 0:
        return Add(a, draw(tree_strategy(depth=depth - 1)))
    if choice == 1:
        return Sub(a, draw(tree_strategy(depth=depth - 1)))
    if choice == 2:
        return Mul(a, draw(tree_strategy(depth=depth - 1)))
    if choice == 3:
        return Neg(a)
    if choice == 4:
        return Pow(a, draw(st.integers(0, 3)))
    return Cos(a)


@settings(max_examples=100, deadline=None)
@given(e=tree_strategy(), xs=st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3))
def test_simplify_preserves_eval_property(e, xs):
    a = evaluate(e, xs)
    b = evaluate(simplify(e), xs)
    if math.isfinite(a) and math.isfinite(b):
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))
