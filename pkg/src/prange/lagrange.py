"""Stationary-point equations for a separated target function.

The conditional extrema of p = f(X) subject to G(X) = 0 are the roots of
the gradient of L(X, L) = f(X) + sum_i l_i g_i(X) together with the
constraints themselves: m partial derivatives over the slots followed by
the n residuals, an (m + n)-dimensional square system over (X, L).

The merit function is the sum of squared equations; its zeros are exactly
the roots of the equation system and it is what the swarm minimizes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import expr as ex
from .separation import SeparatedFunction

__all__ = ["LagrangeSystem", "MeritFunction", "build_lagrange", "build_merit"]


@dataclass
class LagrangeSystem:
    """Square equation system over slots followed by multipliers."""

    equations: list[ex.Expr]
    m: int
    n: int
    slot_names: list[str]

    @property
    def dim(self) -> int:
        return self.m + self.n


@dataclass
class MeritFunction:
    """Nonnegative scalar whose zeros are the roots of `equations`."""

    h: ex.Expr
    equations: list[ex.Expr]
    dim: int

    @classmethod
    def from_equations(cls, equations: Sequence[ex.Expr], dim: int) -> "MeritFunction":
        eqs = [ex.simplify(e) for e in equations]
        h: ex.Expr = ex.Const(0.0)
        for e in eqs:
            h = h + ex.Pow(e, 2)
        return cls(h=ex.simplify(h), equations=eqs, dim=dim)


def build_lagrange(sf: SeparatedFunction, branch: int = 0) -> LagrangeSystem:
    """Equations for the conditional extrema of one orientation branch."""
    constraints = sf.constraints(branch)
    m, n = sf.m, len(constraints)
    lagrangian: ex.Expr = sf.f
    for i, g in enumerate(constraints):
        lagrangian = lagrangian + ex.Var(m + i) * g
    equations = [ex.differentiate(lagrangian, j) for j in range(m)]
    equations.extend(ex.simplify(g) for g in constraints)
    return LagrangeSystem(equations=equations, m=m, n=n, slot_names=list(sf.slot_names))


def build_merit(ls: LagrangeSystem) -> MeritFunction:
    return MeritFunction.from_equations(ls.equations, ls.dim)
