"""Damped least-squares refinement of residual systems.

Residual vectors and their analytic Jacobians are compiled once per
problem; refinement delegates to scipy's trust-region reflective solver,
which handles square, over- and under-determined systems uniformly.
Non-finite evaluations are replaced with large finite values so the
solver backs away from invalid regions instead of aborting.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from . import expr as ex

__all__ = ["ResidualProblem"]

_BIG = 1e8


class ResidualProblem:
    """A fixed system of residual expressions over `dim` variables."""

    def __init__(self, residual_exprs: Sequence[ex.Expr], dim: int):
        self.exprs = [ex.simplify(r) for r in residual_exprs]
        self.dim = dim
        self.size = len(self.exprs)
        self._tape = ex.compile_exprs(self.exprs, dim) if self.exprs else None
        partials = [ex.differentiate(r, j) for r in self.exprs for j in range(dim)]
        self._jtape = ex.compile_exprs(partials, dim) if partials else None

    def residual(self, x: np.ndarray) -> np.ndarray:
        if self._tape is None:
            return np.zeros(0)
        vals = np.atleast_1d(self._tape.evaluate(np.asarray(x, dtype=float)))
        return np.nan_to_num(vals, nan=_BIG, posinf=_BIG, neginf=-_BIG)

    def residual_batch(self, points: np.ndarray) -> np.ndarray:
        """Residual matrix for points of shape (N, dim); non-finite kept as is."""
        if self._tape is None:
            return np.zeros((len(points), 0))
        return self._tape.evaluate(points)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        vals = np.atleast_1d(self._jtape.evaluate(np.asarray(x, dtype=float)))
        out = vals.reshape(self.size, self.dim)
        return np.nan_to_num(out, nan=0.0, posinf=_BIG, neginf=-_BIG)

    def sumsq(self, x: np.ndarray) -> float:
        r = self.residual(x)
        return float(r @ r)

    def refine(self, x0: np.ndarray, max_nfev: int = 60) -> tuple[np.ndarray, float, int]:
        """Damped least-squares from x0; returns (solution, sum of squares, nfev).

        The returned point never has a larger sum of squares than x0.
        """
        x0 = np.asarray(x0, dtype=float)
        if self.size == 0:
            return x0, 0.0, 0
        result = least_squares(
            self.residual, x0, jac=self.jacobian, method="trf",
            ftol=1e-14, xtol=1e-14, gtol=1e-14, max_nfev=max_nfev)
        candidates = [(self.sumsq(result.x), result.x)]
        candidates.append((self.sumsq(x0), x0))
        best = min(candidates, key=lambda t: t[0])
        return best[1], best[0], int(result.nfev) + 2
