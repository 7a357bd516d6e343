"""Separation of a target parameter into p = f(X) subject to G(X) = 0.

Given a partition of the declared parameters into one target, a fixed map
(parameters whose dimensional equations stay active at their values) and
the unassigned rest (whose equations are dropped), this produces the
target's value expression f over the entity slot vector together with the
active constraint residuals G.

Rigid-body motions would otherwise make every root a continuum, so gauge
anchors are added: the first declared point is pinned to the origin and,
when a second point exists, its y coordinate is pinned to zero. The
direction pin is kept only if a feasibility probe confirms it does not
conflict with the active constraints; translation pins are always safe
because every supported constraint is translation invariant.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import expr as ex
from .errors import SeparationError
from .lowdisc import faure_points, scale_to_box
from .model import ConstraintSystem
from .numeric import ResidualProblem

__all__ = ["SeparatedFunction", "separate", "system_scale"]

PROBE_STARTS = 16
PROBE_NFEV = 120
PROBE_TOL = 1e-10


def system_scale(fixed: Mapping[str, float]) -> float:
    """Coordinate scale: 10x the largest fixed magnitude, at least 100."""
    mags = [abs(v) for v in fixed.values()]
    return max(100.0, 10.0 * max(mags)) if mags else 100.0


@dataclass
class SeparatedFunction:
    """Target function and active constraints over the slot vector X."""

    target: str
    kind: str
    f: ex.Expr
    inner: ex.Expr | None
    branches: list[list[ex.Expr]]
    gauge: list[ex.Expr]
    slot_names: list[str]
    fixed: dict[str, float]
    scale: float

    @property
    def m(self) -> int:
        return len(self.slot_names)

    @property
    def n(self) -> int:
        return len(self.branches[0]) + len(self.gauge)

    def constraints(self, branch: int = 0) -> list[ex.Expr]:
        """G for one branch, gauge anchors included."""
        return list(self.branches[branch]) + list(self.gauge)


def _probe_feasible(residuals: Sequence[ex.Expr], m: int, scale: float) -> bool:
    problem = ResidualProblem(residuals, m)
    if problem.size == 0:
        return True
    lo = np.full(m, -scale)
    hi = np.full(m, scale)
    starts = scale_to_box(faure_points(PROBE_STARTS, m), lo, hi)
    for x0 in starts:
        _, ss, _ = problem.refine(x0, max_nfev=PROBE_NFEV)
        if ss < PROBE_TOL:
            return True
    return False


def gauge_anchors(system: ConstraintSystem, branches: list[list[ex.Expr]],
                  m: int, scale: float) -> list[ex.Expr]:
    """Rigid-motion anchors: first point to the origin, and the second
    point onto the x axis when that leaves the system solvable."""
    points = system.points_of()
    if not points:
        return []
    x1, y1 = system.point(points[0].id)
    anchors = [x1, y1]
    if len(points) > 1:
        y2 = system.point(points[1].id)[1]
        if _probe_feasible(branches[0] + anchors + [y2], m, scale):
            anchors.append(y2)
    return anchors


def separate(system: ConstraintSystem, target: str,
             fixed: Mapping[str, float], unassigned: Sequence[str],
             *, gauge: bool = True) -> SeparatedFunction:
    """Build the separated form for `target`.

    `fixed` maps parameter names to their pinned values; `unassigned`
    lists the remaining variable parameters whose equations are dropped.
    The three groups must exactly partition the declared parameters.
    """
    declared = set(system.parameter_names())
    fixed_keys = set(fixed)
    unassigned_set = set(unassigned)
    if target not in declared:
        raise SeparationError(f"unknown target parameter {target!r}")
    if target in fixed_keys or target in unassigned_set:
        raise SeparationError(f"target {target!r} overlaps fixed or unassigned names")
    if fixed_keys & unassigned_set:
        raise SeparationError(
            f"parameters both fixed and unassigned: {sorted(fixed_keys & unassigned_set)}")
    missing = declared - {target} - fixed_keys - unassigned_set
    extra = (fixed_keys | unassigned_set) - declared
    if missing or extra:
        raise SeparationError(
            f"partition must cover declared parameters exactly "
            f"(missing {sorted(missing)}, extra {sorted(extra)})")

    fixed_values = {k: float(v) for k, v in fixed.items()}
    branches = system.residual_variants(fixed_values)
    sides = system.line_side_conditions(target)
    if sides:
        if len(branches) * len(sides) > 8:
            raise SeparationError("too many line-orientation branches (max 8)")
        branches = [br + side for br in branches for side in sides]
    f = ex.simplify(system.target_function(target))
    inner = system.target_inner(target)
    if inner is not None:
        inner = ex.simplify(inner)

    m = system.slot_count
    scale = system_scale(fixed_values)
    anchors = gauge_anchors(system, branches, m, scale) if gauge else []

    sf = SeparatedFunction(
        target=target, kind=system.parameter(target).kind, f=f, inner=inner,
        branches=branches, gauge=anchors, slot_names=list(system.slot_names),
        fixed=fixed_values, scale=scale)
    if sf.n > sf.m:
        raise SeparationError(
            f"over-constrained for range computation: {sf.n} equations over "
            f"{sf.m} slots")
    return sf
