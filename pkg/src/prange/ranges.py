"""Validated ranges for one target parameter.

The assembled endpoint candidates split the domain into trial segments.
Every segment gets interior feasibility probes and every finite endpoint
gets its own check; segments whose probes all succeed become intervals,
adjacent intervals merge across an endpoint that is both feasible and
closed-type, and endpoints that fail either test stay open. A feasible
closed-type endpoint whose neighbours are both invalid survives as a
degenerate one-point interval.

Feasibility of a single value is decided by damped least squares on the
active constraints plus a pin of the target at that value, restarted
from a low-discrepancy grid and from any witness configurations carried
by the candidates. Angles pin the cosine expression, lengths pin the
squared form, so the residuals stay smooth at zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .endpoints import (EndpointCandidate, assemble_candidates,
                        closed_candidates, open_candidates)
from .errors import SolveFailure
from .lowdisc import faure_points, scale_to_box
from .model import ConstraintSystem
from .numeric import ResidualProblem
from .separation import SeparatedFunction, gauge_anchors, separate, system_scale
from .settings import SolverSettings

__all__ = ["Interval", "ParameterRange", "check_feasible", "validate",
           "compute_range", "solve_system"]

FEAS_STARTS = 64
FEAS_NFEV = 200
SOLVE_NFEV = 400
# relative slack when testing membership against a closed bound
_MEMBER_RTOL = 1e-9


def _pin_expression(sf: SeparatedFunction, value: float) -> ex.Expr:
    if sf.kind == "angle":
        return ex.simplify(ex.Sub(sf.inner, ex.Const(math.cos(value))))
    if isinstance(sf.f, ex.Sqrt):
        # pin the radicand to value^2; smooth where the sqrt form kinks at 0
        return ex.simplify(ex.Sub(sf.f.a, ex.Const(value * value)))
    return ex.simplify(ex.Sub(sf.f, ex.Const(value)))


def check_feasible(sf: SeparatedFunction, value: float, settings: SolverSettings,
                   hints: tuple = (), starts: int = FEAS_STARTS,
                   ) -> tuple[bool, np.ndarray | None]:
    """Whether some configuration attains the value; returns a witness if so."""
    if not math.isfinite(value):
        return False, None
    pin = _pin_expression(sf, float(value))
    lo = np.full(sf.m, -sf.scale)
    x0s = [np.asarray(h, dtype=float) for h in hints if h is not None]
    x0s += list(scale_to_box(faure_points(starts, sf.m), lo, -lo))
    for b in range(len(sf.branches)):
        problem = ResidualProblem(sf.constraints(b) + [pin], sf.m)
        for x0 in x0s:
            x, ss, _ = problem.refine(x0, max_nfev=FEAS_NFEV)
            if ss <= settings.feas_tolerance:
                return True, x
    return False, None


@dataclass(frozen=True)
class Interval:
    """One maximal run of valid values; hi is None when unbounded above."""

    lo: float
    lo_closed: bool
    hi: float | None
    hi_closed: bool

    def contains(self, value: float) -> bool:
        slack = _MEMBER_RTOL * max(1.0, abs(self.lo))
        if self.lo_closed:
            if value < self.lo - slack:
                return False
        elif value <= self.lo:
            return False
        if self.hi is None:
            return True
        slack = _MEMBER_RTOL * max(1.0, abs(self.hi))
        if self.hi_closed:
            return value <= self.hi + slack
        return value < self.hi

    def to_report(self) -> dict:
        return {"lo": self.lo, "loClosed": self.lo_closed,
                "hi": self.hi, "hiClosed": self.hi_closed}


@dataclass
class ParameterRange:
    parameter: str
    kind: str
    intervals: list[Interval]
    seed: int
    provenance: dict

    def contains(self, value: float) -> bool:
        return any(iv.contains(value) for iv in self.intervals)

    def to_report(self) -> dict:
        return {"parameter": self.parameter,
                "intervals": [iv.to_report() for iv in self.intervals],
                "seed": self.seed,
                "provenance": self.provenance}


def _segment_probes(lo: float, hi: float, scale: float,
                    settings: SolverSettings) -> list[float]:
    if math.isinf(hi):
        base = settings.probe_factor * scale
        factors = (1.0, 2.0, 4.0, 8.0) if settings.paranoid else (1.0,)
        return [lo + base * k for k in factors]
    span = hi - lo
    fractions = (0.25, 0.5, 0.75) if settings.paranoid else (0.5,)
    return [lo + span * t for t in fractions]


def validate(sf: SeparatedFunction, candidates: list[EndpointCandidate],
             settings: SolverSettings) -> tuple[list[Interval], dict]:
    """Probe segments between candidates and assemble the valid intervals."""
    cands = list(candidates)
    feas = []
    for c in cands:
        hints = (c.witness,) if c.witness is not None else ()
        ok, _ = check_feasible(sf, c.value, settings, hints)
        feas.append(ok)
    eff = [c.closed and ok for c, ok in zip(cands, feas)]

    samples = []
    seg_valid = []
    for a, b in zip(cands, cands[1:]):
        oks = []
        for p in _segment_probes(a.value, b.value, sf.scale, settings):
            ok, _ = check_feasible(sf, p, settings)
            oks.append(ok)
            samples.append({"value": p, "feasible": ok})
        seg_valid.append(all(oks))

    intervals = _build_intervals(cands, eff, seg_valid)
    provenance = {
        "candidates": [{"value": None if math.isinf(c.value) else c.value,
                        "closed": c.closed,
                        "source": c.provenance, "continuum": c.continuum,
                        "onBoxBoundary": c.on_box_boundary} for c in cands],
        "endpointFeasible": feas,
        "samples": samples,
        "continuum": any(c.continuum for c in cands),
        "boxBoundary": any(c.on_box_boundary for c in cands),
    }
    return intervals, provenance


def _build_intervals(cands: list[EndpointCandidate], eff: list[bool],
                     seg_valid: list[bool]) -> list[Interval]:
    intervals = []
    nseg = len(seg_valid)
    start = None
    for s in range(nseg):
        if not seg_valid[s]:
            start = None
            continue
        if start is None:
            start = s
        if s + 1 < nseg and seg_valid[s + 1] and eff[s + 1]:
            continue
        hi = cands[s + 1].value
        intervals.append(Interval(
            lo=cands[start].value, lo_closed=eff[start],
            hi=None if math.isinf(hi) else hi, hi_closed=eff[s + 1]))
        start = None
    for i, c in enumerate(cands):
        left = seg_valid[i - 1] if i >= 1 else False
        right = seg_valid[i] if i < nseg else False
        if eff[i] and not left and not right:
            intervals.append(Interval(c.value, True, c.value, True))
    intervals.sort(key=lambda iv: (iv.lo, math.inf if iv.hi is None else iv.hi))
    return intervals


def compute_range(system: ConstraintSystem, target: str, fixed: dict,
                  unassigned: list, settings: SolverSettings) -> ParameterRange:
    """Full pipeline: separate, find endpoint candidates, validate segments."""
    sf = separate(system, target, fixed, unassigned)
    rng = np.random.default_rng(settings.seed)
    closed = closed_candidates(sf, settings, rng)
    terms = system.singularity_terms()
    if terms and closed:
        # stationarity is meaningless where a through-line degenerates; values
        # inside the pinning zone belong to the singular-limit analysis
        tprob = ResidualProblem(terms, sf.m)
        closed = [c for c in closed
                  if c.witness is None
                  or np.all(tprob.residual(c.witness) >= settings.delta)]
    open_ = open_candidates(sf, terms, settings, rng) if terms else []
    assembled = assemble_candidates(closed, open_, sf.kind, settings.dedupe)
    intervals, provenance = validate(sf, assembled, settings)
    provenance["settings"] = {
        "particles": settings.particles, "iterations": settings.iterations,
        "delta": settings.delta, "dedupe": settings.dedupe,
        "rootTolerance": settings.root_tolerance,
        "feasTolerance": settings.feas_tolerance,
        "probeFactor": settings.probe_factor, "paranoid": settings.paranoid,
    }
    return ParameterRange(parameter=target, kind=sf.kind, intervals=intervals,
                          seed=settings.seed, provenance=provenance)


def solve_system(system: ConstraintSystem, fixed: dict,
                 settings: SolverSettings) -> tuple[dict, float]:
    """Solve the fully assigned system; returns slot values and the residual."""
    fixed_values = {k: float(v) for k, v in fixed.items()}
    branches = system.residual_variants(fixed_values)
    m = system.slot_count
    scale = system_scale(fixed_values)
    anchors = gauge_anchors(system, branches, m, scale)
    lo = np.full(m, -scale)
    starts = scale_to_box(faure_points(FEAS_STARTS, m), lo, -lo)
    best = math.inf
    for branch in branches:
        problem = ResidualProblem(list(branch) + anchors, m)
        for x0 in starts:
            x, ss, _ = problem.refine(x0, max_nfev=SOLVE_NFEV)
            if ss <= settings.feas_tolerance:
                return dict(zip(system.slot_names, (float(v) for v in x))), float(ss)
            best = min(best, ss)
    raise SolveFailure(
        f"no configuration satisfies all constraints (best residual {best:.3e})",
        best_residual=best)
