"""Endpoint candidates for a target parameter's one-dimensional range.

Closed candidates are the target values at the stationary points of the
separated function restricted to the active constraints, found by the
niching swarm over every orientation branch and deduplicated by value.

Open candidates arise from singular configurations (a point-defined line
whose defining points coincide). Each squared-length factor is pinned to a
small threshold, the stationary analysis runs on the augmented system at
the threshold and at a quarter of it, and the two value sets extrapolate
linearly in the square root of the threshold toward zero. A cheap
feasibility probe prunes factors that conflict with active constraints.

Assembly injects the domain bounds (zero always, pi for angles, an
unbounded sentinel for lengths), sorts and deduplicates; on value
collisions the precedence is stationary > singular-limit > domain-bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import expr as ex
from .errors import RecursionLimit
from .lagrange import build_lagrange, build_merit
from .nichepso import SwarmConfig, solve as swarm_solve
from .separation import SeparatedFunction, _probe_feasible
from .settings import SolverSettings

__all__ = [
    "EndpointCandidate", "LAGRANGE", "SINGULAR", "DOMAIN",
    "closed_candidates", "open_candidates", "assemble_candidates",
]

LAGRANGE = "lagrange-stationary"
SINGULAR = "singular-limit"
DOMAIN = "domain-bound"

_RANK = {LAGRANGE: 0, SINGULAR: 1, DOMAIN: 2}

# multiplier box; slot coordinates use the system scale instead
_LAMBDA_BOUND = 100.0
# floors for the reduced swarm budget of augmented singular-limit runs
_AUG_PARTICLES = 200
_AUG_ITERATIONS = 100
_BOUNDARY_RTOL = 1e-9


@dataclass(frozen=True)
class EndpointCandidate:
    """One potential range endpoint with the configuration that attains it."""

    value: float
    closed: bool
    provenance: str
    witness: np.ndarray | None = None
    continuum: bool = False
    on_box_boundary: bool = False


def _swarm_config(sf: SeparatedFunction, n: int, settings: SolverSettings,
                  particles: int, iterations: int) -> SwarmConfig:
    lo = np.concatenate([np.full(sf.m, -sf.scale), np.full(n, -_LAMBDA_BOUND)])
    return SwarmConfig(
        search_lo=lo, search_hi=-lo, particle_count=particles,
        max_iterations=iterations, root_tolerance=settings.root_tolerance,
        seed=settings.seed)


def _freeze_witness(sf: SeparatedFunction, position: np.ndarray) -> tuple[np.ndarray, bool]:
    w = position[:sf.m].copy()
    boundary = bool(np.any(np.abs(w) >= sf.scale * (1.0 - _BOUNDARY_RTOL)))
    w.flags.writeable = False
    return w, boundary


def closed_candidates(sf: SeparatedFunction, settings: SolverSettings,
                      rng: np.random.Generator,
                      particles: int | None = None,
                      iterations: int | None = None) -> list[EndpointCandidate]:
    """Deduplicated target values at the constrained stationary points."""
    particles = particles or settings.particles
    iterations = iterations or settings.iterations
    roots = []
    for b in range(len(sf.branches)):
        ls = build_lagrange(sf, b)
        merit = build_merit(ls)
        cfg = _swarm_config(sf, ls.n, settings, particles, iterations)
        rs = swarm_solve(merit, cfg, rng=rng, f=sf.f, value_tolerance=settings.dedupe)
        roots.extend(rs.roots)
    if not roots:
        return []
    order = sorted(range(len(roots)), key=lambda i: roots[i].f_value)
    clusters: list[list[int]] = [[order[0]]]
    for i in order[1:]:
        if roots[i].f_value - roots[clusters[-1][-1]].f_value > settings.dedupe:
            clusters.append([])
        clusters[-1].append(i)
    out = []
    for cluster in clusters:
        rep = min(cluster, key=lambda i: (roots[i].fitness, i))
        witness, boundary = _freeze_witness(sf, roots[rep].position)
        out.append(EndpointCandidate(
            value=float(roots[rep].f_value), closed=True, provenance=LAGRANGE,
            witness=witness, continuum=any(roots[i].continuum for i in cluster),
            on_box_boundary=boundary))
    return out


def _augment(sf: SeparatedFunction, term: ex.Expr, delta: float) -> SeparatedFunction:
    # pin the relative residual: c/delta - 1 keeps the multiplier O(sqrt(delta))
    # and the merit valley steep, where c - delta would flatten both
    pinned = ex.simplify(ex.Sub(ex.Mul(term, ex.Const(1.0 / delta)), ex.Const(1.0)))
    return replace(sf, branches=[list(b) + [pinned] for b in sf.branches])


def _reduced_budget(settings: SolverSettings) -> tuple[int, int]:
    particles = min(settings.particles, max(_AUG_PARTICLES, settings.particles // 4))
    iterations = min(settings.iterations, max(_AUG_ITERATIONS, settings.iterations // 4))
    return particles, iterations


def _clamp_to_domain(value: float, kind: str, tol: float) -> float | None:
    upper = math.pi if kind == "angle" else math.inf
    if value < -10.0 * tol or value > upper + 10.0 * tol:
        return None
    return min(max(value, 0.0), upper)


def open_candidates(sf: SeparatedFunction, terms: list[ex.Expr],
                    settings: SolverSettings, rng: np.random.Generator,
                    depth: int = 1) -> list[EndpointCandidate]:
    """Open candidates from singular-configuration limits, one factor at a time."""
    if depth > 2:
        raise RecursionLimit("singular-configuration analysis nested deeper than 2")
    out: list[EndpointCandidate] = []
    particles, iterations = _reduced_budget(settings)
    for ti, term in enumerate(terms):
        rest = terms[:ti] + terms[ti + 1:]
        probe_sf = _augment(sf, term, settings.delta)
        feasible = [b for b in range(len(probe_sf.branches))
                    if _probe_feasible(probe_sf.constraints(b), sf.m, sf.scale)]
        if not feasible:
            continue
        per_level = []
        for delta in (settings.delta, settings.delta / 4.0):
            aug = _augment(sf, term, delta)
            aug = replace(aug, branches=[aug.branches[b] for b in feasible])
            cands = closed_candidates(aug, settings, rng, particles, iterations)
            if rest:
                cands = cands + open_candidates(aug, rest, settings, rng, depth + 1)
            per_level.append(cands)
        out.extend(_extrapolate(per_level[0], per_level[1], sf.kind, settings))
    return out


def _extrapolate(at_delta: list[EndpointCandidate], at_quarter: list[EndpointCandidate],
                 kind: str, settings: SolverSettings) -> list[EndpointCandidate]:
    """Pair values across the two thresholds and take the sqrt-linear limit."""
    window = max(1e3 * math.sqrt(settings.delta), 10.0 * settings.dedupe)
    used = [False] * len(at_delta)
    out = []
    for cand in at_quarter:
        gaps = [abs(c.value - cand.value) if not used[j] else math.inf
                for j, c in enumerate(at_delta)]
        value = cand.value
        if gaps and min(gaps) <= window:
            j = int(np.argmin(gaps))
            used[j] = True
            value = 2.0 * cand.value - at_delta[j].value
        value = _clamp_to_domain(value, kind, settings.dedupe)
        if value is None:
            continue
        out.append(replace(cand, value=value, closed=False, provenance=SINGULAR))
    for j, cand in enumerate(at_delta):
        if used[j]:
            continue
        value = _clamp_to_domain(cand.value, kind, settings.dedupe)
        if value is None:
            continue
        out.append(replace(cand, value=value, closed=False, provenance=SINGULAR))
    return out


def assemble_candidates(closed: list[EndpointCandidate], open_: list[EndpointCandidate],
                        kind: str, dedupe: float = 1e-4) -> list[EndpointCandidate]:
    """Candidates plus domain bounds, sorted, deduplicated by precedence."""
    pool = list(closed) + list(open_)
    pool.append(EndpointCandidate(value=0.0, closed=True, provenance=DOMAIN))
    if kind == "angle":
        pool.append(EndpointCandidate(value=math.pi, closed=False, provenance=DOMAIN))
    else:
        pool.append(EndpointCandidate(value=math.inf, closed=False, provenance=DOMAIN))
    upper = math.pi if kind == "angle" else math.inf
    pool = [c for c in pool if 0.0 <= c.value <= upper]
    pool.sort(key=lambda c: c.value)
    clusters: list[list[EndpointCandidate]] = [[pool[0]]]
    for cand in pool[1:]:
        last = clusters[-1][-1].value
        same = (cand.value - last <= dedupe) or (math.isinf(cand.value) and math.isinf(last))
        if same:
            clusters[-1].append(cand)
        else:
            clusters.append([cand])
    out = []
    for cluster in clusters:
        winner = min(cluster, key=lambda c: _RANK[c.provenance])
        bound = next((c for c in cluster if c.provenance == DOMAIN), None)
        if bound is not None and not bound.closed:
            # an open domain edge (pi for angles, the unbounded sentinel) is a
            # hard exclusion; near-edge stationary points are 0/0 artifacts of
            # the arccos/sqrt derivative blowing up there
            winner = bound
        elif bound is not None and winner.provenance != DOMAIN:
            winner = replace(winner, value=bound.value)
        out.append(winner)
    return out
