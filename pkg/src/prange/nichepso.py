"""Niching particle swarm search for all zero-level minima of a merit function.

A main swarm of Faure-distributed particles moves by cognition-only updates;
particles whose personal-best fitness stagnates split off into pair subswarms
that run full updates with a guaranteed-convergence perturbation on each
subswarm's best particle. Subswarms that come closer than the sum of their
radii merge (at most one merge per swarm per sweep, closest pairs first), and
main-swarm particles that wander inside a subswarm radius are absorbed.

Every subswarm best position the run ever produced, including those retired
by merging, is polished by damped least squares on the underlying equations
before the root tolerance is applied, so consolidation of swarms cannot lose
a basin that was once discovered.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from . import expr as ex
from .errors import ConfigError
from .lagrange import MeritFunction
from .lowdisc import faure_points, scale_to_box
from .numeric import ResidualProblem

__all__ = [
    "SwarmConfig", "SwarmState", "Root", "RootSet",
    "initialize", "step_main", "step_subswarms", "identify_niches",
    "merge_and_absorb", "solve",
]

# guaranteed-convergence success/failure streak lengths
_GC_SUCCESS = 15
_GC_FAILURE = 5
# slack so that exactly-coincident bests always merge
_MERGE_EPS = 1e-12
# root positions closer than this fraction of the box span are duplicates
_DEDUPE_SCALE = 1e-4
# velocity / perturbation size (relative to box span) treated as converged
_EXIT_SCALE = 1e-6


@dataclass
class SwarmConfig:
    """Tunable knobs of the swarm; search box is per-dimension [lo, hi]."""

    search_lo: np.ndarray
    search_hi: np.ndarray
    particle_count: int = 2000
    max_iterations: int = 500
    c1: float = 1.4944
    c2: float = 1.4944
    inertia: float = 0.7290
    niche_window: int = 3
    niche_std_threshold: float = 1e-6
    merge_factor: float = 1.0
    absorb_factor: float = 1.0
    root_tolerance: float = 1e-8
    polish_iterations: int = 50
    seed: int = 0

    def __post_init__(self):
        self.search_lo = np.atleast_1d(np.asarray(self.search_lo, dtype=float))
        self.search_hi = np.atleast_1d(np.asarray(self.search_hi, dtype=float))
        if self.search_lo.ndim != 1 or self.search_lo.shape != self.search_hi.shape:
            raise ConfigError("search box must be two equal-length vectors")
        if self.search_lo.size < 1:
            raise ConfigError("search box must have at least one dimension")
        if not (np.all(np.isfinite(self.search_lo)) and np.all(np.isfinite(self.search_hi))):
            raise ConfigError("search box must be finite")
        if np.any(self.search_hi < self.search_lo):
            raise ConfigError("search box upper bounds must not be below lower bounds")
        if self.particle_count < 1:
            raise ConfigError("particle_count must be >= 1")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigError("acceleration coefficients must be >= 0")
        if not 0.0 <= self.inertia < 1.0:
            raise ConfigError("inertia must lie in [0, 1)")
        if self.niche_window < 1:
            raise ConfigError("niche_window must be >= 1")
        for name in ("niche_std_threshold", "merge_factor", "absorb_factor",
                     "root_tolerance"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        if self.polish_iterations < 1:
            raise ConfigError("polish_iterations must be >= 1")

    @property
    def dim(self) -> int:
        return self.search_lo.size

    @property
    def budget(self) -> int:
        return 2 * self.particle_count * self.max_iterations

    @property
    def span(self) -> float:
        return max(1.0, float(np.max(self.search_hi - self.search_lo)))


@dataclass
class SwarmState:
    """Mutable particle pools; group -1 is the main swarm, k >= 0 a subswarm."""

    pos: np.ndarray
    vel: np.ndarray
    fit: np.ndarray
    pbest: np.ndarray
    pbest_fit: np.ndarray
    group: np.ndarray
    hist: deque
    g_pos: np.ndarray
    g_fit: np.ndarray
    g_best_idx: np.ndarray
    rho: np.ndarray
    succ: np.ndarray
    fail: np.ndarray
    archive_pos: list = field(default_factory=list)
    archive_fit: list = field(default_factory=list)
    evaluations: int = 0
    iteration: int = 0
    spawned_total: int = 0

    @property
    def subswarm_count(self) -> int:
        return int(self.g_fit.size)

    def main_indices(self) -> np.ndarray:
        return np.flatnonzero(self.group < 0)

    def sub_indices(self) -> np.ndarray:
        return np.flatnonzero(self.group >= 0)


@dataclass(frozen=True)
class Root:
    position: np.ndarray
    fitness: float
    f_value: float | None = None
    continuum: bool = False


@dataclass(frozen=True)
class RootSet:
    roots: tuple[Root, ...]
    evaluations: int
    iterations: int
    subswarms_spawned: int
    subswarms_final: int

    def __len__(self) -> int:
        return len(self.roots)

    def positions(self) -> np.ndarray:
        if not self.roots:
            return np.zeros((0, 0))
        return np.stack([r.position for r in self.roots])


def _batch_merit(equations: list[ex.Expr], dim: int):
    tape = ex.compile_exprs(equations, dim)

    def h(points: np.ndarray) -> np.ndarray:
        vals = tape.evaluate(np.atleast_2d(points))
        with np.errstate(all="ignore"):
            out = np.einsum("nk,nk->n", vals, vals)
        return np.where(np.isfinite(out), out, np.inf)

    return h


def initialize(cfg: SwarmConfig, dim: int, h, rng: np.random.Generator) -> SwarmState:
    """Faure-distributed positions in the search box, zero velocities."""
    if dim != cfg.dim:
        raise ConfigError(f"search box has {cfg.dim} dimensions, problem has {dim}")
    pos = scale_to_box(faure_points(cfg.particle_count, dim), cfg.search_lo, cfg.search_hi)
    fit = h(pos)
    vel = np.zeros_like(pos)
    return SwarmState(
        pos=pos, vel=vel, fit=fit.copy(), pbest=pos.copy(), pbest_fit=fit.copy(),
        group=np.full(cfg.particle_count, -1, dtype=np.int64),
        hist=deque(maxlen=cfg.niche_window),
        g_pos=np.zeros((0, dim)), g_fit=np.zeros(0),
        g_best_idx=np.zeros(0, dtype=np.int64), rho=np.zeros(0),
        succ=np.zeros(0, dtype=np.int64), fail=np.zeros(0, dtype=np.int64),
        evaluations=int(fit.size),
    )


def _evaluate_moved(state: SwarmState, idx: np.ndarray, old_pos: np.ndarray, h) -> None:
    """Re-evaluate only particles whose position changed; update their pbest."""
    if idx.size == 0:
        return
    moved = np.any(state.pos[idx] != old_pos, axis=1)
    mi = idx[moved]
    if mi.size == 0:
        return
    state.fit[mi] = h(state.pos[mi])
    state.evaluations += int(mi.size)
    better = state.fit[mi] < state.pbest_fit[mi]
    bi = mi[better]
    state.pbest[bi] = state.pos[bi]
    state.pbest_fit[bi] = state.fit[bi]


def step_main(state: SwarmState, h, cfg: SwarmConfig, rng: np.random.Generator) -> None:
    """Cognition-only update of main-swarm particles; records a pbest snapshot."""
    mi = state.main_indices()
    if mi.size:
        phi = rng.random((mi.size, cfg.dim))
        state.vel[mi] = (cfg.inertia * state.vel[mi]
                         + cfg.c1 * phi * (state.pbest[mi] - state.pos[mi]))
        old = state.pos[mi].copy()
        state.pos[mi] = np.clip(old + state.vel[mi], cfg.search_lo, cfg.search_hi)
        _evaluate_moved(state, mi, old, h)
    state.hist.append(state.pbest_fit.copy())


def _refresh_gbests(state: SwarmState, members: np.ndarray) -> np.ndarray:
    """Pull improved member pbests into their subswarm bests; returns improved mask."""
    k = state.subswarm_count
    improved = np.zeros(k, dtype=bool)
    if members.size == 0 or k == 0:
        return improved
    g = state.group[members]
    seg = np.full(k, np.inf)
    np.minimum.at(seg, g, state.pbest_fit[members])
    improved = seg < state.g_fit
    if improved.any():
        # lowest particle index among those achieving the segment minimum wins
        rev = members[::-1]
        grev = state.group[rev]
        take = improved[grev] & (state.pbest_fit[rev] <= seg[grev])
        sel = rev[take]
        state.g_best_idx[state.group[sel]] = sel
        idx = np.flatnonzero(improved)
        state.g_fit[idx] = seg[idx]
        state.g_pos[idx] = state.pbest[state.g_best_idx[idx]]
    return improved


def step_subswarms(state: SwarmState, h, cfg: SwarmConfig, rng: np.random.Generator) -> None:
    """Full update for subswarm particles, perturbation step for each best."""
    si = state.sub_indices()
    if si.size == 0:
        return
    g = state.group[si]
    bi = state.g_best_idx
    old_best_pos = state.pos[bi].copy()
    old_best_vel = state.vel[bi].copy()
    phi1 = rng.random((si.size, cfg.dim))
    phi2 = rng.random((si.size, cfg.dim))
    state.vel[si] = (cfg.inertia * state.vel[si]
                     + cfg.c1 * phi1 * (state.pbest[si] - state.pos[si])
                     + cfg.c2 * phi2 * (state.g_pos[g] - state.pos[si]))
    old = state.pos[si].copy()
    state.pos[si] = np.clip(old + state.vel[si], cfg.search_lo, cfg.search_hi)
    # best particles sample around the swarm best instead of following it
    phi = rng.random((bi.size, cfg.dim))
    sampled = state.g_pos + cfg.inertia * old_best_vel + state.rho[:, None] * (1.0 - 2.0 * phi)
    state.pos[bi] = np.clip(sampled, cfg.search_lo, cfg.search_hi)
    state.vel[bi] = state.pos[bi] - old_best_pos
    _evaluate_moved(state, si, old, h)
    improved = _refresh_gbests(state, si)
    state.succ[improved] += 1
    state.fail[improved] = 0
    state.fail[~improved] += 1
    state.succ[~improved] = 0
    state.rho[state.succ > _GC_SUCCESS] *= 2.0
    state.rho[state.fail > _GC_FAILURE] *= 0.5
    np.clip(state.rho, 0.0, cfg.span, out=state.rho)


def identify_niches(state: SwarmState, cfg: SwarmConfig) -> int:
    """Spawn pair subswarms from stagnated main particles; returns spawn count."""
    if len(state.hist) < cfg.niche_window:
        return 0
    mi = state.main_indices()
    if mi.size < 2:
        return 0
    snaps = np.stack(list(state.hist))[:, mi]
    with np.errstate(invalid="ignore", over="ignore"):
        # inf fitness histories yield nan std, which correctly reads as not stagnant
        stagnant = snaps.std(axis=0) < cfg.niche_std_threshold
    if not stagnant.any():
        return 0
    dmat = cdist(state.pos[mi], state.pos[mi])
    np.fill_diagonal(dmat, np.inf)
    available = np.ones(mi.size, dtype=bool)
    new_pos, new_fit, new_idx = [], [], []
    next_id = state.subswarm_count
    for r in range(mi.size):
        if not (available[r] and stagnant[r]):
            continue
        row = np.where(available, dmat[r], np.inf)
        j = int(np.argmin(row))
        if not np.isfinite(row[j]):
            continue
        a, b = int(mi[r]), int(mi[j])
        winner = a if state.pbest_fit[a] <= state.pbest_fit[b] else b
        state.group[a] = state.group[b] = next_id
        new_pos.append(state.pbest[winner].copy())
        new_fit.append(state.pbest_fit[winner])
        new_idx.append(winner)
        available[r] = available[j] = False
        dmat[:, r] = dmat[:, j] = np.inf
        next_id += 1
    spawned = len(new_idx)
    if spawned:
        state.g_pos = np.concatenate([state.g_pos, np.stack(new_pos)])
        state.g_fit = np.concatenate([state.g_fit, np.array(new_fit)])
        state.g_best_idx = np.concatenate([state.g_best_idx, np.array(new_idx, dtype=np.int64)])
        state.rho = np.concatenate([state.rho, np.ones(spawned)])
        state.succ = np.concatenate([state.succ, np.zeros(spawned, dtype=np.int64)])
        state.fail = np.concatenate([state.fail, np.zeros(spawned, dtype=np.int64)])
        state.spawned_total += spawned
    return spawned


def _radii(state: SwarmState) -> np.ndarray:
    k = state.subswarm_count
    radii = np.zeros(k)
    si = state.sub_indices()
    if k and si.size:
        d = np.linalg.norm(state.pos[si] - state.g_pos[state.group[si]], axis=1)
        np.maximum.at(radii, state.group[si], d)
    return radii


def merge_and_absorb(state: SwarmState, cfg: SwarmConfig) -> tuple[int, int]:
    """One closest-pairs merge sweep, then absorb mains inside subswarm radii."""
    merges = 0
    k = state.subswarm_count
    if k > 1:
        radii = _radii(state)
        dist = cdist(state.g_pos, state.g_pos)
        limit = cfg.merge_factor * (radii[:, None] + radii[None, :]) + _MERGE_EPS
        a_idx, b_idx = np.nonzero(np.triu(dist <= limit, 1))
        if a_idx.size:
            order = np.lexsort((b_idx, a_idx, dist[a_idx, b_idx]))
            used = np.zeros(k, dtype=bool)
            mapping = np.arange(k)
            keep = np.ones(k, dtype=bool)
            for t in order:
                a, b = int(a_idx[t]), int(b_idx[t])
                if used[a] or used[b]:
                    continue
                used[a] = used[b] = True
                winner, loser = (a, b) if state.g_fit[a] <= state.g_fit[b] else (b, a)
                state.archive_pos.append(state.g_pos[loser].copy())
                state.archive_fit.append(float(state.g_fit[loser]))
                mapping[loser] = winner
                keep[loser] = False
                merges += 1
            if merges:
                sub = state.group >= 0
                state.group[sub] = mapping[state.group[sub]]
                new_id = np.full(k, -1, dtype=np.int64)
                new_id[keep] = np.arange(int(keep.sum()))
                state.group[sub] = new_id[state.group[sub]]
                state.g_pos = state.g_pos[keep]
                state.g_fit = state.g_fit[keep]
                state.g_best_idx = state.g_best_idx[keep]
                state.rho = state.rho[keep]
                state.succ = state.succ[keep]
                state.fail = state.fail[keep]
    absorbed = 0
    mi = state.main_indices()
    if mi.size and state.subswarm_count:
        radii = _radii(state)
        dist = cdist(state.pos[mi], state.g_pos)
        dist[dist > cfg.absorb_factor * radii[None, :]] = np.inf
        target = np.argmin(dist, axis=1)
        hit = np.isfinite(dist[np.arange(mi.size), target])
        taken = mi[hit]
        state.group[taken] = target[hit]
        absorbed = int(taken.size)
        _refresh_gbests(state, taken)
    return merges, absorbed


def _converged(state: SwarmState, cfg: SwarmConfig) -> bool:
    # stop only once every swarm sits on a root-grade point and its
    # perturbation radius has decayed; the polish pass supersedes any
    # float-noise improvements still trickling in
    if len(state.hist) < cfg.niche_window or state.subswarm_count == 0:
        return False
    if np.any(state.g_fit > cfg.root_tolerance):
        return False
    return bool(np.all(state.rho <= _EXIT_SCALE * cfg.span))


def _dedupe(positions: list[np.ndarray], fits: list[float], radius: float):
    kept_pos: list[np.ndarray] = []
    kept_fit: list[float] = []
    order = np.argsort(np.asarray(fits), kind="stable")
    for i in order:
        p = positions[i]
        if kept_pos:
            gaps = np.linalg.norm(np.stack(kept_pos) - p, axis=1)
            if float(np.min(gaps)) < radius:
                continue
        kept_pos.append(p)
        kept_fit.append(fits[i])
    return kept_pos, kept_fit


def solve(merit: MeritFunction, cfg: SwarmConfig,
          rng: np.random.Generator | None = None,
          f: ex.Expr | None = None,
          value_tolerance: float = 1e-4) -> RootSet:
    """All detected roots of the merit's equations, polished and deduplicated.

    An empty root set is a legal outcome. When `f` is given, groups of three
    or more distinct roots whose f-values coincide within `value_tolerance`
    are flagged as samples of a continuous solution set.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    dim = merit.dim
    if not merit.equations:
        return RootSet(roots=(), evaluations=0, iterations=0,
                       subswarms_spawned=0, subswarms_final=0)
    h = _batch_merit(merit.equations, dim)
    problem = ResidualProblem(merit.equations, dim)
    state = initialize(cfg, dim, h, rng)
    for t in range(1, cfg.max_iterations + 1):
        if state.evaluations + cfg.particle_count > cfg.budget:
            break
        state.iteration = t
        step_main(state, h, cfg, rng)
        step_subswarms(state, h, cfg, rng)
        identify_niches(state, cfg)
        merge_and_absorb(state, cfg)
        if _converged(state, cfg):
            break

    # candidate pool: live swarm bests, retired bests, leftover main pbests
    cand_pos = [state.g_pos[i].copy() for i in range(state.subswarm_count)]
    cand_fit = [float(v) for v in state.g_fit]
    cand_pos.extend(state.archive_pos)
    cand_fit.extend(state.archive_fit)
    mi = state.main_indices()
    if mi.size:
        best_main = mi[np.argsort(state.pbest_fit[mi], kind="stable")[:32]]
        cand_pos.extend(state.pbest[i].copy() for i in best_main)
        cand_fit.extend(float(state.pbest_fit[i]) for i in best_main)

    radius = _DEDUPE_SCALE * cfg.span
    cand_pos, cand_fit = _dedupe(cand_pos, cand_fit, radius)
    max_polish = (cfg.budget - state.evaluations) // (cfg.polish_iterations + 2)
    cand_pos = cand_pos[:max(0, int(max_polish))]

    polished_pos: list[np.ndarray] = []
    polished_fit: list[float] = []
    for x0 in cand_pos:
        x, ss, nfev = problem.refine(x0, max_nfev=cfg.polish_iterations)
        state.evaluations += nfev
        if ss <= cfg.root_tolerance:
            polished_pos.append(x)
            polished_fit.append(ss)
    polished_pos, polished_fit = _dedupe(polished_pos, polished_fit, radius)

    f_values: list[float | None] = [None] * len(polished_pos)
    continuum = [False] * len(polished_pos)
    if f is not None and polished_pos:
        f_values = [float(ex.evaluate_clamped(f, p)) for p in polished_pos]
        order = np.argsort(np.asarray(f_values), kind="stable")
        cluster: list[int] = []
        for i in order:
            if cluster and abs(f_values[i] - f_values[cluster[-1]]) > value_tolerance:
                if len(cluster) >= 3:
                    for j in cluster:
                        continuum[j] = True
                cluster = []
            cluster.append(i)
        if len(cluster) >= 3:
            for j in cluster:
                continuum[j] = True

    roots = []
    for p, ss, fv, cont in zip(polished_pos, polished_fit, f_values, continuum):
        p.flags.writeable = False
        roots.append(Root(position=p, fitness=ss, f_value=fv, continuum=cont))
    return RootSet(
        roots=tuple(roots),
        evaluations=state.evaluations,
        iterations=state.iteration,
        subswarms_spawned=state.spawned_total,
        subswarms_final=state.subswarm_count,
    )
