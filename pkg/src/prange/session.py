"""Sequential multi-parameter editing over one constraint system.

The state machine: select the variable parameters, compute the ranges of
every still-unassigned one, accept a single assignment validated against
its presented range, recompute, and finalize into a witness configuration
once everything is assigned. Each range computation derives its own seed
from (session seed, number of assignments, parameter position), so a
given editing prefix always reproduces bit-identical ranges, including
after an undo.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (EmptyHistory, OutOfRange, PrangeError, SelectionError,
                     StaleRanges, UnknownParameter)
from .model import ConstraintSystem, loads as system_loads
from .ranges import ParameterRange, check_feasible, compute_range, solve_system
from .separation import separate
from .settings import SolverSettings


@dataclass(frozen=True)
class RangeFailure:
    """Error marker returned in place of a range that could not be computed."""

    parameter: str
    error: str

    def to_report(self) -> dict:
        return {"parameter": self.parameter, "error": self.error}


class EditingSession:
    def __init__(self, system: ConstraintSystem, names: list[str],
                 settings: SolverSettings | None = None, eager: bool = True):
        if not names:
            raise SelectionError("select at least one variable parameter")
        seen = set()
        for name in names:
            system.parameter(name)
            if name in seen:
                raise SelectionError(f"parameter {name!r} selected twice")
            seen.add(name)
        self.system = system
        self.settings = settings or SolverSettings()
        self.eager = eager
        self.variable_params: list[str] = list(names)
        self.fixed_params: dict[str, float] = {}
        for p in system.parameters:
            if p.name in seen:
                continue
            if p.value is None:
                raise SelectionError(
                    f"non-selected parameter {p.name!r} has no current value")
            self.fixed_params[p.name] = float(p.value)
        self.assigned: dict[str, float] = {}
        self.history: list[tuple[str, float]] = []
        self.last_ranges: dict[str, ParameterRange] = {}
        self.range_errors: dict[str, RangeFailure] = {}
        self.stale = True

    @property
    def unassigned(self) -> list[str]:
        return [n for n in self.variable_params if n not in self.assigned]

    def _derived_settings(self, name: str) -> SolverSettings:
        index = self.variable_params.index(name)
        seq = np.random.SeedSequence([self.settings.seed, len(self.assigned), index])
        return self.settings.merged(seed=int(seq.generate_state(1)[0]))

    def _active_fixed(self) -> dict[str, float]:
        return {**self.fixed_params, **self.assigned}

    def ranges(self) -> dict[str, ParameterRange | RangeFailure]:
        remaining = self.unassigned
        if not remaining:
            raise SelectionError("no unassigned variable parameters remain")
        self.last_ranges = {}
        self.range_errors = {}
        for name in remaining:
            others = [v for v in remaining if v != name]
            try:
                self.last_ranges[name] = compute_range(
                    self.system, name, self._active_fixed(), others,
                    self._derived_settings(name))
            except PrangeError as err:
                self.range_errors[name] = RangeFailure(name, str(err))
        self.stale = False
        return {**self.last_ranges, **self.range_errors}

    def assign(self, name: str, value: float) -> "EditingSession":
        self.system.parameter(name)
        if name not in self.variable_params:
            raise SelectionError(f"parameter {name!r} was not selected as variable")
        if name in self.assigned:
            raise SelectionError(f"parameter {name!r} is already assigned")
        if self.stale or name not in self.last_ranges:
            raise StaleRanges(
                f"no current range for {name!r}; compute ranges first")
        value = float(value)
        presented = self.last_ranges[name]
        if not presented.contains(value):
            raise OutOfRange(name, value,
                             [iv.to_report() for iv in presented.intervals])
        # cached ranges age with swarm luck; re-confirm by a direct solve
        others = [v for v in self.unassigned if v != name]
        sf = separate(self.system, name, self._active_fixed(), others)
        ok, _ = check_feasible(sf, value, self.settings)
        if not ok:
            raise OutOfRange(name, value,
                             [iv.to_report() for iv in presented.intervals])
        self.assigned[name] = value
        self.history.append((name, value))
        self.last_ranges = {}
        self.range_errors = {}
        self.stale = True
        if self.eager and self.unassigned:
            self.ranges()
        return self

    def undo(self) -> "EditingSession":
        if not self.history:
            raise EmptyHistory("no assignment to revert")
        name, _ = self.history.pop()
        del self.assigned[name]
        self.last_ranges = {}
        self.range_errors = {}
        self.stale = True
        if self.eager:
            self.ranges()
        return self

    def finalize(self) -> tuple[dict[str, float], float]:
        remaining = self.unassigned
        if remaining:
            raise SelectionError(
                f"cannot finalize with unassigned parameters: {remaining}")
        return solve_system(self.system, self._active_fixed(), self.settings)

    def save(self) -> str:
        state = {
            "system": self.system.to_json(),
            "selected": self.variable_params,
            "assigned": [[n, v] for n, v in self.assigned.items()],
            "history": [[n, v] for n, v in self.history],
            "settings": {
                "particles": self.settings.particles,
                "iterations": self.settings.iterations,
                "delta": self.settings.delta,
                "dedupe": self.settings.dedupe,
                "root_tolerance": self.settings.root_tolerance,
                "feas_tolerance": self.settings.feas_tolerance,
                "probe_factor": self.settings.probe_factor,
                "paranoid": self.settings.paranoid,
                "seed": self.settings.seed,
            },
            "eager": self.eager,
        }
        return json.dumps(state, indent=2)

    @classmethod
    def resume(cls, text: str) -> "EditingSession":
        state = json.loads(text)
        system = system_loads(json.dumps(state["system"]))
        settings = SolverSettings(**state["settings"])
        session = cls(system, list(state["selected"]), settings,
                      eager=bool(state.get("eager", True)))
        session.assigned = {n: float(v) for n, v in state["assigned"]}
        session.history = [(n, float(v)) for n, v in state["history"]]
        session.stale = True
        return session


def select(system: ConstraintSystem, names: list[str],
           settings: SolverSettings | None = None, eager: bool = True) -> EditingSession:
    """Start an editing session over the named variable parameters."""
    return EditingSession(system, names, settings, eager)
