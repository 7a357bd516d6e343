"""Solver settings shared by the candidate, range, CLI and service layers.

Settings merge in three layers: built-in defaults, the optional `solver`
object of a system file, and explicit overrides (CLI flags or API fields),
the later layers winning.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace

from .errors import ConfigError

__all__ = ["SolverSettings"]


@dataclass(frozen=True)
class SolverSettings:
    particles: int = 2000
    iterations: int = 500
    delta: float = 1e-6
    dedupe: float = 1e-4
    root_tolerance: float = 1e-8
    feas_tolerance: float = 1e-10
    probe_factor: float = 10.0
    paranoid: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.particles < 1:
            raise ConfigError("particles must be >= 1")
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        for name in ("delta", "dedupe", "root_tolerance", "feas_tolerance",
                     "probe_factor"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")

    @classmethod
    def from_mapping(cls, data: dict | None, **overrides) -> "SolverSettings":
        """Defaults, then the file's solver section, then explicit overrides."""
        known = {f.name for f in fields(cls)}
        merged: dict = {}
        for source in (data or {}), overrides:
            for key, value in source.items():
                if value is None:
                    continue
                if key not in known:
                    raise ConfigError(f"unknown solver setting {key!r}")
                merged[key] = value
        return cls(**merged)

    def merged(self, **overrides) -> "SolverSettings":
        """Copy with the non-None overrides applied."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **updates) if updates else self
