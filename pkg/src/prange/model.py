"""2D geometric constraint systems: entities, constraints, parameters.

Entities are points (x, y), lines (a, b, c with ax + by + c = 0 and the
normalization a^2 + b^2 = 1) and circles (x, y, r). Constraints are either
dimensional (they bind a named parameter: distances, line-line angles,
radii, diameters), structural (coincidence, incidence, parallelism,
perpendicularity, tangency, concentricity, symmetry) or algebraic
(an expression over parameter names that must vanish).

A system compiles to residual expressions over a flat slot vector X that
concatenates every entity's scalars in declaration order. Structural
residuals, line normalizations and algebraic residuals are always active;
a dimensional residual is active only when its parameter is in the fixed
map passed to :meth:`ConstraintSystem.residuals`.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import expr as ex
from .errors import (
    ArityMismatch, DuplicateId, ModelError, ParseError, UnknownEntity,
    UnknownParameter,
)

__all__ = [
    "Entity", "Parameter", "Constraint", "ConstraintSystem",
    "load", "loads", "save", "dumps", "parse_angle_value",
]

ENTITY_SLOTS = {"point": ("x", "y"), "line": ("a", "b", "c"), "circle": ("x", "y", "r")}
DIMENSIONAL_KINDS = ("distance", "angle", "radius", "diameter")
STRUCTURAL_KINDS = (
    "coincident", "point_on_line", "point_on_circle", "parallel",
    "perpendicular", "tangent", "concentric", "symmetric",
)

_DEG_RE = re.compile(r"^\s*(-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*deg\s*$")


def parse_angle_value(raw) -> float:
    """Angle literal to radians. Accepts a number or a '<number> deg' string."""
    if isinstance(raw, (int, float)):
        return float(raw)
    if isinstance(raw, str):
        m = _DEG_RE.match(raw)
        if m:
            return math.radians(float(m.group(1)))
        try:
            return float(raw)
        except ValueError:
            pass
    raise ParseError(f"cannot parse angle value {raw!r}")


@dataclass
class Entity:
    id: str
    kind: str
    through: tuple[str, str] | None = None


@dataclass
class Parameter:
    name: str
    kind: str
    value: float | None = None

    @property
    def is_angle(self) -> bool:
        return self.kind == "angle"


@dataclass
class Constraint:
    """One constraint record.

    `operands` holds entity ids, or ("segment", pid, qid) tuples for the
    segment form of parallel/perpendicular. Dimensional constraints carry
    the bound parameter name; tangency between circles carries a side;
    algebraic constraints carry their expression text.
    """
    kind: str
    operands: tuple = ()
    parameter: str | None = None
    side: str | None = None
    expression: str | None = None


class ConstraintSystem:
    def __init__(self, entities: Iterable[Entity], constraints: Iterable[Constraint],
                 parameters: Iterable[Parameter], solver: dict | None = None):
        self.entities = list(entities)
        self.constraints = list(constraints)
        self.parameters = list(parameters)
        self.solver = dict(solver or {})
        self._entity_by_id: dict[str, Entity] = {}
        self._param_by_name: dict[str, Parameter] = {}
        self._slot_of: dict[tuple[str, str], int] = {}
        self.slot_names: list[str] = []
        self._index()
        self.validate()

    # -- structure ------------------------------------------------------

    def _index(self):
        for e in self.entities:
            if e.id in self._entity_by_id:
                raise DuplicateId(f"duplicate entity id {e.id!r}")
            if e.kind not in ENTITY_SLOTS:
                raise ModelError(f"unknown entity kind {e.kind!r} for {e.id!r}")
            self._entity_by_id[e.id] = e
            for scalar in ENTITY_SLOTS[e.kind]:
                self._slot_of[(e.id, scalar)] = len(self.slot_names)
                self.slot_names.append(f"{e.id}.{scalar}")
        for p in self.parameters:
            if p.name in self._param_by_name:
                raise DuplicateId(f"duplicate parameter name {p.name!r}")
            self._param_by_name[p.name] = p

    @property
    def slot_count(self) -> int:
        return len(self.slot_names)

    def entity(self, eid: str) -> Entity:
        try:
            return self._entity_by_id[eid]
        except KeyError:
            raise UnknownEntity(f"unknown entity {eid!r}") from None

    def parameter(self, name: str) -> Parameter:
        try:
            return self._param_by_name[name]
        except KeyError:
            raise UnknownParameter(f"unknown parameter {name!r}") from None

    def parameter_names(self) -> list[str]:
        return [p.name for p in self.parameters]

    def slot(self, eid: str, scalar: str) -> ex.Var:
        return ex.Var(self._slot_of[(eid, scalar)])

    def point(self, eid: str) -> tuple[ex.Var, ex.Var]:
        return self.slot(eid, "x"), self.slot(eid, "y")

    def line(self, eid: str) -> tuple[ex.Var, ex.Var, ex.Var]:
        return self.slot(eid, "a"), self.slot(eid, "b"), self.slot(eid, "c")

    def circle(self, eid: str) -> tuple[ex.Var, ex.Var, ex.Var]:
        return self.slot(eid, "x"), self.slot(eid, "y"), self.slot(eid, "r")

    def points_of(self) -> list[Entity]:
        return [e for e in self.entities if e.kind == "point"]

    # -- validation -----------------------------------------------------

    def validate(self):
        for e in self.entities:
            if e.through is not None:
                if e.kind != "line":
                    raise ArityMismatch(f"{e.id!r}: only lines can be declared through points")
                if len(e.through) != 2:
                    raise ArityMismatch(f"{e.id!r}: through requires exactly two points")
                for pid in e.through:
                    if self.entity(pid).kind != "point":
                        raise ArityMismatch(f"{e.id!r}: through operand {pid!r} is not a point")
        for p in self.parameters:
            if p.kind not in ("distance", "angle", "radius", "diameter"):
                raise ModelError(f"unknown parameter kind {p.kind!r} for {p.name!r}")
            if p.value is not None:
                if p.is_angle and not (0.0 <= p.value <= math.pi):
                    raise ModelError(f"angle {p.name!r} value {p.value:g} outside [0, pi]")
                if not p.is_angle and p.value < 0.0:
                    raise ModelError(f"length {p.name!r} value {p.value:g} is negative")
        defined: dict[str, int] = {p.name: 0 for p in self.parameters}
        for c in self.constraints:
            self._check_constraint(c)
            if c.kind in DIMENSIONAL_KINDS:
                if c.parameter not in defined:
                    raise UnknownParameter(
                        f"constraint binds undeclared parameter {c.parameter!r}")
                defined[c.parameter] += 1
                p = self.parameter(c.parameter)
                if p.kind != c.kind:
                    raise ModelError(
                        f"parameter {p.name!r} has kind {p.kind!r} but is bound "
                        f"to a {c.kind} constraint")
        for name, count in defined.items():
            if count != 1:
                raise ModelError(
                    f"parameter {name!r} must be defined by exactly one "
                    f"dimensional constraint (found {count})")
        for c in self.constraints:
            if c.kind == "algebraic":
                for name in ex.referenced_names(c.expression or ""):
                    if name not in self._param_by_name:
                        raise UnknownParameter(
                            f"algebraic constraint references unknown parameter {name!r}")
                self._algebraic_template(c)

    def _operand_kind(self, op) -> str:
        if isinstance(op, tuple) and op and op[0] == "segment":
            for pid in op[1:]:
                if self.entity(pid).kind != "point":
                    raise ArityMismatch(f"segment endpoint {pid!r} is not a point")
            return "segment"
        return self.entity(op).kind

    def _check_constraint(self, c: Constraint):
        if c.kind == "algebraic":
            if not c.expression:
                raise ModelError("algebraic constraint missing expression")
            return
        kinds = tuple(self._operand_kind(op) for op in c.operands)
        def need(*allowed):
            if kinds not in allowed:
                raise ArityMismatch(
                    f"{c.kind} constraint cannot apply to operands of kind {kinds}")
        if c.kind == "distance":
            need(("point", "point"), ("point", "line"), ("line", "point"), ("line", "line"))
        elif c.kind == "angle":
            need(("line", "line"))
        elif c.kind in ("radius", "diameter"):
            need(("circle",))
        elif c.kind == "coincident":
            need(("point", "point"), ("line", "line"))
        elif c.kind == "point_on_line":
            need(("point", "line"))
        elif c.kind == "point_on_circle":
            need(("point", "circle"))
        elif c.kind in ("parallel", "perpendicular"):
            need(("line", "line"), ("segment", "segment"))
        elif c.kind == "tangent":
            need(("line", "circle"), ("circle", "line"), ("circle", "circle"))
            if kinds == ("circle", "circle") and c.side not in ("internal", "external"):
                raise ModelError("circle-circle tangency requires side internal|external")
        elif c.kind == "concentric":
            need(("circle", "circle"))
        elif c.kind == "symmetric":
            need(("point", "point", "line"))
        else:
            raise ModelError(f"unknown constraint kind {c.kind!r}")

    # -- residual construction ------------------------------------------

    def _segment_vector(self, op) -> tuple[ex.Expr, ex.Expr]:
        _, pid, qid = op
        px, py = self.point(pid)
        qx, qy = self.point(qid)
        return qx - px, qy - py

    def _distance_f(self, c: Constraint) -> ex.Expr:
        kinds = tuple(self._operand_kind(op) for op in c.operands)
        if kinds == ("point", "point"):
            x1, y1 = self.point(c.operands[0])
            x2, y2 = self.point(c.operands[1])
            return ex.Sqrt((x1 - x2) ** 2 + (y1 - y2) ** 2)
        if kinds in (("point", "line"), ("line", "point")):
            pid, lid = (c.operands if kinds == ("point", "line") else c.operands[::-1])
            x, y = self.point(pid)
            a, b, cc = self.line(lid)
            return ex.Sqrt(((a * x + b * y + cc) ** 2) / (a ** 2 + b ** 2))
        a1, b1, c1 = self.line(c.operands[0])
        a2, b2, c2 = self.line(c.operands[1])
        return ex.Sqrt(((c1 - c2) ** 2) / (a1 ** 2 + b1 ** 2))

    def _angle_inner(self, c: Constraint) -> ex.Expr:
        a1, b1, _ = self.line(c.operands[0])
        a2, b2, _ = self.line(c.operands[1])
        dot = a1 * a2 + b1 * b2
        return dot / (ex.Sqrt(a1 ** 2 + b1 ** 2) * ex.Sqrt(a2 ** 2 + b2 ** 2))

    def defining_constraint(self, name: str) -> Constraint:
        self.parameter(name)
        for c in self.constraints:
            if c.kind in DIMENSIONAL_KINDS and c.parameter == name:
                return c
        raise UnknownParameter(f"parameter {name!r} has no defining constraint")

    def target_function(self, name: str) -> ex.Expr:
        """The expression p = f(X) for the named parameter (arccos form for angles)."""
        c = self.defining_constraint(name)
        if c.kind == "distance":
            return self._distance_f(c)
        if c.kind == "angle":
            return ex.Acos(self._angle_inner(c))
        r = self.circle(c.operands[0])[2]
        return r if c.kind == "radius" else ex.Const(2.0) * r

    def target_inner(self, name: str) -> ex.Expr | None:
        """For angle parameters, the expression whose arccos is the value."""
        c = self.defining_constraint(name)
        return self._angle_inner(c) if c.kind == "angle" else None

    def line_side_conditions(self, name: str) -> list[list[ex.Expr]]:
        """Orientation branches for a line-line distance parameter, else []."""
        c = self.defining_constraint(name)
        kinds = tuple(self._operand_kind(op) for op in c.operands)
        if c.kind != "distance" or kinds != ("line", "line"):
            return []
        a1, b1, _ = self.line(c.operands[0])
        a2, b2, _ = self.line(c.operands[1])
        return [[a1 - a2, b1 - b2], [a1 + a2, b1 + b2]]

    def _structural_residuals(self, c: Constraint) -> list[ex.Expr]:
        kinds = tuple(self._operand_kind(op) for op in c.operands)
        if c.kind == "coincident":
            if kinds == ("point", "point"):
                x1, y1 = self.point(c.operands[0])
                x2, y2 = self.point(c.operands[1])
                return [x1 - x2, y1 - y2]
            a1, b1, c1 = self.line(c.operands[0])
            a2, b2, c2 = self.line(c.operands[1])
            return [a1 * b2 - a2 * b1, c1 * a2 - c2 * a1]
        if c.kind == "point_on_line":
            x, y = self.point(c.operands[0])
            a, b, cc = self.line(c.operands[1])
            return [a * x + b * y + cc]
        if c.kind == "point_on_circle":
            x, y = self.point(c.operands[0])
            cx, cy, r = self.circle(c.operands[1])
            return [ex.Sqrt((x - cx) ** 2 + (y - cy) ** 2) - r]
        if c.kind == "parallel":
            if kinds == ("line", "line"):
                a1, b1, _ = self.line(c.operands[0])
                a2, b2, _ = self.line(c.operands[1])
                return [a1 * b2 - a2 * b1]
            ux, uy = self._segment_vector(c.operands[0])
            vx, vy = self._segment_vector(c.operands[1])
            return [ux * vy - uy * vx]
        if c.kind == "perpendicular":
            if kinds == ("line", "line"):
                a1, b1, _ = self.line(c.operands[0])
                a2, b2, _ = self.line(c.operands[1])
                return [a1 * a2 + b1 * b2]
            ux, uy = self._segment_vector(c.operands[0])
            vx, vy = self._segment_vector(c.operands[1])
            return [ux * vx + uy * vy]
        if c.kind == "tangent":
            if "circle" in kinds and "line" in kinds:
                lid, cid = (c.operands if kinds == ("line", "circle") else c.operands[::-1])
                a, b, cc = self.line(lid)
                cx, cy, r = self.circle(cid)
                return [ex.Sqrt(((a * cx + b * cy + cc) ** 2) / (a ** 2 + b ** 2)) - r]
            x1, y1, r1 = self.circle(c.operands[0])
            x2, y2, r2 = self.circle(c.operands[1])
            gap = (x1 - x2) ** 2 + (y1 - y2) ** 2
            rsum = r1 - r2 if c.side == "internal" else r1 + r2
            return [gap - rsum ** 2]
        if c.kind == "concentric":
            x1, y1, _ = self.circle(c.operands[0])
            x2, y2, _ = self.circle(c.operands[1])
            return [x1 - x2, y1 - y2]
        if c.kind == "symmetric":
            x1, y1 = self.point(c.operands[0])
            x2, y2 = self.point(c.operands[1])
            a, b, cc = self.line(c.operands[2])
            half = ex.Const(0.5)
            on_line = a * ((x1 + x2) * half) + b * ((y1 + y2) * half) + cc
            along = (x2 - x1) * b - (y2 - y1) * a
            return [on_line, along]
        raise ModelError(f"unknown structural kind {c.kind!r}")

    def _algebraic_template(self, c: Constraint) -> tuple[ex.Expr, list[str]]:
        names = ex.referenced_names(c.expression or "")
        symbols = {name: ex.Var(i) for i, name in enumerate(names)}
        try:
            tree = ex.parse_expression(c.expression, symbols)
        except ParseError as err:
            raise ParseError(f"algebraic constraint {c.expression!r}: {err}") from None
        return tree, names

    def _algebraic_residual(self, c: Constraint, fixed: Mapping[str, float]) -> ex.Expr:
        tree, names = self._algebraic_template(c)
        mapping: dict[int, ex.Expr] = {}
        for i, name in enumerate(names):
            if name in fixed:
                mapping[i] = ex.Const(float(fixed[name]))
            else:
                mapping[i] = self.target_function(name)
        return ex.substitute(tree, mapping)

    def normalization_residuals(self) -> list[ex.Expr]:
        out = []
        for e in self.entities:
            if e.kind == "line":
                a, b, _ = self.line(e.id)
                out.append(a ** 2 + b ** 2 - ex.Const(1.0))
        return out

    def dimensional_residual(self, name: str, value: float) -> ex.Expr:
        """Residual for a fixed parameter (cos-compared for angles)."""
        c = self.defining_constraint(name)
        if c.kind == "angle":
            return self._angle_inner(c) - ex.Const(math.cos(value))
        return self.target_function(name) - ex.Const(float(value))

    def residual_variants(self, fixed: Mapping[str, float]) -> list[list[ex.Expr]]:
        """Active residuals, one list per line-orientation branch.

        Structural constraints, through-line incidences, line normalizations
        and algebraic constraints are always present. A dimensional residual
        appears only if its parameter is in `fixed`. Fixed line-line
        distances contribute their orientation side conditions, which is
        what splits the result into branches (capped at 8).
        """
        base: list[ex.Expr] = []
        for e in self.entities:
            if e.kind == "line" and e.through is not None:
                a, b, cc = self.line(e.id)
                for pid in e.through:
                    x, y = self.point(pid)
                    base.append(a * x + b * y + cc)
        for c in self.constraints:
            if c.kind in STRUCTURAL_KINDS:
                base.extend(self._structural_residuals(c))
        branches: list[list[ex.Expr]] = [base]
        for c in self.constraints:
            if c.kind in DIMENSIONAL_KINDS and c.parameter in fixed:
                res = self.dimensional_residual(c.parameter, fixed[c.parameter])
                sides = self.line_side_conditions(c.parameter)
                if sides:
                    if len(branches) * len(sides) > 8:
                        raise ModelError("too many line-orientation branches (max 8)")
                    branches = [br + [res] + side for br in branches for side in sides]
                else:
                    branches = [br + [res] for br in branches]
        for c in self.constraints:
            if c.kind == "algebraic":
                res = self._algebraic_residual(c, fixed)
                for br in branches:
                    br.append(res)
        norms = self.normalization_residuals()
        return [[ex.simplify(r) for r in br + norms] for br in branches]

    def residuals(self, fixed: Mapping[str, float]) -> list[ex.Expr]:
        """Active residuals for the primary orientation branch."""
        return self.residual_variants(fixed)[0]

    def singularity_terms(self) -> list[ex.Expr]:
        """Degeneracy factors (x1-x2)^2 + (y1-y2)^2, one per through-line."""
        out = []
        for e in self.entities:
            if e.kind == "line" and e.through is not None:
                x1, y1 = self.point(e.through[0])
                x2, y2 = self.point(e.through[1])
                out.append((x1 - x2) ** 2 + (y1 - y2) ** 2)
        return out

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        ents = []
        for e in self.entities:
            rec: dict = {"id": e.id, "type": e.kind}
            if e.through is not None:
                rec["through"] = list(e.through)
            ents.append(rec)
        cons = []
        for c in self.constraints:
            rec = {"type": c.kind}
            if c.kind == "algebraic":
                rec["expression"] = c.expression
            elif c.kind in ("radius", "diameter"):
                rec["of"] = c.operands[0]
            elif c.kind == "symmetric":
                rec["points"] = [c.operands[0], c.operands[1]]
                rec["about"] = c.operands[2]
            else:
                rec["between"] = [
                    list(op[1:]) if isinstance(op, tuple) else op for op in c.operands]
            if c.parameter is not None:
                rec["parameter"] = c.parameter
            if c.side is not None:
                rec["side"] = c.side
            cons.append(rec)
        params = []
        for p in self.parameters:
            rec = {"name": p.name, "kind": p.kind}
            if p.value is not None:
                rec["value"] = p.value
            params.append(rec)
        doc = {"entities": ents, "constraints": cons, "parameters": params}
        if self.solver:
            doc["solver"] = self.solver
        return doc


def _constraint_from_json(rec: dict) -> Constraint:
    if not isinstance(rec, dict) or "type" not in rec:
        raise ParseError(f"constraint record must be an object with a type: {rec!r}")
    kind = rec["type"]
    if kind == "algebraic":
        return Constraint(kind="algebraic", expression=rec.get("expression"))
    if kind in ("radius", "diameter"):
        if "of" not in rec:
            raise ParseError(f"{kind} constraint requires an 'of' entity")
        return Constraint(kind=kind, operands=(rec["of"],), parameter=rec.get("parameter"))
    if kind == "symmetric":
        pts = rec.get("points")
        about = rec.get("about")
        if not isinstance(pts, list) or len(pts) != 2 or about is None:
            raise ParseError("symmetric constraint requires 'points' (two) and 'about'")
        return Constraint(kind=kind, operands=(pts[0], pts[1], about))
    raw = rec.get("between")
    if not isinstance(raw, list) or len(raw) != 2:
        raise ParseError(f"{kind} constraint requires 'between' with two operands")
    operands = []
    for op in raw:
        if isinstance(op, list):
            if len(op) != 2:
                raise ParseError(f"segment operand must list two point ids: {op!r}")
            operands.append(("segment", op[0], op[1]))
        else:
            operands.append(op)
    return Constraint(kind=kind, operands=tuple(operands),
                      parameter=rec.get("parameter"), side=rec.get("side"))


def loads(text: str) -> ConstraintSystem:
    """Parse a system from JSON text."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"invalid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ParseError("system file must be a JSON object")
    entities = []
    for rec in doc.get("entities", []):
        if not isinstance(rec, dict) or "id" not in rec or "type" not in rec:
            raise ParseError(f"entity record needs id and type: {rec!r}")
        through = rec.get("through")
        entities.append(Entity(
            id=rec["id"], kind=rec["type"],
            through=tuple(through) if through is not None else None))
    constraints = [_constraint_from_json(rec) for rec in doc.get("constraints", [])]
    parameters = []
    for rec in doc.get("parameters", []):
        if not isinstance(rec, dict) or "name" not in rec or "kind" not in rec:
            raise ParseError(f"parameter record needs name and kind: {rec!r}")
        value = rec.get("value")
        if value is not None:
            value = parse_angle_value(value) if rec["kind"] == "angle" else float(value)
        parameters.append(Parameter(name=rec["name"], kind=rec["kind"], value=value))
    solver = doc.get("solver")
    if solver is not None and not isinstance(solver, dict):
        raise ParseError("solver section must be an object")
    return ConstraintSystem(entities, constraints, parameters, solver)


def load(path) -> ConstraintSystem:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def dumps(sys: ConstraintSystem) -> str:
    return json.dumps(sys.to_json(), indent=2)


def save(sys: ConstraintSystem, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(sys) + "\n")
