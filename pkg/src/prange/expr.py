"""Symbolic expression trees over an indexed variable vector.

Provides:

* immutable node classes (constants, variables, arithmetic, integer powers,
  square roots and (arc)cosine) with operator overloading,
* exact evaluation with explicit domain errors,
* symbolic partial derivatives,
* an evaluation-preserving simplifier,
* a recursive-descent parser for user-facing algebraic constraint text,
* a register-machine compiler for fast batched numpy evaluation.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DivisionByZero, DomainError, ParseError

__all__ = [
    "Expr", "Const", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow",
    "Sqrt", "Cos", "Sin", "Acos",
    "evaluate", "evaluate_clamped", "differentiate", "simplify",
    "substitute", "variables", "parse_expression", "referenced_names",
    "CompiledSystem", "compile_exprs",
]


def _coerce(value) -> "Expr":
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float)):
        return Const(float(value))
    raise TypeError(f"cannot use {type(value).__name__} as an expression")


@dataclass(frozen=True, eq=False)
class Expr:
    """Base node. Subclasses are immutable and compose via operators."""

    def __add__(self, other):
        return Add(self, _coerce(other))

    def __radd__(self, other):
        return Add(_coerce(other), self)

    def __sub__(self, other):
        return Sub(self, _coerce(other))

    def __rsub__(self, other):
        return Sub(_coerce(other), self)

    def __mul__(self, other):
        return Mul(self, _coerce(other))

    def __rmul__(self, other):
        return Mul(_coerce(other), self)

    def __truediv__(self, other):
        return Div(self, _coerce(other))

    def __rtruediv__(self, other):
        return Div(_coerce(other), self)

    def __pow__(self, n):
        return Pow(self, n)

    def __neg__(self):
        return Neg(self)

    def children(self) -> tuple["Expr", ...]:
        return ()

    def _eval(self, x: Sequence[float]) -> float:
        raise NotImplementedError

    def diff(self, index: int) -> "Expr":
        raise NotImplementedError

    def simplified(self) -> "Expr":
        return self


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: float

    def _eval(self, x):
        return self.value

    def diff(self, index):
        return Const(0.0)

    def __repr__(self):
        return f"{self.value:g}"


@dataclass(frozen=True, eq=False)
class Var(Expr):
    index: int

    def _eval(self, x):
        return float(x[self.index])

    def diff(self, index):
        return Const(1.0 if index == self.index else 0.0)

    def __repr__(self):
        return f"x{self.index}"


@dataclass(frozen=True, eq=False)
class Neg(Expr):
    a: Expr

    def children(self):
        return (self.a,)

    def _eval(self, x):
        return -self.a._eval(x)

    def diff(self, index):
        return Neg(self.a.diff(index))

    def simplified(self):
        a = self.a.simplified()
        if isinstance(a, Const):
            return Const(-a.value)
        if isinstance(a, Neg):
            return a.a
        return Neg(a)

    def __repr__(self):
        return f"(-{self.a!r})"


@dataclass(frozen=True, eq=False)
class Add(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)

    def _eval(self, x):
        return self.a._eval(x) + self.b._eval(x)

    def diff(self, index):
        return Add(self.a.diff(index), self.b.diff(index))

    def simplified(self):
        a, b = self.a.simplified(), self.b.simplified()
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(a.value + b.value)
        if isinstance(a, Const) and a.value == 0.0:
            return b
        if isinstance(b, Const) and b.value == 0.0:
            return a
        return Add(a, b)

    def __repr__(self):
        return f"({self.a!r} + {self.b!r})"


@dataclass(frozen=True, eq=False)
class Sub(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)

    def _eval(self, x):
        return self.a._eval(x) - self.b._eval(x)

    def diff(self, index):
        return Sub(self.a.diff(index), self.b.diff(index))

    def simplified(self):
        a, b = self.a.simplified(), self.b.simplified()
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(a.value - b.value)
        if isinstance(b, Const) and b.value == 0.0:
            return a
        if isinstance(a, Const) and a.value == 0.0:
            return Neg(b).simplified()
        return Sub(a, b)

    def __repr__(self):
        return f"({self.a!r} - {self.b!r})"


@dataclass(frozen=True, eq=False)
class Mul(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)

    def _eval(self, x):
        return self.a._eval(x) * self.b._eval(x)

    def diff(self, index):
        return Add(Mul(self.a.diff(index), self.b), Mul(self.a, self.b.diff(index)))

    def simplified(self):
        a, b = self.a.simplified(), self.b.simplified()
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(a.value * b.value)
        for lhs, rhs in ((a, b), (b, a)):
            if isinstance(lhs, Const):
                if lhs.value == 0.0:
                    return Const(0.0)
                if lhs.value == 1.0:
                    return rhs
        return Mul(a, b)

    def __repr__(self):
        return f"({self.a!r} * {self.b!r})"


@dataclass(frozen=True, eq=False)
class Div(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)

    def _eval(self, x):
        denom = self.b._eval(x)
        if denom == 0.0:
            raise DivisionByZero(f"zero denominator in {self!r}")
        return self.a._eval(x) / denom

    def diff(self, index):
        num = Sub(Mul(self.a.diff(index), self.b), Mul(self.a, self.b.diff(index)))
        return Div(num, Pow(self.b, 2))

    def simplified(self):
        a, b = self.a.simplified(), self.b.simplified()
        if isinstance(b, Const) and b.value != 0.0:
            if isinstance(a, Const):
                return Const(a.value / b.value)
            if b.value == 1.0:
                return a
        if isinstance(a, Const) and a.value == 0.0 and not isinstance(b, Const):
            return Const(0.0)
        return Div(a, b)

    def __repr__(self):
        return f"({self.a!r} / {self.b!r})"


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    """Integer power with a nonnegative exponent."""

    a: Expr
    n: int

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 0:
            raise ValueError(f"exponent must be a nonnegative integer, got {self.n!r}")

    def children(self):
        return (self.a,)

    def _eval(self, x):
        return self.a._eval(x) ** self.n

    def diff(self, index):
        if self.n == 0:
            return Const(0.0)
        if self.n == 1:
            return self.a.diff(index)
        return Mul(Mul(Const(float(self.n)), Pow(self.a, self.n - 1)), self.a.diff(index))

    def simplified(self):
        a = self.a.simplified()
        if self.n == 0:
            return Const(1.0)
        if self.n == 1:
            return a
        if isinstance(a, Const):
            return Const(a.value ** self.n)
        return Pow(a, self.n)

    def __repr__(self):
        return f"({self.a!r}^{self.n})"


@dataclass(frozen=True, eq=False)
class Sqrt(Expr):
    a: Expr

    def children(self):
        return (self.a,)

    def _eval(self, x):
        v = self.a._eval(x)
        if v < 0.0:
            raise DomainError(f"sqrt of negative value {v:g}")
        return math.sqrt(v)

    def diff(self, index):
        return Div(self.a.diff(index), Mul(Const(2.0), Sqrt(self.a)))

    def simplified(self):
        a = self.a.simplified()
        if isinstance(a, Const) and a.value >= 0.0:
            return Const(math.sqrt(a.value))
        return Sqrt(a)

    def __repr__(self):
        return f"sqrt({self.a!r})"


@dataclass(frozen=True, eq=False)
class Cos(Expr):
    a: Expr

    def children(self):
        return (self.a,)

    def _eval(self, x):
        return math.cos(self.a._eval(x))

    def diff(self, index):
        return Neg(Mul(Sin(self.a), self.a.diff(index)))

    def simplified(self):
        a = self.a.simplified()
        if isinstance(a, Const):
            return Const(math.cos(a.value))
        return Cos(a)

    def __repr__(self):
        return f"cos({self.a!r})"


@dataclass(frozen=True, eq=False)
class Sin(Expr):
    a: Expr

    def children(self):
        return (self.a,)

    def _eval(self, x):
        return math.sin(self.a._eval(x))

    def diff(self, index):
        return Mul(Cos(self.a), self.a.diff(index))

    def simplified(self):
        a = self.a.simplified()
        if isinstance(a, Const):
            return Const(math.sin(a.value))
        return Sin(a)

    def __repr__(self):
        return f"sin({self.a!r})"


@dataclass(frozen=True, eq=False)
class Acos(Expr):
    a: Expr

    def children(self):
        return (self.a,)

    def _eval(self, x):
        v = self.a._eval(x)
        if v < -1.0 or v > 1.0:
            raise DomainError(f"arccos argument {v:g} outside [-1, 1]")
        return math.acos(v)

    def diff(self, index):
        denom = Sqrt(Sub(Const(1.0), Pow(self.a, 2)))
        return Neg(Div(self.a.diff(index), denom))

    def simplified(self):
        a = self.a.simplified()
        if isinstance(a, Const) and -1.0 <= a.value <= 1.0:
            return Const(math.acos(a.value))
        return Acos(a)

    def __repr__(self):
        return f"arccos({self.a!r})"


def evaluate(e: Expr, x: Sequence[float]) -> float:
    """Evaluate e at the point x, raising on domain violations."""
    return e._eval(x)


def evaluate_clamped(e: Expr, x: Sequence[float], tol: float = 1e-9) -> float:
    """Evaluate, tolerating round-off excursions of sqrt/arccos arguments.

    A sqrt argument in [-tol, 0) is treated as 0 and an arccos argument
    within tol outside [-1, 1] is clamped to the boundary. Larger
    violations still raise DomainError.
    """
    if isinstance(e, Sqrt):
        v = evaluate_clamped(e.a, x, tol)
        if v < 0.0:
            if v < -tol:
                raise DomainError(f"sqrt of negative value {v:g}")
            v = 0.0
        return math.sqrt(v)
    if isinstance(e, Acos):
        v = evaluate_clamped(e.a, x, tol)
        if abs(v) > 1.0:
            if abs(v) > 1.0 + tol:
                raise DomainError(f"arccos argument {v:g} outside [-1, 1]")
            v = max(-1.0, min(1.0, v))
        return math.acos(v)
    kids = e.children()
    if not kids:
        return e._eval(x)
    vals = [evaluate_clamped(k, x, tol) for k in kids]
    if isinstance(e, Neg):
        return -vals[0]
    if isinstance(e, Add):
        return vals[0] + vals[1]
    if isinstance(e, Sub):
        return vals[0] - vals[1]
    if isinstance(e, Mul):
        return vals[0] * vals[1]
    if isinstance(e, Div):
        if vals[1] == 0.0:
            raise DivisionByZero(f"zero denominator in {e!r}")
        return vals[0] / vals[1]
    if isinstance(e, Pow):
        return vals[0] ** e.n
    if isinstance(e, Cos):
        return math.cos(vals[0])
    if isinstance(e, Sin):
        return math.sin(vals[0])
    raise TypeError(f"unknown node {type(e).__name__}")


def differentiate(e: Expr, index: int) -> Expr:
    """Symbolic partial derivative of e with respect to variable `index`."""
    return e.diff(index).simplified()


def simplify(e: Expr) -> Expr:
    """Constant folding and identity elimination; preserves evaluation."""
    return e.simplified()


def substitute(e: Expr, mapping: Mapping[int, Expr]) -> Expr:
    """Replace Var(i) with mapping[i] wherever i is in the mapping."""
    if isinstance(e, Var):
        return mapping.get(e.index, e)
    if isinstance(e, Const):
        return e
    kids = [substitute(k, mapping) for k in e.children()]
    if isinstance(e, Pow):
        return Pow(kids[0], e.n)
    return type(e)(*kids)


def variables(e: Expr) -> set[int]:
    """Indices of all variables appearing in e."""
    out: set[int] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if isinstance(node, Var):
            out.add(node.index)
        else:
            stack.extend(node.children())
    return out


# --- parser -----------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?"
    r"|\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos}")
        for kind in ("num", "ident", "op"):
            if m.group(kind) is not None:
                tokens.append((kind, m.group(kind), m.start(kind)))
                break
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str, symbols: Mapping[str, Expr]):
        self.text = text
        self.symbols = symbols
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def advance(self):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of expression in {self.text!r}")
        self.pos += 1
        return tok

    def expect_op(self, op: str):
        tok = self.advance()
        if tok[0] != "op" or tok[1] != op:
            raise ParseError(f"expected {op!r} at position {tok[2]} in {self.text!r}")

    def parse(self) -> Expr:
        e = self.sum()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"unexpected token {tok[1]!r} at position {tok[2]} in {self.text!r}")
        return e

    def sum(self) -> Expr:
        e = self.product()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "+-":
                self.advance()
                rhs = self.product()
                e = Add(e, rhs) if tok[1] == "+" else Sub(e, rhs)
            else:
                return e

    def product(self) -> Expr:
        e = self.unary()
        while True:
            tok = self.peek()
            if tok and tok[0] == "op" and tok[1] in "*/":
                self.advance()
                rhs = self.unary()
                e = Mul(e, rhs) if tok[1] == "*" else Div(e, rhs)
            else:
                return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "-":
            self.advance()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        tok = self.peek()
        if tok and tok[0] == "op" and tok[1] == "^":
            self.advance()
            etok = self.advance()
            if etok[0] != "num" or not re.fullmatch(r"\d+", etok[1]):
                raise ParseError(
                    f"exponent must be a nonnegative integer at position {etok[2]} in {self.text!r}")
            return Pow(base, int(etok[1]))
        return base

    def atom(self) -> Expr:
        tok = self.advance()
        kind, value, start = tok
        if kind == "num":
            return Const(float(value))
        if kind == "ident":
            nxt = self.peek()
            if nxt and nxt[0] == "op" and nxt[1] == "(":
                if value != "sqrt":
                    raise ParseError(f"unknown function {value!r} at position {start}")
                self.advance()
                arg = self.sum()
                self.expect_op(")")
                return Sqrt(arg)
            if value not in self.symbols:
                raise ParseError(f"unknown identifier {value!r} at position {start}")
            return self.symbols[value]
        if kind == "op" and value == "(":
            e = self.sum()
            self.expect_op(")")
            return e
        raise ParseError(f"unexpected token {value!r} at position {start} in {self.text!r}")


def parse_expression(text: str, symbols: Mapping[str, Expr]) -> Expr:
    """Parse algebraic constraint text into an Expr.

    Supported: identifiers bound via `symbols`, decimal literals, the
    operators + - * / and ^ (nonnegative integer exponent), unary minus,
    parentheses, and sqrt(...).
    """
    if not text or not text.strip():
        raise ParseError("empty expression")
    return _Parser(text, symbols).parse()


def referenced_names(text: str) -> list[str]:
    """Identifier names appearing in expression text, in first-seen order."""
    seen: list[str] = []
    for kind, value, _ in _tokenize(text):
        if kind == "ident" and value != "sqrt" and value not in seen:
            seen.append(value)
    return seen


# --- batched evaluation -----------------------------------------------------

class CompiledSystem:
    """A list of expressions flattened to a register program.

    Structurally identical subterms are evaluated once per batch, which
    matters for Lagrange partials that share most of their structure.
    Batched evaluation is permissive: domain violations become nan/inf
    (callers treat non-finite outputs as invalid points).
    """

    def __init__(self, exprs: Sequence[Expr], dim: int):
        self.dim = dim
        self.program: list[tuple] = []
        self.outputs: list[int] = []
        self._memo_id: dict[int, int] = {}
        self._memo_key: dict[tuple, int] = {}
        for e in exprs:
            self.outputs.append(self._emit(e))
        self.n_outputs = len(self.outputs)

    def _emit(self, e: Expr) -> int:
        reg = self._memo_id.get(id(e))
        if reg is not None:
            return reg
        kids = tuple(self._emit(k) for k in e.children())
        if isinstance(e, Const):
            key = ("const", e.value)
        elif isinstance(e, Var):
            key = ("var", e.index)
        elif isinstance(e, Pow):
            key = ("pow", e.n, kids)
        else:
            key = (type(e).__name__, kids)
        reg = self._memo_key.get(key)
        if reg is None:
            reg = len(self.program)
            self.program.append((key, e, kids))
            self._memo_key[key] = reg
        self._memo_id[id(e)] = reg
        return reg

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Evaluate all expressions at points of shape (N, dim) -> (N, K)."""
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        if single:
            points = points[None, :]
        n = points.shape[0]
        regs: list[np.ndarray] = []
        with np.errstate(all="ignore"):
            for key, node, kids in self.program:
                if isinstance(node, Const):
                    regs.append(np.full(n, node.value))
                elif isinstance(node, Var):
                    regs.append(points[:, node.index])
                elif isinstance(node, Neg):
                    regs.append(-regs[kids[0]])
                elif isinstance(node, Add):
                    regs.append(regs[kids[0]] + regs[kids[1]])
                elif isinstance(node, Sub):
                    regs.append(regs[kids[0]] - regs[kids[1]])
                elif isinstance(node, Mul):
                    regs.append(regs[kids[0]] * regs[kids[1]])
                elif isinstance(node, Div):
                    regs.append(regs[kids[0]] / regs[kids[1]])
                elif isinstance(node, Pow):
                    regs.append(regs[kids[0]] ** node.n)
                elif isinstance(node, Sqrt):
                    regs.append(np.sqrt(regs[kids[0]]))
                elif isinstance(node, Cos):
                    regs.append(np.cos(regs[kids[0]]))
                elif isinstance(node, Sin):
                    regs.append(np.sin(regs[kids[0]]))
                elif isinstance(node, Acos):
                    regs.append(np.arccos(regs[kids[0]]))
                else:
                    raise TypeError(f"unknown node {type(node).__name__}")
        out = np.stack([regs[i] for i in self.outputs], axis=1)
        return out[0] if single else out


def compile_exprs(exprs: Sequence[Expr], dim: int) -> CompiledSystem:
    return CompiledSystem(exprs, dim)
