"""Command-line front end.

Verbs map one-to-one onto session operations; `--session FILE` persists
the editing state between invocations, while `--select a,b` starts a
fresh in-memory session for one-shot queries. Exit codes: 0 success,
1 usage, 2 bad model file, 3 computation failure, 4 out-of-range
assignment.
"""
from __future__ import annotations

import argparse
import json
import os
import pathlib
import sys

from . import model
from .errors import (ConfigError, EmptyHistory, ModelError, OutOfRange,
                     ParseError, PrangeError, SelectionError, SeparationError,
                     StaleRanges)
from .ranges import solve_system
from .session import EditingSession, RangeFailure, select as start_session
from .settings import SolverSettings

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_COMPUTE = 3
EXIT_RANGE = 4


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for unusable models; argparse would default to it
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(sp: argparse.ArgumentParser, session: bool = False) -> None:
    sp.add_argument("model", help="constraint system file (JSON)")
    sp.add_argument("--json", dest="as_json", action="store_true",
                    help="machine-readable output")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--particles", type=int, default=None)
    sp.add_argument("--iters", type=int, default=None)
    sp.add_argument("--delta", type=float, default=None)
    sp.add_argument("--efeas", type=float, default=None)
    sp.add_argument("--paranoid", action="store_const", const=True, default=None)
    if session:
        sp.add_argument("--select", default=None,
                        help="comma-separated variable parameters (fresh session)")
        sp.add_argument("--session", default=None,
                        help="session file to resume and update")


def build_parser() -> _Parser:
    p = _Parser(prog="prange",
                description="Valid parameter ranges for 2D constraint systems")
    sub = p.add_subparsers(dest="verb", required=True)
    _add_common(sub.add_parser("load", help="parse and validate a system file"))
    _add_common(sub.add_parser("params", help="list declared parameters"))
    _add_common(sub.add_parser("select", help="start an editing session"), session=True)
    _add_common(sub.add_parser("ranges", help="compute ranges of unassigned variables"),
                session=True)
    sp = sub.add_parser("assign", help="assign values, validating each against its range")
    _add_common(sp, session=True)
    sp.add_argument("pairs", nargs="+", metavar="NAME=VALUE")
    _add_common(sub.add_parser("undo", help="revert the last assignment"), session=True)
    _add_common(sub.add_parser("finalize", help="solve the fully assigned system"),
                session=True)
    _add_common(sub.add_parser("solve", help="solve at the declared parameter values"))
    _add_common(sub.add_parser("report", help="full range report with provenance"),
                session=True)
    sp = sub.add_parser("serve", help="run the HTTP service")
    _add_common(sp)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8080)
    return p


def _resolve_seed(args) -> int | None:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("PRANGE_SEED")
    return int(env) if env else None


def _make_settings(system: model.ConstraintSystem, args) -> SolverSettings:
    overrides = dict(particles=args.particles, iterations=args.iters,
                     delta=args.delta, feas_tolerance=args.efeas,
                     paranoid=args.paranoid, seed=_resolve_seed(args))
    try:
        SolverSettings.from_mapping({}, **overrides)
    except ConfigError:
        raise
    try:
        return SolverSettings.from_mapping(system.solver, **overrides)
    except ConfigError as err:
        # flags were fine, so the model file's solver section is at fault
        raise ParseError(f"invalid solver section: {err}") from err


def _load_session(args, system: model.ConstraintSystem,
                  settings: SolverSettings) -> EditingSession:
    if args.session and pathlib.Path(args.session).exists():
        return EditingSession.resume(pathlib.Path(args.session).read_text())
    if args.select:
        names = [n.strip() for n in args.select.split(",") if n.strip()]
        return start_session(system, names, settings, eager=False)
    raise SelectionError("provide --select names or an existing --session file")


def _save_session(args, session: EditingSession) -> None:
    if getattr(args, "session", None):
        pathlib.Path(args.session).write_text(session.save())


def format_interval(rep: dict) -> str:
    lo = "[" if rep["loClosed"] else "("
    hi_val = "+inf" if rep["hi"] is None else f"{rep['hi']:g}"
    hi = "]" if rep["hiClosed"] else ")"
    return f"{lo}{rep['lo']:g}, {hi_val}{hi}"


def _format_ranges(entry) -> str:
    if isinstance(entry, RangeFailure):
        return f"error: {entry.error}"
    return " ".join(format_interval(iv.to_report()) for iv in entry.intervals) or "(empty)"


def _emit(args, payload: dict, human: list[str]) -> None:
    if args.as_json:
        print(json.dumps(payload, indent=2))
    else:
        for line in human:
            print(line)


def _ranges_payload(result: dict) -> dict:
    return {name: entry.to_report() for name, entry in result.items()}


def _ensure_fresh(session: EditingSession) -> dict:
    if session.stale and session.unassigned:
        return session.ranges()
    return {**session.last_ranges, **session.range_errors}


def _dispatch(args) -> int:
    system = model.load(args.model)
    settings = _make_settings(system, args)

    if args.verb == "load":
        _emit(args, {"ok": True, "entities": len(system.entities),
                     "constraints": len(system.constraints),
                     "parameters": len(system.parameters)},
              [f"loaded {args.model}: {len(system.entities)} entities, "
               f"{len(system.constraints)} constraints, "
               f"{len(system.parameters)} parameters"])
        return EXIT_OK

    if args.verb == "params":
        rows = [{"name": p.name, "kind": p.kind, "value": p.value}
                for p in system.parameters]
        _emit(args, {"parameters": rows},
              [f"{r['name']}  {r['kind']}  {r['value']:g}" for r in rows])
        return EXIT_OK

    if args.verb == "solve":
        fixed = {p.name: p.value for p in system.parameters}
        slots, residual = solve_system(system, fixed, settings)
        _emit(args, {"solution": slots, "residual": residual},
              [f"{k} = {v:.6f}" for k, v in slots.items()]
              + [f"residual = {residual:.3e}"])
        return EXIT_OK

    if args.verb == "serve":
        from .service import create_app
        import uvicorn
        uvicorn.run(create_app(system, settings), host=args.host, port=args.port)
        return EXIT_OK

    session = _load_session(args, system, settings)

    if args.verb == "select":
        _save_session(args, session)
        _emit(args, {"selected": session.variable_params,
                     "fixed": session.fixed_params},
              [f"selected: {', '.join(session.variable_params)}",
               f"fixed: {session.fixed_params}"])
        return EXIT_OK

    if args.verb == "ranges":
        result = session.ranges()
        _save_session(args, session)
        _emit(args, {"ranges": _ranges_payload(result)},
              [f"{name}: {_format_ranges(entry)}" for name, entry in result.items()])
        return EXIT_COMPUTE if session.range_errors else EXIT_OK

    if args.verb == "report":
        result = _ensure_fresh(session)
        _save_session(args, session)
        payload = {"ranges": _ranges_payload(result),
                   "assigned": session.assigned, "fixed": session.fixed_params}
        print(json.dumps(payload, indent=2))
        return EXIT_COMPUTE if session.range_errors else EXIT_OK

    if args.verb == "assign":
        pairs = []
        for raw in args.pairs:
            name, sep, value = raw.partition("=")
            if not sep or not name:
                raise SelectionError(f"expected NAME=VALUE, got {raw!r}")
            try:
                pairs.append((name, float(value)))
            except ValueError:
                raise SelectionError(f"not a number in {raw!r}") from None
        try:
            for name, value in pairs:
                if session.stale or name not in session.last_ranges:
                    session.ranges()
                session.assign(name, value)
        except OutOfRange:
            _save_session(args, session)
            raise
        _save_session(args, session)
        human = [f"{name} = {value:g}" for name, value in pairs]
        if session.unassigned:
            human.append(f"unassigned: {', '.join(session.unassigned)}")
        _emit(args, {"assigned": session.assigned,
                     "unassigned": session.unassigned}, human)
        return EXIT_OK

    if args.verb == "undo":
        session.undo()
        _save_session(args, session)
        _emit(args, {"assigned": session.assigned,
                     "unassigned": session.unassigned},
              [f"assigned: {session.assigned}"])
        return EXIT_OK

    if args.verb == "finalize":
        slots, residual = session.finalize()
        _save_session(args, session)
        _emit(args, {"solution": slots, "residual": residual},
              [f"{k} = {v:.6f}" for k, v in slots.items()]
              + [f"residual = {residual:.3e}"])
        return EXIT_OK

    raise SelectionError(f"unknown verb {args.verb!r}")


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as err:
        return int(err.code or 0)
    try:
        return _dispatch(args)
    except OutOfRange as err:
        intervals = ""
        if err.intervals:
            intervals = " valid: " + " ".join(format_interval(iv) for iv in err.intervals)
        print(f"prange: out of range: value {err.value:g} for "
              f"{err.parameter!r}.{intervals}", file=sys.stderr)
        return EXIT_RANGE
    except (ParseError, ModelError, OSError, json.JSONDecodeError) as err:
        print(f"prange: model error: {err}", file=sys.stderr)
        return EXIT_MODEL
    except (SelectionError, StaleRanges, EmptyHistory, SeparationError,
            ConfigError) as err:
        print(f"prange: {err}", file=sys.stderr)
        return EXIT_USAGE
    except PrangeError as err:
        print(f"prange: computation failed: {err}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
