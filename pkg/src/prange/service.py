"""HTTP service for one constraint system and one editing session.

Range computation can take minutes on large systems, so GET /api/ranges
never blocks: a background worker fills the cache and /api/ranges/status
reports progress for polling clients. All session mutations serialize
through one lock; mutating while a computation is in flight is a 409.

Error responses carry {"error": <code>, "detail": <message>} with 400
for bad requests, 409 for state conflicts, 422 for out-of-range values.
"""
from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .errors import (EmptyHistory, ModelError, OutOfRange, PrangeError,
                     SelectionError, StaleRanges, UnknownParameter)
from .model import ConstraintSystem
from .ranges import solve_system
from .session import EditingSession
from .settings import SolverSettings

_STATUS_MAP = (
    (OutOfRange, 422, "out-of-range"),
    (StaleRanges, 409, "stale-ranges"),
    (EmptyHistory, 409, "empty-history"),
    (UnknownParameter, 400, "unknown-parameter"),
    (SelectionError, 400, "bad-selection"),
    (ModelError, 400, "model"),
)


class _Busy(PrangeError):
    pass


class _State:
    def __init__(self, system: ConstraintSystem, settings: SolverSettings):
        self.system = system
        self.settings = settings
        self.session: EditingSession | None = None
        self.lock = threading.Lock()
        self.executor = ThreadPoolExecutor(max_workers=1)
        self.computing = False
        self.compute_error: str | None = None
        self.solution: dict | None = None
        self.residual: float | None = None
        try:
            fixed = {p.name: p.value for p in system.parameters}
            self.solution, self.residual = solve_system(system, fixed, settings)
        except PrangeError:
            pass

    def require_idle(self) -> None:
        if self.computing:
            raise _Busy("ranges are still being computed")

    def start_ranges(self) -> None:
        """Kick the background computation; caller holds the lock."""
        session = self.session
        if session is None or not session.unassigned or not session.stale:
            return
        self.computing = True
        self.compute_error = None

        def work():
            try:
                session.ranges()
            except PrangeError as err:
                self.compute_error = str(err)
            finally:
                self.computing = False

        self.executor.submit(work)


def _error_response(err: Exception) -> JSONResponse:
    if isinstance(err, _Busy):
        return JSONResponse(status_code=409,
                            content={"error": "busy", "detail": str(err)})
    for cls, status, code in _STATUS_MAP:
        if isinstance(err, cls):
            content = {"error": code, "detail": str(err)}
            if isinstance(err, OutOfRange) and err.intervals:
                content["intervals"] = err.intervals
            return JSONResponse(status_code=status, content=content)
    return JSONResponse(status_code=500,
                        content={"error": "computation", "detail": str(err)})


def _ranges_content(session: EditingSession) -> dict:
    return {"ranges": {name: entry.to_report()
                       for name, entry in {**session.last_ranges,
                                           **session.range_errors}.items()},
            "assigned": session.assigned,
            "unassigned": session.unassigned}


def create_app(system: ConstraintSystem,
               settings: SolverSettings | None = None) -> FastAPI:
    state = _State(system, settings or SolverSettings())
    app = FastAPI(title="prange")
    app.state.prange = state

    @app.exception_handler(PrangeError)
    async def prange_error_handler(request: Request, err: PrangeError):
        return _error_response(err)

    @app.get("/api/system")
    def get_system():
        doc = state.system.to_json()
        doc["selected"] = state.session.variable_params if state.session else []
        doc["assigned"] = state.session.assigned if state.session else {}
        return doc

    @app.post("/api/select")
    async def post_select(request: Request):
        body = await request.json()
        names = body.get("variables")
        if not isinstance(names, list):
            raise SelectionError('body must be {"variables": [names...]}')
        with state.lock:
            state.require_idle()
            state.session = EditingSession(state.system, [str(n) for n in names],
                                           state.settings, eager=False)
            state.start_ranges()
        return {"selected": names, "status": "computing"}

    @app.get("/api/ranges")
    def get_ranges():
        with state.lock:
            session = state.session
            if session is None:
                raise SelectionError("no session; POST /api/select first")
            if state.computing:
                return JSONResponse(status_code=202,
                                    content={"status": "computing"})
            if session.stale and session.unassigned:
                state.start_ranges()
                return JSONResponse(status_code=202,
                                    content={"status": "computing"})
            return _ranges_content(session)

    @app.get("/api/ranges/status")
    def get_status():
        with state.lock:
            if state.session is None:
                return {"status": "no-session"}
            if state.computing:
                return {"status": "computing"}
            if state.compute_error:
                return {"status": "error", "detail": state.compute_error}
            if state.session.stale and state.session.unassigned:
                return {"status": "stale"}
            return {"status": "ready"}

    @app.post("/api/assign")
    async def post_assign(request: Request):
        body = await request.json()
        try:
            name = str(body["parameter"])
            value = float(body["value"])
        except (KeyError, TypeError, ValueError):
            raise SelectionError('body must be {"parameter": name, "value": number}')
        with state.lock:
            state.require_idle()
            if state.session is None:
                raise SelectionError("no session; POST /api/select first")
            state.session.assign(name, value)
            state.start_ranges()
            done = not state.session.unassigned
        return {"assigned": {name: value},
                "status": "done" if done else "computing"}

    @app.post("/api/undo")
    def post_undo():
        with state.lock:
            state.require_idle()
            if state.session is None:
                raise SelectionError("no session; POST /api/select first")
            state.session.undo()
            state.start_ranges()
        return {"assigned": state.session.assigned, "status": "computing"}

    @app.post("/api/finalize")
    def post_finalize():
        with state.lock:
            state.require_idle()
            if state.session is None:
                raise SelectionError("no session; POST /api/select first")
            if state.session.unassigned:
                raise StaleRanges(
                    f"unassigned parameters remain: {state.session.unassigned}")
            slots, residual = state.session.finalize()
            state.solution, state.residual = slots, residual
        return {"solution": slots, "residual": residual}

    @app.get("/api/solution")
    def get_solution():
        return {"solution": state.solution, "residual": state.residual}

    return app
