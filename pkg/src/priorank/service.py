"""HTTP facade over elicitation sessions.

A thin projection of the in-process state machine: anything reachable here is
reachable through :mod:`priorank.elicitation` with identical outcomes.

Endpoints:

- ``POST /sessions``: create from a project payload, run the first solve.
- ``GET /sessions/{id}``: full public state (lock-free snapshot).
- ``POST /sessions/{id}/responses``: submit verdicts; when nothing stays
  pending the re-solve runs on a worker thread and ``solving`` turns true
  until it lands (poll the GET endpoint).
- ``GET /sessions/{id}/ranking``: final ranking of a terminal session.
- ``GET /healthz``: liveness.

One mutation at a time per session: a second concurrent submit is rejected
with 409 and ``retry: true``. Sessions are persisted to the data directory on
every submit and every terminal transition, and lazily reloaded from it.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .elicitation import AnalystResponse, ElicitationSession, SessionStatus, Verdict
from .errors import (
    InfeasibleError,
    ModelValidationError,
    ProjectValidationError,
    SessionStateError,
    SnapshotError,
)
from .metrics import average_distance, disagreement
from .project_io import Project, load_project, load_session_file, save_session

DEFAULT_SOLVE_TIME_BUDGET = 30.0


def _cost_json(cost) -> Any:
    if isinstance(cost, Fraction):
        return str(cost)
    return cost


@dataclass
class ManagedSession:
    session: ElicitationSession
    project: Project
    session_id: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    solving: bool = False
    state_cache: dict = field(default_factory=dict)
    solve_error: str | None = None


def build_state(managed: ManagedSession) -> dict:
    """Serialize the public view of a session. Caller must hold the lock."""
    session = managed.session
    result = session.last_result
    state: dict[str, Any] = {
        "session_id": managed.session_id,
        "status": session.status.value,
        "solving": managed.solving,
        "iteration": session.iteration,
        "budget": {
            "max": session.max_eli_pair,
            "used": session.eli_pair,
            "remaining": session.budget_remaining(),
        },
        "pending": [
            {"pair": list(q.pair), "frequency": q.frequency} for q in session.pending_queries
        ],
        "requirements": [
            {"id": r.id, "title": r.title, "priority": r.priority_level}
            for r in session.requirements
        ],
        "history": [
            {"pair": list(h.pair), "verdict": h.verdict.value, "iteration": h.iteration}
            for h in session.history
        ],
        "warnings": list(session.warnings),
        "cost": None,
        "solution_count": 0,
        "exhausted": None,
        "metrics": None,
        "ranking": None,
    }
    if managed.solve_error is not None:
        state["error"] = managed.solve_error
    if result is not None:
        state["cost"] = _cost_json(result.cost)
        state["solution_count"] = len(result.solutions)
        state["exhausted"] = result.exhausted
        best = result.solutions[0]
        metrics: dict[str, Any] = {"cost": _cost_json(result.cost)}
        if session.gold is not None:
            metrics["disagreement_gs"] = disagreement(best, session.gold)
            metrics["avg_distance_gs"] = average_distance(best, session.gold)
        state["metrics"] = metrics
        if session.is_terminal():
            state["ranking"] = list(session.final_ranking().order)
    return state


def create_app(
    data_dir: str | Path | None = None,
    *,
    solve_time_budget: float | None = DEFAULT_SOLVE_TIME_BUDGET,
) -> FastAPI:
    app = FastAPI(title="priorank", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict[str, ManagedSession] = {}
    registry_lock = threading.Lock()
    app.state.sessions = sessions
    storage = Path(data_dir) if data_dir is not None else None
    if storage is not None:
        storage.mkdir(parents=True, exist_ok=True)

    def persist(managed: ManagedSession) -> None:
        if storage is not None:
            save_session(managed.session, managed.project, storage / f"{managed.session_id}.session")

    def lookup(session_id: str) -> ManagedSession | None:
        with registry_lock:
            managed = sessions.get(session_id)
        if managed is not None:
            return managed
        if storage is None:
            return None
        path = storage / f"{session_id}.session"
        if not path.exists():
            return None
        try:
            session, project = load_session_file(path)
        except SnapshotError:
            return None
        managed = ManagedSession(session=session, project=project, session_id=session_id)
        with managed.lock:
            managed.state_cache = build_state(managed)
        with registry_lock:
            managed = sessions.setdefault(session_id, managed)
        return managed

    def error_response(status_code: int, payload: dict) -> JSONResponse:
        return JSONResponse(status_code=status_code, content=payload)

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(payload: dict) -> Any:
        raw_project = payload.get("project")
        if raw_project is None:
            return error_response(400, {"errors": [{"path": "$.project", "message": "missing"}]})
        budget = payload.get("budget", 100)
        solution_cap = payload.get("solution_cap", 50)
        if not isinstance(budget, int) or isinstance(budget, bool) or budget < 0:
            return error_response(400, {"errors": [{"path": "$.budget", "message": "must be a non-negative integer"}]})
        if not isinstance(solution_cap, int) or isinstance(solution_cap, bool) or solution_cap < 1:
            return error_response(400, {"errors": [{"path": "$.solution_cap", "message": "must be a positive integer"}]})
        try:
            project = load_project(json.dumps(raw_project))
        except ProjectValidationError as exc:
            return error_response(
                400,
                {"errors": [{"path": issue.path, "message": issue.message} for issue in exc.issues]},
            )
        session = project.build_session(
            max_eli_pair=budget, solution_cap=solution_cap, time_budget=solve_time_budget
        )
        session_id = uuid.uuid4().hex
        managed = ManagedSession(session=session, project=project, session_id=session_id)
        try:
            with managed.lock:
                session.step()
                managed.state_cache = build_state(managed)
        except InfeasibleError as exc:
            return error_response(422, {"error": str(exc), "cycle": list(exc.cycle)})
        with registry_lock:
            sessions[session_id] = managed
        persist(managed)
        return {"session_id": session_id, "state": managed.state_cache}

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> Any:
        managed = lookup(session_id)
        if managed is None:
            return error_response(404, {"error": f"unknown session {session_id!r}"})
        state = dict(managed.state_cache)
        state["solving"] = managed.solving
        return state

    @app.post("/sessions/{session_id}/responses")
    def submit_responses(session_id: str, payload: dict) -> Any:
        managed = lookup(session_id)
        if managed is None:
            return error_response(404, {"error": f"unknown session {session_id!r}"})
        raw_responses = payload.get("responses")
        if not isinstance(raw_responses, list):
            return error_response(400, {"errors": [{"path": "$.responses", "message": "must be a list"}]})
        try:
            responses = [
                AnalystResponse(pair=tuple(item["pair"]), verdict=Verdict(item["verdict"]))
                for item in raw_responses
            ]
        except (KeyError, TypeError, ValueError, ModelValidationError) as exc:
            return error_response(400, {"errors": [{"path": "$.responses", "message": str(exc)}]})

        if not managed.lock.acquire(blocking=False):
            return error_response(409, {"error": "another update is in flight", "retry": True})
        release_in_thread = False
        try:
            try:
                managed.session.submit_responses(responses)
            except SessionStateError as exc:
                return error_response(409, {"error": str(exc)})
            if managed.session.pending_queries or managed.session.is_terminal():
                managed.state_cache = build_state(managed)
                persist(managed)
                return {"session_id": session_id, "state": managed.state_cache}
            # batch complete: re-solve off-thread, callers poll until it lands
            managed.solving = True
            managed.state_cache = build_state(managed)
            release_in_thread = True
            worker = threading.Thread(target=_finish_step, args=(managed,), daemon=True)
            worker.start()
            return {"session_id": session_id, "state": managed.state_cache}
        finally:
            if not release_in_thread:
                managed.lock.release()

    def _finish_step(managed: ManagedSession) -> None:
        # The submit handler passed its lock to this thread; release when done.
        try:
            managed.session.step()
        except Exception as exc:  # surfaced via state, never kills the worker
            managed.solve_error = str(exc)
        finally:
            managed.solving = False
            managed.state_cache = build_state(managed)
            persist(managed)
            managed.lock.release()

    @app.get("/sessions/{session_id}/ranking")
    def get_ranking(session_id: str) -> Any:
        managed = lookup(session_id)
        if managed is None:
            return error_response(404, {"error": f"unknown session {session_id!r}"})
        if managed.solving:
            return error_response(409, {"error": "solve in progress", "retry": True})
        session = managed.session
        if not session.is_terminal():
            return error_response(409, {"error": "session is still active"})
        return {
            "session_id": session_id,
            "status": session.status.value,
            "cost": _cost_json(session.last_result.cost),
            "ranking": list(session.final_ranking().order),
        }

    return app
