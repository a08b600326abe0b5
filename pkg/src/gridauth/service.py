"""HTTP session service for registration and grid-challenge logins.

Flow: a login session is opened for a username and answered with a fresh
grid layout.  Each click is resolved against the layout that was on
screen, then the whole grid (header included) is reshuffled and returned.
The fourth accepted click triggers verification against the stored key
for the server's calendar day, with lockout bookkeeping.

Two deliberate behaviors beyond the happy path:

* Unknown usernames still get a syntactically normal ("decoy") session
  whose verification always fails, so the API cannot be used to
  enumerate accounts.
* Garbage-image clicks are accepted silently and consume an entry slot;
  only final verification fails.  Rejecting them eagerly would hand an
  observer an oracle separating pass copies from garbage.

Wire format (JSON):
    POST /api/v1/register            {"username"} -> 201 {"key"}
    POST /api/v1/sessions            {"username"} -> 201 {"session_id", "layout"}
    POST /api/v1/sessions/{id}/clicks {"row","col"} -> 200 {"entered","status","layout"|null}
    GET  /api/v1/sessions/{id}                     -> 200 {"status","entered"}
    errors -> {"error": str, "retry_after_seconds"?: int}
"""

from __future__ import annotations

import math
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import grid
from .clock import Clock
from .keys import KEY_LENGTH, KeyNumber, verify_key
from .store import (
    AccountStore,
    DuplicateUsernameError,
    StoreError,
    UsernameValidationError,
    validate_username,
)

DEFAULT_SESSION_TTL_SECONDS = 120
GARBAGE_SENTINEL = -1

# Terminal sessions are kept around for status polling, then dropped.
_SESSION_RETENTION = timedelta(hours=1)


class SessionStatus(str, Enum):
    IN_PROGRESS = "in_progress"
    SUCCEEDED = "succeeded"
    FAILED = "failed"
    EXPIRED = "expired"


@dataclass
class LoginSession:
    session_id: str
    username: str
    layout: grid.GridLayout
    created_at: datetime
    expires_at: datetime
    decoy: bool = False
    digits: list[int] = field(default_factory=list)
    status: SessionStatus = SessionStatus.IN_PROGRESS
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class RegisterBody(BaseModel):
    username: str


class SessionBody(BaseModel):
    username: str


class ClickBody(BaseModel):
    row: int
    col: int


def _error(status_code: int, message: str, retry_after: int | None = None) -> JSONResponse:
    body: dict = {"error": message}
    if retry_after is not None:
        body["retry_after_seconds"] = retry_after
    return JSONResponse(status_code=status_code, content=body)


class SessionRegistry:
    """In-memory session table; per-session work is serialized on the
    session's own lock, table changes on the registry lock."""

    def __init__(self):
        self._sessions: dict[str, LoginSession] = {}
        self._lock = threading.Lock()

    def create(self, session: LoginSession, now: datetime) -> None:
        with self._lock:
            cutoff = now - _SESSION_RETENTION
            stale = [sid for sid, s in self._sessions.items() if s.expires_at < cutoff]
            for sid in stale:
                del self._sessions[sid]
            self._sessions[session.session_id] = session

    def get(self, session_id: str) -> LoginSession | None:
        with self._lock:
            return self._sessions.get(session_id)


def create_app(
    store: AccountStore,
    *,
    clock: Clock | None = None,
    session_ttl_seconds: int = DEFAULT_SESSION_TTL_SECONDS,
    ui_dir: str | None = None,
) -> FastAPI:
    """Build the service around a store; the clock defaults to the store's.

    ``ui_dir`` optionally mounts a static web client at ``/``.
    """
    clock = clock if clock is not None else store.clock
    ttl = timedelta(seconds=session_ttl_seconds)
    registry = SessionRegistry()

    app = FastAPI(title="gridauth", docs_url=None, redoc_url=None, openapi_url=None)

    @app.exception_handler(RequestValidationError)
    async def _on_validation_error(request: Request, exc: RequestValidationError):
        return _error(400, "malformed request body")

    @app.exception_handler(StoreError)
    async def _on_store_error(request: Request, exc: StoreError):
        return _error(500, "storage failure")

    def _refresh_expiry(session: LoginSession, now: datetime) -> None:
        if session.status is SessionStatus.IN_PROGRESS and now >= session.expires_at:
            session.status = SessionStatus.EXPIRED

    def _finalize(session: LoginSession, now: datetime) -> None:
        """Verify the four entries against the stored key for today."""
        verified = False
        if not session.decoy:
            record = store.lookup(session.username)
            if record is not None and store.check_lockout(session.username, now) is None:
                if all(0 <= d <= 9 for d in session.digits):
                    entered = KeyNumber(tuple(session.digits))
                    verified = verify_key(entered, store.stored_key(record), now.day)
                if verified:
                    store.record_success(session.username)
                else:
                    store.record_failure(session.username, now)
        session.status = SessionStatus.SUCCEEDED if verified else SessionStatus.FAILED

    @app.post("/api/v1/register", status_code=201)
    async def register(body: RegisterBody):
        try:
            key = store.register(body.username)
        except UsernameValidationError as exc:
            return _error(400, str(exc))
        except DuplicateUsernameError:
            return _error(409, "username already registered")
        return JSONResponse(status_code=201, content={"key": key.render()})

    @app.post("/api/v1/sessions", status_code=201)
    async def open_session(body: SessionBody):
        try:
            validate_username(body.username)
        except UsernameValidationError as exc:
            return _error(400, str(exc))
        now = clock.now()
        record = store.lookup(body.username)
        decoy = record is None
        if not decoy:
            locked_until = store.check_lockout(body.username, now)
            if locked_until is not None:
                retry = max(0, math.ceil((locked_until - now).total_seconds()))
                return _error(423, "account locked", retry_after=retry)
        session = LoginSession(
            session_id=secrets.token_hex(16),
            username=body.username,
            layout=grid.generate_layout(),
            created_at=now,
            expires_at=now + ttl,
            decoy=decoy,
        )
        registry.create(session, now)
        return JSONResponse(
            status_code=201,
            content={"session_id": session.session_id, "layout": session.layout.to_wire()},
        )

    @app.post("/api/v1/sessions/{session_id}/clicks")
    async def click(session_id: str, body: ClickBody):
        session = registry.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        with session.lock:
            now = clock.now()
            _refresh_expiry(session, now)
            if session.status is SessionStatus.EXPIRED:
                return _error(410, "session expired")
            if session.status is not SessionStatus.IN_PROGRESS:
                return _error(409, "session already finished")
            if not (0 <= body.row < grid.GRID_SIZE and 0 <= body.col < grid.GRID_SIZE):
                return _error(400, "click out of range")
            result = grid.resolve_click(session.layout, body.row, body.col)
            if result.kind is grid.ClickKind.HEADER_CELL:
                return _error(400, "header row is not clickable")
            if result.kind is grid.ClickKind.DIGIT:
                session.digits.append(result.value)
            else:
                session.digits.append(GARBAGE_SENTINEL)
            if len(session.digits) < KEY_LENGTH:
                session.layout = grid.reshuffle_after_click()
                layout_wire = session.layout.to_wire()
            else:
                _finalize(session, now)
                layout_wire = None
            return {
                "entered": len(session.digits),
                "status": session.status.value,
                "layout": layout_wire,
            }

    @app.get("/api/v1/sessions/{session_id}")
    async def session_status(session_id: str):
        session = registry.get(session_id)
        if session is None:
            return _error(404, "unknown session")
        with session.lock:
            _refresh_expiry(session, clock.now())
            return {"status": session.status.value, "entered": len(session.digits)}

    if ui_dir is not None:
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
