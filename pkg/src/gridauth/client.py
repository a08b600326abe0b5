"""Headless client for the login API.

Drives the same JSON endpoints a browser would, choosing for each wanted
digit the first matching cell in row-major order (deterministic, which
is what tests and the attack harness need).  Works against a live server
or any httpx-compatible in-process transport.
"""

from __future__ import annotations

from dataclasses import dataclass

import httpx

from .grid import GridLayout
from .keys import KeyNumber


class TransportError(Exception):
    """Network or protocol failure talking to the service."""


class ProtocolError(TransportError):
    """The service answered with an unexpected status or body."""


@dataclass(frozen=True, slots=True)
class LoginOutcome:
    status: str  # "succeeded" | "failed" | "locked"
    retry_after_seconds: int | None = None


def find_cell_for_digit(layout: GridLayout, digit: int) -> tuple[int, int]:
    """First clickable cell (row-major, rows 1-9) showing header image ``digit``."""
    wanted = layout.header[digit]
    for row in range(1, len(layout.cells)):
        for col, image_id in enumerate(layout.cells[row]):
            if image_id == wanted:
                return row, col
    raise ProtocolError(f"layout has no clickable copy for digit {digit}")


class AuthClient:
    """Thin wrapper over one httpx client bound to the service base URL."""

    def __init__(self, http: httpx.Client):
        self._http = http

    def _post(self, path: str, payload: dict) -> httpx.Response:
        try:
            return self._http.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise TransportError(f"request failed: {exc}") from exc

    def register(self, username: str) -> str:
        resp = self._post("/api/v1/register", {"username": username})
        if resp.status_code != 201:
            raise ProtocolError(self._describe(resp))
        return resp.json()["key"]

    def open_session(self, username: str) -> tuple[str, GridLayout] | LoginOutcome:
        """New session id and layout, or a locked outcome (423)."""
        resp = self._post("/api/v1/sessions", {"username": username})
        if resp.status_code == 423:
            body = resp.json()
            return LoginOutcome("locked", body.get("retry_after_seconds"))
        if resp.status_code != 201:
            raise ProtocolError(self._describe(resp))
        body = resp.json()
        return body["session_id"], GridLayout.from_wire(body["layout"])

    def click(self, session_id: str, row: int, col: int) -> dict:
        resp = self._post(f"/api/v1/sessions/{session_id}/clicks", {"row": row, "col": col})
        if resp.status_code != 200:
            raise ProtocolError(self._describe(resp))
        return resp.json()

    def session_status(self, session_id: str) -> dict:
        try:
            resp = self._http.get(f"/api/v1/sessions/{session_id}")
        except httpx.HTTPError as exc:
            raise TransportError(f"request failed: {exc}") from exc
        if resp.status_code != 200:
            raise ProtocolError(self._describe(resp))
        return resp.json()

    def login(self, username: str, key: KeyNumber) -> LoginOutcome:
        """Full login flow: open a session and click the four key digits."""
        opened = self.open_session(username)
        if isinstance(opened, LoginOutcome):
            return opened
        session_id, layout = opened
        for index, digit in enumerate(key.digits):
            row, col = find_cell_for_digit(layout, digit)
            body = self.click(session_id, row, col)
            if index < len(key.digits) - 1:
                if body.get("layout") is None:
                    raise ProtocolError("service omitted the reshuffled layout")
                layout = GridLayout.from_wire(body["layout"])
        final = body["status"]
        if final not in ("succeeded", "failed"):
            raise ProtocolError(f"unexpected final status: {final}")
        return LoginOutcome(final)

    @staticmethod
    def _describe(resp: httpx.Response) -> str:
        try:
            detail = resp.json().get("error", "")
        except ValueError:
            detail = resp.text[:200]
        return f"HTTP {resp.status_code}: {detail}"
