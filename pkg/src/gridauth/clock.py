"""Injectable time source.

Key verification, session expiry, and lockout bookkeeping all depend on
"now" in a single configured timezone.  Production code uses
:class:`SystemClock`; tests and the attack harness use :class:`MockClock`
so lockout windows elapse in microseconds.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Protocol
from zoneinfo import ZoneInfo


class Clock(Protocol):
    def now(self) -> datetime:
        """Current timezone-aware instant."""
        ...


class SystemClock:
    """Wall clock pinned to one timezone (default UTC)."""

    def __init__(self, tz: str = "UTC"):
        self.tz = ZoneInfo(tz) if tz != "UTC" else timezone.utc

    def now(self) -> datetime:
        return datetime.now(self.tz)


class MockClock:
    """Manually advanced clock for tests and model-time simulations."""

    def __init__(self, start: datetime):
        if start.tzinfo is None:
            raise ValueError("MockClock requires a timezone-aware start")
        self._now = start

    def now(self) -> datetime:
        return self._now

    def advance(self, seconds: float) -> None:
        self._now += timedelta(seconds=seconds)

    def set(self, instant: datetime) -> None:
        if instant.tzinfo is None:
            raise ValueError("MockClock requires a timezone-aware instant")
        self._now = instant


def day_of_month(clock: Clock) -> int:
    """Calendar day (1-31) of the clock's current instant."""
    return clock.now().day
