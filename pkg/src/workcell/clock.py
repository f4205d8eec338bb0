"""Workcell time authority.

All holons stamp events from one shared clock. The default clock is a
discrete-event clock that only moves when something advances it, so test
runs and scenario replays finish instantly and produce identical
timestamps. The wall clock variant scales advances 1:1 for watchable
demos.
"""

from __future__ import annotations

import threading
import time


class Clock:
    """Discrete-event clock; advances only on request."""

    def __init__(self, start_ms: int = 0):
        self._now = int(start_ms)
        self._lock = threading.Lock()

    def now_ms(self) -> int:
        with self._lock:
            return self._now

    def advance(self, ms: int) -> int:
        """Move the clock forward and return the new time."""
        if ms < 0:
            raise ValueError("clock cannot move backwards")
        with self._lock:
            self._now += int(ms)
            return self._now

    @property
    def realtime(self) -> bool:
        return False


class WallClock(Clock):
    """Real-time clock; advance() actually waits."""

    def __init__(self, start_ms: int = 0):
        super().__init__(start_ms)
        self._t0 = time.monotonic()
        self._base = int(start_ms)

    def now_ms(self) -> int:
        return self._base + int((time.monotonic() - self._t0) * 1000)

    def advance(self, ms: int) -> int:
        if ms < 0:
            raise ValueError("clock cannot move backwards")
        time.sleep(ms / 1000.0)
        return self.now_ms()

    @property
    def realtime(self) -> bool:
        return True
