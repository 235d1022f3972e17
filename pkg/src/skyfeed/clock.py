"""Microsecond clocks: a wall clock for live runs and a virtual one for deterministic tests."""

from __future__ import annotations

import threading
import time


class WallClock:
    def __init__(self):
        self._origin = time.perf_counter_ns()

    def now_micros(self) -> int:
        return (time.perf_counter_ns() - self._origin) // 1000

    def sleep(self, micros: int) -> None:
        if micros > 0:
            time.sleep(micros / 1e6)

    def sleep_until(self, micros: int) -> None:
        self.sleep(micros - self.now_micros())


class VirtualClock:
    """Time moves only when somebody sleeps or the owner calls :meth:`advance_to`."""

    def __init__(self, start_micros: int = 0):
        self._now = int(start_micros)
        self._lock = threading.Lock()

    def now_micros(self) -> int:
        return self._now

    def sleep(self, micros: int) -> None:
        if micros > 0:
            with self._lock:
                self._now += int(micros)

    def sleep_until(self, micros: int) -> None:
        self.advance_to(micros)

    def advance_to(self, micros: int) -> None:
        """Move forward to ``micros``; never moves backwards."""
        with self._lock:
            self._now = max(self._now, int(micros))
