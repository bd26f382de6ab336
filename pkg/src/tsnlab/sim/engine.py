"""Event loop.

A heap of (time, tick, callback, argument) tuples.  The tick makes ordering
total, so two events at the same instant always fire in the order they were
scheduled and a run is reproducible exactly.  Time is integer nanoseconds and
only moves forward; scheduling into the past is a bug and raises immediately
rather than corrupting causality.

Callbacks take (t, arg).  ``schedule`` is the normal entry point; the hot
paths inside this package push onto ``pending`` directly, which is part of
the class contract: an event is a ``(t, tick(), fn, arg)`` tuple with
``t >= now``, and ``fn(t, arg)`` is invoked when it pops.  A seven-figure
cycle count leaves no room for spare stack frames.
"""
from __future__ import annotations

import gc
from heapq import heappop, heappush
from itertools import count


class Engine:
    __slots__ = ("now", "pending", "tick", "_running")

    def __init__(self) -> None:
        self.now = 0
        self.pending: list = []
        self.tick = count().__next__
        self._running = False

    def schedule(self, t: int, fn, arg=None) -> None:
        if t < self.now:
            raise ValueError(f"cannot schedule at {t}, now is {self.now}")
        heappush(self.pending, (t, self.tick(), fn, arg))

    def run(self, until: int | None = None) -> None:
        """Dispatch events in order; stop when drained or past ``until``.

        The collector is paused while dispatching: the loop allocates only
        acyclic tuples and frames, so generation-0 scans find nothing that
        reference counting does not already reclaim."""
        heap = self.pending
        pop = heappop
        self._running = True
        gc_was_on = gc.isenabled()
        gc.disable()
        try:
            if until is None:
                while heap and self._running:
                    t, _, fn, arg = pop(heap)
                    self.now = t
                    fn(t, arg)
            else:
                while heap and self._running and heap[0][0] <= until:
                    t, _, fn, arg = pop(heap)
                    self.now = t
                    fn(t, arg)
                if until > self.now:
                    self.now = until
        finally:
            if gc_was_on:
                gc.enable()
            self._running = False

    def stop(self) -> None:
        self._running = False

    def __len__(self) -> int:
        return len(self.pending)
