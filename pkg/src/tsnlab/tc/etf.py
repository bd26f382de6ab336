"""Earliest-txtime-first scheduling with late drop.

Frames carry an absolute launch instant.  The discipline holds each frame
until ``txtime - delta`` and hands it to the driver inside that final window,
so a release time r always satisfies txtime - delta <= r <= txtime.  A frame
whose txtime already passed is dropped, on enqueue and on dequeue alike,
mirroring how the kernel refuses to send stale scheduled packets.
"""
from __future__ import annotations

import itertools
from heapq import heappop, heappush

from . import Qdisc


class EtfQdisc(Qdisc):
    __slots__ = ("delta_ns", "skip_sock_check", "limit", "_heap", "_tie")

    def __init__(self, delta_ns: int, skip_sock_check: bool = False, limit: int = 1000) -> None:
        super().__init__()
        if delta_ns < 0:
            raise ValueError("delta_ns must be non-negative")
        self.delta_ns = delta_ns
        self.skip_sock_check = skip_sock_check
        self.limit = limit
        self._heap: list = []
        self._tie = itertools.count()

    def enqueue(self, frame, now: int) -> bool:
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now
        txtime = frame.txtime
        if txtime is None:
            self._drop(frame, "no_txtime")
            return False
        if not self.skip_sock_check and not frame.sock_txtime:
            self._drop(frame, "sock_check")
            return False
        if now > txtime:
            self._drop(frame, "late")
            return False
        if len(self._heap) >= self.limit:
            self._drop(frame, "overlimit")
            return False
        heappush(self._heap, (txtime, next(self._tie), frame))
        return True

    def dequeue(self, now: int):
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now
        heap = self._heap
        while heap:
            txtime, _, frame = heap[0]
            if now > txtime:
                heappop(heap)
                self._drop(frame, "late")
                continue
            if now >= txtime - self.delta_ns:
                heappop(heap)
                return frame
            return None
        return None

    def next_ready(self, now: int):
        if not self._heap:
            return None
        return max(now, self._heap[0][0] - self.delta_ns)

    def push_scheduled(self, frame, now: int):
        """Enqueue and report when the frame could release: False when
        refused, else ``txtime - delta``.

        Ports use this to arm their service timer straight from the
        enqueue instead of polling the queue they just fed."""
        if not self.enqueue(frame, now):
            return False
        return frame.txtime - self.delta_ns

    def dequeue_or_next(self, now: int):
        """One walk answering both service questions as ``(frame, hint)``:
        the frame to release now, or failing that the earliest future
        release instant.

        Equivalent to ``dequeue`` followed by ``next_ready`` on a miss,
        fused because the port asks both on every service event.  When a
        frame comes back the hint describes what remains behind it (None
        once the queue drained), letting a parent track occupancy without
        a second look; a hint next to a frame may already have passed and
        is a should-I-come-back answer, not a wake-up instant."""
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now
        heap = self._heap
        delta = self.delta_ns
        while heap:
            txtime, _, frame = heap[0]
            if now > txtime:
                heappop(heap)
                self._drop(frame, "late")
                continue
            if now >= txtime - delta:
                heappop(heap)
                return frame, (heap[0][0] - delta if heap else None)
            return None, txtime - delta
        return None, None

    def __len__(self) -> int:
        return len(self._heap)
