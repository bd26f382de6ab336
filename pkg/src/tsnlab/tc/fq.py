"""Fair queueing with CoDel per flow, the distribution-default discipline.

Flows are kept in explicit new/old round-robin lists with byte deficits, so
scheduling is fully deterministic; there is no hash seeding involved.  Flow
identity comes from the frame's ``flow`` attribute when present, falling
back to the PCP, which makes a single publisher stream collapse into one
flow exactly as it would on a quiet machine.

CoDel watches how long packets sit in a flow's queue.  Once the head's
sojourn time has stayed above ``target_ns`` for a whole ``interval_ns``, it
drops the head and keeps dropping on a tightening schedule
(interval / sqrt(count)) until the sojourn dips below target again.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from . import Qdisc


@dataclass
class _Flow:
    q: deque = field(default_factory=deque)  # (enqueue_ns, frame)
    deficit: int = 0
    new: bool = True
    # CoDel state
    count: int = 0
    lastcount: int = 0
    dropping: bool = False
    first_above_ns: int = 0
    drop_next_ns: int = 0


class FqCodelQdisc(Qdisc):
    __slots__ = ("target_ns", "interval_ns", "quantum", "limit", "_flows", "_new", "_old", "_count")

    def __init__(
        self,
        target_ns: int = 5_000_000,
        interval_ns: int = 100_000_000,
        quantum: int = 1514,
        limit: int = 10240,
    ) -> None:
        super().__init__()
        self.target_ns = target_ns
        self.interval_ns = interval_ns
        self.quantum = quantum
        self.limit = limit
        self._flows: dict = {}
        self._new: deque = deque()
        self._old: deque = deque()
        self._count = 0

    @staticmethod
    def _key(frame):
        flow = getattr(frame, "flow", None)
        return flow if flow is not None else frame.pcp

    def enqueue(self, frame, now: int) -> bool:
        self._check_time(now)
        if self._count >= self.limit:
            fat = max(self._flows.values(), key=lambda f: len(f.q))
            if not fat.q:
                self._drop(frame, "overlimit")
                return False
            _, victim = fat.q.popleft()
            self._count -= 1
            self._drop(victim, "overlimit")
        key = self._key(frame)
        flow = self._flows.get(key)
        if flow is None:
            flow = _Flow(deficit=self.quantum)
            self._flows[key] = flow
        if not flow.q and flow not in self._new and flow not in self._old:
            flow.new = True
            flow.deficit = self.quantum
            self._new.append(flow)
        flow.q.append((now, frame))
        self._count += 1
        return True

    def _control_law(self, t: int, count: int) -> int:
        return t + int(self.interval_ns / math.sqrt(count))

    def _codel_pop(self, flow: _Flow, now: int):
        """CoDel head-drop logic for one flow; returns a frame or None."""
        while flow.q:
            t_enq, frame = flow.q[0]
            sojourn = now - t_enq
            if sojourn < self.target_ns:
                flow.first_above_ns = 0
                flow.dropping = False
                flow.q.popleft()
                self._count -= 1
                return frame
            if not flow.dropping:
                if flow.first_above_ns == 0:
                    flow.first_above_ns = now + self.interval_ns
                    flow.q.popleft()
                    self._count -= 1
                    return frame
                if now < flow.first_above_ns:
                    flow.q.popleft()
                    self._count -= 1
                    return frame
                # Sojourn stayed above target for a full interval: enter
                # the dropping state.
                flow.dropping = True
                delta = flow.count - flow.lastcount
                flow.count = 1
                if delta > 1 and now - flow.drop_next_ns < 8 * self.interval_ns:
                    flow.count = delta
                flow.lastcount = flow.count
                flow.q.popleft()
                self._count -= 1
                self._drop(frame, "codel")
                flow.drop_next_ns = self._control_law(now, flow.count)
                continue
            if now >= flow.drop_next_ns:
                flow.count += 1
                flow.q.popleft()
                self._count -= 1
                self._drop(frame, "codel")
                flow.drop_next_ns = self._control_law(flow.drop_next_ns, flow.count)
                continue
            flow.q.popleft()
            self._count -= 1
            return frame
        flow.dropping = False
        return None

    def dequeue(self, now: int):
        self._check_time(now)
        guard = len(self._new) + len(self._old) + 2
        for _ in range(guard * 2):
            if self._new:
                lst, flow = self._new, self._new[0]
            elif self._old:
                lst, flow = self._old, self._old[0]
            else:
                return None
            if flow.deficit <= 0:
                flow.deficit += self.quantum
                lst.popleft()
                flow.new = False
                self._old.append(flow)
                continue
            frame = self._codel_pop(flow, now)
            if frame is None:
                lst.popleft()
                if flow.new and self._old:
                    flow.new = False
                    self._old.append(flow)
                continue
            flow.deficit -= frame.physical_bytes
            return frame
        return None

    def next_ready(self, now: int):
        return now if self._count else None

    def __len__(self) -> int:
        return self._count
