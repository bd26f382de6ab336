"""Strict-priority multiqueue scheduling (mqprio) and its FIFO building block."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import Qdisc


class FifoQdisc(Qdisc):
    """Tail-drop FIFO, the default per-queue child."""

    __slots__ = ("limit", "_q")

    def __init__(self, limit: int = 1000) -> None:
        super().__init__()
        if limit < 1:
            raise ValueError("limit must be positive")
        self.limit = limit
        self._q: deque = deque()

    def enqueue(self, frame, now: int) -> bool:
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now
        if len(self._q) >= self.limit:
            self._drop(frame, "overlimit")
            return False
        self._q.append(frame)
        return True

    def dequeue(self, now: int):
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now
        return self._q.popleft() if self._q else None

    def next_ready(self, now: int):
        return now if self._q else None

    def __len__(self) -> int:
        return len(self._q)


@dataclass(frozen=True)
class PriorityMap:
    """How PCP values fan out over traffic classes and hardware queues.

    Lower queue index means earlier service.  PCPs beyond the map fall back
    to traffic class 0.
    """

    num_tc: int
    prio_to_tc: tuple[int, ...]
    tc_to_queue: tuple[int, ...]

    def __post_init__(self) -> None:
        if not 1 <= self.num_tc <= 16:
            raise ValueError(f"num_tc out of range: {self.num_tc}")
        if len(self.tc_to_queue) != self.num_tc:
            raise ValueError("tc_to_queue must have one entry per traffic class")
        if any(not 0 <= tc < self.num_tc for tc in self.prio_to_tc):
            raise ValueError("prio_to_tc references an undefined traffic class")
        if any(q < 0 for q in self.tc_to_queue):
            raise ValueError("queue indices must be non-negative")

    @property
    def num_queues(self) -> int:
        return max(self.tc_to_queue) + 1

    def tc_of(self, pcp: int) -> int:
        return self.prio_to_tc[pcp] if 0 <= pcp < len(self.prio_to_tc) else 0

    def queue_of(self, pcp: int) -> int:
        return self.tc_to_queue[self.tc_of(pcp)]


#: Audio/video bridging style layout on a four-queue adapter: PCP 3 lands in
#: the highest traffic class and is served from hardware queue 0 first.
DEFAULT_QAV_MAP = PriorityMap(
    num_tc=8,
    prio_to_tc=(1, 0, 6, 7, 2, 3, 4, 5),
    tc_to_queue=(3, 3, 3, 3, 3, 2, 1, 0),
)


class MqprioQdisc(Qdisc):
    """Classifies by PCP and serves hardware queues in strict index order.

    Each queue is backed by a child discipline (FIFO unless given), so a
    shaper can be attached to an individual queue the way tc stacks qdiscs.
    """

    __slots__ = ("pmap", "children", "_pcp_child", "_drop_hook")

    def __init__(self, pmap: PriorityMap = DEFAULT_QAV_MAP, children: list[Qdisc] | None = None) -> None:
        super().__init__()
        self.pmap = pmap
        if children is None:
            children = [FifoQdisc() for _ in range(pmap.num_queues)]
        if len(children) != pmap.num_queues:
            raise ValueError(f"expected {pmap.num_queues} children, got {len(children)}")
        self.children = children
        self._pcp_child = tuple(children[pmap.queue_of(p)] for p in range(8))

    @property
    def drop_hook(self):
        return self._drop_hook

    @drop_hook.setter
    def drop_hook(self, hook) -> None:
        self._drop_hook = hook
        for child in getattr(self, "children", ()):
            child.drop_hook = hook

    def enqueue(self, frame, now: int) -> bool:
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now
        pcp = frame.pcp
        if 0 <= pcp < 8:
            return self._pcp_child[pcp].enqueue(frame, now)
        return self.children[self.pmap.queue_of(pcp)].enqueue(frame, now)

    def dequeue(self, now: int):
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now
        for child in self.children:
            frame = child.dequeue(now)
            if frame is not None:
                return frame
        return None

    def next_ready(self, now: int):
        times = [t for c in self.children if (t := c.next_ready(now)) is not None]
        return min(times) if times else None

    def __len__(self) -> int:
        return sum(map(len, self.children))
