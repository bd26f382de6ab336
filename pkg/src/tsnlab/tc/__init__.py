"""Egress queueing disciplines.

Every discipline schedules opaque frame objects; the only contract is a set
of attributes:

    pcp             802.1Q priority code point, classifies the frame
    physical_bytes  size on the wire including preamble and gap
    txtime          scheduled launch instant in ns, or None
    sock_txtime     True when the sender stamped txtime itself

Times are integer nanoseconds on the port's clock.  The common interface is
deliberately small so a port can drive any discipline the same way:

    enqueue(frame, now) -> bool   False means the frame was dropped
    dequeue(now) -> frame | None  None means nothing is releasable yet
    next_ready(now) -> int | None earliest instant dequeue could succeed
    __len__() -> int              frames currently held

``next_ready`` is a hint for timer placement: it may be conservative (early),
in which case a dequeue attempt at that time simply returns None and the
caller re-arms, but it must never be later than the true release time.
Dropped frames are reported through ``drop_hook(frame, reason)`` when set.
"""
from __future__ import annotations


class Qdisc:
    """Shared plumbing: drop accounting and a monotonic-time guard.

    The hierarchy is slotted: discipline calls sit on the per-frame path of
    seven-figure runs, where dict lookups on every attribute access add up
    to whole seconds."""

    __slots__ = ("drops", "drop_hook", "_last_ns")

    def __init__(self) -> None:
        self.drops = 0
        self.drop_hook = None
        self._last_ns = 0

    def _check_time(self, now: int) -> None:
        if now < self._last_ns:
            raise ValueError(f"time went backwards: {now} < {self._last_ns}")
        self._last_ns = now

    def _drop(self, frame, reason: str) -> None:
        self.drops += 1
        if self.drop_hook is not None:
            self.drop_hook(frame, reason)

    def enqueue(self, frame, now: int) -> bool:
        raise NotImplementedError

    def dequeue(self, now: int):
        raise NotImplementedError

    def next_ready(self, now: int):
        raise NotImplementedError

    def __len__(self) -> int:
        raise NotImplementedError


from .prio import FifoQdisc, MqprioQdisc, PriorityMap, DEFAULT_QAV_MAP  # noqa: E402
from .cbs import CbsParams, CbsQdisc  # noqa: E402
from .etf import EtfQdisc  # noqa: E402
from .taprio import GateEntry, GateSchedule, TaprioQdisc  # noqa: E402
from .fq import FqCodelQdisc  # noqa: E402

__all__ = [
    "Qdisc",
    "FifoQdisc",
    "MqprioQdisc",
    "PriorityMap",
    "DEFAULT_QAV_MAP",
    "CbsParams",
    "CbsQdisc",
    "EtfQdisc",
    "GateEntry",
    "GateSchedule",
    "TaprioQdisc",
    "FqCodelQdisc",
]
