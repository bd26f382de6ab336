"""Credit-based shaper.

Credit accrues at idle_slope while traffic waits and is repaid at send_slope
for every bit put on the wire; a frame may only leave while credit is not
negative.  What happens to credit when the queue drains is where the kernel
and the standard disagree:

* standard behaviour: positive credit is forfeited, negative credit keeps
  recovering at idle_slope until it reaches zero, so an under-reserved flow
  stays throttled across idle gaps;
* kernel behaviour (``linux_credit_reset=True``, the default): credit
  snaps to zero the moment the queue empties, so a flow whose frames arrive
  spaced apart is never throttled at all, whatever the reservation.

Both are selectable because the difference is the point of several tests.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from . import Qdisc


@dataclass(frozen=True)
class CbsParams:
    """Slopes in bits per second, credit bounds in bits."""

    idle_slope: float
    send_slope: float
    hi_credit: float
    lo_credit: float
    link_rate: float = 1e9

    def __post_init__(self) -> None:
        if not 0 < self.idle_slope < self.link_rate:
            raise ValueError("idle_slope must be positive and below the link rate")
        if self.send_slope >= 0:
            raise ValueError("send_slope must be negative")
        if self.hi_credit < 0 or self.lo_credit > 0:
            raise ValueError("hi_credit must be >= 0 and lo_credit <= 0")

    @classmethod
    def from_reservation(
        cls,
        reserved_bps: float,
        link_rate: float = 1e9,
        max_frame_bits: int = 808,
        max_interference_bits: int = 12336,
    ) -> "CbsParams":
        """Derive slopes and credit bounds from a bandwidth reservation.

        hi_credit covers the wait for one maximal interfering frame already
        on the wire, lo_credit the debt from sending one maximal frame of
        the shaped flow itself.
        """
        send = reserved_bps - link_rate
        hi = math.ceil(max_interference_bits * reserved_bps / link_rate)
        lo = math.floor(max_frame_bits * send / link_rate)
        return cls(reserved_bps, send, float(hi), float(lo), link_rate)


class CbsQdisc(Qdisc):
    __slots__ = ("params", "linux_credit_reset", "limit", "credit", "_q", "_credit_ns")

    def __init__(self, params: CbsParams, linux_credit_reset: bool = True, limit: int = 1000) -> None:
        super().__init__()
        self.params = params
        self.linux_credit_reset = linux_credit_reset
        self.limit = limit
        self.credit = 0.0
        self._q: deque = deque()
        # Start of the instant credit is valid for; stays at the end of a
        # transmission window so mid-transmission queries are no-ops.
        self._credit_ns = 0

    def _advance(self, now: int) -> None:
        if now <= self._credit_ns:
            return
        dt = now - self._credit_ns
        p = self.params
        if self._q:
            self.credit = min(self.credit + p.idle_slope * dt * 1e-9, p.hi_credit)
        elif self.linux_credit_reset:
            self.credit = 0.0
        elif self.credit < 0.0:
            self.credit = min(self.credit + p.idle_slope * dt * 1e-9, 0.0)
        else:
            self.credit = 0.0
        self._credit_ns = now

    def tx_duration_ns(self, frame) -> int:
        return round(frame.physical_bytes * 8 * 1e9 / self.params.link_rate)

    def enqueue(self, frame, now: int) -> bool:
        self._check_time(now)
        self._advance(now)
        if len(self._q) >= self.limit:
            self._drop(frame, "overlimit")
            return False
        self._q.append(frame)
        return True

    def dequeue(self, now: int):
        self._check_time(now)
        self._advance(now)
        if not self._q or self.credit < 0.0:
            return None
        frame = self._q.popleft()
        dur = self.tx_duration_ns(frame)
        # Lump the send-slope repayment for the whole transmission here and
        # date the credit at its end; nothing observes the shaper mid-frame.
        self.credit += self.params.send_slope * dur * 1e-9
        self._credit_ns = now + dur
        return frame

    def next_ready(self, now: int):
        if not self._q:
            return None
        t0 = max(now, self._credit_ns)
        self._advance(t0)
        if self.credit >= 0.0:
            return t0
        return t0 + math.ceil(-self.credit * 1e9 / self.params.idle_slope)

    def __len__(self) -> int:
        return len(self._q)
