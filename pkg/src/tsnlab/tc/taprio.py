"""Time-aware gate scheduling.

A gate schedule cycles through entries, each opening a subset of traffic
classes for a duration.  Two operating modes are modelled:

* gated (default): per-class FIFOs, and a frame may start transmitting at
  any instant its gate is open.  There is deliberately no check that the
  transmission finishes before the gate closes; protecting a later window
  from such an overhang is the job of an explicit guard entry in the
  schedule, sized above the worst-case frame serialization time.
* txtime assist: instead of gating at dequeue, every frame is stamped with
  a launch instant inside the next suitable open window and pushed into a
  per-class child that does earliest-txtime-first release.  The children
  must have their sender-stamp check disabled because the stamp is applied
  here, not by the sender.

Before base_time all gates stand open.  Traffic classes are served lowest
index first when several could release at the same instant.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import Qdisc
from .etf import EtfQdisc


@dataclass(frozen=True)
class GateEntry:
    gate_mask: int
    duration_ns: int

    def __post_init__(self) -> None:
        if self.duration_ns <= 0:
            raise ValueError("entry duration must be positive")
        if self.gate_mask < 0:
            raise ValueError("gate_mask must be non-negative")


@dataclass(frozen=True)
class GateSchedule:
    base_time_ns: int
    entries: tuple[GateEntry, ...]

    def __post_init__(self) -> None:
        if not self.entries:
            raise ValueError("schedule needs at least one entry")
        # The schedule is immutable, so everything queried per frame is laid
        # out once: entry end offsets with masks, and per-class open runs
        # (filled lazily, `_tc_runs`).  A seven-figure frame count turns any
        # per-call reconstruction here into seconds of wall time.
        ends = []
        off = 0
        for e in self.entries:
            off += e.duration_ns
            ends.append((off, e.gate_mask))
        object.__setattr__(self, "_cycle", off)
        object.__setattr__(self, "_ends", tuple(ends))
        object.__setattr__(self, "_runs", {})

    @property
    def cycle_ns(self) -> int:
        return self._cycle

    def _tc_runs(self, tc: int) -> tuple[tuple[int, int], ...]:
        """Maximal open runs for tc as [start, end) offsets from cycle start.

        Adjacent open entries merge; when the gate is open across the cycle
        boundary the first run folds into the last, whose end then exceeds
        the cycle length."""
        runs = self._runs.get(tc)
        if runs is None:
            raw: list[list[int]] = []
            off = 0
            for e in self.entries:
                end = off + e.duration_ns
                if e.gate_mask >> tc & 1:
                    if raw and raw[-1][1] == off:
                        raw[-1][1] = end
                    else:
                        raw.append([off, end])
                off = end
            if len(raw) > 1 and raw[0][0] == 0 and raw[-1][1] == self._cycle:
                head = raw.pop(0)
                raw[-1][1] = self._cycle + head[1]
            runs = tuple((a, b) for a, b in raw)
            self._runs[tc] = runs
        return runs

    def mask_at(self, t: int) -> int:
        if t < self.base_time_ns:
            return -1  # every gate open
        pos = (t - self.base_time_ns) % self._cycle
        for end, mask in self._ends:
            if pos < end:
                return mask
        raise AssertionError("unreachable")

    def is_open(self, t: int, tc: int) -> bool:
        return bool(self.mask_at(t) >> tc & 1)

    def next_open(self, t: int, tc: int) -> int | None:
        """Earliest instant >= t at which tc's gate is open.

        None when the schedule never opens this gate.
        """
        if t < self.base_time_ns:
            return t
        runs = self._tc_runs(tc)
        if not runs:
            return None
        cycle = self._cycle
        pos = (t - self.base_time_ns) % cycle
        last_b = runs[-1][1]
        if last_b > cycle and pos < last_b - cycle:
            return t  # inside the tail of the previous cycle's wrap run
        for a, b in runs:
            if pos < b:
                return t if pos >= a else t - pos + a
        return t - pos + cycle + runs[0][0]

    def open_interval(self, t: int, tc: int) -> tuple[int, int] | None:
        """The maximal open interval [start, end) for tc containing or
        following t; None when the gate never opens.  A gate that never
        closes reports one cycle-long slice at a time."""
        start = self.next_open(t, tc)
        if start is None:
            return None
        base = self.base_time_ns
        if start < base:
            return start, base
        cycle = self._cycle
        pos = (start - base) % cycle
        cycle_start = start - pos
        for a, b in self._tc_runs(tc):
            if a <= pos < b:
                return max(cycle_start + a, base), cycle_start + b
            if b > cycle and pos < b - cycle:
                return max(cycle_start - cycle + a, base), cycle_start - cycle + b
        raise AssertionError("unreachable")

    def first_fit(self, t: int, tc: int, duration_ns: int) -> int | None:
        """Earliest launch instant >= t whose window still fits duration_ns.

        Equivalent to walking ``open_interval`` window by window, fused into
        one scan because txtime assignment calls this for every frame.  Gives
        up after three windows, like a driver that refuses to hold a frame
        for several cycles."""
        base = self.base_time_ns
        windows = 3
        if t < base:
            if t + duration_ns <= base:
                return t
            t = base
            windows = 2
        runs = self._runs.get(tc)
        if runs is None:
            runs = self._tc_runs(tc)
        if not runs:
            return None
        cycle = self._cycle
        first_a, first_b = runs[0]
        last_b = runs[-1][1]
        wrap_head = last_b - cycle if last_b > cycle else -1
        for _ in range(windows):
            pos = (t - base) % cycle
            cycle_start = t - pos
            if pos < wrap_head:
                # tail of the run that wrapped out of the previous cycle
                hi = cycle_start + wrap_head
            else:
                for a, b in runs:
                    if pos < b:
                        if pos < a:
                            t = cycle_start + a
                        hi = cycle_start + b
                        break
                else:
                    t = cycle_start + cycle + first_a
                    hi = cycle_start + cycle + first_b
            if t + duration_ns <= hi:
                return t
            t = hi
        return None


class TaprioQdisc(Qdisc):
    __slots__ = ("schedule", "num_tc", "prio_to_tc", "txtime_mode", "txtime_delay_ns",
                 "link_rate", "limit", "children", "_child_seq", "_child_dequeue",
                 "_child_next_ready", "_child_poll", "_child_len", "_queues",
                 "_occ", "_byte_ns", "_byte_int", "_drop_hook")

    def __init__(
        self,
        schedule: GateSchedule,
        num_tc: int,
        prio_to_tc: tuple[int, ...],
        txtime_mode: bool = False,
        txtime_delay_ns: int = 0,
        children: dict[int, EtfQdisc] | None = None,
        link_rate: float = 1e9,
        limit: int = 1000,
    ) -> None:
        super().__init__()
        if any(not 0 <= tc < num_tc for tc in prio_to_tc):
            raise ValueError("prio_to_tc references an undefined traffic class")
        open_union = 0
        for e in schedule.entries:
            open_union |= e.gate_mask
        if open_union >> num_tc:
            raise ValueError("schedule opens gates above num_tc")
        self.schedule = schedule
        self.num_tc = num_tc
        self.prio_to_tc = prio_to_tc
        self.txtime_mode = txtime_mode
        self.txtime_delay_ns = txtime_delay_ns
        self.link_rate = link_rate
        self.limit = limit
        if txtime_mode:
            if txtime_delay_ns <= 0:
                raise ValueError("txtime mode needs a positive txtime_delay_ns")
            if children is None:
                children = {tc: EtfQdisc(delta_ns=0, skip_sock_check=True) for tc in range(num_tc)}
            for tc, child in children.items():
                if not child.skip_sock_check:
                    raise ValueError(f"child for tc {tc} must skip the sender-stamp check")
                if child.delta_ns > txtime_delay_ns:
                    raise ValueError("child delta exceeding txtime_delay would release before stamping is safe")
            self.children = children
            self._child_seq = tuple(children[tc] for tc in sorted(children))
            self._child_dequeue = tuple(c.dequeue for c in self._child_seq)
            self._child_next_ready = tuple(c.next_ready for c in self._child_seq)
            self._child_poll = tuple(c.dequeue_or_next for c in self._child_seq)
            self._child_len = tuple(c.__len__ for c in self._child_seq)
            # Which children might hold frames.  Enqueues through this qdisc
            # set bits; the fused walk clears one when a child turns out
            # empty.  The mask may overstate (a bit lingers after the last
            # frame leaves) but never misses a frame enqueued here, which is
            # the side that matters: extra bits cost one wasted child call,
            # a missing bit would strand a frame.
            self._occ = 0
            for tc, child in children.items():
                if len(child):
                    self._occ |= 1 << tc
        else:
            if children is not None:
                raise ValueError("children only apply in txtime mode")
            self.children = None
            self._queues = [deque() for _ in range(num_tc)]
        self._byte_ns = 8e9 / link_rate
        self._byte_int = int(self._byte_ns) if self._byte_ns.is_integer() else None

    def _tc_of(self, pcp: int) -> int:
        return self.prio_to_tc[pcp] if 0 <= pcp < len(self.prio_to_tc) else 0

    @property
    def drop_hook(self):
        return self._drop_hook

    @drop_hook.setter
    def drop_hook(self, hook) -> None:
        self._drop_hook = hook
        for child in (getattr(self, "children", None) or {}).values():
            child.drop_hook = hook

    # In txtime mode the per-frame work runs through prebound child methods
    # and the monotonic-time guard is the children's: every enqueue and
    # dequeue lands in one of them, and a second check per frame is
    # measurable at this call rate.

    def enqueue(self, frame, now: int) -> bool:
        if self.txtime_mode:
            tc = self._tc_of(frame.pcp)
            if self._byte_int is not None:
                dur = frame.physical_bytes * self._byte_int
            else:
                dur = round(frame.physical_bytes * self._byte_ns)
            txtime = self.schedule.first_fit(now + self.txtime_delay_ns, tc, dur)
            if txtime is None:
                self._drop(frame, "no_window")
                return False
            frame.txtime = txtime
            if self._child_seq[tc].enqueue(frame, now):
                self._occ |= 1 << tc
                return True
            return False
        self._check_time(now)
        q = self._queues[self._tc_of(frame.pcp)]
        if len(q) >= self.limit:
            self._drop(frame, "overlimit")
            return False
        q.append(frame)
        return True

    def dequeue(self, now: int):
        if self.txtime_mode:
            for tc, child_dequeue in enumerate(self._child_dequeue):
                frame = child_dequeue(now)
                if frame is not None:
                    if not self._child_len[tc]():
                        self._occ &= ~(1 << tc)
                    return frame
            return None
        self._check_time(now)
        mask = self.schedule.mask_at(now)
        for tc, q in enumerate(self._queues):
            if q and mask >> tc & 1:
                return q.popleft()
        return None

    def next_ready(self, now: int):
        best = None
        if self.txtime_mode:
            for child_next_ready in self._child_next_ready:
                t = child_next_ready(now)
                if t is not None and (best is None or t < best):
                    best = t
            return best
        for tc, q in enumerate(self._queues):
            if q:
                t = self.schedule.next_open(now, tc)
                if t is not None and (best is None or t < best):
                    best = t
        return best

    def dequeue_or_next(self, now: int):
        """Fused service walk: the releasable frame, or the next instant one
        could become releasable.  Visits only children the occupancy mask
        marks, instead of the all-children dequeue plus next_ready pair the
        port would otherwise issue."""
        if self.txtime_mode:
            best = None
            occ = self._occ
            polls = self._child_poll
            tc = 0
            while occ:
                if occ & 1:
                    frame, nxt = polls[tc](now)
                    if frame is not None:
                        if nxt is None:
                            self._occ &= ~(1 << tc)
                        return frame, None
                    if nxt is None:
                        self._occ &= ~(1 << tc)
                    elif best is None or nxt < best:
                        best = nxt
                occ >>= 1
                tc += 1
            return None, best
        frame = self.dequeue(now)
        if frame is not None:
            return frame, None
        return None, self.next_ready(now)

    def backlog_hint(self) -> bool:
        """May-hold-frames test for the port's after-transmit rearm.

        Cheap by design: can answer True for a child that just drained
        (one wasted service poll later), never False while a frame is
        queued, so nothing strands."""
        if self.txtime_mode:
            return self._occ != 0
        for q in self._queues:
            if q:
                return True
        return False

    def __len__(self) -> int:
        n = 0
        if self.txtime_mode:
            for child_len in self._child_len:
                n += child_len()
            return n
        for q in self._queues:
            n += len(q)
        return n
