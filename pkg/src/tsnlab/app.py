"""Cyclic publish/subscribe application threads and per-value fate accounting.

Two nodes run the same three-phase cycle on a shared time base:

* subscriber thread wakes at ``base + k*cycle + sub_frac*cycle`` and drains
  the receive buffer,
* user thread wakes at ``+ user_frac*cycle`` and touches the application
  value (the source increments a counter, the mirror copies the freshest
  received value into its publish variable),
* publisher thread wakes at ``+ pub_frac*cycle``, snapshots the current
  publish variable, and pushes the frame down the send path; the frame
  reaches the egress queue after the profile's send latency, and the thread
  is busy until then.

The source node publishes counter values 0..packets-1 and afterwards goes
quiet; the mirror node keeps cycling for ``drain_cycles`` extra cycles so
in-flight values can complete the loop.  Wakes are computed against the
node's os clock and jittered by the wake latency model; per thread they are
clamped monotone (a callback that fires late pushes its successors behind
it, the scheduler never reorders one thread against itself).

Every counter value is tracked in a :class:`ValueLedger` and ends up in
exactly one fate bucket, resolved in this order:

measured   the mirrored copy reached the source NIC (round trip complete)
d_p        the value never left the source (the user thread wrote it too
           late for any publisher pass, or every egress attempt was dropped
           by the local queueing discipline)
d_bl       the bridge dropped the original on the way to the mirror node
d_l        the value reached the mirror host but was never returned: it was
           superseded in the staging variable before the user thread ran,
           or every mirrored copy died in the mirror's egress queue
d_bp       the bridge dropped the mirrored copy on the way back

Stale republishes (a publisher pass that sends an unchanged value again)
are normal wire traffic; the ledger only records first occurrences, so a
value is measured if any copy completes the loop.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from heapq import heappush
from typing import Callable, List, Optional

from .sim import ClockModel, Engine, NoiseProfile, Port, RxBuffer, SimFrame
from .sim.network import DATA, MIRROR


@dataclass(frozen=True)
class AppConfig:
    cycle_ns: int
    packets: int
    base_time_ns: int = 1_000_000_000
    sub_frac: float = 0.0
    user_frac: float = 0.3
    pub_frac: float = 0.6
    txtime_mode: bool = False
    txtime_offset_ns: int = 150_000
    drain_cycles: int = 16

    def __post_init__(self) -> None:
        if self.cycle_ns <= 0:
            raise ValueError("cycle_ns must be positive")
        if self.packets <= 0:
            raise ValueError("packets must be positive")
        for name in ("sub_frac", "user_frac", "pub_frac"):
            val = getattr(self, name)
            if not 0.0 <= val < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if not 0 <= self.txtime_offset_ns <= self.cycle_ns:
            raise ValueError("txtime_offset_ns must lie within one cycle")
        if self.drain_cycles < 1:
            raise ValueError("drain_cycles must be at least 1")

    def wake_ns(self, k: int, frac: float) -> int:
        return self.base_time_ns + k * self.cycle_ns + int(frac * self.cycle_ns)


class ValueLedger:
    """First-occurrence timestamps and drop flags for every counter value."""

    def __init__(self, packets: int):
        self.packets = packets
        self.p_egress = array("q", [-1]) * packets
        self.l_ingress = array("q", [-1]) * packets
        self.l_egress = array("q", [-1]) * packets
        self.p_ingress = array("q", [-1]) * packets
        self.mirrored = bytearray(packets)
        self.bridge_drop_data = bytearray(packets)
        self.bridge_drop_mirror = bytearray(packets)
        # every data-frame arrival instant at the mirror host, duplicates
        # included: the inter-arrival series the spacing statistics run on
        self.l_ingress_taps = array("q")

    def on_p_egress(self, value: int, t: int) -> None:
        if 0 <= value < self.packets and self.p_egress[value] < 0:
            self.p_egress[value] = t

    def on_l_ingress(self, value: int, t: int) -> None:
        if 0 <= value < self.packets and self.l_ingress[value] < 0:
            self.l_ingress[value] = t
        self.l_ingress_taps.append(t)

    def on_l_egress(self, value: int, t: int) -> None:
        if 0 <= value < self.packets and self.l_egress[value] < 0:
            self.l_egress[value] = t

    def on_p_ingress(self, value: int, t: int) -> None:
        if 0 <= value < self.packets and self.p_ingress[value] < 0:
            self.p_ingress[value] = t

    def on_mirrored(self, value: int) -> None:
        if 0 <= value < self.packets:
            self.mirrored[value] = 1

    def on_bridge_drop(self, frame: SimFrame) -> None:
        value = frame.value
        if not 0 <= value < self.packets:
            return
        if frame.kind == DATA:
            self.bridge_drop_data[value] = 1
        elif frame.kind == MIRROR:
            self.bridge_drop_mirror[value] = 1

    def fates(self) -> dict:
        """Resolve every value into one bucket; buckets partition the run."""
        measured = d_p = d_bl = d_l = d_bp = 0
        for v in range(self.packets):
            if self.p_ingress[v] >= 0:
                measured += 1
            elif self.p_egress[v] < 0:
                d_p += 1
            elif self.bridge_drop_data[v]:
                d_bl += 1
            elif self.l_ingress[v] < 0:
                # lossless links make this unreachable once draining is done;
                # keep the original's last known position if it ever happens
                d_bl += 1
            elif not self.mirrored[v] or self.l_egress[v] < 0:
                d_l += 1
            else:
                # mirrored copy left the mirror host and never arrived back
                d_bp += 1
        total = measured + d_p + d_bl + d_l + d_bp
        if total != self.packets:
            raise AssertionError(
                f"fate buckets do not partition the run: {total} != {self.packets}"
            )
        return {
            "measured": measured,
            "d_p": d_p,
            "d_bl": d_bl,
            "d_l": d_l,
            "d_bp": d_bp,
        }

    def rtts(self) -> List[int]:
        """Round-trip times (source egress to source ingress) of measured values."""
        out = []
        for v in range(self.packets):
            if self.p_ingress[v] >= 0 and self.p_egress[v] >= 0:
                out.append(self.p_ingress[v] - self.p_egress[v])
        return out


class SubscriberState:
    """Sequence-gap drop counter as a cyclic subscriber would keep it.

    expected starts at 0.  An empty read costs one drop and advances
    expected; a read containing values at or above expected adds the gap to
    the freshest one and resyncs expected past it; values below expected
    arrived late and were already billed, they change nothing.  The counter
    over-reports during the lead-in (reads before the first value lands) and
    is kept as a diagnostic next to the per-value fates, not instead of them.
    """

    def __init__(self) -> None:
        self.expected = 0
        self.drop_count = 0

    def on_read(self, values: List[int]) -> None:
        if not values:
            self.drop_count += 1
            self.expected += 1
            return
        freshest = max(values)
        if freshest >= self.expected:
            self.drop_count += freshest - self.expected
            self.expected = freshest + 1


class _CyclicThread:
    """One self-rescheduling application thread with monotone wakes.

    The body may return an instant the thread stays busy until (a publish
    pass blocked in the send path); the next wake cannot precede it.  With a
    drift-free clock and a degenerate wake model the whole wake computation
    collapses to one addition, precomputed here."""

    __slots__ = ("node", "frac", "body", "last_cycle", "_prev_wake",
                 "_base_off", "_cycle", "_fixed_wake", "_engine", "_sched",
                 "_pending", "_tick")

    def __init__(self, node: "_NodeBase", frac: float,
                 body: Callable[[int, int], Optional[int]], last_cycle: int):
        self.node = node
        self.frac = frac
        self.body = body
        self.last_cycle = last_cycle
        self._prev_wake = 0
        self._engine = node.engine
        self._sched = node.engine.schedule
        self._pending = node.engine.pending
        self._tick = node.engine.tick
        cfg = node.cfg
        self._cycle = cfg.cycle_ns
        self._base_off = cfg.base_time_ns + int(frac * cfg.cycle_ns)
        fixed = node.profile.wake.fixed_ns
        if node.clock.is_static and fixed is not None:
            self._fixed_wake = self._base_off + fixed
        else:
            self._fixed_wake = None

    def schedule(self, k: int) -> None:
        if self._fixed_wake is not None:
            wake = self._fixed_wake + k * self._cycle
        else:
            node = self.node
            nominal = self._base_off + k * self._cycle
            wake = nominal - node.clock.sys_offset(nominal) \
                + node.profile.wake.draw(node.rng)
        if wake < self._prev_wake:
            wake = self._prev_wake
        if wake < self._engine.now:
            wake = self._engine.now
        self._prev_wake = wake
        self._sched(wake, self._fire, k)

    def _fire(self, t: int, k: int) -> None:
        busy_until = self.body(t, k)
        if busy_until is not None and busy_until > self._prev_wake:
            self._prev_wake = busy_until
        if k >= self.last_cycle:
            return
        # rescheduling is inlined and pushed raw: one event per thread per
        # cycle, and the wake is clamped to now so the push is never stale
        k += 1
        if self._fixed_wake is not None:
            wake = self._fixed_wake + k * self._cycle
        else:
            node = self.node
            nominal = self._base_off + k * self._cycle
            wake = nominal - node.clock.sys_offset(nominal) \
                + node.profile.wake.draw(node.rng)
        if wake < self._prev_wake:
            wake = self._prev_wake
        now = self._engine.now
        if wake < now:
            wake = now
        self._prev_wake = wake
        heappush(self._pending, (wake, self._tick(), self._fire, k))


class _NodeBase:
    def __init__(self, engine: Engine, cfg: AppConfig, clock: ClockModel,
                 rng, profile: NoiseProfile):
        self.engine = engine
        self.cfg = cfg
        self.clock = clock
        self.rng = rng
        self.profile = profile
        self._send_fixed = profile.send.fixed_ns
        self._threads: List[_CyclicThread] = []

    def _add_thread(self, frac: float, body, last_cycle: int) -> None:
        self._threads.append(_CyclicThread(self, frac, body, last_cycle))

    def start(self) -> None:
        for thread in self._threads:
            thread.schedule(0)

    def _publish(self, frame: SimFrame, t: int) -> Optional[int]:
        """Push a frame down the send path; returns when the thread frees up.

        A zero send latency hands the frame to the port inline; anything
        else schedules the enqueue and keeps the thread busy until then."""
        delay = self._send_fixed
        if delay is None:
            delay = self.profile.send.draw(self.rng)
        if delay == 0:
            self._port_send(frame, t)
            return None
        self.engine.schedule(t + delay, self._send_cb, frame)
        return t + delay

    def _send_cb(self, t: int, frame: SimFrame) -> None:
        self._port_send(frame, t)


class SourceNode(_NodeBase):
    """Increments a counter every cycle and publishes the current value."""

    def __init__(self, engine, cfg, clock, rng, profile, port: Port,
                 ledger: ValueLedger, dst: bytes, pcp: int, physical_bytes: int):
        super().__init__(engine, cfg, clock, rng, profile)
        self.port = port
        self._port_send = port.send
        self.ledger = ledger
        self.dst = dst
        self.pcp = pcp
        self.physical_bytes = physical_bytes
        self.counter = -1
        self.publish_count = 0
        self._txtime_mode = cfg.txtime_mode
        self._stamp_base = cfg.base_time_ns + cfg.cycle_ns + cfg.txtime_offset_ns
        self._cycle = cfg.cycle_ns
        last = cfg.packets - 1
        self._add_thread(cfg.user_frac, self._user_body, last)
        self._add_thread(cfg.pub_frac, self._pub_body, last)

    def _user_body(self, t: int, k: int) -> None:
        self.counter = k

    def _pub_body(self, t: int, k: int) -> Optional[int]:
        value = self.counter
        if value < 0:
            return None
        if self._txtime_mode:
            frame = SimFrame(value, DATA, self.pcp, self.physical_bytes,
                             self.dst, self._stamp_base + k * self._cycle, True)
        else:
            frame = SimFrame(value, DATA, self.pcp, self.physical_bytes, self.dst)
        self.publish_count += 1
        return self._publish(frame, t)


class MirrorNode(_NodeBase):
    """Reflects the freshest received value back to its publisher."""

    def __init__(self, engine, cfg, clock, rng, profile, port: Port,
                 rx: RxBuffer, ledger: ValueLedger, dst: bytes, pcp: int,
                 physical_bytes: int):
        super().__init__(engine, cfg, clock, rng, profile)
        self.port = port
        self._port_send = port.send
        self.rx = rx
        self.ledger = ledger
        self.dst = dst
        self.pcp = pcp
        self.physical_bytes = physical_bytes
        self.staged = -1
        self.mirror_value = -1
        self.publish_count = 0
        self.subscriber = SubscriberState()
        self._read = rx.read
        self._txtime_mode = cfg.txtime_mode
        self._stamp_base = cfg.base_time_ns + cfg.cycle_ns + cfg.txtime_offset_ns
        self._cycle = cfg.cycle_ns
        last = cfg.packets - 1 + cfg.drain_cycles
        self._add_thread(cfg.sub_frac, self._sub_body, last)
        self._add_thread(cfg.user_frac, self._user_body, last)
        self._add_thread(cfg.pub_frac, self._pub_body, last)

    def _sub_body(self, t: int, k: int) -> None:
        batch = self._read(t)
        if not batch:
            self.subscriber.on_read(batch)
            return
        if len(batch) == 1 and batch[0].kind == DATA:
            values = [batch[0].value]
        else:
            values = [f.value for f in batch if f.kind == DATA]
        self.subscriber.on_read(values)
        if values:
            freshest = max(values)
            if freshest > self.staged:
                self.staged = freshest

    def _user_body(self, t: int, k: int) -> None:
        if self.staged > self.mirror_value:
            self.mirror_value = self.staged
            self.ledger.on_mirrored(self.mirror_value)

    def _pub_body(self, t: int, k: int) -> Optional[int]:
        value = self.mirror_value
        if value < 0:
            return None
        if self._txtime_mode:
            frame = SimFrame(value, MIRROR, self.pcp, self.physical_bytes,
                             self.dst, self._stamp_base + k * self._cycle, True)
        else:
            frame = SimFrame(value, MIRROR, self.pcp, self.physical_bytes, self.dst)
        self.publish_count += 1
        return self._publish(frame, t)
