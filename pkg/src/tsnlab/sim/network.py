"""Wire-level pieces: frames, ports, receive buffers, and the bridge.

A Port owns one egress queueing discipline and one outgoing link.  Sending
enqueues and immediately tries to transmit; when the discipline is holding
frames back the port arms a single service event at the earliest instant
anything could become ready.  Serialization occupies the wire start to end,
the frame lands at the far side one propagation delay after the last bit.

Launch offload models an adapter that pins a frame's first bit to the
hardware launch instant: the frame claims the wire from dequeue until the
stamped time passes, like the real descriptor ring occupying the NIC.

Delivery callbacks have the event-loop signature ``deliver(t, frame)`` so
arrivals can be scheduled without wrapper frames.
"""
from __future__ import annotations

from heapq import heappush

from .engine import Engine

DATA = 0
MIRROR = 1
BACKGROUND = 2


def serialization_ns(physical_bytes: int, rate_bps: float = 1e9) -> int:
    return round(physical_bytes * 8e9 / rate_bps)


class SimFrame:
    """One frame in flight; pcp and sizes are what the disciplines act on."""

    __slots__ = ("value", "kind", "pcp", "physical_bytes", "txtime", "sock_txtime", "dst")

    def __init__(self, value, kind, pcp, physical_bytes, dst, txtime=None, sock_txtime=False):
        self.value = value
        self.kind = kind
        self.pcp = pcp
        self.physical_bytes = physical_bytes
        self.dst = dst
        self.txtime = txtime
        self.sock_txtime = sock_txtime

    def __repr__(self) -> str:
        return (f"SimFrame(value={self.value}, kind={self.kind}, pcp={self.pcp}, "
                f"bytes={self.physical_bytes}, txtime={self.txtime})")


class Port:
    __slots__ = ("engine", "qdisc", "name", "rate_bps", "propagation_ns",
                 "launch_offload", "clock", "egress_hook", "deliver",
                 "wire_free_at", "tx_count", "_armed_at", "_bit_ns",
                 "_bit_int", "_enqueue", "_dequeue", "_next_ready",
                 "_poll", "_backlog", "_pending", "_tick")

    def __init__(
        self,
        engine: Engine,
        qdisc,
        name: str = "",
        rate_bps: float = 1e9,
        propagation_ns: int = 500,
        launch_offload: bool = False,
        clock=None,
        egress_hook=None,
    ) -> None:
        self.engine = engine
        self.qdisc = qdisc
        self.name = name
        self.rate_bps = rate_bps
        self.propagation_ns = propagation_ns
        self.launch_offload = launch_offload
        self.clock = clock
        self.egress_hook = egress_hook
        self.deliver = None
        self.wire_free_at = 0
        self.tx_count = 0
        self._armed_at = None
        self._bit_ns = 8e9 / rate_bps
        self._bit_int = int(self._bit_ns) if self._bit_ns.is_integer() else None
        self._enqueue = qdisc.enqueue
        self._dequeue = qdisc.dequeue
        self._next_ready = qdisc.next_ready
        self._poll = getattr(qdisc, "dequeue_or_next", None) if launch_offload else None
        self._backlog = getattr(qdisc, "backlog_hint", qdisc.__len__)
        self._pending = engine.pending
        self._tick = engine.tick

    def connect(self, deliver) -> None:
        """deliver(t, frame) is called when a frame fully arrives."""
        self.deliver = deliver

    def send(self, frame, now: int) -> bool:
        if not self._enqueue(frame, now):
            return False
        self._kick(now)
        return True

    def _kick(self, now: int) -> None:
        if now < self.wire_free_at:
            self._arm(self.wire_free_at)
            return
        if self._poll is not None:
            # A launch-stamped discipline holds nearly every frame until its
            # window; the fused walk answers release-or-next in one pass
            # instead of a dequeue that usually comes back empty-handed.
            frame, nxt = self._poll(now)
            if frame is None:
                if nxt is not None:
                    self._arm(nxt)
                return
        else:
            frame = self._dequeue(now)
            if frame is None:
                nxt = self._next_ready(now)
                if nxt is not None:
                    self._arm(nxt)
                return
        start = now
        if self.launch_offload and frame.txtime is not None:
            launch = frame.txtime - (self.clock.hw_offset(now) if self.clock else 0)
            if launch > start:
                start = launch
        bit = self._bit_int
        if bit is not None:
            end = start + frame.physical_bytes * bit
        else:
            end = start + round(frame.physical_bytes * self._bit_ns)
        self.wire_free_at = end
        self.tx_count += 1
        if self.egress_hook is not None:
            self.egress_hook(frame, start)
        if self.deliver is not None:
            heappush(self._pending,
                     (end + self.propagation_ns, self._tick(), self.deliver, frame))
        if self._backlog():
            self._arm(end)

    def _arm(self, t: int) -> None:
        if self._armed_at is not None and self._armed_at <= t:
            return
        self._armed_at = t
        heappush(self._pending, (t, self._tick(), self._service_cb, None))

    def _service_cb(self, t: int, _arg) -> None:
        if t != self._armed_at:
            return  # superseded by an earlier service or an inline kick
        self._armed_at = None
        self._kick(t)


class RxBuffer:
    """Receive side of a host: frames become readable after a stack delay.

    The subscriber drains everything that turned readable strictly before
    its wake instant; later frames wait for the next wake."""

    __slots__ = ("_rng", "_rx", "_fixed", "ingress_hook", "_pending", "_append")

    def __init__(self, rng, rx_model, ingress_hook=None) -> None:
        self._rng = rng
        self._rx = rx_model
        self._fixed = rx_model.fixed_ns
        self.ingress_hook = ingress_hook
        self._pending: list = []
        self._append = self._pending.append

    def deliver(self, t: int, frame) -> None:
        if self.ingress_hook is not None:
            self.ingress_hook(frame, t)
        delay = self._fixed
        if delay is None:
            delay = self._rx.draw(self._rng)
        self._append((t + delay, frame))

    def read(self, wake: int) -> list:
        pending = self._pending
        if not pending:
            return []
        if len(pending) == 1:
            if pending[0][0] < wake:
                f = pending[0][1]
                pending.clear()
                return [f]
            return []
        ready = [f for rt, f in pending if rt < wake]
        if ready:
            pending[:] = [e for e in pending if e[0] >= wake]
        return ready

    def __len__(self) -> int:
        return len(self._pending)


class Bridge:
    """Store-and-forward switch with a static address table.

    Forwarding a frame costs a fixed lookup latency plus bounded uniform
    jitter, after which it is handed to the egress port facing the
    destination; unknown destinations flood.  Egress contention and
    priority handling live in the per-port disciplines."""

    def __init__(self, engine: Engine, rng, fwd_base_ns: int = 12_000, fwd_jitter_ns: int = 4_000) -> None:
        self.engine = engine
        self._rng = rng
        self.fwd_base_ns = fwd_base_ns
        self.fwd_jitter_ns = fwd_jitter_ns
        self.ports: dict = {}
        self.mac_table: dict = {}

    def add_port(self, name: str, port: Port, macs=()) -> None:
        self.ports[name] = port
        for mac in macs:
            self.mac_table[mac] = name

    def ingress(self, name: str):
        """Delivery callable for the peer port pointing at this bridge."""
        def deliver(t, frame, _name=name):
            delay = self.fwd_base_ns
            if self.fwd_jitter_ns:
                delay += self._rng.randint(0, self.fwd_jitter_ns)
            self.engine.schedule(t + delay, self._forward_cb, (_name, frame))
        return deliver

    def _forward_cb(self, t: int, arg) -> None:
        in_port, frame = arg
        out = self.mac_table.get(frame.dst)
        if out is None:
            for name, port in self.ports.items():
                if name != in_port:
                    port.send(frame, t)
            return
        if out != in_port:
            self.ports[out].send(frame, t)
