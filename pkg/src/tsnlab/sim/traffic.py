"""Background load generation.

One source emits maximum-size best-effort frames at a constant bit rate,
open loop: it never reacts to drops or queue depth, the way an iperf-style
UDP blast behaves.  Frames are untagged-size (1538 bytes on the wire) and
carry PCP 0 so every discipline files them in the lowest class."""
from __future__ import annotations

from .engine import Engine
from .network import BACKGROUND, Port, SimFrame


class BackgroundSource:
    def __init__(
        self,
        engine: Engine,
        port: Port,
        rate_bps: float,
        dst,
        frame_bytes: int = 1538,
        pcp: int = 0,
        start_ns: int = 0,
    ) -> None:
        if rate_bps <= 0:
            raise ValueError("rate_bps must be positive")
        self.engine = engine
        self.port = port
        self.dst = dst
        self.frame_bytes = frame_bytes
        self.pcp = pcp
        self.start_ns = start_ns
        self.spacing_ns = round(frame_bytes * 8 * 1e9 / rate_bps)
        self.sent = 0

    def start(self) -> None:
        self.engine.schedule(self.start_ns, self._emit_cb)

    def _emit_cb(self, t: int, _arg) -> None:
        frame = SimFrame(
            value=-1,
            kind=BACKGROUND,
            pcp=self.pcp,
            physical_bytes=self.frame_bytes,
            dst=self.dst,
        )
        self.port.send(frame, t)
        self.sent += 1
        self.engine.schedule(t + self.spacing_ns, self._emit_cb)
