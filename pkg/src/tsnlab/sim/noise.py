"""Latency noise models and the named operating-condition presets.

Thread wakeups on a busy preemptive kernel mostly land a handful of
microseconds after their timer, with a rare heavy tail when the scheduler is
otherwise engaged; the publish path (serialize, copy, send syscall, queue
handoff) takes its own stretch of time with an even longer preemption tail;
the receive path adds a small stack traversal delay before a datagram
becomes readable.  All three are modelled the same way: a uniform base
window plus a low-probability uniform tail.

Three presets name overall conditions rather than mechanisms:

    none  idealized machine: constant 5 us wakeup, instant send and receive
          paths, perfect clocks; used for timeline verification where every
          nanosecond must be accounted for analytically
    e3    loaded desktop-class system: tails up to 130 us wakeup / 240 us
          send / 110 us receive
    d     lightly loaded system: rarer, shorter tails

Draws consume randomness only when an outcome is actually uncertain, so the
idealized preset costs no RNG state, which keeps runs under different
presets seed-comparable and the zero-noise path fast.
"""
from __future__ import annotations

import random
from dataclasses import dataclass


@dataclass(frozen=True)
class LatencyModel:
    base_lo_ns: int
    base_hi_ns: int
    tail_prob: float = 0.0
    tail_lo_ns: int = 0
    tail_hi_ns: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.base_lo_ns <= self.base_hi_ns:
            raise ValueError("base window must satisfy 0 <= lo <= hi")
        if not 0.0 <= self.tail_prob <= 1.0:
            raise ValueError("tail_prob must be a probability")
        if self.tail_prob > 0 and not self.base_hi_ns <= self.tail_lo_ns <= self.tail_hi_ns:
            raise ValueError("tail window must sit at or above the base window")

    def draw(self, rng: random.Random) -> int:
        if self.tail_prob > 0.0 and rng.random() < self.tail_prob:
            return rng.randint(self.tail_lo_ns, self.tail_hi_ns)
        if self.base_lo_ns == self.base_hi_ns:
            return self.base_lo_ns
        return rng.randint(self.base_lo_ns, self.base_hi_ns)

    @property
    def worst_ns(self) -> int:
        return self.tail_hi_ns if self.tail_prob > 0 else self.base_hi_ns

    @property
    def fixed_ns(self):
        """The constant outcome if the draw is degenerate, else None."""
        if self.tail_prob == 0.0 and self.base_lo_ns == self.base_hi_ns:
            return self.base_lo_ns
        return None


@dataclass(frozen=True)
class NoiseProfile:
    """Operating-condition bundle: where the latency comes from.

    wake  timer expiry to the thread actually running
    send  publish callback start to the frame reaching the egress queue
          (serialization work plus the send syscall; the thread is busy
          for the whole stretch)
    rx    frame arrival to the datagram being readable by the subscriber
    """

    name: str
    wake: LatencyModel
    send: LatencyModel
    rx: LatencyModel
    sys_clock_bound_ns: int
    hw_clock_bound_ns: int


_PRESETS = {
    "none": NoiseProfile(
        name="none",
        wake=LatencyModel(5_000, 5_000),
        send=LatencyModel(0, 0),
        rx=LatencyModel(0, 0),
        sys_clock_bound_ns=0,
        hw_clock_bound_ns=0,
    ),
    "e3": NoiseProfile(
        name="e3",
        wake=LatencyModel(5_000, 25_000, tail_prob=3e-4, tail_lo_ns=25_000, tail_hi_ns=130_000),
        send=LatencyModel(1_000, 3_000, tail_prob=4e-4, tail_lo_ns=3_000, tail_hi_ns=240_000),
        rx=LatencyModel(1_000, 3_000, tail_prob=5e-4, tail_lo_ns=3_000, tail_hi_ns=110_000),
        sys_clock_bound_ns=2_700,
        hw_clock_bound_ns=50,
    ),
    "d": NoiseProfile(
        name="d",
        wake=LatencyModel(5_000, 25_000, tail_prob=1e-4, tail_lo_ns=25_000, tail_hi_ns=60_000),
        send=LatencyModel(1_000, 3_000, tail_prob=1e-4, tail_lo_ns=3_000, tail_hi_ns=120_000),
        rx=LatencyModel(1_000, 3_000, tail_prob=2e-4, tail_lo_ns=3_000, tail_hi_ns=60_000),
        sys_clock_bound_ns=2_700,
        hw_clock_bound_ns=50,
    ),
}


def noise_preset(name: str) -> NoiseProfile:
    try:
        return _PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown noise preset {name!r}, pick one of {sorted(_PRESETS)}") from None
