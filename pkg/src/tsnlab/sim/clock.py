"""Clock error model.

Each host carries two imperfect clocks: the operating system clock that
wakes threads, and the adapter's hardware clock that timestamps frames and
drives scheduled launches.  Both are modelled as bounded random walks around
the reference time, stepped once per application cycle, which captures the
residual wander of a disciplined clock without simulating servo dynamics.

Conventions, with t the reference ("true") time:

    os clock reading   = t + sys_offset
    hw clock reading   = t + hw_offset

so a thread that asks to wake at reading W actually wakes at W - sys_offset,
a hardware timestamp of an event at t reads t + hw_offset, and a launch
scheduled for hw reading T happens at T - hw_offset.  The reference node
(PTP grandmaster side) keeps hw_offset identically zero.
"""
from __future__ import annotations

import random


class ClockModel:
    def __init__(
        self,
        rng: random.Random,
        cycle_ns: int,
        sys_bound_ns: int = 2700,
        sys_step_ns: int = 200,
        hw_bound_ns: int = 50,
        hw_step_ns: int = 10,
        grandmaster: bool = False,
    ) -> None:
        self._rng = rng
        self._cycle_ns = cycle_ns
        self.sys_bound_ns = sys_bound_ns
        self.sys_step_ns = sys_step_ns
        self.hw_bound_ns = 0 if grandmaster else hw_bound_ns
        self.hw_step_ns = hw_step_ns
        self._sys = 0
        self._hw = 0
        self._walked_to = 0  # cycle index the walk has been advanced to
        # both bounds zero means the offsets never leave zero; skip the
        # walk bookkeeping entirely on that fast path
        self.is_static = self.sys_bound_ns == 0 and self.hw_bound_ns == 0

    def _walk_to(self, t: int) -> None:
        k = t // self._cycle_ns
        if k <= self._walked_to:
            return
        rng = self._rng
        steps = k - self._walked_to
        self._walked_to = k
        if self.sys_bound_ns:
            b, s, v = self.sys_bound_ns, self.sys_step_ns, self._sys
            for _ in range(steps):
                v += rng.randint(-s, s)
                v = -b if v < -b else b if v > b else v
            self._sys = v
        if self.hw_bound_ns:
            b, s, v = self.hw_bound_ns, self.hw_step_ns, self._hw
            for _ in range(steps):
                v += rng.randint(-s, s)
                v = -b if v < -b else b if v > b else v
            self._hw = v

    def sys_offset(self, t: int) -> int:
        if self.is_static:
            return 0
        self._walk_to(t)
        return self._sys

    def hw_offset(self, t: int) -> int:
        if self.is_static:
            return 0
        self._walk_to(t)
        return self._hw
