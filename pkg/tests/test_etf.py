import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsnlab.tc import EtfQdisc

from conftest import StubFrame


def frame_at(txtime, stamped=True, tag=None):
    return StubFrame(txtime=txtime, sock_txtime=stamped, tag=tag)


class TestEnqueueChecks:
    def test_rejects_frame_without_txtime(self):
        q = EtfQdisc(delta_ns=100_000)
        assert not q.enqueue(StubFrame(sock_txtime=True), 0)
        assert q.drops == 1

    def test_sock_check(self):
        q = EtfQdisc(delta_ns=100_000)
        assert not q.enqueue(frame_at(1_000_000, stamped=False), 0)
        relaxed = EtfQdisc(delta_ns=100_000, skip_sock_check=True)
        assert relaxed.enqueue(frame_at(1_000_000, stamped=False), 0)

    def test_late_on_enqueue(self):
        q = EtfQdisc(delta_ns=100_000)
        assert not q.enqueue(frame_at(5_000), 5_001)
        assert q.enqueue(frame_at(5_000 + 10_000), 5_001)


class TestReleaseWindow:
    def test_holds_until_window(self):
        q = EtfQdisc(delta_ns=100_000)
        q.enqueue(frame_at(1_000_000), 0)
        assert q.dequeue(899_999) is None
        assert q.next_ready(899_999) == 900_000
        assert q.dequeue(900_000) is not None

    def test_release_at_txtime_exactly_is_allowed(self):
        q = EtfQdisc(delta_ns=0)
        q.enqueue(frame_at(777), 0)
        assert q.dequeue(777) is not None

    def test_late_on_dequeue(self):
        q = EtfQdisc(delta_ns=10)
        q.enqueue(frame_at(1_000, tag="stale"), 0)
        q.enqueue(frame_at(9_000, tag="ok"), 0)
        frame = q.dequeue(5_000)
        assert frame is None
        assert q.drops == 1
        assert q.dequeue(8_995).tag == "ok"

    def test_orders_by_txtime_not_arrival(self):
        q = EtfQdisc(delta_ns=1_000_000)
        q.enqueue(frame_at(900_000, tag="second"), 0)
        q.enqueue(frame_at(100_000, tag="first"), 0)
        assert q.dequeue(0).tag == "first"
        assert q.dequeue(0).tag == "second"


@settings(max_examples=300, deadline=None)
@given(
    delta=st.integers(0, 500_000),
    offsets=st.lists(st.integers(0, 2_000_000), min_size=1, max_size=40),
    probe_step=st.integers(1_000, 400_000),
)
def test_release_window_property(delta, offsets, probe_step):
    """Whatever the txtimes, a released frame leaves inside its window and a
    frame whose window was missed is dropped, never silently kept."""
    q = EtfQdisc(delta_ns=delta, limit=10_000)
    accepted = 0
    for off in offsets:
        if q.enqueue(frame_at(off, tag=off), 0):
            accepted += 1
    released = []
    t = 0
    while len(q):
        frame = q.dequeue(t)
        if frame is None:
            t += probe_step
            continue
        released.append((t, frame.tag))
        assert frame.tag - delta <= t <= frame.tag
    assert len(released) + q.drops == len(offsets)
    assert accepted >= len(released)
    times = [t for t, _ in released]
    assert times == sorted(times)
