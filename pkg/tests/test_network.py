import random

from tsnlab.sim import Engine, Port, RxBuffer, Bridge, SimFrame, serialization_ns
from tsnlab.sim.network import DATA, BACKGROUND
from tsnlab.sim.noise import LatencyModel
from tsnlab.sim.traffic import BackgroundSource
from tsnlab.tc import EtfQdisc, FifoQdisc

MAC_A = b"\x02\x00\x00\x00\x00\x01"
MAC_B = b"\x02\x00\x00\x00\x00\x02"
MAC_C = b"\x02\x00\x00\x00\x00\x03"

NO_RX = LatencyModel(0, 0)


def frame(value=0, pcp=3, size=101, dst=MAC_B, **kw):
    return SimFrame(value, DATA, pcp, size, dst=dst, **kw)


def collect(port):
    got = []
    port.connect(lambda t, f: got.append((f.value, t)))
    return got


def test_serialization_ns():
    assert serialization_ns(101) == 808
    assert serialization_ns(1542) == 12336
    assert serialization_ns(125, rate_bps=1e8) == 10_000


class TestPort:
    def test_single_frame_arrival_time(self):
        eng = Engine()
        port = Port(eng, FifoQdisc())
        got = collect(port)
        port.send(frame(), 0)
        eng.run()
        # 808 ns on the wire plus 500 ns propagation
        assert got == [(0, 1308)]

    def test_back_to_back_frames_share_the_wire(self):
        eng = Engine()
        port = Port(eng, FifoQdisc())
        got = collect(port)
        port.send(frame(value=1), 0)
        port.send(frame(value=2), 0)
        eng.run()
        assert got == [(1, 1308), (2, 2116)]

    def test_egress_hook_sees_wire_start(self):
        eng = Engine()
        starts = []
        port = Port(eng, FifoQdisc(), egress_hook=lambda f, t: starts.append(t))
        port.connect(lambda t, f: None)
        port.send(frame(value=1), 0)
        port.send(frame(value=2), 0)
        eng.run()
        assert starts == [0, 808]

    def test_wire_busy_when_second_send_arrives_mid_transmit(self):
        eng = Engine()
        port = Port(eng, FifoQdisc())
        got = collect(port)
        port.send(frame(value=1, size=1538), 0)  # wire busy until 12304
        eng.schedule(5_000, lambda t, a: port.send(frame(value=2), t))
        eng.run()
        assert got[0] == (1, 12_804)
        assert got[1] == (2, 12_304 + 808 + 500)

    def test_timed_release_through_etf(self):
        eng = Engine()
        port = Port(eng, EtfQdisc(delta_ns=0, skip_sock_check=True))
        got = collect(port)
        port.send(frame(txtime=10_000), 0)
        eng.run()
        assert got == [(0, 11_308)]

    def test_launch_offload_holds_until_txtime(self):
        eng = Engine()
        starts = []
        port = Port(eng, EtfQdisc(delta_ns=2_000, skip_sock_check=True),
                    launch_offload=True, egress_hook=lambda f, t: starts.append(t))
        port.connect(lambda t, f: None)
        # released to the adapter at 8000, wire start pinned to the stamp
        port.send(frame(txtime=10_000), 0)
        eng.run()
        assert starts == [10_000]

    def test_arming_is_deduplicated(self):
        eng = Engine()
        port = Port(eng, EtfQdisc(delta_ns=0, skip_sock_check=True))
        got = collect(port)
        for i, txt in enumerate((50_000, 60_000, 70_000)):
            port.send(frame(value=i, txtime=txt), 0)
        # one pending service event covers all three queued frames
        assert len(eng) == 1
        eng.run()
        assert got == [(0, 51_308), (1, 61_308), (2, 71_308)]


class TestRxBuffer:
    def test_read_is_strictly_before_wake(self):
        rx = RxBuffer(random.Random(1), NO_RX)
        f = frame()
        rx.deliver(100, f)
        assert rx.read(100) == []
        assert rx.read(101) == [f]
        assert rx.read(200) == []

    def test_ingress_hook_sees_arrival_instant(self):
        seen = []
        rx = RxBuffer(random.Random(1), NO_RX, ingress_hook=lambda f, t: seen.append(t))
        rx.deliver(42, frame())
        assert seen == [42]

    def test_stack_delay_defers_readability(self):
        rx = RxBuffer(random.Random(1), LatencyModel(2_000, 2_000))
        f = frame()
        rx.deliver(100, f)
        assert rx.read(2_100) == []
        assert rx.read(2_101) == [f]

    def test_partial_drain_keeps_later_frames(self):
        rx = RxBuffer(random.Random(1), NO_RX)
        f1, f2 = frame(value=1), frame(value=2)
        rx.deliver(10, f1)
        rx.deliver(500, f2)
        assert rx.read(400) == [f1]
        assert len(rx) == 1
        assert rx.read(600) == [f2]


class TestBridge:
    def build(self, jitter=0):
        eng = Engine()
        bridge = Bridge(eng, random.Random(3), fwd_base_ns=12_000, fwd_jitter_ns=jitter)
        sinks = {}
        for name, mac in (("a", MAC_A), ("b", MAC_B), ("c", MAC_C)):
            egress = Port(eng, FifoQdisc())
            sinks[name] = collect(egress)
            bridge.add_port(name, egress, macs=[mac])
        host_a = Port(eng, FifoQdisc())
        host_a.connect(bridge.ingress("a"))
        return eng, bridge, host_a, sinks

    def test_known_destination_goes_to_one_port(self):
        eng, bridge, host_a, sinks = self.build()
        host_a.send(frame(dst=MAC_B), 0)
        eng.run()
        # 1308 to reach the bridge, 12000 lookup, 1308 out the far side
        assert sinks["b"] == [(0, 14_616)]
        assert sinks["a"] == []
        assert sinks["c"] == []

    def test_unknown_destination_floods_except_ingress(self):
        eng, bridge, host_a, sinks = self.build()
        host_a.send(frame(dst=b"\xff" * 6), 0)
        eng.run()
        assert sinks["a"] == []
        assert [v for v, _ in sinks["b"]] == [0]
        assert [v for v, _ in sinks["c"]] == [0]

    def test_forwarding_jitter_stays_within_bound(self):
        arrivals = []
        for seed in range(20):
            eng = Engine()
            bridge = Bridge(eng, random.Random(seed), fwd_base_ns=12_000,
                            fwd_jitter_ns=4_000)
            egress = Port(eng, FifoQdisc())
            got = collect(egress)
            bridge.add_port("b", egress, macs=[MAC_B])
            bridge.add_port("a", Port(eng, FifoQdisc()))
            host = Port(eng, FifoQdisc())
            host.connect(bridge.ingress("a"))
            host.send(frame(dst=MAC_B), 0)
            eng.run()
            arrivals.append(got[0][1])
        assert all(14_616 <= t <= 18_616 for t in arrivals)
        assert len(set(arrivals)) > 1


def test_background_source_spacing():
    eng = Engine()
    port = Port(eng, FifoQdisc())
    got = collect(port)
    src = BackgroundSource(eng, port, rate_bps=1e8, dst=MAC_B)
    src.start()
    eng.run(until=1_000_000)
    # 1538 bytes at 100 Mb/s -> one frame every 123040 ns starting at zero
    assert src.sent == 9
    assert got[0][1] == 12_304 + 500
    assert got[1][1] - got[0][1] == 123_040


def test_background_frames_are_marked():
    eng = Engine()
    port = Port(eng, FifoQdisc())
    seen = []
    port.connect(lambda t, f: seen.append(f))
    src = BackgroundSource(eng, port, rate_bps=5e8, dst=MAC_C, frame_bytes=1538, pcp=0)
    src.start()
    eng.run(until=100_000)
    assert seen
    assert all(f.kind == BACKGROUND and f.pcp == 0 and f.dst == MAC_C for f in seen)
