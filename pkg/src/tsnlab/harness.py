"""Declarative experiment runs: config files, topology wiring, sweeps.

A run is described by a flat key=value config (plus command-line overrides),
hashed for provenance, and repeated ``repetitions`` times with seeds
``seed + i``.  Every repetition builds a fresh simulation: two hosts that
play the publish/mirror game from :mod:`tsnlab.app`, optionally joined by a
store-and-forward bridge and a background traffic source, with the egress
discipline requested per host and per bridge port.  Results land under
``out_dir/<config hash>/`` as ``summary.csv`` (one row per repetition),
per-repetition ECDF files and an optional per-value trace.

Sweeps rerun the same base config over a named parameter list and write one
aggregated row per point.  The bridged sweep pairs every bridged run with a
point-to-point run of the same host discipline so the bridge's latency share
can be reported next to the round-trip time.

All randomness for one repetition derives from its seed through a fixed
draw order, so a run is reproducible byte for byte from config plus seed.
"""
from __future__ import annotations

import random
import statistics
import time
from dataclasses import dataclass, fields, replace
from hashlib import sha256
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .app import AppConfig, MirrorNode, SourceNode, ValueLedger
from .metrics import (
    Summary,
    TapSeries,
    _cell,
    compute_is_ecdf,
    estimate_bridge_latency,
    summarize_run,
    write_ecdf_csv,
    write_summary_csv,
    write_trace_jsonl,
)
from .sim import Bridge, ClockModel, Engine, Port, RxBuffer, noise_preset
from .sim.network import DATA, MIRROR
from .sim.traffic import BackgroundSource
from .tc import (
    DEFAULT_QAV_MAP,
    CbsParams,
    CbsQdisc,
    EtfQdisc,
    FifoQdisc,
    FqCodelQdisc,
    GateEntry,
    GateSchedule,
    MqprioQdisc,
    PriorityMap,
    TaprioQdisc,
)
from .uadp import FrameSizes, UadpError, frame_sizes, parse_endpoint

HOST_QDISCS = ("fq", "mqprio", "cbs", "etf", "taprio")
BRIDGE_QDISCS = ("fq", "mqprio", "cbs")
TOPOLOGIES = ("p2p", "bridged")
NOISE_PROFILES = ("none", "e3", "d")
TXTIME_CHOICES = ("auto", "on", "off")

# The two measurement hosts and the background talker.  The publisher
# addresses the mirror through a tagged endpoint so the frames carry the
# priority the disciplines classify on.
DATA_ENDPOINT = parse_endpoint("opc.eth://02-00-00-00-00-02:10.3")
MIRROR_ENDPOINT = parse_endpoint("opc.eth://02-00-00-00-00-01:10.3")
MAC_P = MIRROR_ENDPOINT.mac
MAC_L = DATA_ENDPOINT.mac
MAC_BE = b"\x02\x00\x00\x00\x00\x03"
PCP = DATA_ENDPOINT.pcp

# Two traffic classes on the time-aware hosts: the tagged stream alone in
# tc 0, everything else in tc 1.
TAPRIO_NUM_TC = 2
TAPRIO_PRIO_TO_TC = (1, 1, 1, 0, 1, 1, 1, 1)
_TT_GATE = 0b01
_BE_GATE = 0b10

#: Switch-style layout for the bridge egress ports: one hardware queue per
#: PCP, higher PCP served first.
BRIDGE_MAP = PriorityMap(
    num_tc=8,
    prio_to_tc=(0, 1, 2, 3, 4, 5, 6, 7),
    tc_to_queue=(7, 6, 5, 4, 3, 2, 1, 0),
)


class ConfigError(ValueError):
    """The config cannot describe a runnable experiment."""


@dataclass
class ExperimentConfig:
    """Everything one experiment needs, in microsecond-friendly units."""

    topology: str = "p2p"
    qdisc: str = "etf"
    bridge_qdisc: str = "fq"
    noise: str = "none"
    cycletime_us: float = 250.0
    offset_us: float = 150.0
    delta_us: float = 200.0
    ws_us: float = 62.5
    guard_us: float = 15.0
    idleslope_pct: float = 100.0
    be_rate_mbps: float = 0.0
    n_vars: int = 3
    packets: int = 700_000
    repetitions: int = 5
    seed: int = 1
    txtime_mode: str = "auto"
    base_time_ns: int = 1_000_000_000
    sub_frac: float = 0.0
    user_frac: float = 0.3
    pub_frac: float = 0.6
    drain_cycles: int = 16
    bridge_fwd_us: float = 32.0
    bridge_fwd_jitter_us: float = 4.0

    @property
    def cycle_ns(self) -> int:
        return round(self.cycletime_us * 1000)

    @property
    def offset_ns(self) -> int:
        return round(self.offset_us * 1000)

    @property
    def delta_ns(self) -> int:
        return round(self.delta_us * 1000)

    @property
    def ws_ns(self) -> int:
        return round(self.ws_us * 1000)

    @property
    def guard_ns(self) -> int:
        return round(self.guard_us * 1000)

    @property
    def txtime_enabled(self) -> bool:
        """Launch-time stamping, resolved: auto follows the discipline."""
        if self.txtime_mode == "auto":
            return self.qdisc in ("etf", "taprio")
        return self.txtime_mode == "on"

    def sizes(self) -> FrameSizes:
        return frame_sizes(self.n_vars)

    def app_config(self) -> AppConfig:
        return AppConfig(
            cycle_ns=self.cycle_ns,
            packets=self.packets,
            base_time_ns=self.base_time_ns,
            sub_frac=self.sub_frac,
            user_frac=self.user_frac,
            pub_frac=self.pub_frac,
            txtime_mode=self.txtime_enabled,
            txtime_offset_ns=self.offset_ns,
            drain_cycles=self.drain_cycles,
        )

    def validate(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"unknown topology {self.topology!r}")
        if self.qdisc not in HOST_QDISCS:
            raise ConfigError(f"unknown qdisc {self.qdisc!r}")
        if self.bridge_qdisc not in BRIDGE_QDISCS:
            raise ConfigError(
                f"bridge_qdisc must be one of {BRIDGE_QDISCS}, got {self.bridge_qdisc!r}")
        if self.noise not in NOISE_PROFILES:
            raise ConfigError(f"unknown noise profile {self.noise!r}")
        if self.txtime_mode not in TXTIME_CHOICES:
            raise ConfigError(f"txtime_mode must be one of {TXTIME_CHOICES}")
        if self.cycletime_us <= 0:
            raise ConfigError("cycletime_us must be positive")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.delta_us < 0:
            raise ConfigError("delta_us must be non-negative")
        if self.guard_us < 0:
            raise ConfigError("guard_us must be non-negative")
        if not 0 <= self.be_rate_mbps <= 1000:
            raise ConfigError("be_rate_mbps must lie in [0, 1000]")
        if self.be_rate_mbps > 0 and self.topology != "bridged":
            raise ConfigError("background traffic needs topology=bridged")
        if self.idleslope_pct <= 0:
            raise ConfigError("idleslope_pct must be positive")
        if self.qdisc == "etf" and not self.txtime_enabled:
            raise ConfigError("etf releases by launch time; txtime_mode=off "
                              "would starve it, use auto or on")
        if self.qdisc in ("fq", "mqprio", "cbs") and self.txtime_mode == "on":
            raise ConfigError(f"{self.qdisc} ignores launch-time stamps; "
                              "txtime_mode=on needs etf or taprio")
        if self.qdisc in ("etf", "taprio") and self.txtime_enabled and self.delta_ns <= 0:
            raise ConfigError("launch-time stamping needs a positive delta_us")
        try:
            sizes = self.sizes()
        except UadpError as exc:
            raise ConfigError(str(exc)) from exc
        try:
            self.app_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.qdisc == "taprio":
            try:
                build_taprio_schedule(self.cycle_ns, self.offset_ns,
                                      self.ws_ns, self.guard_ns)
            except ValueError as exc:
                raise ConfigError(f"taprio schedule: {exc}") from exc
        uses_cbs = self.qdisc == "cbs" or (
            self.topology == "bridged" and self.bridge_qdisc == "cbs")
        if uses_cbs and _reserved_bps(self, sizes) >= 1e9:
            raise ConfigError("idleslope_pct reserves the whole link")

    def canonical_text(self) -> str:
        """The resolved config as a reloadable key=value document."""
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in fields(self))

    def config_hash(self) -> str:
        return sha256(self.canonical_text().encode()).hexdigest()[:12]

    def match_key(self) -> str:
        """Identity of the experiment with the topology factored out.

        Two runs that differ only in how the hosts are joined (and in the
        knobs that only exist on the bridged side) share a match key, which
        is what makes their round-trip times comparable."""
        skip = {"topology", "bridge_qdisc", "be_rate_mbps", "bridge_fwd_us",
                "bridge_fwd_jitter_us", "seed", "repetitions"}
        text = "".join(f"{f.name}={getattr(self, f.name)}\n"
                       for f in fields(self) if f.name not in skip)
        return sha256(text.encode()).hexdigest()[:12]


def parse_config(path, overrides: Sequence[str] = ()) -> ExperimentConfig:
    """Load a key=value config file and apply trailing overrides.

    Blank lines and ``#`` comments are skipped.  Overrides use the same
    ``key=value`` syntax and win over the file.  The result is validated."""
    text = Path(path).read_text()
    pairs: List[Tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        pairs.append((key.strip(), value.strip()))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, _, value = item.partition("=")
        pairs.append((key.strip(), value.strip()))

    types = {f.name: f.type for f in fields(ExperimentConfig)}
    values: Dict[str, object] = {}
    for key, value in pairs:
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        kind = types[key]
        try:
            if kind == "int":
                values[key] = int(value)
            elif kind == "float":
                values[key] = float(value)
            else:
                values[key] = value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def build_taprio_schedule(cycle_ns: int, offset_ns: int, ws_ns: int,
                          guard_ns: int, base_time_ns: int = 0) -> GateSchedule:
    """Gate list for one cycle: best effort, guard, priority window, guard,
    best effort again.

    The leading best-effort window is shortened by the guard so the priority
    gate opens exactly at cycle start + offset; the guard in front of it is
    what keeps a full-size best-effort frame from straddling the opening.
    Windows that would come out negative make the schedule infeasible."""
    if ws_ns <= 0:
        raise ValueError("priority window must be positive")
    if guard_ns < 0:
        raise ValueError("guard must be non-negative")
    lead = offset_ns - guard_ns
    if lead < 0:
        raise ValueError(f"offset {offset_ns} cannot cover the {guard_ns} guard")
    tail = cycle_ns - offset_ns - ws_ns - guard_ns
    if tail < 0:
        raise ValueError(f"window and guards overrun the cycle by {-tail} ns")
    raw = (
        (_BE_GATE, lead),
        (0x00, guard_ns),
        (_TT_GATE, ws_ns),
        (0x00, guard_ns),
        (_BE_GATE, tail),
    )
    entries = tuple(GateEntry(mask, dur) for mask, dur in raw if dur > 0)
    sched = GateSchedule(base_time_ns, entries)
    assert sched.cycle_ns == cycle_ns
    return sched


def _reserved_bps(cfg: ExperimentConfig, sizes: FrameSizes) -> float:
    """Credit-shaper reservation: the stream's wire bandwidth, scaled."""
    stream_bps = sizes.physical_bytes * 8 * 1e9 / cfg.cycle_ns
    return cfg.idleslope_pct / 100.0 * stream_bps


def _cbs_queue(cfg: ExperimentConfig, sizes: FrameSizes) -> CbsQdisc:
    params = CbsParams.from_reservation(
        _reserved_bps(cfg, sizes), max_frame_bits=sizes.physical_bytes * 8)
    return CbsQdisc(params)


def _host_qdisc(cfg: ExperimentConfig, sizes: FrameSizes):
    name = cfg.qdisc
    if name == "fq":
        return FqCodelQdisc()
    if name == "mqprio":
        return MqprioQdisc()
    if name == "cbs":
        children: List = [FifoQdisc() for _ in range(DEFAULT_QAV_MAP.num_queues)]
        children[DEFAULT_QAV_MAP.queue_of(PCP)] = _cbs_queue(cfg, sizes)
        return MqprioQdisc(DEFAULT_QAV_MAP, children)
    if name == "etf":
        return EtfQdisc(delta_ns=cfg.delta_ns)
    if name == "taprio":
        sched = build_taprio_schedule(cfg.cycle_ns, cfg.offset_ns, cfg.ws_ns,
                                      cfg.guard_ns, base_time_ns=cfg.base_time_ns)
        if cfg.txtime_enabled:
            return TaprioQdisc(sched, TAPRIO_NUM_TC, TAPRIO_PRIO_TO_TC,
                               txtime_mode=True, txtime_delay_ns=cfg.delta_ns)
        return TaprioQdisc(sched, TAPRIO_NUM_TC, TAPRIO_PRIO_TO_TC)
    raise ConfigError(f"unknown qdisc {name!r}")


def _bridge_qdisc(cfg: ExperimentConfig, sizes: FrameSizes):
    name = cfg.bridge_qdisc
    if name == "fq":
        return FqCodelQdisc()
    if name == "mqprio":
        return MqprioQdisc(BRIDGE_MAP)
    if name == "cbs":
        children: List = [FifoQdisc() for _ in range(BRIDGE_MAP.num_queues)]
        children[BRIDGE_MAP.queue_of(PCP)] = _cbs_queue(cfg, sizes)
        return MqprioQdisc(BRIDGE_MAP, children)
    raise ConfigError(f"unknown bridge_qdisc {name!r}")


@dataclass
class RunArtifacts:
    """One repetition's outputs, before anything is written to disk.

    ``sim_seconds`` is the wall time of the event loop alone, without
    topology construction or statistics, which is the figure the runtime
    budget of a run is judged by."""

    summary: Summary
    ledger: ValueLedger
    p_taps: TapSeries
    l_taps: TapSeries
    sim_seconds: float


def _execute(cfg: ExperimentConfig, seed: int) -> RunArtifacts:
    """Build the topology, run it to completion, collapse the ledger."""
    sizes = cfg.sizes()
    prof = noise_preset(cfg.noise)
    txtime = cfg.txtime_enabled
    eng = Engine()
    ledger = ValueLedger(cfg.packets)

    # One fixed draw order for every stream the run needs; unused streams
    # are drawn anyway so the hosts see identical randomness whether or not
    # a bridge sits between them.
    spawn = random.Random(seed)
    (s_clk_p, s_clk_l, s_src, s_mir, s_rx,
     s_bridge, s_be, _reserved) = (spawn.getrandbits(64) for _ in range(8))

    clk_p = ClockModel(random.Random(s_clk_p), cfg.cycle_ns,
                       sys_bound_ns=prof.sys_clock_bound_ns,
                       hw_bound_ns=prof.hw_clock_bound_ns, grandmaster=True)
    clk_l = ClockModel(random.Random(s_clk_l), cfg.cycle_ns,
                       sys_bound_ns=prof.sys_clock_bound_ns,
                       hw_bound_ns=prof.hw_clock_bound_ns)

    # Taps at the mirror host read that host's NIC clock; the publisher is
    # the grandmaster, so its taps are simulation time as they stand.  On a
    # point-to-point wire each tap sees exactly one frame kind, so the kind
    # filter (needed once background traffic shares the mirror host's links)
    # is built only for bridged runs.
    bridged = cfg.topology == "bridged"
    if prof.hw_clock_bound_ns > 0 and bridged:
        def l_egress_hook(f, t):
            if f.kind == MIRROR:
                ledger.on_l_egress(f.value, t + clk_l.hw_offset(t))

        def l_ingress_hook(f, t):
            if f.kind == DATA:
                ledger.on_l_ingress(f.value, t + clk_l.hw_offset(t))
    elif prof.hw_clock_bound_ns > 0:
        def l_egress_hook(f, t):
            ledger.on_l_egress(f.value, t + clk_l.hw_offset(t))

        def l_ingress_hook(f, t):
            ledger.on_l_ingress(f.value, t + clk_l.hw_offset(t))
    elif bridged:
        def l_egress_hook(f, t):
            if f.kind == MIRROR:
                ledger.on_l_egress(f.value, t)

        def l_ingress_hook(f, t):
            if f.kind == DATA:
                ledger.on_l_ingress(f.value, t)
    else:
        def l_egress_hook(f, t):
            ledger.on_l_egress(f.value, t)

        def l_ingress_hook(f, t):
            ledger.on_l_ingress(f.value, t)

    if bridged:
        def p_egress_hook(f, t):
            if f.kind == DATA:
                ledger.on_p_egress(f.value, t)

        def p_ingress_cb(t, f):
            if f.kind == MIRROR:
                ledger.on_p_ingress(f.value, t)
    else:
        def p_egress_hook(f, t):
            ledger.on_p_egress(f.value, t)

        def p_ingress_cb(t, f):
            ledger.on_p_ingress(f.value, t)

    port_p = Port(eng, _host_qdisc(cfg, sizes), name="p",
                  launch_offload=txtime, clock=clk_p, egress_hook=p_egress_hook)
    port_l = Port(eng, _host_qdisc(cfg, sizes), name="l",
                  launch_offload=txtime, clock=clk_l, egress_hook=l_egress_hook)
    rx_l = RxBuffer(random.Random(s_rx), prof.rx, ingress_hook=l_ingress_hook)

    if cfg.topology == "p2p":
        port_p.connect(rx_l.deliver)
        port_l.connect(p_ingress_cb)
    else:
        br_to_p = Port(eng, _bridge_qdisc(cfg, sizes), name="br-p")
        br_to_l = Port(eng, _bridge_qdisc(cfg, sizes), name="br-l")
        br_to_be = Port(eng, FifoQdisc(), name="br-be")
        bridge = Bridge(eng, random.Random(s_bridge),
                        fwd_base_ns=round(cfg.bridge_fwd_us * 1000),
                        fwd_jitter_ns=round(cfg.bridge_fwd_jitter_us * 1000))
        bridge.add_port("p", br_to_p, (MAC_P,))
        bridge.add_port("l", br_to_l, (MAC_L,))
        bridge.add_port("be", br_to_be, (MAC_BE,))
        port_p.connect(bridge.ingress("p"))
        port_l.connect(bridge.ingress("l"))
        br_to_l.connect(rx_l.deliver)
        br_to_p.connect(p_ingress_cb)
        br_to_l.qdisc.drop_hook = lambda f, reason: ledger.on_bridge_drop(f)
        br_to_p.qdisc.drop_hook = lambda f, reason: ledger.on_bridge_drop(f)
        if cfg.be_rate_mbps > 0:
            be_port = Port(eng, FifoQdisc(), name="be")
            be_port.connect(bridge.ingress("be"))
            BackgroundSource(eng, be_port, cfg.be_rate_mbps * 1e6, dst=MAC_L,
                             start_ns=cfg.base_time_ns).start()

    app_cfg = cfg.app_config()
    src = SourceNode(eng, app_cfg, clk_p, random.Random(s_src), prof,
                     port_p, ledger, dst=MAC_L, pcp=PCP,
                     physical_bytes=sizes.physical_bytes)
    mir = MirrorNode(eng, app_cfg, clk_l, random.Random(s_mir), prof,
                     port_l, rx_l, ledger, dst=MAC_P, pcp=PCP,
                     physical_bytes=sizes.physical_bytes)
    src.start()
    mir.start()

    t0 = time.perf_counter()
    if cfg.topology == "bridged" and cfg.be_rate_mbps > 0:
        # the background source rearms forever; cut the run once the
        # application threads are guaranteed done
        horizon = cfg.base_time_ns + (cfg.packets + cfg.drain_cycles + 2) * cfg.cycle_ns
        eng.run(until=horizon)
    else:
        eng.run()
    sim_seconds = time.perf_counter() - t0

    p_taps = TapSeries.from_times(
        "P_ingress", [t for t in ledger.p_ingress if t >= 0])
    l_taps = TapSeries.from_times("L_ingress", list(ledger.l_ingress_taps))
    summary = summarize_run(cfg.config_hash(), cfg.match_key(), seed,
                            cfg.packets, ledger.fates(), ledger.rtts(),
                            p_taps, cfg.cycle_ns)
    return RunArtifacts(summary, ledger, p_taps, l_taps, sim_seconds)


def _fate_of(ledger: ValueLedger, v: int) -> str:
    if ledger.p_ingress[v] >= 0:
        return "measured"
    if ledger.p_egress[v] < 0:
        return "d_p"
    if ledger.bridge_drop_data[v] or ledger.l_ingress[v] < 0:
        return "d_bl"
    if not ledger.mirrored[v] or ledger.l_egress[v] < 0:
        return "d_l"
    return "d_bp"


def _trace_events(ledger: ValueLedger) -> Iterable[dict]:
    for v in range(ledger.packets):
        yield {
            "value": v,
            "fate": _fate_of(ledger, v),
            "p_egress_ns": ledger.p_egress[v] if ledger.p_egress[v] >= 0 else None,
            "l_ingress_ns": ledger.l_ingress[v] if ledger.l_ingress[v] >= 0 else None,
            "l_egress_ns": ledger.l_egress[v] if ledger.l_egress[v] >= 0 else None,
            "p_ingress_ns": ledger.p_ingress[v] if ledger.p_ingress[v] >= 0 else None,
        }


def run(cfg: ExperimentConfig, out_dir, trace: bool = False) -> Tuple[Path, List[Summary]]:
    """Execute every repetition and write the run directory.

    Returns the directory (``out_dir/<config hash>``) and the summaries in
    repetition order."""
    cfg.validate()
    run_dir = Path(out_dir) / cfg.config_hash()
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config.txt").write_text(cfg.canonical_text())
    summaries: List[Summary] = []
    for i in range(cfg.repetitions):
        art = _execute(cfg, cfg.seed + i)
        rep_dir = run_dir / f"rep{i}"
        rep_dir.mkdir(exist_ok=True)
        write_ecdf_csv(rep_dir / "ecdf_P_ingress.csv", art.summary.is_ecdf)
        write_ecdf_csv(rep_dir / "ecdf_L_ingress.csv",
                       compute_is_ecdf(art.l_taps, nominal_ns=cfg.cycle_ns))
        if trace:
            write_trace_jsonl(rep_dir / "trace.jsonl", _trace_events(art.ledger))
        summaries.append(art.summary)
    write_summary_csv(run_dir / "summary.csv", summaries)
    return run_dir, summaries


# ---------------------------------------------------------------------------
# sweeps

SWEEP_VALUES: Dict[str, tuple] = {
    "cycletime": (100.0, 125.0, 150.0, 200.0, 250.0),
    "offset": (0.0, 50.0, 100.0, 150.0, 200.0, 250.0),
    "delta": (125.0, 150.0, 175.0, 200.0, 225.0, 250.0),
    "idleslope": (80.0, 90.0, 100.0, 110.0, 120.0),
    "ws": (12.5, 25.0, 37.5, 50.0, 62.5, 75.0),
    "framesize": (3, 12, 30, 65, 136, 163),
    "comparison": ("etf", "fq", "mqprio", "cbs", "taprio"),
    "bridge": ("etf+fq", "etf+mqprio", "etf+cbs", "fq", "mqprio", "cbs"),
    "betraffic": (0.0, 200.0, 400.0, 600.0, 800.0, 1000.0),
}

_SWEEP_PARAM = {
    "cycletime": "cycletime_us",
    "offset": "offset_us",
    "delta": "delta_us",
    "idleslope": "idleslope_pct",
    "ws": "ws_us",
    "framesize": "n_vars",
    "comparison": "qdisc",
    "bridge": "setup",
    "betraffic": "be_rate_mbps",
}


def _sweep_point(name: str, cfg: ExperimentConfig, value) -> ExperimentConfig:
    """The base config bent to one sweep value."""
    if name == "cycletime":
        # offset and lookahead keep their proportions of the cycle
        return replace(cfg, cycletime_us=value, offset_us=0.6 * value,
                       delta_us=0.8 * value)
    if name == "offset":
        return replace(cfg, offset_us=value)
    if name == "delta":
        return replace(cfg, delta_us=value)
    if name == "idleslope":
        return replace(cfg, qdisc="cbs", idleslope_pct=value)
    if name == "ws":
        return replace(cfg, qdisc="taprio", ws_us=value)
    if name == "framesize":
        return replace(cfg, n_vars=value)
    if name == "comparison":
        return replace(cfg, topology="p2p", qdisc=value, be_rate_mbps=0.0)
    if name == "bridge":
        host, _, br = value.partition("+")
        return replace(cfg, topology="bridged", qdisc=host,
                       bridge_qdisc=br or host, be_rate_mbps=0.0)
    if name == "betraffic":
        return replace(cfg, topology="bridged", be_rate_mbps=value)
    raise ConfigError(f"unknown sweep {name!r}")


def _mean_row(param: str, value, summaries: Sequence[Summary]) -> Dict[str, object]:
    return {
        param: value,
        "d_p_pct": statistics.fmean(s.drops.d_p for s in summaries),
        "d_l_pct": statistics.fmean(s.drops.d_l for s in summaries),
        "d_b_to_l_pct": statistics.fmean(s.drops.d_b_to_l for s in summaries),
        "d_b_to_p_pct": statistics.fmean(s.drops.d_b_to_p for s in summaries),
        "d_sigma_pct": statistics.fmean(s.drops.d_sigma for s in summaries),
        "rtt_us": statistics.fmean(s.rtt_mean_us for s in summaries),
        "jitter_us": statistics.fmean(s.jitter.mean_abs_us for s in summaries),
    }


def sweep(name: str, cfg: ExperimentConfig, out_dir,
          trace: bool = False) -> Tuple[Path, List[Dict[str, object]]]:
    """Run a named sweep and write ``sweep_<name>.csv``: one row per point.

    Every point is a full :func:`run` (its directory appears under
    ``out_dir`` keyed by the point's config hash); the sweep file carries
    the repetition means.  All points are validated before the first one
    executes, so a config that breaks mid-sweep is rejected up front."""
    if name not in SWEEP_VALUES:
        raise ConfigError(
            f"unknown sweep {name!r}, expected one of {sorted(SWEEP_VALUES)}")
    param = _SWEEP_PARAM[name]
    points = [(v, _sweep_point(name, cfg, v)) for v in SWEEP_VALUES[name]]
    for _, point_cfg in points:
        point_cfg.validate()
    if name == "bridge":
        for _, point_cfg in points:
            replace(point_cfg, topology="p2p").validate()

    rows: List[Dict[str, object]] = []
    p2p_cache: Dict[str, List[Summary]] = {}
    for value, point_cfg in points:
        _, summaries = run(point_cfg, out_dir, trace=trace)
        row = _mean_row(param, value, summaries)
        if name == "framesize":
            sizes = point_cfg.sizes()
            row["uadp_bytes"] = sizes.uadp_bytes
            row["link_bytes"] = sizes.link_bytes
            row["physical_bytes"] = sizes.physical_bytes
        if name == "bridge":
            host = point_cfg.qdisc
            if host not in p2p_cache:
                _, p2p_cache[host] = run(replace(point_cfg, topology="p2p"),
                                         out_dir, trace=trace)
            pairs = zip(summaries, p2p_cache[host])
            row["l_b_us"] = statistics.fmean(
                estimate_bridge_latency(b, p) for b, p in pairs)
        rows.append(row)

    columns = list(rows[0].keys())
    path = Path(out_dir) / f"sweep_{name}.csv"
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row[c]) if isinstance(row[c], float)
                              else str(row[c]) for c in columns) + "\n")
    return path, rows
