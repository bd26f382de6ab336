"""Performance indicators computed from tap timestamps, and their exporters.

Everything here is pure post-processing: a run produces per-point timestamp
series and per-value fate counts, and this module turns them into drop
rates, round-trip statistics, spacing jitter, and inter-arrival ECDFs.

Jitter needs a word of caution.  We report three figures per series: the
mean of |IS - c| over consecutive inter-arrival spacings IS (the headline
number), the population standard deviation of the spacings, and the peak
absolute deviation.  A lost frame shows up as a spacing near a multiple of
the cycle time, so it inflates the headline mean by roughly c / n rather
than disappearing.
"""
from __future__ import annotations

import csv
import json
import statistics
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

TAP_POINTS = (
    "P_egress",
    "P_ingress",
    "B_ingress_from_P",
    "B_ingress_from_L",
    "L_ingress",
    "L_egress",
)


@dataclass(frozen=True)
class TapSeries:
    """Timestamps collected at one measurement point, ordered by capture."""

    point: str
    samples: Tuple[Tuple[int, int], ...]  # (seq, time_ns)

    def __post_init__(self) -> None:
        if self.point not in TAP_POINTS:
            raise ValueError(f"unknown tap point {self.point!r}")
        last = None
        for _, t in self.samples:
            if last is not None and t < last:
                raise ValueError(f"{self.point}: timestamps must be non-decreasing")
            last = t

    @classmethod
    def from_times(cls, point: str, times: Sequence[int]) -> "TapSeries":
        return cls(point, tuple((i, int(t)) for i, t in enumerate(times)))

    def times(self) -> List[int]:
        return [t for _, t in self.samples]

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class DropRates:
    """Loss percentages per direction plus their sum."""

    d_p: float
    d_l: float
    d_b_to_l: float
    d_b_to_p: float
    d_sigma: float


def compute_drop_rates(published: int, d_p: int = 0, d_l: int = 0,
                       d_b_to_l: int = 0, d_b_to_p: int = 0) -> DropRates:
    """Turn per-direction loss counts into percentages of published frames."""
    if published <= 0:
        raise ValueError("published count must be positive")
    counts = (d_p, d_l, d_b_to_l, d_b_to_p)
    for c in counts:
        if c < 0 or c > published:
            raise ValueError(f"loss count {c} outside [0, {published}]")
    rates = [100.0 * c / published for c in counts]
    return DropRates(rates[0], rates[1], rates[2], rates[3], sum(rates))


@dataclass(frozen=True)
class JitterStats:
    mean_abs_us: float
    std_us: float
    peak_us: float


def compute_jitter(taps: TapSeries, cycle_ns: int) -> JitterStats:
    """Spacing statistics of an arrival series against the nominal cycle."""
    times = taps.times()
    if len(times) < 2:
        raise ValueError("need at least two arrivals to compute spacings")
    deviations = [(b - a) - cycle_ns for a, b in zip(times, times[1:])]
    mean_abs = sum(abs(d) for d in deviations) / len(deviations)
    std = statistics.pstdev(deviations) if len(deviations) > 1 else 0.0
    peak = max(abs(d) for d in deviations)
    return JitterStats(mean_abs / 1000.0, std / 1000.0, peak / 1000.0)


def compute_is_ecdf(taps: TapSeries, nominal_ns: int = 0) -> List[Tuple[int, float]]:
    """Empirical CDF of inter-arrival spacings, one point per distinct value.

    With ``nominal_ns`` set, the x axis is the deviation from that nominal
    spacing instead of the raw spacing.  Fewer than two arrivals yield an
    empty list."""
    times = taps.times()
    if len(times) < 2:
        return []
    spacings = sorted((b - a) - nominal_ns for a, b in zip(times, times[1:]))
    total = len(spacings)
    out: List[Tuple[int, float]] = []
    for i, s in enumerate(spacings):
        if i + 1 < total and spacings[i + 1] == s:
            continue  # keep only the last (cumulative) entry per value
        out.append((s, (i + 1) / total))
    return out


@dataclass
class Summary:
    """One run collapsed to the table row the experiment reports."""

    config_hash: str
    match_key: str
    seed: int
    packets: int
    drops: DropRates
    rtt_mean_us: float
    rtt_median_us: float
    rtt_max_us: float
    jitter: JitterStats
    l_b_us: Optional[float] = None
    is_ecdf: List[Tuple[int, float]] = field(default_factory=list)


def summarize_run(config_hash: str, match_key: str, seed: int, published: int,
                  fates: Dict[str, int], rtts_ns: Sequence[int],
                  arrival_taps: TapSeries, cycle_ns: int) -> Summary:
    """Collapse one run's fates, RTTs and arrival taps into a Summary.

    The fate buckets must account for every published value; anything else
    means the ledger and the run disagree and the result would be garbage.
    """
    measured = fates["measured"]
    losses = (fates["d_p"], fates["d_l"], fates["d_bl"], fates["d_bp"])
    if measured + sum(losses) != published:
        raise ValueError(
            f"fates do not cover the run: {measured} + {sum(losses)} != {published}")
    drops = compute_drop_rates(published, d_p=losses[0], d_l=losses[1],
                               d_b_to_l=losses[2], d_b_to_p=losses[3])
    if not rtts_ns:
        raise ValueError("no completed round trips; nothing to summarize")
    rtt_mean = statistics.fmean(rtts_ns) / 1000.0
    rtt_median = statistics.median(rtts_ns) / 1000.0
    rtt_max = max(rtts_ns) / 1000.0
    jitter = compute_jitter(arrival_taps, cycle_ns)
    ecdf = compute_is_ecdf(arrival_taps, nominal_ns=cycle_ns)
    return Summary(config_hash, match_key, seed, published, drops,
                   rtt_mean, rtt_median, rtt_max, jitter, None, ecdf)


def estimate_bridge_latency(bridged: Summary, p2p: Summary) -> float:
    """Two-way latency attributable to the bridge, in microseconds.

    Both runs must come from the same configuration apart from topology;
    the difference of mean round-trip times is then the store-and-forward
    cost both ways plus whatever queueing the bridge egress added."""
    if bridged.match_key != p2p.match_key:
        raise ValueError(
            f"runs are not comparable: {bridged.match_key!r} vs {p2p.match_key!r}")
    return bridged.rtt_mean_us - p2p.rtt_mean_us


SUMMARY_COLUMNS = (
    "config_hash", "match_key", "seed", "packets",
    "d_p_pct", "d_l_pct", "d_b_to_l_pct", "d_b_to_p_pct", "d_sigma_pct",
    "rtt_mean_us", "rtt_median_us", "rtt_max_us",
    "jitter_us", "jitter_std_us", "jitter_peak_us", "l_b_us",
)


def _cell(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def write_summary_csv(path, summaries: Iterable[Summary]) -> None:
    """One row per run; floats keep full precision so reruns compare bytewise."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_COLUMNS)
        for s in summaries:
            w.writerow([
                s.config_hash, s.match_key, str(s.seed), str(s.packets),
                _cell(s.drops.d_p), _cell(s.drops.d_l), _cell(s.drops.d_b_to_l),
                _cell(s.drops.d_b_to_p), _cell(s.drops.d_sigma),
                _cell(s.rtt_mean_us), _cell(s.rtt_median_us), _cell(s.rtt_max_us),
                _cell(s.jitter.mean_abs_us), _cell(s.jitter.std_us),
                _cell(s.jitter.peak_us), _cell(s.l_b_us),
            ])


def write_ecdf_csv(path, ecdf: Sequence[Tuple[int, float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("deviation_ns", "fraction"))
        for x, frac in ecdf:
            w.writerow((str(x), _cell(float(frac))))


def write_trace_jsonl(path, events: Iterable[dict]) -> None:
    """Raw per-event records, one JSON object per line, keys sorted."""
    with open(path, "w") as fh:
        for ev in events:
            fh.write(json.dumps(ev, sort_keys=True, separators=(",", ":")))
            fh.write("\n")
