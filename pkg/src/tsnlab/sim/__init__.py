"""Deterministic discrete-event machinery: engine, clocks, latency noise,
links, ports, bridge, background traffic."""

from .engine import Engine
from .clock import ClockModel
from .noise import LatencyModel, NoiseProfile, noise_preset
from .network import Port, Bridge, RxBuffer, SimFrame, serialization_ns
from .traffic import BackgroundSource

__all__ = [
    "Engine",
    "ClockModel",
    "LatencyModel",
    "NoiseProfile",
    "noise_preset",
    "Port",
    "Bridge",
    "RxBuffer",
    "SimFrame",
    "serialization_ns",
    "BackgroundSource",
]
