"""Baseband channel: AWGN, narrowband interferers, carrier error and integer delay."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np
import yaml

from .waveform import BasebandSignal, power

TONE = "tone"
NOISE = "noise"


@dataclass(frozen=True)
class Interferer:
    center_offset: float = 0.0
    power_ratio: float = 1.0
    bandwidth: float = 25e3
    kind: str = TONE
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in (TONE, NOISE):
            raise ValueError(f"unknown interferer kind {self.kind!r}")
        if self.power_ratio < 0:
            raise ValueError("interferer power_ratio must be non-negative")
        if self.kind == NOISE and not self.bandwidth > 0:
            raise ValueError("filtered-noise interferer needs a positive bandwidth")


@dataclass(frozen=True)
class ChannelConfig:
    """Impairments applied by :func:`apply`.

    ``ebn0_db=None`` disables thermal noise.  ``signal_power`` is the
    reference ``S`` for interferer levels; when ``None`` it is measured from
    the input signal.
    """

    ebn0_db: float | None = None
    interferers: tuple[Interferer, ...] = ()
    carrier_offset: float = 0.0
    timing_offset: int = 0
    seed: int = 0
    signal_power: float | None = None

    def __post_init__(self):
        if self.timing_offset < 0 or int(self.timing_offset) != self.timing_offset:
            raise ValueError("timing_offset must be a non-negative integer")
        object.__setattr__(self, "interferers", tuple(self.interferers))


@dataclass(frozen=True)
class OccupancyReport:
    p: float
    count: int
    spacing: float
    W: float


def energy_per_bit(signal_power: float, bit_rate: float) -> float:
    return signal_power / bit_rate


def noise_variance(ebn0_db: float, Eb: float, sample_rate: float) -> float:
    """Complex per-sample AWGN variance for a given Eb/N0."""
    n0 = Eb / 10.0 ** (ebn0_db / 10.0)
    return n0 * sample_rate


def _complex_gaussian(rng: np.random.Generator, n: int, variance: float) -> np.ndarray:
    return np.sqrt(variance / 2.0) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))


def interferer_samples(intf: Interferer, S: float, n: int, sample_rate: float, rng: np.random.Generator) -> np.ndarray:
    p = intf.power_ratio * S
    t = np.arange(n) / sample_rate
    shift = np.exp(1j * (2 * np.pi * intf.center_offset * t + intf.phase))
    if intf.kind == TONE:
        return np.sqrt(p) * shift
    taps = max(1, int(round(sample_rate / intf.bandwidth)))
    w = _complex_gaussian(rng, n + taps - 1, p)
    # unit-energy moving average keeps the expected power at p
    lowpassed = np.convolve(w, np.full(taps, 1.0 / np.sqrt(taps)), mode="valid")
    return lowpassed * shift


def apply(signal: BasebandSignal, cfg: ChannelConfig, Eb: float | None = None) -> BasebandSignal:
    x = signal.samples
    if x.size == 0:
        raise ValueError("channel input is empty")
    fs = signal.sample_rate
    n = x.size + cfg.timing_offset

    y = np.zeros(n, dtype=np.complex128)
    y[cfg.timing_offset:] = x
    if cfg.carrier_offset:
        y *= np.exp(2j * np.pi * cfg.carrier_offset * np.arange(n) / fs)

    rng = np.random.default_rng(cfg.seed)
    if cfg.interferers:
        S = cfg.signal_power if cfg.signal_power is not None else power(signal)
        if not S > 0:
            raise ValueError("interferer calibration needs a positive signal power")
        for intf in cfg.interferers:
            y += interferer_samples(intf, S, n, fs, rng)

    if cfg.ebn0_db is not None:
        if Eb is None or not Eb > 0:
            raise ValueError("noise enabled but Eb is not positive")
        y += _complex_gaussian(rng, n, noise_variance(cfg.ebn0_db, Eb, fs))

    return BasebandSignal(y, fs)


def occupancy(interferers, W: float, spacing: float) -> OccupancyReport:
    if not W > 0:
        raise ValueError("W must be positive")
    count = len(interferers)
    return OccupancyReport(p=min(1.0, max(0.0, count * spacing / W)), count=count, spacing=spacing, W=W)


def place_interferers(count: int, W: float, W_ni: float, power_ratio: float, kind: str = TONE,
                      seed: int = 0) -> list[Interferer]:
    """``count`` interferers at evenly spaced offsets across ``W``, centred on 0, random phases."""
    if count <= 0:
        return []
    rng = np.random.default_rng(seed)
    step = W / count
    offsets = -W / 2 + step * (np.arange(count) + 0.5)
    phases = rng.uniform(0, 2 * np.pi, count)
    return [
        Interferer(center_offset=float(f), power_ratio=power_ratio, bandwidth=W_ni, kind=kind, phase=float(ph))
        for f, ph in zip(offsets, phases)
    ]


@dataclass(frozen=True)
class Scenario:
    """Serializable channel scenario; :meth:`config` makes a per-trial ChannelConfig."""

    ebn0_db: float | None = None
    n_interferers: int = 0
    W: float = 400e3
    W_ni: float = 35e3
    power_ratio_db: float = 0.0
    kind: str = TONE
    carrier_offset: float = 0.0
    timing_offset: int = 0
    seed: int = 0

    @classmethod
    def from_mapping(cls, data: dict) -> Scenario:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**data)

    def config(self, seed: int, ebn0_db: float | None = None) -> ChannelConfig:
        intf = place_interferers(self.n_interferers, self.W, self.W_ni, 10 ** (self.power_ratio_db / 10),
                                 self.kind, seed)
        return ChannelConfig(
            ebn0_db=self.ebn0_db if ebn0_db is None else ebn0_db,
            interferers=tuple(intf),
            carrier_offset=self.carrier_offset,
            timing_offset=self.timing_offset,
            seed=seed,
        )


def load_scenario(path) -> Scenario:
    text = Path(path).read_text()
    data = yaml.safe_load(text) or {}
    if not isinstance(data, dict):
        raise ValueError(f"scenario file {path} must hold a mapping")
    return Scenario.from_mapping(data)
