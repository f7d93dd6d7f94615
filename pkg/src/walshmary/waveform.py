"""Chip modulation to complex baseband: BPSK and continuous-phase FSK."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

BPSK = "bpsk"
CPFSK = "cpfsk"


@dataclass(frozen=True)
class ModulationScheme:
    kind: str = BPSK
    samples_per_chip: int = 4
    sample_rate: float = 1.6e6
    h: float = 0.5

    def __post_init__(self):
        if self.kind not in (BPSK, CPFSK):
            raise ValueError(f"unknown modulation {self.kind!r}")
        if self.samples_per_chip < 2:
            raise ValueError("samples_per_chip must be >= 2")
        if not self.sample_rate > 0:
            raise ValueError("sample_rate must be positive")
        if self.kind == CPFSK and not self.h > 0:
            raise ValueError("CPFSK modulation index must be positive")

    @property
    def chip_rate(self) -> float:
        return self.sample_rate / self.samples_per_chip


@dataclass(frozen=True)
class BasebandSignal:
    samples: np.ndarray
    sample_rate: float

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.complex128)
        if not np.all(np.isfinite(s)):
            raise ValueError("signal contains non-finite samples")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    def time(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    def scaled(self, gain: float) -> BasebandSignal:
        return BasebandSignal(self.samples * gain, self.sample_rate)


def _chips(chips) -> np.ndarray:
    c = np.asarray(chips, dtype=np.float64).reshape(-1)
    if c.size == 0:
        raise ValueError("cannot modulate an empty chip sequence")
    return c


def phase_trajectory(chips, h: float = 0.5, start: float = 0.0) -> np.ndarray:
    """Phase at each chip boundary (``len(chips) + 1`` values, radians)."""
    if not h > 0:
        raise ValueError("modulation index must be positive")
    steps = np.pi * h * np.sign(_chips(chips))
    return start + np.concatenate([[0.0], np.cumsum(steps)])


def modulate(chips, scheme: ModulationScheme) -> BasebandSignal:
    c = _chips(chips)
    sps = scheme.samples_per_chip
    if scheme.kind == BPSK:
        return BasebandSignal(np.repeat(c, sps).astype(np.complex128), scheme.sample_rate)
    # Phase ramps linearly within each chip; sample j of chip k sits at
    # fraction (j + 1) / sps, so each chip's last sample is on its end boundary.
    start = phase_trajectory(c, scheme.h)[:-1]
    frac = np.arange(1, sps + 1) / sps
    phase = start[:, None] + np.pi * scheme.h * np.sign(c)[:, None] * frac[None, :]
    return BasebandSignal(np.exp(1j * phase.reshape(-1)), scheme.sample_rate)


def power(signal) -> float:
    s = signal.samples if isinstance(signal, BasebandSignal) else np.asarray(signal)
    if s.size == 0:
        raise ValueError("power of an empty signal")
    return float(np.mean(np.abs(s) ** 2))


def signal_csv(signal: BasebandSignal) -> str:
    out = io.StringIO()
    out.write("index,re,im\n")
    for i, z in enumerate(signal.samples):
        out.write(f"{i},{z.real:.12g},{z.imag:.12g}\n")
    return out.getvalue()


def trajectory_csv(trajectory) -> str:
    out = io.StringIO()
    out.write("index,phase_radians\n")
    for i, ph in enumerate(trajectory):
        out.write(f"{i},{ph:.12g}\n")
    return out.getvalue()
