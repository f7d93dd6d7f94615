"""Frame sync and bi-orthogonal correlator bank.

A frame is the sync row, its complement, then one Walsh symbol per payload
word.  Chip estimates are taken after sync-aided carrier derotation and fed to
a correlator bank over the ``2**(K-1)`` data codes; the sign of the winning
correlation carries the complement bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Interferer
from .codebook import Codebook, encode_words, signed_word_metrics
from .waveform import BPSK, BasebandSignal, ModulationScheme, modulate

CARRIER_MODES = ("none", "phase", "linear")


class SyncError(RuntimeError):
    """No sync peak above threshold in the search window."""


@dataclass(frozen=True)
class ReceiverConfig:
    """Receiver knobs.

    carrier:
        ``"none"`` assumes a known, zero carrier phase; ``"phase"`` estimates
        a constant phase from the sync segment; ``"linear"`` fits phase and
        frequency across the sync segment by least squares.
    track:
        decision-directed phase tracking over the payload.
    cpfsk_detector:
        ``"waveform"`` correlates whole symbols against every word's CPFSK
        waveform; ``"chip"`` feeds per-chip phase increments to the chip
        correlator (poor below about 5 dB chip SNR).
    """

    threshold: float = 0.5
    soft: bool = True
    carrier: str = "phase"
    track: bool = True
    loop_gain: float = 0.1
    require_lock: bool = True
    refine_timing: bool = True
    cpfsk_detector: str = "waveform"

    def __post_init__(self):
        if self.carrier not in CARRIER_MODES:
            raise ValueError(f"carrier mode must be one of {CARRIER_MODES}")
        if self.cpfsk_detector not in ("waveform", "chip"):
            raise ValueError("cpfsk_detector must be 'waveform' or 'chip'")
        if not 0 < self.threshold:
            raise ValueError("sync threshold must be positive")


@dataclass(frozen=True)
class SyncResult:
    sample_offset: int
    peak_metric: float
    detected: bool


@dataclass(frozen=True)
class Decision:
    word: int
    code_index: int
    complement_flag: bool
    metric: float


@dataclass(frozen=True)
class FrameResult:
    words: np.ndarray
    metrics: np.ndarray  # (symbols, 2**(K-1)) signed correlations
    word_metrics: np.ndarray  # (symbols, 2**K), indexed by word
    chip_estimates: np.ndarray
    noise_variance: float  # complex variance of one chip estimate
    sync: SyncResult
    phase: float
    frequency: float


def frame_chips(cb: Codebook, payload_words) -> np.ndarray:
    words = np.asarray(payload_words, dtype=np.int64).reshape(-1)
    if words.size == 0:
        raise ValueError("frame payload is empty")
    return np.concatenate([cb.sync_pattern(), encode_words(cb, words)])


def build_frame(cb: Codebook, payload_words, scheme: ModulationScheme) -> BasebandSignal:
    return modulate(frame_chips(cb, payload_words), scheme)


def sync_reference(cb: Codebook, scheme: ModulationScheme) -> np.ndarray:
    return modulate(cb.sync_pattern(), scheme).samples


def sync_metric(signal, cb: Codebook, scheme: ModulationScheme) -> np.ndarray:
    """Chip-domain sync correlation magnitude at every full-overlap offset."""
    x = signal.samples if isinstance(signal, BasebandSignal) else np.asarray(signal)
    ref = sync_reference(cb, scheme)
    if x.size < ref.size:
        return np.zeros(0)
    return np.abs(np.correlate(x, ref, mode="valid")) / scheme.samples_per_chip


def acquire_sync(signal, cb: Codebook, scheme: ModulationScheme, search_window: int | None = None,
                 threshold: float = 0.5, start: int = 0) -> SyncResult:
    """Slide the ``2N``-chip sync reference over ``[start, start + search_window)``.

    A clean, aligned frame peaks at ``2N``; detection requires the peak to
    exceed ``threshold * 2N``.
    """
    metric = sync_metric(signal, cb, scheme)
    stop = metric.size if search_window is None else min(metric.size, start + search_window)
    if search_window is not None and search_window <= 0 or stop <= start:
        raise ValueError("sync search window is empty")
    window = metric[start:stop]
    k = int(np.argmax(window))
    peak = float(window[k])
    ideal = 2 * cb.order
    return SyncResult(sample_offset=start + k, peak_metric=peak, detected=peak > threshold * ideal)


def demodulate_symbol(chip_estimates, cb: Codebook) -> Decision:
    est = np.asarray(chip_estimates, dtype=np.float64)
    if est.shape != (cb.order,):
        raise ValueError(f"expected {cb.order} chip estimates, got shape {est.shape}")
    words, metrics = demodulate_symbols(est[None, :], cb)
    corr = metrics[0]
    j = int(np.argmax(np.abs(corr)))
    return Decision(word=int(words[0]), code_index=j, complement_flag=bool(corr[j] < 0), metric=float(corr[j]))


def demodulate_symbols(chip_estimates: np.ndarray, cb: Codebook) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized decisions for an ``(n_symbols, N)`` array of chip estimates."""
    corr = np.asarray(chip_estimates, dtype=np.float64) @ cb.data_codes.T
    j = np.argmax(np.abs(corr), axis=1)  # first maximum -> lowest index wins ties
    flag = corr[np.arange(corr.shape[0]), j] < 0
    words = j | (flag.astype(np.int64) << (cb.bits_per_symbol - 1))
    return words, corr


def _estimate_carrier(x: np.ndarray, ref: np.ndarray, sps: int, mode: str) -> tuple[float, float]:
    """Return (phase at sync start, frequency in cycles/sample)."""
    if mode == "none":
        return 0.0, 0.0
    stripped = x[: ref.size] * np.conj(ref)
    if mode == "phase":
        return float(np.angle(stripped.sum())), 0.0
    per_chip = stripped.reshape(-1, sps).sum(axis=1)
    centers = np.arange(per_chip.size) * sps + (sps - 1) / 2.0
    coarse = np.angle(np.sum(per_chip[1:] * np.conj(per_chip[:-1]))) / sps
    residual = per_chip * np.exp(-1j * coarse * centers)
    slope, intercept = np.polyfit(centers, np.unwrap(np.angle(residual)), 1)
    return float(intercept), float((coarse + slope) / (2 * np.pi))


def _word_waveforms(cb: Codebook, scheme: ModulationScheme) -> np.ndarray:
    """Modulated waveform of every constellation word, each started at phase 0."""
    return np.stack([modulate(c, scheme).samples for c in cb.constellation()])


def _track(zw: np.ndarray, gain: float) -> np.ndarray:
    """Decision-directed phase per symbol from complex word correlations ``(symbols, 2**K)``."""
    psi = np.empty(zw.shape[0])
    acc = 0.0
    for s in range(zw.shape[0]):
        psi[s] = acc
        r = zw[s] * np.exp(-1j * acc)
        acc += gain * float(np.angle(r[int(np.argmax(r.real))]))
    return psi


def _cpfsk_chips(y: np.ndarray, prev: complex, cb: Codebook, n_symbols: int, scheme: ModulationScheme) -> np.ndarray:
    """Soft chip values from the per-chip phase increment; exactly +-1 when clean."""
    sps = scheme.samples_per_chip
    seg = y[: n_symbols * cb.order * sps]
    lagged = np.concatenate([[prev], seg[:-1]])
    diff = (seg * np.conj(lagged)).reshape(n_symbols, cb.order, sps).sum(axis=2)
    return diff.imag / (sps * np.sin(np.pi * scheme.h / sps))


def _payload_energy(x: np.ndarray, start: int, n_symbols: int, waveforms: np.ndarray) -> float:
    sym_len = waveforms.shape[1]
    y = x[start: start + n_symbols * sym_len].reshape(n_symbols, sym_len)
    return float(np.abs(y @ waveforms.conj().T).max(axis=1).sum())


def receive_frame(signal: BasebandSignal, cb: Codebook, scheme: ModulationScheme,
                  cfg: ReceiverConfig = ReceiverConfig(), n_symbols: int | None = None,
                  search_window: int | None = None, search_start: int = 0) -> FrameResult:
    """Sync, derotate and decide every payload symbol of one frame.

    Timing is the sync peak, optionally refined within one chip by adding the
    payload's non-coherent correlation energy.  BPSK decisions go through the
    chip-domain correlator; CPFSK uses either whole-symbol waveform
    correlation (``cpfsk_detector="waveform"``) or per-chip phase increments.
    """
    x = signal.samples
    sps = scheme.samples_per_chip
    sym_len = cb.order * sps
    sync_len = 2 * sym_len
    if n_symbols is None:
        n_symbols = (x.size - search_start - sync_len) // sym_len
    if n_symbols < 1:
        raise ValueError("signal shorter than one frame")
    fits = x.size - sync_len - n_symbols * sym_len + 1 - search_start
    search_window = fits if search_window is None else min(search_window, fits)
    if search_window <= 0:
        raise ValueError("signal shorter than one frame")

    sync = acquire_sync(signal, cb, scheme, search_window, cfg.threshold, start=search_start)
    if not sync.detected and cfg.require_lock:
        raise SyncError(f"sync peak {sync.peak_metric:.3g} below {cfg.threshold} x {2 * cb.order}")

    tau = sync.sample_offset
    waveforms = _word_waveforms(cb, scheme)
    if cfg.refine_timing:
        metric = sync_metric(signal, cb, scheme)
        lo = max(search_start, tau - sps + 1)
        hi = min(search_start + search_window, tau + sps)
        scores = [metric[t] + _payload_energy(x, t + sync_len, n_symbols, waveforms) / sps for t in range(lo, hi)]
        tau = lo + int(np.argmax(scores))
        sync = SyncResult(tau, float(metric[tau]), sync.detected)

    ref = sync_reference(cb, scheme)
    phase, freq = _estimate_carrier(x[tau:], ref, sps, cfg.carrier)
    y = x[tau:] * np.exp(-1j * (phase + 2 * np.pi * freq * np.arange(x.size - tau)))
    payload = y[sync_len: sync_len + n_symbols * sym_len]
    tracking = cfg.track and cfg.carrier != "none"

    if scheme.kind == BPSK:
        u = payload.reshape(n_symbols, cb.order, sps).mean(axis=2)
        if tracking:
            z = u @ cb.data_codes.T
            u = u * np.exp(-1j * _track(np.concatenate([z, -z], axis=1), cfg.loop_gain))[:, None]
        est = u.real
        noise_var = 2.0 * float(np.mean(u.imag**2))
    elif cfg.cpfsk_detector == "waveform":
        zw = payload.reshape(n_symbols, sym_len) @ waveforms.conj().T / sps
        if tracking:
            zw = zw * np.exp(-1j * _track(zw, cfg.loop_gain))[:, None]
        wm = zw.real
        words = np.argmax(wm, axis=1)
        half = cb.n_codes
        noise_var = 2.0 * float(np.mean(zw[np.arange(n_symbols), words].imag ** 2)) / cb.order
        est = _cpfsk_chips(payload, y[sync_len - 1], cb, n_symbols, scheme)
        return FrameResult(words=words, metrics=0.5 * (wm[:, :half] - wm[:, half:]), word_metrics=wm,
                           chip_estimates=est, noise_variance=max(noise_var, 1e-12), sync=sync,
                           phase=phase, frequency=freq * scheme.sample_rate)
    else:
        est = _cpfsk_chips(payload, y[sync_len - 1], cb, n_symbols, scheme)
        noise_var = float(np.mean((est - np.sign(est)) ** 2))
    if not cfg.soft:
        est = np.where(est < 0, -1.0, 1.0)
    words, metrics = demodulate_symbols(est, cb)
    return FrameResult(words=words, metrics=metrics, word_metrics=signed_word_metrics(metrics),
                       chip_estimates=est, noise_variance=max(noise_var, 1e-12), sync=sync,
                       phase=phase, frequency=freq * scheme.sample_rate)


def demodulate_frame(signal: BasebandSignal, cb: Codebook, scheme: ModulationScheme,
                     cfg: ReceiverConfig = ReceiverConfig(), n_symbols: int | None = None,
                     search_window: int | None = None, search_start: int = 0) -> list[int]:
    return receive_frame(signal, cb, scheme, cfg, n_symbols, search_window, search_start).words.tolist()


def despreading_gain_probe(codes, interferer: Interferer | None = None, trials: int = 4000, seed: int = 0,
                           chip_rate: float = 1.0, sweep_frequency: bool = True) -> float:
    """Interferer power before despreading over its power in the decision variable (dB).

    A single tone, sampled at the chip rate with uniformly random phase, is
    correlated against the data codes (normalized so the desired code comes
    out at unit amplitude).  With ``sweep_frequency`` the tone frequency is
    drawn uniformly across the spread band, the averaging under which the
    gain equals ``N``; otherwise ``interferer.center_offset`` is used.
    """
    codes = codes.data_codes if isinstance(codes, Codebook) else np.atleast_2d(np.asarray(codes))
    interferer = interferer or Interferer()
    n = codes.shape[1]
    rng = np.random.default_rng(seed)
    phase = rng.uniform(0, 2 * np.pi, trials)
    if sweep_frequency:
        freq = rng.uniform(-0.5, 0.5, trials)
    else:
        freq = np.full(trials, interferer.center_offset / chip_rate)
    p = interferer.power_ratio
    k = np.arange(n)
    tone = np.sqrt(p) * np.exp(1j * (2 * np.pi * freq[:, None] * k[None, :] + phase[:, None]))
    pick = codes[np.arange(trials) % codes.shape[0]]
    residual = np.mean(np.abs(np.sum(pick * tone, axis=1) / n) ** 2)
    if residual == 0:
        return float("inf")
    return float(10 * np.log10(p / residual))
