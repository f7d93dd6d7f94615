"""Monte Carlo link runs: random payload -> frame -> channel -> receiver (-> LDPC)."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import fec
from .channel import Scenario, apply
from .codebook import Codebook
from .receiver import ReceiverConfig, SyncError, build_frame, receive_frame
from .waveform import BasebandSignal, ModulationScheme, power


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    ebn0_db: float | None
    n_interferers: int
    sync_offset: int
    word_errors: int
    bit_errors: int
    symbols: int
    bits: int
    locked: bool = True  # sync peak cleared the receiver threshold


@dataclass(frozen=True)
class LinkSetup:
    cb: Codebook
    scheme: ModulationScheme
    scenario: Scenario
    # acquisition is already confined to the timing-uncertainty window, so a
    # weak sync peak is reported (``locked``) rather than discarding the frame
    receiver: ReceiverConfig = ReceiverConfig(require_lock=False)
    code: fec.LdpcCode | None = None
    symbols_per_frame: int = 30
    max_iter: int = 50
    timing_uncertainty: int = 1  # chips either side of the nominal frame start

    def payload_words(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """(information bits, transmitted words) for one frame."""
        k = self.cb.bits_per_symbol
        if self.code is None:
            info = rng.integers(0, 2, self.symbols_per_frame * k, dtype=np.uint8)
            return info, fec.bits_to_words(info, k)
        info = rng.integers(0, 2, self.code.k, dtype=np.uint8)
        return info, fec.bits_to_words(fec.pad_bits(fec.encode(self.code, info), k), k)


def energy_per_info_bit(setup: LinkSetup, n_symbols: int, n_info_bits: int, signal_power: float = 1.0) -> float:
    """Payload energy per information bit; sync overhead is not charged."""
    duration = n_symbols * setup.cb.order * setup.scheme.samples_per_chip / setup.scheme.sample_rate
    return signal_power * duration / n_info_bits


def run_trial(setup: LinkSetup, trial: int, seed: int, ebn0_db: float | None) -> TrialRecord:
    rng = np.random.default_rng([seed, 1])
    info, words = setup.payload_words(rng)
    frame = build_frame(setup.cb, words, setup.scheme)
    sym_len = setup.cb.order * setup.scheme.samples_per_chip
    # one symbol of silence after the frame gives the sync search room to slip
    guarded = BasebandSignal(np.concatenate([frame.samples, np.zeros(sym_len)]), frame.sample_rate)
    chan = replace(setup.scenario.config(seed), ebn0_db=ebn0_db, signal_power=power(frame))
    eb = energy_per_info_bit(setup, words.size, info.size)
    rx = apply(guarded, chan, eb)

    try:
        slack = setup.timing_uncertainty * setup.scheme.samples_per_chip
        start = max(0, chan.timing_offset - slack)
        res = receive_frame(rx, setup.cb, setup.scheme, setup.receiver, n_symbols=words.size,
                            search_window=chan.timing_offset + slack + 1 - start, search_start=start)
    except SyncError:
        return TrialRecord(trial, seed, ebn0_db, setup.scenario.n_interferers, -1, int(words.size),
                           int(info.size), int(words.size), int(info.size), False)

    word_errors = int(np.count_nonzero(res.words != words))
    k = setup.cb.bits_per_symbol
    if setup.code is None:
        decoded = fec.words_to_bits(res.words, k)
    else:
        llrs = fec.word_llrs_to_bit_llrs(res.word_metrics, res.noise_variance).reshape(-1)[: setup.code.n]
        decoded = fec.decode(setup.code, llrs, setup.max_iter).bits[: setup.code.k]
    bit_errors = int(np.count_nonzero(decoded != info))
    return TrialRecord(trial, seed, ebn0_db, setup.scenario.n_interferers, res.sync.sample_offset,
                       word_errors, bit_errors, int(words.size), int(info.size), res.sync.detected)


def run_trials(setup: LinkSetup, ebn0_db: float | None, trials: int, base_seed: int) -> list[TrialRecord]:
    return [run_trial(setup, t, base_seed + t, ebn0_db) for t in range(trials)]
