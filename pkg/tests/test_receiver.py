import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from walshmary.channel import ChannelConfig, Interferer, apply
from walshmary.codebook import encode_bits, make_codebook
from walshmary.receiver import (
    ReceiverConfig, SyncError, acquire_sync, build_frame, demodulate_frame, demodulate_symbol,
    demodulate_symbols, despreading_gain_probe, frame_chips, receive_frame, sync_metric,
)
from walshmary.waveform import BasebandSignal, ModulationScheme

PAIRS = [(12, 4), (20, 5), (24, 5), (40, 6), (16, 4), (64, 6)]
BPSK = ModulationScheme()
CPFSK = ModulationScheme(kind="cpfsk")


def words_for(cb, n, seed=0):
    return np.random.default_rng(seed).integers(0, cb.constellation_size, n)


def test_frame_layout():
    cb = make_codebook(12, 4)
    chips = frame_chips(cb, np.arange(10))
    assert chips.size == 2 * 12 + 10 * 12 == 144
    assert np.array_equal(chips[:12], cb.sync_code)
    assert np.array_equal(chips[12:24], -cb.sync_code)
    with pytest.raises(ValueError):
        frame_chips(cb, [])


@pytest.mark.parametrize("scheme", [BPSK, CPFSK], ids=["bpsk", "cpfsk"])
@pytest.mark.parametrize("delay", [0, 7])
def test_sync_peak_and_offset(scheme, delay):
    cb = make_codebook(12, 4)
    rx = apply(build_frame(cb, words_for(cb, 10), scheme), ChannelConfig(timing_offset=delay))
    res = acquire_sync(rx, cb, scheme)
    assert res.sample_offset == delay
    assert res.peak_metric == pytest.approx(24.0)
    assert res.detected
    assert sync_metric(rx, cb, scheme).max() == pytest.approx(24.0)


def test_empty_search_window():
    cb = make_codebook(12, 4)
    with pytest.raises(ValueError):
        acquire_sync(build_frame(cb, [0], BPSK), cb, BPSK, search_window=0)


@pytest.mark.parametrize("n, k", PAIRS)
def test_exhaustive_noiseless_decisions(n, k):
    cb = make_codebook(n, k)
    for w in range(cb.constellation_size):
        d = demodulate_symbol(encode_bits(cb, w), cb)
        assert d.word == w
        assert d.metric == pytest.approx(n if not d.complement_flag else -n)


def test_dc_offset_does_not_move_metrics():
    cb = make_codebook(12, 4)
    rng = np.random.default_rng(1)
    est = rng.normal(size=(200, 12))
    w0, m0 = demodulate_symbols(est, cb)
    w1, m1 = demodulate_symbols(est + 3.7, cb)
    assert np.array_equal(w0, w1)
    assert np.allclose(m0, m1, atol=1e-9)


@given(st.sampled_from(PAIRS), st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3))
def test_decisions_scale_invariant(pair, seed, gain):
    cb = make_codebook(*pair)
    est = np.random.default_rng(seed).normal(size=(20, cb.order))
    assert np.array_equal(demodulate_symbols(est, cb)[0], demodulate_symbols(est * gain, cb)[0])


@pytest.mark.parametrize("scheme", [BPSK, CPFSK], ids=["bpsk", "cpfsk"])
@pytest.mark.parametrize("n, k", [(12, 4), (40, 6)])
def test_noiseless_frame_roundtrip(scheme, n, k):
    cb = make_codebook(n, k)
    words = words_for(cb, 50, seed=n)
    rx = apply(build_frame(cb, words, scheme), ChannelConfig(timing_offset=5))
    assert demodulate_frame(rx, cb, scheme) == words.tolist()


def test_cpfsk_chip_detector_noiseless():
    cb = make_codebook(12, 4)
    words = words_for(cb, 40)
    res = receive_frame(build_frame(cb, words, CPFSK), cb, CPFSK, ReceiverConfig(cpfsk_detector="chip"))
    assert np.array_equal(res.words, words)
    assert np.allclose(res.chip_estimates, frame_chips(cb, words)[24:].reshape(40, 12))


def test_phase_rotation_is_removed():
    cb = make_codebook(12, 4)
    words = words_for(cb, 30)
    frame = build_frame(cb, words, BPSK)
    rx = BasebandSignal(frame.samples * np.exp(1j * 2.0), frame.sample_rate)
    res = receive_frame(rx, cb, BPSK)
    assert np.array_equal(res.words, words)
    assert res.phase == pytest.approx(2.0)


@pytest.mark.parametrize("scheme", [BPSK, CPFSK], ids=["bpsk", "cpfsk"])
def test_linear_carrier_recovers_frequency_offset(scheme):
    cb = make_codebook(12, 4)
    words = words_for(cb, 100, seed=4)
    cfg = ChannelConfig(ebn0_db=20.0, carrier_offset=300.0, seed=2)
    rx = apply(build_frame(cb, words, scheme), cfg, 1 / 133e3)
    res = receive_frame(rx, cb, scheme, ReceiverConfig(carrier="linear"))
    assert res.frequency == pytest.approx(300.0, abs=150.0)
    assert np.array_equal(res.words, words)


def test_pure_noise_does_not_lock():
    cb = make_codebook(12, 4)
    rng = np.random.default_rng(0)
    x = 0.3 * (rng.normal(size=5000) + 1j * rng.normal(size=5000))
    with pytest.raises(SyncError):
        receive_frame(BasebandSignal(x, 1.6e6), cb, BPSK, n_symbols=10)
    res = receive_frame(BasebandSignal(x, 1.6e6), cb, BPSK, ReceiverConfig(require_lock=False), n_symbols=10)
    assert not res.sync.detected


def test_short_signal_rejected():
    cb = make_codebook(12, 4)
    with pytest.raises(ValueError):
        receive_frame(build_frame(cb, [1, 2], BPSK), cb, BPSK, n_symbols=5)


@pytest.mark.parametrize("scheme", [BPSK, CPFSK], ids=["bpsk", "cpfsk"])
def test_high_snr_thousand_symbols_error_free(scheme):
    cb = make_codebook(12, 4)
    words = words_for(cb, 1000, seed=8)
    frame = build_frame(cb, words, scheme)
    eb = 12 * 4 / 1.6e6 / 4  # unit power, 48 samples per 4-bit symbol
    rx = apply(frame, ChannelConfig(ebn0_db=20.0, seed=3, timing_offset=3), eb)
    assert np.array_equal(receive_frame(rx, cb, scheme, n_symbols=1000).words, words)


def test_narrowband_tone_is_rejected_in_chain():
    cb = make_codebook(12, 4)
    words = words_for(cb, 200, seed=2)
    cfg = ChannelConfig(interferers=(Interferer(center_offset=0.0, power_ratio=1.0, phase=0.4),), signal_power=1.0)
    rx = apply(build_frame(cb, words, BPSK), cfg)
    res = receive_frame(rx, cb, BPSK, ReceiverConfig(track=False), n_symbols=200, search_window=1)
    assert np.array_equal(res.words, words)


@pytest.mark.parametrize("n, k", [(12, 4), (40, 6)])
def test_despreading_gain_tracks_code_length(n, k):
    gain = despreading_gain_probe(make_codebook(n, k), trials=8000)
    assert abs(gain - 10 * np.log10(n)) <= 1.0


def test_despreading_gain_of_unit_length_code_is_zero():
    assert despreading_gain_probe(np.array([[1]])) == pytest.approx(0.0, abs=1e-9)


def test_fixed_frequency_probe_respects_offset():
    cb = make_codebook(12, 4)
    dc = despreading_gain_probe(cb, Interferer(center_offset=0.0), sweep_frequency=False)
    assert dc > 100  # balanced codes null a DC tone


def test_config_validation():
    with pytest.raises(ValueError):
        ReceiverConfig(carrier="pll")
    with pytest.raises(ValueError):
        ReceiverConfig(cpfsk_detector="viterbi")


def test_all_pairs_of_supported_codes_decode():
    cb = make_codebook(24, 5)
    for a, b in itertools.combinations(range(cb.constellation_size), 2):
        assert demodulate_symbol(encode_bits(cb, a), cb).word != demodulate_symbol(encode_bits(cb, b), cb).word
