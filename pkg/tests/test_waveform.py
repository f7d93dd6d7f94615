import numpy as np
import pytest
from hypothesis import given, strategies as st

from walshmary.codebook import make_codebook
from walshmary.waveform import (
    BasebandSignal, ModulationScheme, modulate, phase_trajectory, power, signal_csv, trajectory_csv,
)

chips_st = st.lists(st.sampled_from([-1, 1]), min_size=1, max_size=64)


def test_scheme_validation():
    with pytest.raises(ValueError):
        ModulationScheme(kind="qam")
    with pytest.raises(ValueError):
        ModulationScheme(samples_per_chip=1)
    assert ModulationScheme().chip_rate == pytest.approx(400e3)


def test_bpsk_is_chip_repetition():
    s = modulate([1, -1, 1], ModulationScheme(samples_per_chip=3))
    assert s.samples.tolist() == [1, 1, 1, -1, -1, -1, 1, 1, 1]


def test_cpfsk_example_phases():
    s = modulate([1, 1, -1], ModulationScheme(kind="cpfsk", samples_per_chip=2))
    expected = np.pi / 2 * np.array([0.5, 1.0, 1.5, 2.0, 1.5, 1.0])
    assert np.allclose(np.unwrap(np.angle(s.samples)), expected)


def test_trajectory_of_codebook_word():
    cb = make_codebook(12, 4)
    tr = phase_trajectory(cb.data_codes[0])
    assert tr.size == 13
    assert tr[-1] == pytest.approx(0.0)  # balanced code returns to its start phase
    assert np.allclose(np.abs(np.diff(tr)), np.pi / 2)


@given(chips_st, st.integers(2, 8))
def test_cpfsk_unit_envelope_and_continuous(chips, sps):
    s = modulate(chips, ModulationScheme(kind="cpfsk", samples_per_chip=sps))
    assert np.allclose(np.abs(s.samples), 1)
    steps = np.angle(s.samples[1:] / s.samples[:-1])
    assert np.all(np.abs(steps) <= np.pi / 2 / sps + 1e-9)
    assert power(s) == pytest.approx(1.0)


@given(chips_st)
def test_trajectory_mirrors_under_negation(chips):
    a = phase_trajectory(chips)
    b = phase_trajectory([-c for c in chips])
    assert np.allclose(a, -b)


def test_empty_inputs_rejected():
    with pytest.raises(ValueError):
        modulate([], ModulationScheme())
    with pytest.raises(ValueError):
        power(np.array([]))
    with pytest.raises(ValueError):
        BasebandSignal(np.array([np.nan]), 1.0)


def test_csv_formats():
    s = modulate([1, -1], ModulationScheme(samples_per_chip=2))
    lines = signal_csv(s).splitlines()
    assert lines[0] == "index,re,im" and len(lines) == 5
    assert trajectory_csv([0.0, 1.5]).splitlines() == ["index,phase_radians", "0,0", "1,1.5"]
