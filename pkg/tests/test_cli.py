import csv
import io

import pytest

from walshmary.cli import ExperimentSpec, SpecError, main, sweep


def run(tmp_path, mode, spec_text, *extra, name="out.csv"):
    spec = tmp_path / f"{mode}.yaml"
    spec.write_text(spec_text)
    out = tmp_path / name
    code = main([mode, "--spec", str(spec), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else "")


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# walshmary ") and "spec_sha256=" in lines[0]
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_sweep_forms():
    assert sweep(3) == [3]
    assert sweep([1, 2]) == [1, 2]
    assert sweep({"start": 0, "stop": 1, "step": 0.25}) == [0, 0.25, 0.5, 0.75, 1.0]
    for bad in ([], {"start": 2, "stop": 1}, {"stop": 1}):
        with pytest.raises(SpecError):
            sweep(bad)


def test_capacity_table_points(tmp_path):
    code, text = run(tmp_path, "capacity", "R: [25000]\np: [0, 0.7]\ns_ni_over_s_db: 3.010299956639812\n")
    assert code == 0
    rows = table(text)
    assert len(rows) == 2
    assert float(rows[0]["N_pole"]) == 16
    assert float(rows[1]["N_degraded"]) == pytest.approx(1.0, abs=1e-9)


def test_capacity_empty_sweep_is_invalid(tmp_path):
    code, _ = run(tmp_path, "capacity", "R: []\n")
    assert code == 1


def test_unknown_key_and_missing_file(tmp_path, capsys):
    code, _ = run(tmp_path, "capacity", "bogus: 1\n")
    assert code == 1
    assert main(["ber", "--spec", str(tmp_path / "missing.yaml")]) == 1
    code, _ = run(tmp_path, "ber", "scenario: nowhere.yaml\n")
    assert code == 1


def test_throughput_examples(tmp_path):
    code, text = run(tmp_path, "throughput", "R: 25000\np: [0, 0.7]\ns_ni_over_s_db: 3.010299956639812\n"
                                             "codes: [[12, 4]]\nchip_rates: [400000]\n")
    assert code == 0
    clean, degraded = table(text)
    assert float(clean["multiuser_bps"]) == 400e3
    assert float(degraded["degraded_users"]) == 1
    assert float(degraded["degraded_bps"]) == 25e3
    assert float(clean["mary_bps"]) == pytest.approx(133.3e3, abs=50)


@pytest.mark.parametrize("n, k, rows", [(12, 4, 17), (40, 6, 65)])
def test_codebook_dump(tmp_path, n, k, rows):
    code, text = run(tmp_path, "codebook", f"N: {n}\nK: {k}\n")
    assert code == 0
    body = text.splitlines()[1:]
    assert body[0] == "word,complement_flag,chips"
    assert len(body) - 1 == rows
    assert sum(1 for line in body if line.startswith("sync")) == 1


def test_codebook_unsupported_order(tmp_path):
    code, _ = run(tmp_path, "codebook", "N: 13\nK: 4\n")
    assert code == 1


BER_SPEC = "ebn0_db: [0, 4, 8]\ntrials: 6\nsymbols_per_frame: 20\nseed: 5\n"


def test_ber_deterministic_across_runs_and_workers(tmp_path):
    a = run(tmp_path, "ber", BER_SPEC, name="a.csv")[1]
    b = run(tmp_path, "ber", BER_SPEC, name="b.csv")[1]
    c = run(tmp_path, "ber", BER_SPEC, "--workers", "3", name="c.csv")[1]
    assert a == b == c
    d = run(tmp_path, "ber", BER_SPEC, "--seed", "6", name="d.csv")[1]
    assert d != a


def test_ber_rows_and_trial_csv(tmp_path):
    trials = tmp_path / "trials.csv"
    code, text = run(tmp_path, "ber", BER_SPEC, "--trials-out", str(trials))
    assert code == 0
    rows = table(text)
    assert [float(r["EbN0_dB"]) for r in rows] == [0, 4, 8]
    for r in rows:
        assert int(r["bit_errors"]) <= int(r["bits"]) and int(r["symbol_errors"]) <= int(r["symbols"])
    per_trial = table(trials.read_text())
    assert list(per_trial[0]) == ["trial", "seed", "EbN0_dB", "n_interferers", "sync_offset", "word_errors",
                                  "bit_errors", "symbols"]
    assert len(per_trial) == 18


@pytest.mark.parametrize("extra", ["", "coded: true\n", "modulation: cpfsk\n"])
def test_noise_free_sentinel_gives_zero_errors(tmp_path, extra):
    code, text = run(tmp_path, "ber", "ebn0_db: [noise-free]\ntrials: 3\n" + extra)
    assert code == 0
    (row,) = table(text)
    assert row["bit_errors"] == "0" and row["symbol_errors"] == "0"


def test_scenario_file_is_resolved_relative_to_spec(tmp_path):
    (tmp_path / "scn.yaml").write_text("n_interferers: 2\npower_ratio_db: 0\n")
    trials = tmp_path / "t.csv"
    code, _ = run(tmp_path, "ber", "scenario: scn.yaml\nebn0_db: [8]\ntrials: 2\n", "--trials-out", str(trials))
    assert code == 0
    assert all(r["n_interferers"] == "2" for r in table(trials.read_text()))


def test_required_lock_lost_everywhere_exits_2(tmp_path):
    # a clean sync peak is exactly 2N, so a threshold of 1.0 never declares lock
    spec = "ebn0_db: [noise-free]\ntrials: 2\nrequire_lock: true\nreceiver: {threshold: 1.0}\n"
    code, _ = run(tmp_path, "ber", spec)
    assert code == 2
    code, _ = run(tmp_path, "ber", spec.replace("1.0}", "0.9}"))
    assert code == 0


def test_mode_mismatch(tmp_path):
    code, _ = run(tmp_path, "capacity", "mode: ber\n")
    assert code == 1


def test_digest_ignores_output_path():
    assert ExperimentSpec(out="a").digest() == ExperimentSpec(out="b", workers=4).digest()
    assert ExperimentSpec(seed=1).digest() != ExperimentSpec(seed=2).digest()
