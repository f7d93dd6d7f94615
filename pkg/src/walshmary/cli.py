"""``walshmary`` command line: capacity tables, codebook dumps, BER sweeps, throughput comparison.

Every subcommand writes CSV whose first line is a comment holding the tool
version and a hash of the resolved experiment spec, followed by a header row.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__, capacity, fec
from .channel import Scenario, load_scenario
from .codebook import CodebookError, codebook_csv, make_codebook
from .receiver import ReceiverConfig
from .sim import LinkSetup, TrialRecord, run_trial
from .waveform import ModulationScheme

MODES = ("capacity", "codebook", "ber", "throughput")


class SpecError(ValueError):
    pass


def sweep(value) -> list:
    """Expand a scalar, a list, or ``{start, stop, step}`` (stop inclusive) to a list."""
    if isinstance(value, dict):
        try:
            start, stop, step = float(value["start"]), float(value["stop"]), float(value.get("step", 1.0))
        except KeyError as e:
            raise SpecError(f"range is missing {e}") from None
        if step <= 0 or stop < start:
            raise SpecError(f"empty range {value}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    if isinstance(value, (list, tuple)):
        if not value:
            raise SpecError("empty sweep list")
        return list(value)
    return [value]


@dataclass
class ExperimentSpec:
    mode: str = "ber"
    # link / capacity
    W: float = 400e3
    R: object = 25e3
    W_ni: float = 35e3
    S: float = 1.0
    N0: float = 0.0
    n_users: int = 1
    sinr_req_db: object = 0.0
    p: object = 0.0
    s_ni_over_s_db: object = 0.0
    kappa: float = 1.0
    # codebook / waveform
    N: int = 12
    K: int = 4
    codes: list = field(default_factory=list)
    chip_rates: list = field(default_factory=list)
    modulation: str = "bpsk"
    samples_per_chip: int = 4
    h: float = 0.5
    # Monte Carlo
    ebn0_db: object = field(default_factory=lambda: {"start": 0, "stop": 10, "step": 2})
    coded: bool = False
    ldpc: dict = field(default_factory=lambda: {"n": 240, "w_c": 3, "w_r": 6, "seed": 0})
    symbols_per_frame: int = 30
    scenario: object = field(default_factory=dict)
    receiver: dict = field(default_factory=dict)
    require_lock: bool = False
    timing_uncertainty: int = 1
    trials: int = 20
    seed: int = 0
    workers: int = 1
    out: str | None = None

    @classmethod
    def from_mapping(cls, data: dict, base: Path | None = None) -> ExperimentSpec:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise SpecError(f"unknown spec keys: {sorted(unknown)}")
        spec = cls(**data)
        if isinstance(spec.scenario, str):
            path = Path(spec.scenario)
            if base is not None and not path.is_absolute():
                path = base / path
            if not path.exists():
                raise SpecError(f"scenario file not found: {path}")
            spec.scenario = asdict(load_scenario(path))
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.mode not in MODES:
            raise SpecError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.trials < 1:
            raise SpecError("trials must be >= 1")
        if self.workers < 1:
            raise SpecError("workers must be >= 1")
        if self.modulation not in ("bpsk", "cpfsk"):
            raise SpecError(f"unknown modulation {self.modulation!r}")
        try:
            Scenario.from_mapping(self.scenario)
            ReceiverConfig(**self.receiver)
        except (TypeError, ValueError) as e:
            raise SpecError(str(e)) from None

    def digest(self) -> str:
        d = asdict(self)
        for k in ("out", "workers"):
            d.pop(k)
        return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".10g")


def _csv(spec: ExperimentSpec, header: list[str], rows) -> str:
    out = io.StringIO()
    out.write(f"# walshmary {__version__} mode={spec.mode} spec_sha256={spec.digest()}\n")
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")
    return out.getvalue()


CAPACITY_HEADER = ["W", "R", "SINR_req_dB", "p", "S_ni_over_S_dB", "W_ni", "N_pole", "N_degraded", "max_rate_bps"]


def capacity_rows(spec: ExperimentSpec) -> list[list]:
    rows = []
    for R in sweep(spec.R):
        for sinr_db in sweep(spec.sinr_req_db):
            for p in sweep(spec.p):
                for ratio_db in sweep(spec.s_ni_over_s_db):
                    lp = capacity.LinkParams(W=spec.W, R=R, S=spec.S, N0=spec.N0, n_users=spec.n_users,
                                             sinr_req=capacity.db_to_linear(sinr_db), kappa=spec.kappa)
                    env = capacity.InterferenceEnv(p=p, S_ni=spec.S * capacity.db_to_linear(ratio_db), W_ni=spec.W_ni)
                    rows.append([spec.W, R, sinr_db, p, ratio_db, spec.W_ni,
                                 capacity.pole_capacity(lp, exact=False),
                                 capacity.degraded_capacity(lp, env),
                                 capacity.max_rate(replace(lp, n_users=1), env)])
    return rows


def run_capacity_table(spec: ExperimentSpec) -> str:
    try:
        return _csv(spec, CAPACITY_HEADER, capacity_rows(spec))
    except ValueError as e:
        raise SpecError(str(e)) from None


THROUGHPUT_HEADER = ["N", "K", "R_c", "R", "N_pole", "multiuser_bps", "N_degraded", "degraded_users",
                     "degraded_bps", "mary_bps"]


def run_throughput_compare(spec: ExperimentSpec) -> str:
    codes = spec.codes or [[spec.N, spec.K]]
    chip_rates = spec.chip_rates or [spec.W / spec.kappa]
    rows = []
    try:
        for R in sweep(spec.R):
            for p in sweep(spec.p):
                for ratio_db in sweep(spec.s_ni_over_s_db):
                    lp = capacity.LinkParams(W=spec.W, R=R, S=spec.S, sinr_req=capacity.db_to_linear(
                        sweep(spec.sinr_req_db)[0]), kappa=spec.kappa)
                    env = capacity.InterferenceEnv(p=p, S_ni=spec.S * capacity.db_to_linear(ratio_db), W_ni=spec.W_ni)
                    n_pole = capacity.pole_capacity(lp, exact=False)
                    n_deg = capacity.degraded_capacity(lp, env)
                    users = max(0, math.floor(n_deg + 1e-9))
                    for n, k in codes:
                        for rc in chip_rates:
                            rows.append([n, k, rc, R, n_pole, n_pole * R, n_deg, users, users * R,
                                         capacity.mary_bit_rate(rc, n, k)])
    except ValueError as e:
        raise SpecError(str(e)) from None
    return _csv(spec, THROUGHPUT_HEADER, rows)


def dump_codebook(spec: ExperimentSpec) -> str:
    try:
        cb = make_codebook(spec.N, spec.K)
    except CodebookError as e:
        raise SpecError(str(e)) from None
    body = codebook_csv(cb)
    return f"# walshmary {__version__} mode=codebook spec_sha256={spec.digest()}\n" + body


BER_HEADER = ["EbN0_dB", "bit_errors", "bits", "symbol_errors", "symbols", "coded", "ber", "ser"]
TRIAL_HEADER = ["trial", "seed", "EbN0_dB", "n_interferers", "sync_offset", "word_errors", "bit_errors", "symbols"]


def link_setup(spec: ExperimentSpec) -> LinkSetup:
    try:
        cb = make_codebook(spec.N, spec.K)
    except CodebookError as e:
        raise SpecError(str(e)) from None
    scheme = ModulationScheme(spec.modulation, spec.samples_per_chip,
                              spec.W / spec.kappa * spec.samples_per_chip, spec.h)
    code = None
    if spec.coded:
        try:
            code = fec.build_gallager(**spec.ldpc)
        except (TypeError, fec.LdpcError) as e:
            raise SpecError(f"ldpc: {e}") from None
    rcfg = ReceiverConfig(**{"require_lock": spec.require_lock, **spec.receiver})
    return LinkSetup(cb, scheme, Scenario.from_mapping(spec.scenario), rcfg, code, spec.symbols_per_frame,
                     timing_uncertainty=spec.timing_uncertainty)


def _ebn0_points(spec: ExperimentSpec) -> list[float | None]:
    pts = []
    for v in sweep(spec.ebn0_db):
        if v is None or (isinstance(v, str) and v.lower() in ("inf", "none", "noise-free")):
            pts.append(None)
        else:
            pts.append(float(v))
    return pts


def _job(args):
    setup, trial, seed, ebn0 = args
    return run_trial(setup, trial, seed, ebn0)


def run_ber_sweep(spec: ExperimentSpec) -> tuple[str, list[TrialRecord]]:
    setup = link_setup(spec)
    jobs = [(setup, t, spec.seed + t, e) for e in _ebn0_points(spec) for t in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(spec.workers) as pool:
            records = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (4 * spec.workers))))
    else:
        records = [_job(j) for j in jobs]

    rows = []
    for i, e in enumerate(_ebn0_points(spec)):
        chunk = records[i * spec.trials:(i + 1) * spec.trials]
        be = sum(r.bit_errors for r in chunk)
        b = sum(r.bits for r in chunk)
        we = sum(r.word_errors for r in chunk)
        s = sum(r.symbols for r in chunk)
        rows.append([math.inf if e is None else e, be, b, we, s, spec.coded, be / b, we / s])
    return _csv(spec, BER_HEADER, rows), records


def trial_csv(spec: ExperimentSpec, records: list[TrialRecord]) -> str:
    rows = [[r.trial, r.seed, math.inf if r.ebn0_db is None else r.ebn0_db, r.n_interferers, r.sync_offset,
             r.word_errors, r.bit_errors, r.symbols] for r in records]
    return _csv(spec, TRIAL_HEADER, rows)


def load_spec(path: str | None, mode: str, overrides: dict) -> ExperimentSpec:
    data: dict = {}
    base = None
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise SpecError(f"spec file not found: {p}")
        data = yaml.safe_load(p.read_text()) or {}
        if not isinstance(data, dict):
            raise SpecError("spec file must hold a mapping")
        base = p.parent
    if data.get("mode", mode) != mode:
        raise SpecError(f"spec mode {data['mode']!r} does not match subcommand {mode!r}")
    data["mode"] = mode
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentSpec.from_mapping(data, base)
    except TypeError as e:
        raise SpecError(str(e)) from None


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="walshmary", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--spec", help="YAML/JSON experiment spec")
        sp.add_argument("--out", help="output CSV path (default stdout)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--trials", type=int)
        sp.add_argument("--workers", type=int)
        if mode == "ber":
            sp.add_argument("--trials-out", help="per-trial diagnostic CSV path")
    args = parser.parse_args(argv)

    try:
        spec = load_spec(args.spec, args.mode, {"seed": args.seed, "trials": args.trials,
                                                "workers": args.workers, "out": args.out})
        if spec.mode == "capacity":
            _write(run_capacity_table(spec), spec.out)
        elif spec.mode == "throughput":
            _write(run_throughput_compare(spec), spec.out)
        elif spec.mode == "codebook":
            _write(dump_codebook(spec), spec.out)
        else:
            text, records = run_ber_sweep(spec)
            _write(text, spec.out)
            if args.trials_out:
                Path(args.trials_out).write_text(trial_csv(spec, records))
            if spec.require_lock and not any(r.locked for r in records):
                print("walshmary: sync lost in every trial", file=sys.stderr)
                return 2
    except SpecError as e:
        print(f"walshmary: invalid spec: {e}", file=sys.stderr)
        return 1
    except (RuntimeError, OSError) as e:
        print(f"walshmary: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
