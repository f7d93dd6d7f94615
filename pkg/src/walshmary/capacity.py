"""Interference-limited CDMA link model and single-user M-ary throughput.

All ratios are linear.  Functions avoid coercing to float, so passing
``fractions.Fraction`` parameters gives exact rational results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNBOUNDED = math.inf


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x) if x > 0 else -math.inf


@dataclass(frozen=True)
class LinkParams:
    """Received-signal and spreading parameters.

    ``kappa`` relates spread bandwidth to chip rate (``W = kappa * R_c``);
    ``chip_rate`` defaults to ``W / kappa``.
    """

    W: float
    R: float
    S: float = 1
    N0: float = 0
    n_users: int = 1
    sinr_req: float = 1
    kappa: float = 1
    chip_rate: float | None = None

    def __post_init__(self):
        for name in ("W", "R", "S", "sinr_req", "kappa"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.N0 < 0:
            raise ValueError("N0 must be non-negative")
        if self.n_users < 1:
            raise ValueError("n_users must be >= 1")
        if self.W < self.R:
            raise ValueError(f"spread bandwidth W={self.W} is below data rate R={self.R}")
        if self.chip_rate is None:
            object.__setattr__(self, "chip_rate", self.W / self.kappa)
        elif not self.chip_rate > 0:
            raise ValueError("chip_rate must be positive")

    @property
    def processing_gain(self):
        return self.W / self.R

    @property
    def Eb(self):
        return self.S / self.R


@dataclass(frozen=True)
class InterferenceEnv:
    p: float = 0.0
    S_ni: float = 0.0
    W_ni: float = 35e3

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError(f"occupancy p must be in [0, 1], got {self.p}")
        if self.S_ni < 0:
            raise ValueError("S_ni must be non-negative")
        if not self.W_ni > 0:
            raise ValueError("W_ni must be positive")


@dataclass(frozen=True)
class CapacityReport:
    link: LinkParams
    env: InterferenceEnv
    Eb: float
    I_sc: float
    I_oc: float
    I_ni: float
    I_0: float
    sinr: float
    N_pole: float
    N_degraded: float


def self_interference(lp: LinkParams):
    """Despread density of the other ``n_users - 1`` equal-power codes."""
    return (lp.n_users - 1) * lp.S / lp.W


def narrowband_density(env: InterferenceEnv):
    # p * W / W_ni interferers, each spread over W: the W cancels.
    return env.p * env.S_ni / env.W_ni


def effective_sinr(lp: LinkParams, env: InterferenceEnv):
    denom = lp.W * lp.N0 + (lp.n_users - 1) * lp.S + env.p * (lp.W / env.W_ni) * env.S_ni
    if denom == 0:
        return UNBOUNDED
    return lp.S * (lp.W / lp.R) / denom


def pole_capacity(lp: LinkParams, exact: bool = True):
    users = lp.processing_gain / lp.sinr_req
    return 1 + users if exact else users


def degraded_capacity(lp: LinkParams, env: InterferenceEnv):
    """Users supportable at ``sinr_req`` with noise neglected; < 1 means infeasible."""
    return 1 + lp.processing_gain / lp.sinr_req - env.p * (lp.W / env.W_ni) * (env.S_ni / lp.S)


def _check_single_user(lp: LinkParams) -> None:
    if lp.n_users != 1:
        raise ValueError("single-user bounds require n_users == 1")


def max_interferer_ratio(lp: LinkParams, env: InterferenceEnv):
    """Largest ``S_ni / S`` that still meets ``sinr_req`` for a lone user at rate ``R``."""
    _check_single_user(lp)
    if env.p == 0:
        return UNBOUNDED
    return (env.W_ni / lp.R) / (env.p * lp.sinr_req)


def max_rate(lp: LinkParams, env: InterferenceEnv):
    """Largest data rate a lone user can run at ``sinr_req`` against the interferers."""
    _check_single_user(lp)
    load = lp.sinr_req * env.p * (env.S_ni / lp.S)
    if load == 0:
        return UNBOUNDED
    return env.W_ni / load


def mary_bit_rate(chip_rate, code_length, bits_per_symbol):
    if not (chip_rate > 0 and code_length > 0 and bits_per_symbol > 0):
        raise ValueError("chip rate, code length and bits per symbol must be positive")
    return bits_per_symbol * chip_rate / code_length


def report(lp: LinkParams, env: InterferenceEnv) -> CapacityReport:
    i_sc = self_interference(lp)
    i_ni = narrowband_density(env)
    return CapacityReport(
        link=lp,
        env=env,
        Eb=lp.Eb,
        I_sc=i_sc,
        I_oc=0,
        I_ni=i_ni,
        I_0=i_sc + i_ni,
        sinr=effective_sinr(lp, env),
        N_pole=pole_capacity(lp, exact=False),
        N_degraded=degraded_capacity(lp, env),
    )
