"""Hadamard matrices and the bi-orthogonal Walsh constellation built from them.

A codebook of ``K`` bits per symbol uses ``2**(K-1)`` rows of an order-``N``
Hadamard matrix plus their negations.  The all-ones row is never used: under
FSK/PSK chip modulation it looks like a narrowband line and is the row most
easily confused with interference.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

MAX_SYLVESTER_POWER = 10
MAX_PALEY_ORDER = 64
# Orders reached by Paley (12, 20) and one doubling of a Paley matrix (24, 40).
_NON_POWER_OF_TWO = {12: (11, 0), 20: (19, 0), 24: (11, 1), 40: (19, 1)}


class CodebookError(ValueError):
    """Raised for unsupported orders or infeasible code selections."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class HadamardMatrix:
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1] or rows.shape[0] == 0:
            raise CodebookError(f"Hadamard matrix must be square and non-empty, got {rows.shape}")
        if not np.all(np.abs(rows) == 1):
            raise CodebookError("Hadamard entries must be +1 or -1")
        object.__setattr__(self, "rows", _frozen(rows))

    @property
    def order(self) -> int:
        return self.rows.shape[0]

    def gram(self) -> np.ndarray:
        """Integer H @ H.T; equals order * I for a valid matrix."""
        return self.rows @ self.rows.T

    def is_orthogonal(self) -> bool:
        return bool(np.array_equal(self.gram(), self.order * np.eye(self.order, dtype=np.int64)))

    def is_standard_form(self) -> bool:
        return bool(np.all(self.rows[0] == 1) and np.all(self.rows[:, 0] == 1))


def _normalize(rows: np.ndarray) -> np.ndarray:
    rows = rows * rows[:, :1]
    return rows * rows[:1, :]


def _check_valid(h: HadamardMatrix) -> None:
    if not h.is_orthogonal():
        raise CodebookError(f"order-{h.order} input is not a Hadamard matrix")


def sylvester(m: int) -> HadamardMatrix:
    if not 0 <= m <= MAX_SYLVESTER_POWER:
        raise CodebookError(f"sylvester power must be in [0, {MAX_SYLVESTER_POWER}], got {m}")
    h = np.ones((1, 1), dtype=np.int64)
    for _ in range(m):
        h = np.block([[h, h], [h, -h]])
    return HadamardMatrix(h)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n**0.5) + 1))


def paley(q: int) -> HadamardMatrix:
    """Paley type-I construction of order ``q + 1`` from the quadratic residues mod ``q``."""
    if not is_prime(q):
        raise CodebookError(f"paley requires a prime, got {q}")
    if q % 4 != 3:
        raise CodebookError(f"paley type I requires q = 3 mod 4, got q = {q}")
    if q + 1 > MAX_PALEY_ORDER:
        raise CodebookError(f"paley order {q + 1} exceeds {MAX_PALEY_ORDER}")

    residues = {(x * x) % q for x in range(1, q)}
    chi = np.array([0] + [1 if a in residues else -1 for a in range(1, q)], dtype=np.int64)
    idx = np.arange(q)
    jacobsthal = chi[(idx[None, :] - idx[:, None]) % q]

    s = np.zeros((q + 1, q + 1), dtype=np.int64)
    s[0, 1:] = 1
    s[1:, 0] = -1
    s[1:, 1:] = jacobsthal
    return HadamardMatrix(_normalize(np.eye(q + 1, dtype=np.int64) + s))


def double(h: HadamardMatrix) -> HadamardMatrix:
    _check_valid(h)
    r = h.rows
    return HadamardMatrix(np.block([[r, r], [r, -r]]))


def supported_orders() -> list[int]:
    return sorted({2**m for m in range(7)} | set(_NON_POWER_OF_TWO))


def build_hadamard(order: int) -> HadamardMatrix:
    if order in _NON_POWER_OF_TWO:
        q, doublings = _NON_POWER_OF_TWO[order]
        h = paley(q)
        for _ in range(doublings):
            h = double(h)
        return h
    if order >= 1 and order <= 64 and order & (order - 1) == 0:
        return sylvester(order.bit_length() - 1)
    raise CodebookError(f"no Hadamard construction wired for order {order}; supported: {supported_orders()}")


def transitions(chips) -> int:
    c = np.asarray(chips)
    if c.size == 0:
        raise CodebookError("transitions of an empty sequence")
    return int(np.count_nonzero(c[1:] != c[:-1]))


@dataclass(frozen=True)
class Codebook:
    """Bi-orthogonal constellation: ``2**(K-1)`` data codes and their negations.

    Word ``w`` maps to data code ``w & (2**(K-1) - 1)``; its most significant
    bit is the complement flag, so ``w`` and ``w ^ 2**(K-1)`` are negations of
    each other.  ``sync_code`` is ``None`` only when the matrix has no spare
    balanced row (e.g. order 2).
    """

    order: int
    bits_per_symbol: int
    data_codes: np.ndarray
    sync_code: np.ndarray | None
    unused: np.ndarray
    data_rows: tuple[int, ...] = ()
    sync_row: int | None = None
    unused_rows: tuple[int, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "data_codes", _frozen(np.atleast_2d(self.data_codes)))
        object.__setattr__(self, "unused", _frozen(np.asarray(self.unused).reshape(-1, self.order)))
        if self.sync_code is not None:
            object.__setattr__(self, "sync_code", _frozen(self.sync_code))
        if self.data_codes.shape != (2 ** (self.bits_per_symbol - 1), self.order):
            raise CodebookError(
                f"expected {2 ** (self.bits_per_symbol - 1)} data codes of length {self.order}, "
                f"got shape {self.data_codes.shape}"
            )

    @property
    def n_codes(self) -> int:
        return self.data_codes.shape[0]

    @property
    def constellation_size(self) -> int:
        return 2**self.bits_per_symbol

    def bit_map(self, word: int) -> tuple[int, bool]:
        if not 0 <= word < self.constellation_size:
            raise CodebookError(f"word {word} out of range for K={self.bits_per_symbol}")
        return word & (self.n_codes - 1), bool(word >> (self.bits_per_symbol - 1))

    def word_for(self, code_index: int, complement: bool) -> int:
        return int(code_index) | (int(bool(complement)) << (self.bits_per_symbol - 1))

    def constellation(self) -> np.ndarray:
        """All ``2**K`` chip sequences, indexed by word."""
        return np.concatenate([self.data_codes, -self.data_codes])

    def sync_pattern(self) -> np.ndarray:
        """Sync row followed by its complement (``2N`` chips, zero sum)."""
        if self.sync_code is None:
            raise CodebookError(f"order-{self.order} codebook has no spare row for sync")
        return np.concatenate([self.sync_code, -self.sync_code])


def select_codebook(h: HadamardMatrix, bits_per_symbol: int) -> Codebook:
    if bits_per_symbol < 1:
        raise CodebookError("bits_per_symbol must be >= 1")
    _check_valid(h)
    rows = h.rows
    n_data = 2 ** (bits_per_symbol - 1)

    usable = [i for i in range(h.order) if not np.all(rows[i] == rows[i, 0])]
    balanced = [i for i in usable if rows[i].sum() == 0]
    if n_data > len(balanced):
        raise CodebookError(
            f"K={bits_per_symbol} needs {n_data} balanced rows, order-{h.order} matrix has {len(balanced)}"
        )

    ranked = sorted(balanced, key=lambda i: (-transitions(rows[i]), i))
    data_rows = tuple(ranked[:n_data])
    sync_row = ranked[n_data] if len(ranked) > n_data else None
    taken = set(data_rows) | ({sync_row} if sync_row is not None else set())
    unused_rows = tuple(i for i in range(h.order) if i not in taken)

    return Codebook(
        order=h.order,
        bits_per_symbol=bits_per_symbol,
        data_codes=rows[list(data_rows)],
        sync_code=None if sync_row is None else rows[sync_row],
        unused=rows[list(unused_rows)],
        data_rows=data_rows,
        sync_row=sync_row,
        unused_rows=unused_rows,
    )


def make_codebook(order: int, bits_per_symbol: int) -> Codebook:
    return select_codebook(build_hadamard(order), bits_per_symbol)


def encode_bits(cb: Codebook, word: int) -> np.ndarray:
    index, complement = cb.bit_map(word)
    code = cb.data_codes[index]
    return -code if complement else code.copy()


def encode_words(cb: Codebook, words) -> np.ndarray:
    """Concatenated chips for a sequence of words."""
    words = np.asarray(words, dtype=np.int64)
    if words.size and (words.min() < 0 or words.max() >= cb.constellation_size):
        raise CodebookError(f"word out of range for K={cb.bits_per_symbol}")
    return cb.constellation()[words].reshape(-1)


def signed_word_metrics(metrics) -> np.ndarray:
    """Expand ``(..., 2**(K-1))`` signed code correlations to ``(..., 2**K)`` word metrics."""
    m = np.asarray(metrics, dtype=np.float64)
    return np.concatenate([m, -m], axis=-1)


def codebook_csv(cb: Codebook) -> str:
    """CSV with one row per constellation word and a trailing sync row."""
    out = io.StringIO()
    out.write("word,complement_flag,chips\n")
    fmt = lambda c: " ".join("+1" if x > 0 else "-1" for x in c)  # noqa: E731
    for w in range(cb.constellation_size):
        _, flag = cb.bit_map(w)
        out.write(f"{w:0{cb.bits_per_symbol}b},{int(flag)},{fmt(encode_bits(cb, w))}\n")
    if cb.sync_code is not None:
        out.write(f"sync,0,{fmt(cb.sync_code)}\n")
    return out.getvalue()
