"""Regular LDPC outer code: construction, systematic encoding, normalized min-sum decoding.

LLR convention throughout: positive means bit 0 is more likely.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .codebook import signed_word_metrics

MAX_LENGTH = 4096


class LdpcError(ValueError):
    pass


@dataclass(frozen=True)
class LdpcCode:
    """Regular code with parity-check matrix ``H`` whose last ``n - k`` columns carry the parity.

    ``parity_map`` is the ``(n-k, k)`` GF(2) matrix with ``parity = parity_map @ info``.
    """

    H: np.ndarray
    parity_map: np.ndarray
    w_c: int
    w_r: int
    seed: int = 0

    def __post_init__(self):
        for name in ("H", "parity_map"):
            a = np.ascontiguousarray(getattr(self, name), dtype=np.uint8)
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        cols = np.nonzero(self.H.T)  # column-major walk: rows listed per column
        rows = np.nonzero(self.H)
        check_cols = rows[1].reshape(self.m, self.w_r)
        var_checks = cols[1].reshape(self.n, self.w_c)
        object.__setattr__(self, "check_cols", check_cols)
        object.__setattr__(self, "var_checks", var_checks)

    @property
    def n(self) -> int:
        return self.H.shape[1]

    @property
    def m(self) -> int:
        return self.H.shape[0]

    @property
    def k(self) -> int:
        return self.n - self.m

    @property
    def rate(self) -> float:
        return self.k / self.n

    def syndrome(self, bits) -> np.ndarray:
        b = np.asarray(bits, dtype=np.uint8)
        return b[self.check_cols].sum(axis=1) % 2


@dataclass(frozen=True)
class DecodeResult:
    bits: np.ndarray
    converged: bool
    iterations: int


def gf2_rref(a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    r = np.array(a, dtype=np.uint8) % 2
    pivots = []
    row = 0
    for col in range(r.shape[1]):
        if row == r.shape[0]:
            break
        hits = np.nonzero(r[row:, col])[0]
        if hits.size == 0:
            continue
        p = row + hits[0]
        if p != row:
            r[[row, p]] = r[[p, row]]
        others = np.nonzero(r[:, col])[0]
        others = others[others != row]
        r[others] ^= r[row]
        pivots.append(col)
        row += 1
    return r, pivots


def gf2_rank(a: np.ndarray) -> int:
    return len(gf2_rref(a)[1])


def four_cycles(H: np.ndarray) -> int:
    overlap = H.astype(np.int64) @ H.T.astype(np.int64)
    np.fill_diagonal(overlap, 0)
    return int((overlap * (overlap - 1) // 2).sum() // 2)


def _peg(n: int, m: int, w_c: int, w_r: int, rng: np.random.Generator) -> np.ndarray | None:
    """Progressive edge growth with per-row capacity ``w_r``.

    Each new edge of a column goes to a row outside the column's current
    neighbourhood tree (deepest level reached), which keeps short cycles out
    while the row budget allows.  Ties go to the row with most spare
    capacity, then at random.
    """
    row_cols: list[set[int]] = [set() for _ in range(m)]
    col_rows: list[set[int]] = [set() for _ in range(n)]
    cap = np.full(m, w_r)
    for v in range(n):
        for _ in range(w_c):
            candidates = {r for r in np.nonzero(cap > 0)[0].tolist() if r not in col_rows[v]}
            if not candidates:
                return None
            pool = candidates
            if col_rows[v]:
                reached = set(col_rows[v])
                frontier = set(col_rows[v])
                while True:
                    cols = set().union(*(row_cols[r] for r in frontier))
                    new = set().union(*(col_rows[u] for u in cols)) - reached if cols else set()
                    if not new or not (candidates - reached - new):
                        pool = (candidates - reached) or candidates
                        break
                    reached |= new
                    frontier = new
            pool = sorted(pool)
            best = max(cap[r] for r in pool)
            pool = [r for r in pool if cap[r] == best]
            r = pool[int(rng.integers(len(pool)))]
            row_cols[r].add(v)
            col_rows[v].add(r)
            cap[r] -= 1
    H = np.zeros((m, n), dtype=np.uint8)
    for r, cs in enumerate(row_cols):
        H[r, sorted(cs)] = 1
    return H


def build_gallager(n: int, w_c: int = 3, w_r: int = 6, seed: int = 0, retries: int = 32) -> LdpcCode:
    """Regular (w_c, w_r) code of length ``n`` with full-rank parity checks.

    Up to ``retries`` seeded draws are made; the full-rank draw with the
    fewest 4-cycles wins, stopping early at none.
    """
    if n <= 0 or n > MAX_LENGTH:
        raise LdpcError(f"code length must be in [1, {MAX_LENGTH}], got {n}")
    if w_c < 1 or w_r <= w_c or (n * w_c) % w_r:
        raise LdpcError(f"n*w_c = {n * w_c} is not a multiple of w_r = {w_r} (or w_r <= w_c)")
    m = n * w_c // w_r
    if w_r > n or w_c > m:
        raise LdpcError("weights too large for the code length")
    best = None
    for attempt in range(retries):
        rng = np.random.default_rng([seed, attempt])
        H = _peg(n, m, w_c, w_r, rng)
        if H is None:
            continue
        rref, pivots = gf2_rref(H)
        if len(pivots) < m:
            continue
        cycles = four_cycles(H)
        if best is None or cycles < best[0]:
            best = (cycles, H, rref, pivots)
        if cycles == 0:
            break
    if best is None:
        raise LdpcError(f"no full-rank ({w_c},{w_r}) code of length {n} after {retries} attempts")
    _, H, rref, pivots = best
    order = [c for c in range(n) if c not in set(pivots)] + pivots
    # rref restricted to the reordered columns is [A | I]
    parity_map = rref[:, order][:, : n - m]
    return LdpcCode(H=H[:, order], parity_map=parity_map, w_c=w_c, w_r=w_r, seed=seed)


def encode(code: LdpcCode, info) -> np.ndarray:
    u = np.asarray(info, dtype=np.uint8).reshape(-1)
    if u.size != code.k:
        raise LdpcError(f"expected {code.k} information bits, got {u.size}")
    parity = (code.parity_map.astype(np.int64) @ u) % 2
    return np.concatenate([u, parity.astype(np.uint8)])


def decode(code: LdpcCode, llrs, max_iter: int = 50, alpha: float = 0.75) -> DecodeResult:
    """Normalized min-sum with early stop on zero syndrome."""
    llr = np.asarray(llrs, dtype=np.float64).reshape(-1)
    if llr.size != code.n:
        raise LdpcError(f"expected {code.n} LLRs, got {llr.size}")
    if max_iter < 1:
        raise LdpcError("max_iter must be >= 1")

    cc = code.check_cols
    hard = (llr < 0).astype(np.uint8)
    if not code.syndrome(hard).any():
        return DecodeResult(hard, True, 0)

    v2c = llr[cc]
    rows = np.arange(code.m)
    for it in range(1, max_iter + 1):
        mag = np.abs(v2c)
        sgn = np.where(v2c < 0, -1.0, 1.0)
        first = np.argmin(mag, axis=1)
        min1 = mag[rows, first]
        mag[rows, first] = np.inf
        min2 = mag.min(axis=1)
        excl = np.repeat(min1[:, None], code.w_r, axis=1)
        excl[rows, first] = min2
        c2v = alpha * sgn * np.prod(sgn, axis=1, keepdims=True) * excl

        total = llr + np.bincount(cc.ravel(), weights=c2v.ravel(), minlength=code.n)
        hard = (total < 0).astype(np.uint8)
        if not code.syndrome(hard).any():
            return DecodeResult(hard, True, it)
        v2c = total[cc] - c2v
    return DecodeResult(hard, False, max_iter)


def words_to_bits(words, bits_per_symbol: int) -> np.ndarray:
    """MSB-first bit expansion of K-bit words."""
    w = np.asarray(words, dtype=np.int64).reshape(-1)
    shifts = np.arange(bits_per_symbol - 1, -1, -1)
    return ((w[:, None] >> shifts) & 1).astype(np.uint8).reshape(-1)


def bits_to_words(bits, bits_per_symbol: int) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64).reshape(-1, bits_per_symbol)
    return b @ (1 << np.arange(bits_per_symbol - 1, -1, -1))


def pad_bits(bits, bits_per_symbol: int) -> np.ndarray:
    b = np.asarray(bits, dtype=np.uint8).reshape(-1)
    extra = (-b.size) % bits_per_symbol
    return np.concatenate([b, np.zeros(extra, dtype=np.uint8)])


def _bit_table(bits_per_symbol: int) -> np.ndarray:
    words = np.arange(2**bits_per_symbol)
    return words_to_bits(words, bits_per_symbol).reshape(-1, bits_per_symbol).astype(bool)


def word_llrs_to_bit_llrs(word_metrics, noise_variance: float) -> np.ndarray:
    """Max-log bit LLRs (MSB first) from per-word metrics ``(..., 2**K)``.

    A word metric is the real correlation of the received symbol with that
    word's chips; ``noise_variance`` is the complex variance of one chip
    estimate, which makes ``2 / noise_variance`` the LLR scale.
    """
    if not noise_variance > 0 or not np.isfinite(noise_variance):
        raise LdpcError("noise variance must be positive and finite")
    wm = np.asarray(word_metrics, dtype=np.float64)
    if not np.all(np.isfinite(wm)):
        raise LdpcError("correlator metrics must be finite")
    size = wm.shape[-1]
    if size < 2 or size & (size - 1):
        raise LdpcError("number of word metrics must be a power of two >= 2")
    bits = _bit_table(size.bit_length() - 1)
    out = np.empty(wm.shape[:-1] + (bits.shape[1],))
    for b in range(bits.shape[1]):
        one = bits[:, b]
        out[..., b] = wm[..., ~one].max(axis=-1) - wm[..., one].max(axis=-1)
    return out * (2.0 / noise_variance)


def symbol_llrs_to_bit_llrs(metrics, noise_variance: float) -> np.ndarray:
    """Bit LLRs from the ``2**(K-1)`` signed bi-orthogonal correlator outputs."""
    metrics = np.asarray(metrics, dtype=np.float64)
    if metrics.shape[-1] & (metrics.shape[-1] - 1):
        raise LdpcError("number of correlator outputs must be a power of two")
    return word_llrs_to_bit_llrs(signed_word_metrics(metrics), noise_variance)


def to_alist(code: LdpcCode) -> str:
    H = code.H
    out = io.StringIO()
    col_w = H.sum(axis=0)
    row_w = H.sum(axis=1)
    out.write(f"{code.n} {code.m}\n{col_w.max()} {row_w.max()}\n")
    out.write(" ".join(map(str, col_w)) + "\n")
    out.write(" ".join(map(str, row_w)) + "\n")
    for c in range(code.n):
        out.write(" ".join(str(r + 1) for r in np.nonzero(H[:, c])[0]) + "\n")
    for r in range(code.m):
        out.write(" ".join(str(c + 1) for c in np.nonzero(H[r])[0]) + "\n")
    return out.getvalue()


def from_alist(text: str) -> np.ndarray:
    """Parity-check matrix from alist text (zero padding entries are ignored)."""
    lines = [ln.split() for ln in text.strip().splitlines()]
    n, m = map(int, lines[0])
    H = np.zeros((m, n), dtype=np.uint8)
    for c in range(n):
        for r in map(int, lines[4 + c]):
            if r:
                H[r - 1, c] = 1
    return H
