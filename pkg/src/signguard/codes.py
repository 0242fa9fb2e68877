"""Finite-field arithmetic, Reed-Solomon coding, and codebook utilities.

A code is handled through its [n,k,d]_q parameters; concrete codewords are
1-D integer numpy arrays of length n with symbols in [0, q).  Reed-Solomon
instances (q = 2^m, n < q, d = n-k+1) get a systematic encoder and an
algebraic bounded-distance decoder.  Anything else enters the library only
as an explicit codebook (plus the trivial k=1 repetition construction).

All functions are pure; returned arrays are fresh and never alias inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# One fixed primitive polynomial per extension degree, x^m included as the
# top bit.  Degrees 3 and 4 cover the GF(8)/GF(16) reference codes.
PRIMITIVE_POLY = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
}

DEFAULT_CODEBOOK_BOUND = 1 << 21


@dataclass(frozen=True)
class CodeParams:
    """The [n,k,d]_q abstraction of a linear block code.

    n: codeword length in symbols
    k: message length in symbols
    d: minimum Hamming distance in symbols
    q: alphabet size
    """

    n: int
    k: int
    d: int
    q: int

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise ValueError(f"need 1 <= k < n, got k={self.k}, n={self.n}")
        if self.q < 2:
            raise ValueError(f"alphabet size must be >= 2, got q={self.q}")
        if not 1 <= self.d <= self.n:
            raise ValueError(f"need 1 <= d <= n, got d={self.d}, n={self.n}")
        if self.d > self.n - self.k + 1:
            raise ValueError(
                f"d={self.d} exceeds the Singleton bound n-k+1={self.n - self.k + 1}"
            )

    @property
    def radius(self) -> int:
        """Unique-decoding radius floor((d-1)/2)."""
        return (self.d - 1) // 2

    @property
    def size(self) -> int:
        """Number of distinct codewords q^k (exact integer)."""
        return self.q**self.k

    @property
    def is_mds(self) -> bool:
        return self.d == self.n - self.k + 1

    @property
    def is_reed_solomon(self) -> bool:
        m = self.q.bit_length() - 1
        return (
            self.is_mds
            and self.q == 1 << m
            and m in PRIMITIVE_POLY
            and self.n < self.q
        )

    @property
    def label(self) -> str:
        return f"[{self.n},{self.k},{self.d}]_{self.q}"


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Outcome of bounded-distance decoding: a codeword, or a failure.

    When a codeword is returned, error_count equals the Hamming distance
    between the received word and the returned codeword (never an internal
    estimate of the decoder).
    """

    codeword: np.ndarray | None
    error_count: int | None

    @property
    def failed(self) -> bool:
        return self.codeword is None

    @classmethod
    def failure(cls) -> "DecodeResult":
        return cls(None, None)

    @classmethod
    def decoded(cls, codeword: np.ndarray, error_count: int) -> "DecodeResult":
        return cls(codeword, int(error_count))


class GF:
    """GF(2^m) arithmetic via log/antilog tables of a fixed generator."""

    def __init__(self, m: int):
        if m not in PRIMITIVE_POLY:
            raise ValueError(f"no primitive polynomial configured for m={m}")
        self.m = m
        self.q = 1 << m
        poly = PRIMITIVE_POLY[m]
        order = self.q - 1
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.zeros(self.q, dtype=np.int64)
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & self.q:
                x ^= poly
        if x != 1:
            raise ValueError(f"polynomial {poly:#b} is not primitive for m={m}")
        exp[order:] = exp[:order]
        self.exp = exp
        self.log = log

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse in GF(2^m)")
        return int(self.exp[self.q - 1 - self.log[a]])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow_alpha(self, e: int) -> int:
        """alpha^e for the table generator alpha, any integer e."""
        return int(self.exp[e % (self.q - 1)])

    def mul_vec(self, a: np.ndarray, scalar: int) -> np.ndarray:
        """Elementwise a * scalar for an integer array a."""
        if scalar == 0:
            return np.zeros_like(a)
        out = self.exp[self.log[a] + self.log[scalar]]
        return np.where(a == 0, 0, out)

    def poly_eval(self, coeffs_desc, x: int) -> int:
        """Evaluate a polynomial given coefficients in descending degree."""
        acc = 0
        for c in coeffs_desc:
            acc = self.mul(acc, x) ^ int(c)
        return acc


@lru_cache(maxsize=None)
def _field(q: int) -> GF:
    m = q.bit_length() - 1
    if q != 1 << m:
        raise ValueError(f"q={q} is not a power of two")
    return GF(m)


@lru_cache(maxsize=None)
def _generator_poly(n: int, k: int, q: int) -> tuple[int, ...]:
    """Generator polynomial prod_{j=1..n-k} (x - alpha^j), ascending coeffs."""
    gf = _field(q)
    g = [1]
    for j in range(1, n - k + 1):
        root = gf.pow_alpha(j)
        # multiply ascending-coefficient g by (x + root)
        nxt = [0] * (len(g) + 1)
        for i, c in enumerate(g):
            nxt[i] ^= gf.mul(c, root)
            nxt[i + 1] ^= c
        g = nxt
    return tuple(g)


def _require_rs(code: CodeParams) -> GF:
    if not code.is_reed_solomon:
        raise ValueError(
            f"{code.label} is not a supported Reed-Solomon instance "
            "(need q = 2^m, n < q, d = n-k+1)"
        )
    return _field(code.q)


def _as_word(x, code: CodeParams, name: str, length: int) -> np.ndarray:
    arr = np.asarray(x, dtype=np.int64)
    if arr.shape != (length,):
        raise ValueError(f"{name} must have length {length}, got shape {arr.shape}")
    if arr.min(initial=0) < 0 or arr.max(initial=0) >= code.q:
        raise ValueError(f"{name} symbols must lie in [0, {code.q})")
    return arr


def hamming(x, y) -> int:
    """Number of positions where two equal-length words differ."""
    a = np.asarray(x)
    b = np.asarray(y)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return int(np.count_nonzero(a != b))


def error_correction_radius(code: CodeParams) -> int:
    """How many symbol errors the code corrects uniquely."""
    return code.radius


def rs_encode(message, code: CodeParams) -> np.ndarray:
    """Systematically encode k message symbols into an n-symbol codeword.

    The first k output symbols are the message verbatim; the remaining
    n-k parity symbols are the remainder of msg(x) * x^(n-k) modulo the
    generator polynomial.
    """
    gf = _require_rs(code)
    msg = _as_word(message, code, "message", code.k)
    nsym = code.n - code.k
    g = _generator_poly(code.n, code.k, code.q)
    g_tail = g[:-1][::-1]  # below-leading coefficients, descending degree
    reg = [0] * nsym
    for sym in msg:
        feedback = int(sym) ^ reg[0]
        reg = reg[1:] + [0]
        if feedback:
            for i in range(nsym):
                reg[i] ^= gf.mul(g_tail[i], feedback)
    return np.concatenate([msg, np.array(reg, dtype=np.int64)])


def rs_encode_batch(messages: np.ndarray, code: CodeParams) -> np.ndarray:
    """Encode a (count, k) matrix of messages into a (count, n) matrix."""
    gf = _require_rs(code)
    msgs = np.asarray(messages, dtype=np.int64)
    if msgs.ndim != 2 or msgs.shape[1] != code.k:
        raise ValueError(f"messages must be (count, {code.k}), got {msgs.shape}")
    if msgs.size and (msgs.min() < 0 or msgs.max() >= code.q):
        raise ValueError(f"message symbols must lie in [0, {code.q})")
    nsym = code.n - code.k
    g_tail = np.array(_generator_poly(code.n, code.k, code.q)[:-1][::-1], dtype=np.int64)
    reg = np.zeros((msgs.shape[0], nsym), dtype=np.int64)
    for col in range(code.k):
        feedback = msgs[:, col] ^ reg[:, 0]
        reg[:, :-1] = reg[:, 1:]
        reg[:, -1] = 0
        nz = feedback != 0
        if nz.any():
            prod = gf.exp[gf.log[feedback[nz]][:, None] + gf.log[g_tail][None, :]]
            prod = np.where(g_tail[None, :] == 0, 0, prod)
            reg[nz] ^= prod
    return np.concatenate([msgs, reg], axis=1)


def _syndromes(word: np.ndarray, code: CodeParams, gf: GF) -> list[int]:
    """Syndromes word(alpha^j) for j = 1..n-k, word coeffs by descending degree."""
    return [gf.poly_eval(word, gf.pow_alpha(j)) for j in range(1, code.n - code.k + 1)]


def _berlekamp_massey(synd: list[int], gf: GF) -> tuple[list[int], int]:
    """Shortest LFSR (error locator, ascending coeffs) generating `synd`."""
    locator = [1]
    prev = [1]
    length = 0
    gap = 1
    prev_disc = 1
    for step, s in enumerate(synd):
        disc = s
        for i in range(1, length + 1):
            if i < len(locator) and locator[i]:
                disc ^= gf.mul(locator[i], synd[step - i])
        if disc == 0:
            gap += 1
            continue
        coef = gf.div(disc, prev_disc)
        update = locator.copy()
        need = len(prev) + gap
        if len(update) < need:
            update += [0] * (need - len(update))
        for i, c in enumerate(prev):
            if c:
                update[i + gap] ^= gf.mul(coef, c)
        if 2 * length <= step:
            prev = locator
            prev_disc = disc
            length = step + 1 - length
            gap = 1
        else:
            gap += 1
        locator = update
    return locator, length


def rs_decode(received, code: CodeParams) -> DecodeResult:
    """Bounded-distance decode: the codeword within the unique-decoding
    radius of `received` if one exists, otherwise a failure.

    Pipeline: syndromes, Berlekamp-Massey locator, root search over the n
    positions, Forney magnitudes, then a full re-check (zero syndromes and
    distance <= radius) so the result is exactly the nearest-codeword answer.
    """
    gf = _require_rs(code)
    word = _as_word(received, code, "received", code.n)
    synd = _syndromes(word, code, gf)
    if not any(synd):
        return DecodeResult.decoded(word.copy(), 0)

    locator, nerrs = _berlekamp_massey(synd, gf)
    if nerrs > code.radius or nerrs == 0:
        return DecodeResult.failure()

    # Root search: position i holds degree n-1-i, locator root is alpha^-(degree).
    positions = []
    for i in range(code.n):
        x = gf.pow_alpha(-(code.n - 1 - i))
        if gf.poly_eval(locator[::-1], x) == 0:
            positions.append(i)
    if len(positions) != nerrs:
        return DecodeResult.failure()

    # Forney: omega(x) = synd(x) * locator(x) mod x^(n-k), ascending coeffs.
    nsym = code.n - code.k
    omega = [0] * nsym
    for i, s in enumerate(synd):
        if not s:
            continue
        for j, c in enumerate(locator):
            if i + j < nsym and c:
                omega[i + j] ^= gf.mul(s, c)

    corrected = word.copy()
    for i in positions:
        x_inv = gf.pow_alpha(-(code.n - 1 - i))
        num = gf.poly_eval(omega[::-1], x_inv)
        den = 0
        for j in range(1, len(locator), 2):
            den ^= gf.mul(locator[j], gf.pow_alpha(-(code.n - 1 - i) * (j - 1)))
        if den == 0 or num == 0:
            return DecodeResult.failure()
        corrected[i] ^= gf.div(num, den)

    if any(_syndromes(corrected, code, gf)):
        return DecodeResult.failure()
    dist = hamming(word, corrected)
    if dist > code.radius:
        return DecodeResult.failure()
    return DecodeResult.decoded(corrected, dist)


def nearest_codeword_bruteforce(received, codebook, radius: int) -> DecodeResult:
    """Scan a codebook for the unique codeword within `radius` of `received`.

    Raises RuntimeError if two codewords fall within the radius, since that
    contradicts the minimum-distance invariant and signals a corrupt
    codebook.
    """
    cb = np.asarray(codebook)
    if cb.ndim != 2 or cb.shape[0] == 0:
        raise ValueError("codebook must be a nonempty (count, n) array")
    word = np.asarray(received)
    if word.shape != (cb.shape[1],):
        raise ValueError(f"received must have length {cb.shape[1]}")
    dists = np.count_nonzero(cb != word[None, :], axis=1)
    hits = np.flatnonzero(dists <= radius)
    if hits.size > 1:
        raise RuntimeError(
            f"{hits.size} codewords within radius {radius}: codebook violates "
            "the minimum-distance invariant"
        )
    if hits.size == 0:
        return DecodeResult.failure()
    i = int(hits[0])
    return DecodeResult.decoded(cb[i].astype(np.int64), int(dists[i]))


def messages_lexicographic(count: int, k: int, q: int, start: int = 0) -> np.ndarray:
    """Rows start..start+count-1 of all q^k messages in lexicographic order."""
    idx = np.arange(start, start + count, dtype=np.int64)
    powers = q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % q


def enumerate_codebook(code: CodeParams, bound: int = DEFAULT_CODEBOOK_BOUND) -> np.ndarray:
    """All q^k codewords, ordered lexicographically by message.

    Returns a read-only (q^k, n) array.  Reed-Solomon instances are encoded
    systematically; k=1 codes with d=n fall back to symbol repetition.
    """
    if code.size > bound:
        raise ValueError(
            f"codebook size {code.size} exceeds the enumeration bound {bound}"
        )
    msgs = messages_lexicographic(code.size, code.k, code.q)
    if code.is_reed_solomon:
        cb = rs_encode_batch(msgs, code)
    elif code.k == 1 and code.d == code.n:
        cb = np.repeat(msgs, code.n, axis=1)
    else:
        raise ValueError(
            f"{code.label}: no encoder available (not Reed-Solomon and not a "
            "k=1 repetition code); supply an explicit codebook instead"
        )
    cb.setflags(write=False)
    return cb


def mds_weight_distribution(code: CodeParams) -> list[int]:
    """Codeword counts per Hamming weight for an MDS code, in closed form.

    Exact integers; A_0 = 1, A_w = 0 for 0 < w < d, and the counts sum
    to q^k.  Non-MDS parameters are rejected (callers must fall back to
    counting over an enumerated codebook).
    """
    if not code.is_mds:
        raise ValueError(f"{code.label} is not MDS (d != n-k+1)")
    from math import comb

    n, d, q = code.n, code.d, code.q
    counts = [0] * (n + 1)
    counts[0] = 1
    for w in range(d, n + 1):
        alt = sum((-1) ** j * comb(w - 1, j) * q ** (w - d - j) for j in range(w - d + 1))
        counts[w] = comb(n, w) * (q - 1) * alt
    if sum(counts) != code.size:
        raise RuntimeError("weight distribution does not sum to q^k")
    return counts
