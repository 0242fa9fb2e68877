"""Symmetric symbol-error channel and distance-transition statistics.

Every symbol of a word independently breaks with probability pe, and a
broken symbol lands on each of the q-1 other symbols uniformly.  The
distance-transition metric rho(n1, n2) is the probability that a word at
Hamming distance n1 from some reference ends at distance n2 after one pass
through the channel; it is the only channel quantity the game needs.

rho has an exact combinatorial form: each of the n-n1 matching positions
breaks with probability pe, and each of the n1 mismatched positions repairs
with probability pe/(q-1) (stay-wrong changes keep the distance).  Monte
Carlo estimation is kept as a validation path only, so solver inputs carry
no estimator noise.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .codes import CodeParams, hamming

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class ChannelModel:
    """Per-symbol error probability pe over words of length n from a
    q-symbol alphabet."""

    pe: float
    q: int
    n: int

    def __post_init__(self):
        if not 0.0 <= self.pe <= 1.0:
            raise ValueError(f"pe must lie in [0, 1], got {self.pe}")
        if self.q < 2:
            raise ValueError(f"alphabet size must be >= 2, got {self.q}")
        if self.n < 1:
            raise ValueError(f"word length must be >= 1, got {self.n}")

    @classmethod
    def for_code(cls, code: CodeParams, pe: float) -> "ChannelModel":
        return cls(pe=pe, q=code.q, n=code.n)

    @property
    def repair_prob(self) -> float:
        """Probability a mismatched symbol lands on the matching value."""
        return self.pe / (self.q - 1)


@dataclass(frozen=True)
class RhoMatrix:
    """Distance-transition probabilities rho(m, j) for m = 0..n (rows) and
    j = 0..radius (columns), with provenance of how they were computed."""

    entries: np.ndarray
    method: str  # "analytic" | "monte-carlo"
    trials: int | None = None
    seed: int | None = None

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def decodable_mass(self) -> np.ndarray:
        """Per starting distance m, the probability of ending within the
        unique-decoding radius of the reference (row sum over columns)."""
        return self.entries.sum(axis=1)


def _binom_pmf(n: int, p: float) -> np.ndarray:
    """Binomial(n, p) pmf over 0..n, exact products (no underflow at the
    word lengths this library targets)."""
    j = np.arange(n + 1)
    coeff = np.array([comb(n, int(t)) for t in j], dtype=np.float64)
    with np.errstate(divide="ignore"):
        left = np.where(j == 0, 1.0, p ** j.astype(float))
        right = np.where(n - j == 0, 1.0, (1.0 - p) ** (n - j).astype(float))
    return coeff * left * right


def transition_prob(x, y, ch: ChannelModel) -> float:
    """Probability the channel turns word x into word y; depends on the two
    words only through their Hamming distance."""
    h = hamming(x, y)
    pe = ch.pe
    keep = (1.0 - pe) ** (ch.n - h) if ch.n - h else 1.0
    move = (pe / (ch.q - 1)) ** h if h else 1.0
    return keep * move


def perturb(x, ch: ChannelModel, seed: int) -> np.ndarray:
    """One channel pass over a single word, deterministic given the seed."""
    word = np.asarray(x, dtype=np.int64)
    if word.shape != (ch.n,):
        raise ValueError(f"word must have length {ch.n}")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    return perturb_batch(word, ch, 1, rng)[0]


def perturb_batch(x: np.ndarray, ch: ChannelModel, trials: int, rng: np.random.Generator) -> np.ndarray:
    """Stack `trials` independent channel passes over word(s) x.

    x may be a single word (n,) or a (trials, n) matrix.  Both random draws
    happen in a fixed order and shape regardless of outcomes, so a given
    generator state always yields the same result.
    """
    base = np.asarray(x, dtype=np.int64)
    mask = rng.random((trials, ch.n)) < ch.pe
    offsets = rng.integers(1, ch.q, size=(trials, ch.n), dtype=np.int64)
    return np.where(mask, (base + offsets) % ch.q, base)


def rho_analytic(n1: int, n2: int, ch: ChannelModel) -> float:
    """Exact rho(n1, n2): convolution of position breaks and repairs."""
    _check_distance(n1, ch)
    _check_distance(n2, ch)
    breaks = _binom_pmf(ch.n - n1, ch.pe)
    repairs = _binom_pmf(n1, ch.repair_prob)
    total = 0.0
    for j in range(n1 + 1):
        i = n2 - n1 + j
        if 0 <= i <= ch.n - n1:
            total += breaks[i] * repairs[j]
    return total


def rho_row_analytic(n1: int, ch: ChannelModel) -> np.ndarray:
    """Exact rho(n1, .) over all ending distances 0..n."""
    _check_distance(n1, ch)
    breaks = _binom_pmf(ch.n - n1, ch.pe)
    repairs = _binom_pmf(n1, ch.repair_prob)
    row = np.convolve(breaks, repairs[::-1])  # index = n2 - n1 + n1 = n2
    return row


def rho_mc_row(
    n1: int, ch: ChannelModel, trials: int, seed: int, chunk: int = 1 << 15
) -> tuple[np.ndarray, np.ndarray]:
    """Monte Carlo estimate of rho(n1, .) with binomial standard errors.

    Fixes the all-zeros reference, places a word at distance n1 from it,
    and histograms the distance after `trials` independent channel passes.
    The frequency vector partitions the trials, so it sums to one.
    """
    _check_distance(n1, ch)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    start = np.zeros(ch.n, dtype=np.int64)
    start[:n1] = 1
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    counts = np.zeros(ch.n + 1, dtype=np.int64)
    done = 0
    while done < trials:
        batch = min(chunk, trials - done)
        out = perturb_batch(start, ch, batch, rng)
        dists = np.count_nonzero(out != 0, axis=1)
        counts += np.bincount(dists, minlength=ch.n + 1)
        done += batch
    freq = counts / trials
    stderr = np.sqrt(freq * (1.0 - freq) / trials)
    return freq, stderr


def rho_mc(n1: int, n2: int, ch: ChannelModel, trials: int, seed: int) -> tuple[float, float]:
    """Monte Carlo rho(n1, n2) with its binomial standard error."""
    _check_distance(n2, ch)
    freq, stderr = rho_mc_row(n1, ch, trials, seed)
    return float(freq[n2]), float(stderr[n2])


def build_transition_matrix(
    code: CodeParams,
    ch: ChannelModel,
    method: str = "analytic",
    trials: int = 1_000_000,
    seed: int = 0,
) -> RhoMatrix:
    """The (n+1) x (radius+1) matrix of rho values the game consumes.

    Analytic rows are checked to sum to one over the full distance range
    before the columns are truncated to the decoding radius.  Monte Carlo
    rows (validation path) use `trials` passes each, on independent
    substreams spawned from `seed`.
    """
    if not (ch.q == code.q and ch.n == code.n):
        raise ValueError("channel and code disagree on n or q")
    width = code.radius + 1
    if method == "analytic":
        rows = np.empty((code.n + 1, code.n + 1))
        for m in range(code.n + 1):
            rows[m] = rho_row_analytic(m, ch)
            if abs(rows[m].sum() - 1.0) > ROW_SUM_TOL:
                raise RuntimeError(f"rho row {m} sums to {rows[m].sum()!r}, not 1")
        return RhoMatrix(entries=rows[:, :width].copy(), method="analytic")
    if method == "monte-carlo":
        streams = np.random.SeedSequence(seed).spawn(code.n + 1)
        rows = np.empty((code.n + 1, code.n + 1))
        for m in range(code.n + 1):
            sub_seed = streams[m]
            rng = np.random.Generator(np.random.Philox(sub_seed))
            rows[m] = _mc_row_with_rng(m, ch, trials, rng)
        return RhoMatrix(
            entries=rows[:, :width].copy(), method="monte-carlo", trials=trials, seed=seed
        )
    raise ValueError(f"unknown method {method!r} (want 'analytic' or 'monte-carlo')")


def _mc_row_with_rng(n1: int, ch: ChannelModel, trials: int, rng: np.random.Generator) -> np.ndarray:
    start = np.zeros(ch.n, dtype=np.int64)
    start[:n1] = 1
    counts = np.zeros(ch.n + 1, dtype=np.int64)
    done = 0
    while done < trials:
        batch = min(1 << 15, trials - done)
        out = perturb_batch(start, ch, batch, rng)
        counts += np.bincount(np.count_nonzero(out != 0, axis=1), minlength=ch.n + 1)
        done += batch
    return counts / trials


def symbol_error_pmf(code: CodeParams, ch: ChannelModel) -> np.ndarray:
    """Distribution of the number of symbol errors the channel introduces."""
    if ch.n != code.n:
        raise ValueError("channel and code disagree on n")
    return _binom_pmf(code.n, ch.pe)


def decode_failure_prob(code: CodeParams, ch: ChannelModel) -> float:
    """Probability that channel noise alone pushes a transmitted codeword
    out of its own decodable region (decoding error or failure).

    Computed as the binomial upper tail beyond the decoding radius, which
    avoids the cancellation of 1 - (lower tail) at small pe.
    """
    pmf = symbol_error_pmf(code, ch)
    return float(pmf[code.radius + 1 :].sum())


def _check_distance(value: int, ch: ChannelModel) -> None:
    if not 0 <= value <= ch.n:
        raise ValueError(f"distance {value} outside [0, {ch.n}]")
