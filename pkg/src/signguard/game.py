"""Construction of the detector-vs-attacker game objects.

The attacker picks a sign to tamper with and a crafted word to leave in its
place; the detector commits to a randomized alert rule over the error count
reported by the decoder.  Two reductions make the game tractable:

* attacks are equivalent whenever their distance histograms to the codebook
  match (permutation invariance), so the exact attack space collapses to a
  quotient of deduplicated histograms; and
* the quotient is then relaxed to the convex hull of a small set of extreme
  histograms, grouped by the distance to the closest codeword.  The hull
  over-approximates real attacker power, so the detector rule it yields is
  conservative.

`build_relaxed_game` assembles the full cost matrix; `exact_quotient` builds
the exhaustive small-instance oracle used to audit the relaxation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .channel import ChannelModel, RhoMatrix, build_transition_matrix
from .codes import (
    DEFAULT_CODEBOOK_BOUND,
    CodeParams,
    enumerate_codebook,
    mds_weight_distribution,
)

DEFAULT_FULLSPACE_BOUND = 1 << 22


@dataclass(frozen=True)
class GameWeights:
    """Nonnegative weights of the four detector objectives: missed-attack
    cost (g1), induced decoding error/failure cost (g2), false-alarm cost
    (g3), and per-symbol tampering effort credited to the attacker (g4)."""

    g1: float
    g2: float
    g3: float
    g4: float

    def __post_init__(self):
        for name in ("g1", "g2", "g3", "g4"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @classmethod
    def defaults_for(cls, code: CodeParams) -> "GameWeights":
        """Default operating point: unit costs 100 and a false-alarm weight
        equal to the codebook size, which keeps false alarms rare whenever
        the code itself is reliable."""
        return cls(g1=100.0, g2=100.0, g3=float(code.size), g4=100.0)

    def scaled_by_attack_probability(self, pa: float) -> "GameWeights":
        """Fold a prior attack probability into the weights: the attack-side
        objectives scale by pa, the false-alarm objective by 1 - pa."""
        if not 0.0 <= pa <= 1.0:
            raise ValueError(f"attack probability must lie in [0, 1], got {pa}")
        return GameWeights(self.g1 * pa, self.g2 * pa, self.g3 * (1.0 - pa), self.g4 * pa)


@dataclass(frozen=True)
class SignPrior:
    """Distribution over the encoded signs; None means uniform.

    For a linear code the false-alarm exposure is the same from every
    codeword, so any normalized prior yields the same game; the prior is
    validated and kept for provenance.
    """

    probs: np.ndarray | None = None

    def __post_init__(self):
        if self.probs is not None:
            p = np.asarray(self.probs, dtype=np.float64)
            if p.ndim != 1 or p.size == 0:
                raise ValueError("prior must be a nonempty 1-D vector")
            if p.min() < 0 or abs(p.sum() - 1.0) > 1e-9:
                raise ValueError("prior must be nonnegative and sum to 1")
            object.__setattr__(self, "probs", p)

    def validate_for(self, code: CodeParams) -> None:
        if self.probs is not None and self.probs.size != code.size:
            raise ValueError(
                f"prior has {self.probs.size} entries, code has {code.size} signs"
            )


@dataclass(frozen=True)
class RelaxedGame:
    """Everything the equilibrium solver needs.

    attack_basis: (n+1, attack_dim) integer matrix whose columns are the
        extreme distance histograms of the relaxed attack space; column
        group m covers attacks whose closest codeword sits at distance m.
    group_rewards: per-group attacker reward (tamper effort against induced
        decoding damage), length n-k+1.
    group_indicator: 0/1 matrix mapping each basis column to its group.
    rule_basis: (radius+1, rule_dim) matrix whose columns enumerate all
        deterministic alert rules; the last column is all-zeros (never
        alert), so mixtures reach every randomized rule.
    false_alarm_row: per error count j, the codebook-weighted probability
        that pure channel noise lands a sign at distance j from a codeword.
    cost_matrix: (attack_dim, rule_dim) detector cost; `shift` is the
        constant added to make the solver copy positive (0 when already
        positive).  Reported game values always subtract the shift.
    """

    code: CodeParams
    attack_basis: np.ndarray
    attack_dim: int
    group_rewards: np.ndarray
    group_indicator: np.ndarray
    rule_basis: np.ndarray
    rule_dim: int
    false_alarm_row: np.ndarray
    cost_matrix: np.ndarray
    shift: float

    def __post_init__(self):
        for field in (
            "attack_basis",
            "group_rewards",
            "group_indicator",
            "rule_basis",
            "false_alarm_row",
            "cost_matrix",
        ):
            getattr(self, field).setflags(write=False)

    @property
    def cost_matrix_pos(self) -> np.ndarray:
        return self.cost_matrix + self.shift


@dataclass(frozen=True)
class ExactQuotient:
    """Deduplicated attack classes of a fully enumerated word space.

    histograms: (kappa, n+1) integer distance histograms, one per class.
    o1_rows: per class, the exact probability of landing j symbols from a
        codeword after the channel pass, j = 0..radius.
    rewards: per class attacker reward at the build weights.
    """

    histograms: np.ndarray
    o1_rows: np.ndarray
    rewards: np.ndarray
    kappa: int

    def __post_init__(self):
        self.histograms.setflags(write=False)
        self.o1_rows.setflags(write=False)
        self.rewards.setflags(write=False)


def reward_for_distances(h_values, code: CodeParams, R: RhoMatrix, w: GameWeights) -> float:
    """Attacker reward for a crafted word whose distances to the codebook
    are h_values: the best claimable tradeoff g2*(1 - P[stay decodable]) -
    g4*distance over the candidate distances."""
    cand = np.asarray(list(h_values), dtype=np.int64)
    if cand.size == 0:
        raise ValueError("empty distance multiset")
    if cand.min() < 0 or cand.max() > code.n:
        raise ValueError(f"distances must lie in [0, {code.n}]")
    mass = R.decodable_mass
    vals = w.g2 - w.g4 * cand - w.g2 * mass[cand]
    return float(vals.max())


def group_reward_vector(code: CodeParams, R: RhoMatrix, w: GameWeights) -> np.ndarray:
    """Reward per closest-codeword distance i = 0..n-k, maximizing over the
    distances an attack at that level can realize: i itself, or anything
    from max(d-i, i+1) up to n."""
    s = np.empty(code.n - code.k + 1)
    for i in range(code.n - code.k + 1):
        far = max(code.d - i, i + 1)
        cand = [i] + list(range(far, code.n + 1))
        s[i] = reward_for_distances(cand, code, R, w)
    return s


def _group_widths(code: CodeParams) -> list[int]:
    """Number of basis columns per closest-distance group m = 0..n-k."""
    return [
        code.n - code.d + m + 1 if m <= code.radius else code.n - m + 1
        for m in range(code.n - code.k + 1)
    ]


def build_attack_basis(code: CodeParams) -> tuple[np.ndarray, int]:
    """Extreme histograms of the relaxed attack space, grouped by the
    distance m of the crafted word to its closest codeword.

    Group m <= radius: exactly one codeword at distance m, none closer than
    d-m, and every distance in d-m..n populated.  Group m > radius: nothing
    below m, every distance in m..n populated.  Each extreme point parks all
    spare codebook mass on a single populated distance.
    """
    tau = code.size
    n = code.n
    cols: list[np.ndarray] = []
    for m in range(code.n - code.k + 1):
        if m <= code.radius:
            free = list(range(code.d - m, n + 1))
            heavy = tau - (n - code.d + m + 1)
            base = np.zeros(n + 1, dtype=np.int64)
            base[m] = 1
        else:
            free = list(range(m, n + 1))
            heavy = tau - (n - m)
            base = np.zeros(n + 1, dtype=np.int64)
        if heavy < 1:
            raise ValueError(
                f"{code.label}: codebook too small for the relaxation "
                f"(group {m} would need mass {heavy})"
            )
        for r in free:
            col = base.copy()
            col[free] = 1
            col[r] = heavy
            cols.append(col)
    basis = np.stack(cols, axis=1)
    dim = basis.shape[1]
    widths = _group_widths(code)
    if dim != sum(widths) or not (basis.sum(axis=0) == tau).all():
        raise RuntimeError("attack basis construction is inconsistent")
    return basis, dim


def build_group_indicator(code: CodeParams) -> np.ndarray:
    """Block matrix with one all-ones row segment per closest-distance
    group, aligning basis columns with their group reward."""
    widths = _group_widths(code)
    out = np.zeros((len(widths), sum(widths)))
    start = 0
    for i, width in enumerate(widths):
        out[i, start : start + width] = 1.0
        start += width
    return out


def build_rule_basis(code: CodeParams) -> tuple[np.ndarray, int]:
    """All deterministic alert rules as columns, in descending lexicographic
    order: column 0 always alerts, the last column never does."""
    width = code.radius + 1
    dim = 1 << width
    basis = np.zeros((width, dim))
    for c in range(dim):
        bits = dim - 1 - c
        for i in range(width):
            basis[i, c] = (bits >> (width - 1 - i)) & 1
    return basis, dim


def false_alarm_row(
    code: CodeParams,
    R: RhoMatrix,
    prior: SignPrior | None = None,
    weights: list[int] | None = None,
) -> np.ndarray:
    """Per error count j, the probability that an untampered sign is read at
    distance j from some codeword: sum_w A_w * rho(w, j) with A the weight
    distribution (the distance profile from any codeword of a linear code)."""
    (prior or SignPrior()).validate_for(code)
    if weights is None:
        weights = mds_weight_distribution(code)
    if len(weights) != code.n + 1:
        raise ValueError(f"weight distribution must have {code.n + 1} entries")
    a = np.array([float(v) for v in weights])
    return a @ R.entries


def build_cost_matrix(
    attack_basis: np.ndarray,
    group_rewards: np.ndarray,
    group_indicator: np.ndarray,
    rule_basis: np.ndarray,
    fa_row: np.ndarray,
    R: RhoMatrix,
    w: GameWeights,
    eps: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Assemble the detector cost over (attack column, rule column) pairs
    and its positive-shifted copy for the solver.

    cost = -g1 * B'R Pi + (S's) 1' + g1 * (B'R 1) 1' + g3 * 1 (fa' Pi)
    with B the attack basis, S the group indicator, Pi the rule basis.
    """
    reach = attack_basis.T.astype(np.float64) @ R.entries  # (attack_dim, radius+1)
    n_rules = rule_basis.shape[1]
    ones_rules = np.ones(n_rules)
    cost = (
        -w.g1 * (reach @ rule_basis)
        + np.outer(group_indicator.T @ group_rewards, ones_rules)
        + w.g1 * np.outer(reach.sum(axis=1), ones_rules)
        + w.g3 * np.outer(np.ones(attack_basis.shape[1]), fa_row @ rule_basis)
    )
    low = cost.min()
    if low > 0:
        return cost, cost.copy(), 0.0
    shift = eps - low
    return cost, cost + shift, shift


def build_relaxed_game(
    code: CodeParams,
    ch: ChannelModel,
    w: GameWeights,
    prior: SignPrior | None = None,
    R: RhoMatrix | None = None,
    eps: float = 1.0,
) -> RelaxedGame:
    """Build every game object for one (code, channel, weights) instance."""
    if R is None:
        R = build_transition_matrix(code, ch)
    basis, attack_dim = build_attack_basis(code)
    rewards = group_reward_vector(code, R, w)
    indicator = build_group_indicator(code)
    rules, rule_dim = build_rule_basis(code)
    fa = false_alarm_row(code, R, prior)
    cost, _, shift = build_cost_matrix(basis, rewards, indicator, rules, fa, R, w, eps)
    return RelaxedGame(
        code=code,
        attack_basis=basis,
        attack_dim=attack_dim,
        group_rewards=rewards,
        group_indicator=indicator,
        rule_basis=rules,
        rule_dim=rule_dim,
        false_alarm_row=fa,
        cost_matrix=cost,
        shift=shift,
    )


def rewards_from_histograms(
    histograms: np.ndarray, R: RhoMatrix, w: GameWeights
) -> np.ndarray:
    """Attacker reward per histogram row, maximizing over its support."""
    n_plus_1 = histograms.shape[1]
    per_distance = w.g2 - w.g4 * np.arange(n_plus_1) - w.g2 * R.decodable_mass
    masked = np.where(histograms > 0, per_distance[None, :], -np.inf)
    return masked.max(axis=1)


@lru_cache(maxsize=4)
def _distance_histograms(
    code: CodeParams, bound: int, codebook_bound: int
) -> tuple[np.ndarray, int]:
    """Distance histograms of every word in the full space, deduplicated.

    Returns the (kappa, n+1) array of distinct histograms and the total
    word count scanned.  Cached: the histograms depend only on the code.
    """
    total = code.q**code.n
    if total > bound:
        raise ValueError(
            f"full space {code.q}^{code.n} = {total} exceeds the bound {bound}"
        )
    codebook = np.ascontiguousarray(
        enumerate_codebook(code, bound=codebook_bound), dtype=np.int16
    )
    n = code.n
    word_chunk = 8192
    seen: list[np.ndarray] = []
    powers = code.q ** np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, word_chunk):
        count = min(word_chunk, total - start)
        idx = np.arange(start, start + count, dtype=np.int64)
        words = ((idx[:, None] // powers[None, :]) % code.q).astype(np.int16)
        counts = np.zeros((count, n + 1), dtype=np.int64)
        for cb_start in range(0, codebook.shape[0], 2048):
            block = codebook[cb_start : cb_start + 2048]
            dist = np.zeros((count, block.shape[0]), dtype=np.int16)
            for pos in range(n):
                dist += words[:, pos : pos + 1] != block[None, :, pos]
            offs = np.arange(count, dtype=np.int64)[:, None] * (n + 1) + dist
            counts += np.bincount(
                offs.ravel(), minlength=count * (n + 1)
            ).reshape(count, n + 1)
        seen.append(np.unique(counts, axis=0))
    hist = np.unique(np.concatenate(seen, axis=0), axis=0)
    hist.setflags(write=False)
    return hist, total


def exact_quotient(
    code: CodeParams,
    ch: ChannelModel,
    w: GameWeights,
    R: RhoMatrix | None = None,
    bound: int = DEFAULT_FULLSPACE_BOUND,
    codebook_bound: int = DEFAULT_CODEBOOK_BOUND,
) -> ExactQuotient:
    """Enumerate the attacker's true quotient space for a small code.

    Scans all q^n crafted words, reduces each to its distance histogram
    against the codebook (the invariant of the permutation equivalence),
    and attaches the exact channel row and reward of each class.
    """
    if R is None:
        R = build_transition_matrix(code, ch)
    histograms, _ = _distance_histograms(code, bound, codebook_bound)
    o1_rows = histograms.astype(np.float64) @ R.entries
    rewards = rewards_from_histograms(histograms, R, w)
    return ExactQuotient(
        histograms=histograms,
        o1_rows=o1_rows,
        rewards=rewards,
        kappa=histograms.shape[0],
    )
