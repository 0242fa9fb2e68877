"""Validation layer: simulation, exact oracles, and reference-table checks.

Three independent routes confirm the analytic pipeline:

* Monte Carlo simulation of sign/channel/decoder/alert round trips, compared
  against the closed-form rates;
* the exact attacker best response over a fully enumerated quotient space,
  which must never beat the relaxed equilibrium value (the relaxation only
  adds attacker power); and
* reproduction of the published reference tables.  Tables I and II carry
  hard tolerances.  Tables III-V were published from a Monte Carlo channel
  matrix at unstated reporting conventions, so they carry a
  documented-deviation policy instead of hard equality, plus the hard spot
  checks that survive estimator noise (cost floors, reliable-regime false
  alarm ceilings).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .channel import (
    ChannelModel,
    RhoMatrix,
    build_transition_matrix,
    decode_failure_prob,
    perturb_batch,
    symbol_error_pmf,
)
from .codes import CodeParams, rs_decode, rs_encode_batch
from .game import (
    ExactQuotient,
    GameWeights,
    RelaxedGame,
    build_attack_basis,
    build_relaxed_game,
    build_rule_basis,
    rewards_from_histograms,
)
from .lp import Equilibrium, solve_equilibrium

REFERENCE_CODES = (
    CodeParams(7, 5, 3, 8),
    CodeParams(7, 3, 5, 8),
    CodeParams(11, 5, 7, 16),
    CodeParams(11, 3, 9, 16),
    CodeParams(15, 5, 11, 16),
    CodeParams(15, 3, 13, 16),
)
REFERENCE_PE_GRID = (0.01, 0.05, 0.1, 0.2)

TABLE_II_TOL = 5e-4
FLOOR_TOL = 3.0
RELIABLE_FALSE_ALARM_CEILING = 0.11
SOFT_REL_TOL = 0.25


@dataclass(frozen=True)
class RateEstimate:
    value: float
    stderr: float


@dataclass(frozen=True)
class SimulationReport:
    """Empirical rates from no-attack round trips, with the realized
    cost-weighted average for direct comparison against analytic values.

    false_alarm counts alerts among decodable receptions (no attacker is
    present, so every alert is false); alert covers all investigations,
    i.e. alerts plus undecodable receptions.
    """

    trials: int
    seed: int
    decode_error_rate: RateEstimate
    decode_failure_rate: RateEstimate
    false_alarm_rate: RateEstimate
    alert_rate: RateEstimate
    empirical_cost: float


@dataclass(frozen=True, eq=False)
class ExactBestResponse:
    cost: float
    histogram: np.ndarray
    index: int


@dataclass(frozen=True, eq=False)
class ContiguousnessReport:
    """How often real attack classes violate the populated-tail assumption
    behind the relaxation.  Reported, never asserted."""

    classes: int
    violations: int
    violating_indices: np.ndarray

    @property
    def violation_rate(self) -> float:
        return self.violations / self.classes if self.classes else 0.0


@dataclass(frozen=True)
class TableCell:
    code: str
    pe: float | None
    metric: str
    computed: float
    reference: float
    abs_dev: float
    rel_dev: float | None
    within_tolerance: bool
    hard: bool
    passed: bool
    note: str


@dataclass(frozen=True)
class TableReport:
    table_id: str
    citation: str
    cells: tuple[TableCell, ...]

    @property
    def hard_pass(self) -> bool:
        return all(c.passed for c in self.cells if c.hard)

    @property
    def all_within_tolerance(self) -> bool:
        return all(c.within_tolerance for c in self.cells)

    def to_dict(self) -> dict:
        return {
            "table": self.table_id,
            "citation": self.citation,
            "hard_pass": self.hard_pass,
            "all_within_tolerance": self.all_within_tolerance,
            "cells": [
                {
                    "code": c.code,
                    "pe": c.pe,
                    "metric": c.metric,
                    "computed": c.computed,
                    "reference": c.reference,
                    "abs_dev": c.abs_dev,
                    "rel_dev": c.rel_dev,
                    "within_tolerance": c.within_tolerance,
                    "hard": c.hard,
                    "passed": c.passed,
                    "note": c.note,
                }
                for c in self.cells
            ],
        }


@lru_cache(maxsize=1)
def reference_tables() -> dict:
    path = resources.files("signguard") / "data" / "reference_tables.json"
    return json.loads(path.read_text())


def false_alarm_probability(rule: np.ndarray, fa_row: np.ndarray) -> float:
    """Probability an alert fires although only channel noise acted and the
    reception was decodable."""
    rule = np.asarray(rule, dtype=np.float64)
    if rule.min(initial=0.0) < 0 or rule.max(initial=0.0) > 1:
        raise ValueError("alert probabilities must lie in [0, 1]")
    return float(rule @ np.asarray(fa_row, dtype=np.float64))


def expected_no_attack_cost(
    rule: np.ndarray, fa_row: np.ndarray, failure_prob: float, w: GameWeights
) -> float:
    """Analytic counterpart of SimulationReport.empirical_cost."""
    rule = np.asarray(rule, dtype=np.float64)
    fa = np.asarray(fa_row, dtype=np.float64)
    return float(w.g1 * ((1.0 - rule) @ fa) + w.g2 * failure_prob + w.g3 * (rule @ fa))


def simulate_no_attack(
    code: CodeParams,
    ch: ChannelModel,
    rule: np.ndarray,
    w: GameWeights,
    trials: int,
    seed: int,
) -> SimulationReport:
    """Round-trip simulation with no attacker: draw a sign uniformly,
    encode, pass through the channel, decode, and roll the alert rule on the
    reported error count.

    Receptions within the decoding radius of the transmitted codeword decode
    to it by unique decodability, so the algebraic decoder only runs on the
    remainder.  Deterministic given the seed.
    """
    rule = np.asarray(rule, dtype=np.float64)
    if rule.shape != (code.radius + 1,):
        raise ValueError(f"rule must have {code.radius + 1} entries")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    messages = rng.integers(0, code.q, size=(trials, code.k), dtype=np.int64)
    sent = rs_encode_batch(messages, code)
    received = perturb_batch(sent, ch, trials, rng)
    alert_draws = rng.random(trials)

    dist_to_sent = np.count_nonzero(received != sent, axis=1)
    decodable = dist_to_sent <= code.radius
    error_count = np.where(decodable, dist_to_sent, 0)
    wrong = np.zeros(trials, dtype=bool)
    failed = np.zeros(trials, dtype=bool)
    for i in np.flatnonzero(~decodable):
        res = rs_decode(received[i], code)
        if res.failed:
            failed[i] = True
        else:
            wrong[i] = True
            decodable[i] = True
            error_count[i] = res.error_count
    alert = decodable & (alert_draws < rule[error_count])

    def rate(mask: np.ndarray) -> RateEstimate:
        p = float(mask.mean())
        return RateEstimate(p, float(np.sqrt(p * (1.0 - p) / trials)))

    cost = w.g1 * (decodable & ~alert) + w.g2 * (wrong | failed) + w.g3 * alert
    return SimulationReport(
        trials=trials,
        seed=seed,
        decode_error_rate=rate(wrong),
        decode_failure_rate=rate(failed),
        false_alarm_rate=rate(alert),
        alert_rate=rate(alert | ~decodable),
        empirical_cost=float(cost.mean()),
    )


def exact_best_response(
    xq: ExactQuotient,
    rule: np.ndarray,
    R: RhoMatrix,
    w: GameWeights,
    fa_row: np.ndarray,
) -> ExactBestResponse:
    """The true attacker optimum against a fixed rule, over every class of
    the enumerated quotient space."""
    rule = np.asarray(rule, dtype=np.float64)
    rewards = rewards_from_histograms(xq.histograms, R, w)
    fa_term = w.g3 * float(rule @ np.asarray(fa_row))
    costs = w.g1 * (xq.o1_rows @ (1.0 - rule)) + rewards + fa_term
    best = int(np.argmax(costs))
    return ExactBestResponse(
        cost=float(costs[best]), histogram=xq.histograms[best], index=best
    )


def verify_contiguousness(xq: ExactQuotient, code: CodeParams) -> ContiguousnessReport:
    """Measure how many quotient classes have a hole in the distance range
    the relaxation assumes populated: {max(d - m, m), ..., n} for closest
    distance m."""
    hist = xq.histograms
    closest = np.argmax(hist > 0, axis=1)
    bad = []
    for i, m in enumerate(closest):
        start = max(code.d - int(m), int(m))
        if (hist[i, start:] == 0).any():
            bad.append(i)
    return ContiguousnessReport(
        classes=xq.kappa,
        violations=len(bad),
        violating_indices=np.array(bad, dtype=np.int64),
    )


@lru_cache(maxsize=64)
def solve_reference_instance(
    code: CodeParams,
    pe: float,
    weights: GameWeights | None = None,
    rho_method: str = "analytic",
    mc_trials: int = 1_000_000,
    mc_seed: int = 0,
) -> tuple[RelaxedGame, Equilibrium]:
    """Build and solve one (code, channel) instance; cached because table
    and figure sweeps revisit the same 24 instances."""
    ch = ChannelModel.for_code(code, pe)
    w = weights or GameWeights.defaults_for(code)
    R = build_transition_matrix(code, ch, method=rho_method, trials=mc_trials, seed=mc_seed)
    game = build_relaxed_game(code, ch, w, R=R)
    eq = solve_equilibrium(game.cost_matrix, game.cost_matrix_pos, game.shift, game.rule_basis)
    return game, eq


def _codeword_bits(code: CodeParams) -> int:
    m = code.q.bit_length() - 1
    if code.q != 1 << m:
        raise ValueError("bit count is defined for power-of-two alphabets only")
    return code.n * m


def _pe_key(pe: float) -> str:
    return format(pe, "g")


def reproduce_tables(
    table_id: str,
    codes: tuple[CodeParams, ...] = REFERENCE_CODES,
    pes: tuple[float, ...] = REFERENCE_PE_GRID,
    rho_method: str = "analytic",
    mc_trials: int = 1_000_000,
    mc_seed: int = 0,
) -> TableReport:
    """Recompute one reference table and compare it cell by cell.

    Hard bounds: table I exact; table II within 5e-4; table IV cost-floor
    cells (reference exactly 100) within +-3; table V reliable-regime cells
    (reference error/failure < 0.02) at or below 0.11.  Everything else is
    soft: within 25% relative (plus the reference's own print quantum), and
    flagged with a deviation note otherwise.
    """
    data = reference_tables()["tables"]
    if table_id not in data:
        raise ValueError(f"unknown table {table_id!r} (want I..V)")
    table = data[table_id]
    cells: list[TableCell] = []

    if table_id == "I":
        for code in codes:
            _, attack_dim = build_attack_basis(code)
            _, rule_dim = build_rule_basis(code)
            computed = {
                "signs": code.size,
                "bits": _codeword_bits(code),
                "nu": attack_dim,
                "mu": rule_dim,
                "d_o": code.radius,
            }
            refs = dict(zip(table["columns"], table["rows"][code.label]))
            for metric in table["columns"]:
                got, ref = computed[metric], refs[metric]
                ok = got == ref
                cells.append(
                    TableCell(
                        code=code.label,
                        pe=None,
                        metric=metric,
                        computed=float(got),
                        reference=float(ref),
                        abs_dev=float(abs(got - ref)),
                        rel_dev=abs(got - ref) / ref if ref else None,
                        within_tolerance=ok,
                        hard=True,
                        passed=ok,
                        note="" if ok else "exact configuration mismatch",
                    )
                )
        return TableReport("I", table["citation"], tuple(cells))

    reliable = _reliable_cells(codes, pes)
    for code in codes:
        for pe in pes:
            ref = float(table["rows"][code.label][_pe_key(pe)])
            if table_id == "II":
                got = decode_failure_prob(code, ChannelModel.for_code(code, pe))
                hard, quantum = True, 0.0
            else:
                game, eq = solve_reference_instance(
                    code, pe, rho_method=rho_method, mc_trials=mc_trials, mc_seed=mc_seed
                )
                if table_id == "III":
                    got, hard, quantum = eq.value_no_detector, False, 0.5
                elif table_id == "IV":
                    got = eq.value
                    hard = ref == 100.0  # cost floor pinned by the missed-attack weight
                    quantum = 0.5
                else:
                    got = false_alarm_probability(eq.detection_rule, game.false_alarm_row)
                    hard = (code.label, pe) in reliable
                    quantum = 5e-5  # reference printed at four decimals
            abs_dev = abs(got - ref)
            rel_dev = abs_dev / abs(ref) if ref else None
            if table_id == "II":
                within = abs_dev <= TABLE_II_TOL
                passed = within
            else:
                within = abs_dev <= max(SOFT_REL_TOL * abs(ref), quantum)
                if table_id == "IV" and hard:
                    passed = abs_dev <= FLOOR_TOL
                elif table_id == "V" and hard:
                    passed = got <= RELIABLE_FALSE_ALARM_CEILING
                else:
                    passed = True
            note = ""
            if not within:
                note = (
                    f"deviation {abs_dev:.4g} ({_fmt_rel(rel_dev)}) from the reference; "
                    "the reference channel matrix was Monte Carlo estimated (1e6 "
                    "trials) and its shift-reporting convention is unstated, while "
                    "this value is computed from the exact channel matrix"
                )
            cells.append(
                TableCell(
                    code=code.label,
                    pe=pe,
                    metric=_TABLE_METRIC[table_id],
                    computed=float(got),
                    reference=ref,
                    abs_dev=float(abs_dev),
                    rel_dev=None if rel_dev is None else float(rel_dev),
                    within_tolerance=bool(within),
                    hard=bool(hard),
                    passed=bool(passed),
                    note=note,
                )
            )
    return TableReport(table_id, table["citation"], tuple(cells))


_TABLE_METRIC = {
    "II": "decode_error_or_failure_prob",
    "III": "cost_no_detector",
    "IV": "cost_with_detector",
    "V": "false_alarm_prob",
}


def _fmt_rel(rel_dev: float | None) -> str:
    return "n/a" if rel_dev is None else f"{rel_dev:.1%}"


def _reliable_cells(codes, pes) -> set[tuple[str, float]]:
    """Cells whose reference error/failure probability marks the code as
    usable on that channel (below the reliability threshold)."""
    data = reference_tables()["tables"]["II"]
    cutoff = data["reliable_below"]
    out = set()
    for code in codes:
        for pe in pes:
            if data["rows"][code.label][_pe_key(pe)] < cutoff:
                out.add((code.label, pe))
    return out


def figure_data(
    fig_id: str,
    codes: tuple[CodeParams, ...] = REFERENCE_CODES,
    pes: tuple[float, ...] = REFERENCE_PE_GRID,
) -> list[tuple[str, float, int, float]]:
    """Columnar datasets behind the published figures: per-(code, channel)
    rows of (code, pe, index, value).

    fig4: distribution of the number of symbol errors (index = error count);
    fig5: equilibrium alert rule (index = decoder error count);
    fig6: equilibrium attack mixture (index = attack-basis column).
    """
    rows: list[tuple[str, float, int, float]] = []
    for code in codes:
        for pe in pes:
            if fig_id == "fig4":
                pmf = symbol_error_pmf(code, ChannelModel.for_code(code, pe))
                values = pmf
            elif fig_id == "fig5":
                _, eq = solve_reference_instance(code, pe)
                values = eq.detection_rule
            elif fig_id == "fig6":
                _, eq = solve_reference_instance(code, pe)
                values = eq.attack_mixture
            else:
                raise ValueError(f"unknown figure {fig_id!r} (want fig4, fig5, fig6)")
            rows.extend(
                (code.label, pe, i, float(v)) for i, v in enumerate(values)
            )
    return rows
