"""Acceptance suite: one test per exit criterion, at the stated tolerances.

Each test prints a `criterion N: PASS/FAIL` line (visible with `pytest -s`)
and then asserts, so the suite both reports and gates.
"""

import math
import time

import numpy as np
import pytest

from signguard import cli
from signguard.channel import ChannelModel, build_transition_matrix, rho_mc_row, rho_row_analytic
from signguard.codes import (
    CodeParams,
    mds_weight_distribution,
    nearest_codeword_bruteforce,
    enumerate_codebook,
    rs_decode,
)
from signguard.evaluate import (
    REFERENCE_CODES,
    REFERENCE_PE_GRID,
    exact_best_response,
    reproduce_tables,
    simulate_no_attack,
    solve_reference_instance,
)
from signguard.game import GameWeights, exact_quotient
from signguard.lp import saddle_check

SMALL_CODES = tuple(c for c in REFERENCE_CODES if c.size <= 65536)


def _verdict(num: int, ok: bool, detail: str) -> None:
    print(f"\ncriterion {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def all_instances():
    return {
        (code.label, pe): solve_reference_instance(code, pe)
        for code in REFERENCE_CODES
        for pe in REFERENCE_PE_GRID
    }


def test_criterion_1_table_I_exact():
    start = time.perf_counter()
    report = reproduce_tables("I")
    elapsed = time.perf_counter() - start
    ok = report.hard_pass and all(c.abs_dev == 0 for c in report.cells) and elapsed < 1.0
    _verdict(1, ok, f"table I exact for all six codes in {elapsed:.3f}s")


def test_criterion_2_table_II_tight():
    start = time.perf_counter()
    report = reproduce_tables("II")
    analytic_ok = report.hard_pass and all(c.abs_dev <= 5e-4 for c in report.cells)

    mc_ok = True
    trials = 100_000
    for i, code in enumerate(REFERENCE_CODES):
        w = GameWeights.defaults_for(code)
        for j, pe in enumerate(REFERENCE_PE_GRID):
            ch = ChannelModel.for_code(code, pe)
            sim = simulate_no_attack(
                code, ch, np.zeros(code.radius + 1), w, trials=trials, seed=1000 + 10 * i + j
            )
            got = sim.decode_error_rate.value + sim.decode_failure_rate.value
            cell = next(c for c in report.cells if c.code == code.label and c.pe == pe)
            exact = cell.computed
            sigma = math.sqrt(exact * (1 - exact) / trials)
            if abs(got - exact) > 4 * sigma + 1e-12:
                mc_ok = False
    elapsed = time.perf_counter() - start
    ok = analytic_ok and mc_ok and elapsed < 30.0
    _verdict(
        2,
        ok,
        f"table II within 5e-4 analytically and 4 sigma at {trials} trials in {elapsed:.1f}s",
    )


def test_criterion_3_distance_transition_agreement():
    start = time.perf_counter()
    trials = 100_000
    worst = 0.0
    ok = True
    seed = 50_000
    for code in REFERENCE_CODES:
        for pe in REFERENCE_PE_GRID:
            ch = ChannelModel.for_code(code, pe)
            for n1 in range(code.n + 1):
                exact = rho_row_analytic(n1, ch)
                if abs(exact.sum() - 1.0) > 1e-12:
                    ok = False
                est, stderr = rho_mc_row(n1, ch, trials=trials, seed=seed)
                seed += 1
                # the reported standard error covers small-count skew, the
                # true-rate one covers empty bins; use whichever is larger
                sigma = np.maximum(stderr, np.sqrt(exact * (1.0 - exact) / trials))
                gap = np.abs(est - exact)
                worst = max(worst, float((gap - 4 * sigma).max()))
                if (gap > 4 * sigma + 1e-12).any():
                    ok = False
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 300.0
    _verdict(
        3,
        ok,
        f"analytic/MC agreement on every transition pair (worst 4-sigma excess "
        f"{worst:.2e}) and exact row sums in {elapsed:.1f}s",
    )


def test_criterion_4_equilibrium_certificates(all_instances):
    start = time.perf_counter()
    ok = True
    for (label, pe), (game, eq) in all_instances.items():
        gap_ok = eq.duality_gap <= 1e-6 * (1.0 + abs(eq.lp_objective))
        saddle = saddle_check(game.cost_matrix, eq, tol=1e-6)
        rule_ok = (eq.detection_rule >= 0).all() and (eq.detection_rule <= 1).all()
        mix_ok = all(
            v.min() >= 0 and abs(v.sum() - 1.0) <= 1e-9
            for v in (eq.rule_mixture, eq.attack_mixture)
        )
        if not (gap_ok and saddle.ok and rule_ok and mix_ok):
            ok = False
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 60.0
    _verdict(4, ok, f"duality, saddle, and strategy certificates for 24 instances in {elapsed:.1f}s")


def test_criterion_5_conservativeness_oracle(all_instances):
    start = time.perf_counter()
    code = CodeParams(7, 3, 5, 8)
    w = GameWeights.defaults_for(code)
    ok = True
    margins = []
    for pe in REFERENCE_PE_GRID:
        ch = ChannelModel.for_code(code, pe)
        R = build_transition_matrix(code, ch)
        xq = exact_quotient(code, ch, w, R=R)
        game, eq = all_instances[(code.label, pe)]
        best = exact_best_response(xq, eq.detection_rule, R, w, game.false_alarm_row)
        margins.append(eq.value - best.cost)
        if best.cost > eq.value + 1e-6:
            ok = False
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 600.0
    _verdict(
        5,
        ok,
        f"exact best response never beats the relaxed value over 8^7 words "
        f"(min margin {min(margins):.3e}) in {elapsed:.1f}s",
    )


def test_criterion_6_baseline_dominance(all_instances):
    ok = all(
        eq.value <= eq.value_no_detector + 1e-6 for _, eq in all_instances.values()
    )
    _verdict(6, ok, "equilibrium value never exceeds the no-detector cost on 24 instances")


def test_criterion_7_soft_tables_with_documented_deviation(all_instances):
    start = time.perf_counter()
    report_iii = reproduce_tables("III")
    report_iv = reproduce_tables("IV")
    report_v = reproduce_tables("V")

    iii = {(c.code, c.pe): c for c in report_iii.cells}
    iv = {(c.code, c.pe): c for c in report_iv.cells}
    detector_helps = all(
        iii[key].computed >= iv[key].computed - 1e-6 for key in iii
    )
    floors = [c for c in report_iv.cells if c.reference == 100.0]
    floor_ok = len(floors) == 5 and all(abs(c.computed - 100.0) <= 3.0 for c in floors)
    reliable = [c for c in report_v.cells if c.hard]
    reliable_ok = len(reliable) == 16 and all(c.computed <= 0.11 for c in reliable)
    documented = all(
        c.within_tolerance or c.note
        for rep in (report_iii, report_iv, report_v)
        for c in rep.cells
    )
    elapsed = time.perf_counter() - start
    ok = detector_helps and floor_ok and reliable_ok and documented and elapsed < 600.0
    _verdict(
        7,
        ok,
        "tables III-V: detector always helps, cost floors within +-3 of 100, "
        f"reliable-regime false alarms <= 0.11, deviations documented ({elapsed:.1f}s)",
    )


def test_criterion_8_codec_suite():
    trials = 10_000
    ok = True
    for idx, code in enumerate(SMALL_CODES):
        cb = np.asarray(enumerate_codebook(code))
        rng = np.random.default_rng(300 + idx)

        # algebraic decoder against the exhaustive oracle on mixed-severity noise
        for _ in range(trials):
            cw = cb[rng.integers(len(cb))]
            nerr = rng.integers(0, code.n + 1)
            received = cw.copy()
            for pos in rng.choice(code.n, size=nerr, replace=False):
                received[pos] = (received[pos] + rng.integers(1, code.q)) % code.q
            algebraic = rs_decode(received, code)
            oracle = nearest_codeword_bruteforce(received, cb, code.radius)
            if algebraic.failed != oracle.failed:
                ok = False
            elif not algebraic.failed and (
                not np.array_equal(algebraic.codeword, oracle.codeword)
                or algebraic.error_count != oracle.error_count
            ):
                ok = False

        # every perturbation weight up to the radius decodes back
        for _ in range(50 * (code.radius + 1)):
            cw = cb[rng.integers(len(cb))]
            nerr = rng.integers(0, code.radius + 1)
            received = cw.copy()
            for pos in rng.choice(code.n, size=nerr, replace=False):
                received[pos] = (received[pos] + rng.integers(1, code.q)) % code.q
            res = rs_decode(received, code)
            if res.failed or not np.array_equal(res.codeword, cw):
                ok = False

    counted = np.bincount(
        np.count_nonzero(np.asarray(enumerate_codebook(CodeParams(7, 3, 5, 8))) != 0, axis=1),
        minlength=8,
    )
    weights_ok = (
        list(counted) == mds_weight_distribution(CodeParams(7, 3, 5, 8))
        == [1, 0, 0, 0, 0, 147, 147, 217]
    )
    ok = ok and weights_ok
    _verdict(
        8,
        ok,
        f"decoder matches the exhaustive oracle on {trials} trials for "
        f"{len(SMALL_CODES)} codes; in-radius recovery and exact weight counts hold",
    )


def test_criterion_9_byte_identical_artifacts(tmp_path):
    pairs = []
    for run_id in ("a", "b"):
        out = tmp_path / f"tables-{run_id}"
        assert cli.main(["tables", "II", "--out", str(out)]) == 0
        pairs.append(
            ((out / "table_II.csv").read_bytes(), (out / "report.json").read_bytes())
        )
    tables_ok = pairs[0] == pairs[1]

    pairs = []
    for run_id in ("a", "b"):
        out = tmp_path / f"solve-{run_id}"
        assert cli.main(
            ["solve", "--code", "7,3,5,8", "--pe", "0.05", "--seed", "0", "--out", str(out)]
        ) == 0
        pairs.append((out / "equilibrium.json").read_bytes())
    solve_ok = pairs[0] == pairs[1]

    ok = tables_ok and solve_ok
    _verdict(9, ok, "repeated `tables II` and `solve` runs emit byte-identical artifacts")
