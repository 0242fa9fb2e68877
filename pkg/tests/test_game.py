import math

import numpy as np
import pytest
from scipy.optimize import linprog

from signguard.channel import ChannelModel, build_transition_matrix, rho_row_analytic
from signguard.codes import CodeParams, enumerate_codebook, mds_weight_distribution
from signguard.game import (
    GameWeights,
    SignPrior,
    build_attack_basis,
    build_group_indicator,
    build_relaxed_game,
    build_rule_basis,
    exact_quotient,
    false_alarm_row,
    group_reward_vector,
    reward_for_distances,
    rewards_from_histograms,
)

REFERENCE_DIMS = {
    CodeParams(7, 5, 3, 8): 17,
    CodeParams(7, 3, 5, 8): 21,
    CodeParams(11, 5, 7, 16): 47,
    CodeParams(11, 3, 9, 16): 47,
    CodeParams(15, 5, 11, 16): 85,
    CodeParams(15, 3, 13, 16): 81,
}


def _R(code, pe):
    return build_transition_matrix(code, ChannelModel.for_code(code, pe))


def test_game_weights_validation():
    with pytest.raises(ValueError):
        GameWeights(-1, 0, 0, 0)
    w = GameWeights(100, 100, 512, 100).scaled_by_attack_probability(0.25)
    assert (w.g1, w.g2, w.g3, w.g4) == (25.0, 25.0, 384.0, 25.0)


def test_sign_prior_validation(code735):
    SignPrior().validate_for(code735)
    uniform = SignPrior(np.full(512, 1 / 512))
    uniform.validate_for(code735)
    with pytest.raises(ValueError):
        SignPrior(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        SignPrior(np.full(8, 1 / 8)).validate_for(code735)


# ------------------------------------------------------------------- rewards


def test_reward_zero_weights(code735):
    R = _R(code735, 0.3)
    w = GameWeights(5, 0, 7, 0)
    assert reward_for_distances([0, 3, 7], code735, R, w) == 0.0


def test_reward_noiseless_origin(code735):
    R = _R(code735, 0.0)
    w = GameWeights(100, 100, 512, 100)
    assert reward_for_distances([0], code735, R, w) == pytest.approx(0.0, abs=1e-12)


def test_reward_matches_four_way_bruteforce(code735):
    # oracle: evaluate each candidate directly from the channel rows
    pe, w = 0.01, GameWeights(100, 100, 512, 100)
    ch = ChannelModel.for_code(code735, pe)
    R = _R(code735, pe)
    cands = [0, 5, 6, 7]
    direct = max(
        100 - 100 * h - 100 * rho_row_analytic(h, ch)[: code735.radius + 1].sum()
        for h in cands
    )
    assert reward_for_distances(cands, code735, R, w) == pytest.approx(direct, rel=1e-12)


def test_reward_rejects_empty_multiset(code735):
    with pytest.raises(ValueError):
        reward_for_distances([], code735, _R(code735, 0.1), GameWeights(1, 1, 1, 1))


def test_group_rewards_noiseless(code735):
    # not attacking is the only non-negative option when effort costs bite
    s = group_reward_vector(code735, _R(code735, 0.0), GameWeights(100, 100, 512, 100))
    assert s[0] == pytest.approx(0.0, abs=1e-12)
    assert (s[1:] < 0).all()


def test_group_rewards_definitional_agreement(code735):
    R = _R(code735, 0.07)
    w = GameWeights(100, 100, 512, 100)
    s = group_reward_vector(code735, R, w)
    for i in range(code735.n - code735.k + 1):
        cand = [i] + list(range(max(code735.d - i, i + 1), code735.n + 1))
        assert s[i] == pytest.approx(reward_for_distances(cand, code735, R, w), rel=1e-14)


def test_group_reward_smallest_group_value(code735):
    # independent binomial evaluation of the stay-at-zero reward
    pe, w = 0.01, GameWeights(100, 100, 512, 100)
    stay = sum(math.comb(7, j) * pe**j * (1 - pe) ** (7 - j) for j in range(3))
    expected = 100 * (1 - stay)
    s = group_reward_vector(code735, _R(code735, pe), w)
    assert s[0] == pytest.approx(expected, rel=1e-12)
    # the far candidates are dominated at these weights
    ch = ChannelModel.for_code(code735, pe)
    for h in range(5, 8):
        far = 100 - 100 * h - 100 * rho_row_analytic(h, ch)[:3].sum()
        assert far < expected


# ---------------------------------------------------------------- attack set


@pytest.mark.parametrize("code,expected_dim", list(REFERENCE_DIMS.items()))
def test_attack_basis_dimension(code, expected_dim):
    _, dim = build_attack_basis(code)
    assert dim == expected_dim


def test_attack_basis_structure(code735):
    basis, dim = build_attack_basis(code735)
    tau = code735.size
    assert dim == 21
    assert (basis.sum(axis=0) == tau).all()
    # first group: one codeword at distance zero, spare mass at distance 5
    assert basis[0, 0] == 1
    assert basis[5, 0] == tau - 3
    assert basis[6, 0] == basis[7, 0] == 1
    assert not basis[1:5, 0].any()


def test_attack_basis_necessary_conditions(code735):
    basis, _ = build_attack_basis(code735)
    widths = [3, 4, 5, 5, 4]
    start = 0
    for m, width in enumerate(widths):
        for col in basis[:, start : start + width].T:
            closest = int(np.argmax(col > 0))
            assert closest == m
            if m <= code735.radius:
                assert col[m] == 1
                zero_band = [t for t in range(code735.d - m) if t != m]
                assert not col[zero_band].any()
                assert (col[code735.d - m :] >= 1).all()
            else:
                assert not col[:m].any()
                assert (col[m:] >= 1).all()
        start += width


def test_attack_basis_rejects_tiny_codebook():
    with pytest.raises(ValueError):
        build_attack_basis(CodeParams(6, 1, 6, 2))


def test_attack_basis_even_minimum_distance():
    # d even leaves a forced zero just above the radius band: a crafted word
    # one symbol into a decodable region has no codeword at distance d-2
    code = CodeParams(6, 3, 4, 8)
    basis, dim = build_attack_basis(code)
    assert dim == 16  # (3 + 4) + (5 + 4) over the four closest-distance groups
    assert (basis.sum(axis=0) == code.size).all()
    group1 = basis[:, 3:7]
    assert (group1[1] == 1).all()
    assert not group1[0].any() and not group1[2].any()


def test_group_indicator_shape(code735):
    S = build_group_indicator(code735)
    assert S.shape == (5, 21)
    assert list(S.sum(axis=1)) == [3, 4, 5, 5, 4]
    assert (S.sum(axis=0) == 1).all()
    s = np.arange(5.0)
    lifted = S.T @ s
    assert list(lifted[:3]) == [0.0] * 3 and list(lifted[3:7]) == [1.0] * 4


def test_rule_basis_smallest_case():
    rules, dim = build_rule_basis(CodeParams(7, 5, 3, 8))
    assert dim == 4
    assert np.array_equal(rules, [[1, 1, 0, 0], [1, 0, 1, 0]])


def test_rule_basis_enumerates_all_rules(code735):
    rules, dim = build_rule_basis(code735)
    assert dim == 8
    assert not rules[:, -1].any()
    assert {tuple(col) for col in rules.T} == {
        tuple(map(int, format(v, "03b"))) for v in range(8)
    }


# ------------------------------------------------------------- false alarms


def test_false_alarm_row_noiseless(code735):
    fa = false_alarm_row(code735, _R(code735, 0.0))
    assert np.array_equal(fa, [1.0, 0.0, 0.0])


def test_false_alarm_row_matches_pairwise_bruteforce(code735):
    # oracle: average over all 512 x 512 codeword pairs
    pe = 0.05
    R = _R(code735, pe)
    cb = np.asarray(enumerate_codebook(code735))
    width = code735.radius + 1
    rows = np.vstack([rho_row_analytic(m, ChannelModel.for_code(code735, pe)) for m in range(8)])
    expected = np.zeros(width)
    for x in cb:
        dists = np.count_nonzero(cb != x, axis=1)
        expected += rows[dists, :width].sum(axis=0)
    expected /= len(cb)
    fa = false_alarm_row(code735, R)
    assert np.allclose(fa, expected, atol=1e-10)
    assert (fa >= 0).all() and (fa <= code735.size).all()


def test_false_alarm_row_accepts_explicit_weights(code735):
    R = _R(code735, 0.02)
    fa = false_alarm_row(code735, R, weights=mds_weight_distribution(code735))
    assert np.allclose(fa, false_alarm_row(code735, R))


# ------------------------------------------------------------- cost matrix


def test_cost_matrix_zero_weights(code735):
    R = _R(code735, 0.1)
    game = build_relaxed_game(
        code735, ChannelModel.for_code(code735, 0.1), GameWeights(0, 0, 0, 0), R=R
    )
    assert not game.cost_matrix.any()
    assert game.shift == 1.0
    assert (game.cost_matrix_pos == 1.0).all()


def test_cost_matrix_shape_and_never_alert_column(code735):
    pe, w = 0.05, GameWeights(100, 100, 512, 100)
    game = build_relaxed_game(code735, ChannelModel.for_code(code735, pe), w)
    assert game.cost_matrix.shape == (21, 8)
    R = _R(code735, pe)
    reach = game.attack_basis.T.astype(float) @ R.entries
    expected_last = game.group_indicator.T @ game.group_rewards + w.g1 * reach.sum(axis=1)
    assert np.allclose(game.cost_matrix[:, -1], expected_last, rtol=1e-12)


def test_cost_matrix_linear_in_missed_attack_weight(code735):
    # finite difference in g1: doubling g1 doubles exactly the g1 terms
    pe = 0.05
    ch = ChannelModel.for_code(code735, pe)
    R = _R(code735, pe)
    mats = {}
    for g1 in (0.0, 70.0, 140.0):
        w = GameWeights(g1, 100, 512, 100)
        game = build_relaxed_game(code735, ch, w, R=R)
        mats[g1] = game.cost_matrix
    assert np.allclose(mats[140.0] - mats[70.0], mats[70.0] - mats[0.0], atol=1e-8)


def test_cost_matrix_positive_shift_bookkeeping(code735):
    game = build_relaxed_game(
        code735, ChannelModel.for_code(code735, 0.05), GameWeights(100, 100, 512, 100)
    )
    if game.shift > 0:
        assert (game.cost_matrix_pos > 0).all()
        assert game.cost_matrix.min() <= 0
    assert np.allclose(game.cost_matrix_pos - game.shift, game.cost_matrix)


# ------------------------------------------------------------ exact quotient


def test_exact_quotient_small_code(small_code):
    ch = ChannelModel.for_code(small_code, 0.05)
    w = GameWeights.defaults_for(small_code)
    xq = exact_quotient(small_code, ch, w)
    assert xq.kappa == xq.histograms.shape[0]
    assert (xq.histograms.sum(axis=1) == small_code.size).all()
    weight_dist = np.array(mds_weight_distribution(small_code))
    assert any(np.array_equal(h, weight_dist) for h in xq.histograms)
    # every class respects the closest/second-closest structure
    for h in xq.histograms:
        closest = int(np.argmax(h > 0))
        assert closest <= small_code.n - small_code.k
        if closest <= small_code.radius:
            assert h[closest] == 1
            band = [t for t in range(small_code.d - closest) if t != closest]
            assert not h[band].any()


def test_exact_quotient_rewards_match_scalar_path(small_code):
    ch = ChannelModel.for_code(small_code, 0.05)
    w = GameWeights.defaults_for(small_code)
    R = build_transition_matrix(small_code, ch)
    xq = exact_quotient(small_code, ch, w)
    recomputed = rewards_from_histograms(xq.histograms, R, w)
    assert np.allclose(xq.rewards, recomputed)
    for h, r in zip(xq.histograms, xq.rewards):
        support = [int(t) for t in np.flatnonzero(h)]
        assert r == pytest.approx(reward_for_distances(support, small_code, R, w), rel=1e-12)


def test_exact_quotient_bound(small_code):
    ch = ChannelModel.for_code(small_code, 0.05)
    with pytest.raises(ValueError):
        exact_quotient(small_code, ch, GameWeights.defaults_for(small_code), bound=100)


def test_even_distance_pipeline_end_to_end():
    # [6,3,4]_8: minimum distance even, radius 1, full space 8^6 enumerable
    from signguard.evaluate import exact_best_response
    from signguard.lp import saddle_check, solve_equilibrium

    code = CodeParams(6, 3, 4, 8)
    ch = ChannelModel.for_code(code, 0.1)
    w = GameWeights.defaults_for(code)
    R = build_transition_matrix(code, ch)
    game = build_relaxed_game(code, ch, w, R=R)
    eq = solve_equilibrium(game.cost_matrix, game.cost_matrix_pos, game.shift, game.rule_basis)
    assert saddle_check(game.cost_matrix, eq).ok
    xq = exact_quotient(code, ch, w, R=R)
    best = exact_best_response(xq, eq.detection_rule, R, w, game.false_alarm_row)
    assert best.cost <= eq.value + 1e-6
    assert eq.value <= eq.value_no_detector + 1e-6


def test_relaxation_covers_contiguous_histograms(small_code):
    # representability: every real class satisfying the populated-tail
    # condition must lie in the hull of its group's basis columns
    ch = ChannelModel.for_code(small_code, 0.05)
    w = GameWeights.defaults_for(small_code)
    xq = exact_quotient(small_code, ch, w)
    basis, _ = build_attack_basis(small_code)
    indicator = build_group_indicator(small_code)
    for h in xq.histograms:
        closest = int(np.argmax(h > 0))
        start = max(small_code.d - closest, closest)
        if (h[start:] == 0).any():
            continue  # violates the relaxation's assumption; not covered
        cols = basis[:, indicator[closest].astype(bool)]
        res = linprog(
            c=np.zeros(cols.shape[1]),
            A_eq=np.vstack([cols, np.ones(cols.shape[1])]),
            b_eq=np.concatenate([h, [1.0]]),
            bounds=(0, None),
            method="highs",
        )
        assert res.status == 0, f"histogram {h} not representable"
