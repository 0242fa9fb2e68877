"""Dense simplex solver and equilibrium extraction.

The detector-commits-first game reduces, after making the cost matrix
positive, to the standard pair of linear programs

    max 1'w  s.t.  C w <= 1, w >= 0        (detector side)
    min 1'v  s.t.  C'v >= 1, v >= 0        (attacker side, the dual)

whose common optimum is the reciprocal of the shifted game value.  Everything
runs on a tableau simplex under Bland's rule.  The dual side is obtained
twice: from the final-tableau multipliers of the detector LP, and by an
independent solve of the attacker LP via its flipped-game form
V(f*J - C') = f - V(C), whose matrix always has entries in [1, 2) and so
needs no first phase.  The two must agree, which doubles as an optimality
certificate.  A generic two-phase path for min/>= problems is kept for
callers that need it directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-9
MAX_ITERATIONS = 200_000
FEAS_RTOL = 1e-8
GAP_RTOL = 1e-6
SADDLE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """max c'x subject to A x <= b, x >= 0 (b must be nonnegative, so the
    origin is feasible and no first phase is needed)."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        A = np.asarray(self.A, dtype=np.float64)
        b = np.asarray(self.b, dtype=np.float64)
        if A.ndim != 2 or c.shape != (A.shape[1],) or b.shape != (A.shape[0],):
            raise ValueError(
                f"inconsistent dimensions: A {A.shape}, c {c.shape}, b {b.shape}"
            )
        if b.min(initial=0.0) < 0:
            raise ValueError("b must be nonnegative (origin must be feasible)")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True, eq=False)
class SimplexSolution:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    iterations: int


@dataclass(frozen=True, eq=False)
class Equilibrium:
    """Solved detector-commits-first equilibrium.

    detection_rule: alert probability per decoder error count.
    rule_mixture / attack_mixture: distributions over the rule-basis and
        attack-basis columns inducing the equilibrium strategies.
    value: game value with the positivity shift removed;
    value_no_detector: attacker's best payoff against the never-alert rule.
    """

    detection_rule: np.ndarray
    rule_mixture: np.ndarray
    attack_mixture: np.ndarray
    value: float
    value_no_detector: float
    lp_objective: float
    duality_gap: float


@dataclass(frozen=True, eq=False)
class SaddleReport:
    """Equilibrium certificate: the attacker cannot push the cost above the
    value against the solved rule, and the solved attack mixture pins the
    cost at least at the value against every rule."""

    value: float
    attacker_best: float
    detector_best: float
    tol: float

    @property
    def upper_ok(self) -> bool:
        return self.attacker_best <= self.value + self.tol

    @property
    def lower_ok(self) -> bool:
        return self.detector_best >= self.value - self.tol

    @property
    def ok(self) -> bool:
        return self.upper_ok and self.lower_ok


class UnboundedError(RuntimeError):
    """The LP is unbounded; for a positive game matrix this signals a
    construction bug upstream."""


def _bland_pivot_loop(T: np.ndarray, basis: list[int], allowed: np.ndarray) -> int:
    """Run simplex pivots to optimality on tableau T (last row objective,
    last column rhs), entering and leaving by Bland's rule."""
    m = len(basis)
    iterations = 0
    while True:
        z = T[-1, :-1]
        candidates = np.flatnonzero(allowed & (z < -PIVOT_TOL))
        if candidates.size == 0:
            return iterations
        enter = int(candidates[0])
        col = T[:m, enter]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise UnboundedError("objective unbounded above")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
        leave = int(ties[np.argmin([basis[r] for r in ties])])
        piv = T[leave, enter]
        T[leave] /= piv
        for i in range(T.shape[0]):
            if i != leave and T[i, enter] != 0.0:
                T[i] -= T[i, enter] * T[leave]
        basis[leave] = enter
        iterations += 1
        if iterations > MAX_ITERATIONS:
            raise RuntimeError("simplex iteration cap exceeded")


def _row_scales(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-row equilibration factors: scaling a constraint row leaves the
    feasible set and objective untouched but caps every row's magnitude at
    one, which keeps absolute pivot tolerances meaningful across the ~1e6
    dynamic range of large game matrices."""
    magnitude = np.maximum(np.abs(A).max(axis=1), np.abs(b))
    return 1.0 / np.where(magnitude > 0, magnitude, 1.0)


def simplex_solve(lp: LinearProgram) -> SimplexSolution:
    """Solve max c'x, A x <= b, x >= 0 to an optimal basic solution.

    Returns the primal optimum, its objective, and the dual multipliers read
    off the final tableau; optimality is certified before returning
    (residuals, dual feasibility, complementary slackness).
    """
    m, n = lp.A.shape
    scales = _row_scales(lp.A, lp.b)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = lp.A * scales[:, None]
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = lp.b * scales
    T[-1, :n] = -lp.c
    basis = list(range(n, n + m))
    allowed = np.ones(n + m, dtype=bool)
    iterations = _bland_pivot_loop(T, basis, allowed)

    x = np.zeros(n + m)
    for i, bi in enumerate(basis):
        x[bi] = T[i, -1]
    solution = SimplexSolution(
        x=x[:n].copy(),
        objective=float(T[-1, -1]),
        duals=T[-1, n : n + m] * scales,
        iterations=iterations,
    )
    _certify(lp, solution)
    return solution


def _certify(lp: LinearProgram, sol: SimplexSolution) -> None:
    scale = 1.0 + max(abs(lp.A).max(initial=0.0), abs(lp.c).max(initial=0.0), abs(lp.b).max(initial=0.0))
    tol = FEAS_RTOL * scale
    if sol.x.min(initial=0.0) < -1e-12 * scale:
        raise RuntimeError("simplex returned a negative variable")
    residual = lp.A @ sol.x - lp.b
    if residual.max(initial=0.0) > 1e-9 * scale:
        raise RuntimeError(f"primal residual {residual.max():.3e} out of tolerance")
    if sol.duals.min(initial=0.0) < -1e-12 * scale:
        raise RuntimeError("negative dual multiplier")
    reduced = lp.A.T @ sol.duals - lp.c
    if reduced.min(initial=0.0) < -tol:
        raise RuntimeError("dual multipliers are infeasible")
    slack_cs = abs(sol.duals * residual).max(initial=0.0)
    var_cs = abs(sol.x * reduced).max(initial=0.0)
    if max(slack_cs, var_cs) > tol:
        raise RuntimeError("complementary slackness violated")


def solve_min_geq(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve min c'x, A x >= b, x >= 0 (b >= 0) by two-phase simplex."""
    c = np.asarray(c, dtype=np.float64)
    A = np.asarray(A, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, n = A.shape
    if b.min(initial=0.0) < 0:
        raise ValueError("b must be nonnegative")
    scales = _row_scales(A, b)
    A_eq = A * scales[:, None]
    b_eq = b * scales
    # columns: n structural | m surplus | m artificial | rhs
    T = np.zeros((m + 1, n + 2 * m + 1))
    T[:m, :n] = A_eq
    T[:m, n : n + m] = -np.diag(scales)
    T[:m, n + m : n + 2 * m] = np.eye(m)
    T[:m, -1] = b_eq
    basis = list(range(n + m, n + 2 * m))

    # Phase 1: maximize -(sum of artificials); priced-out objective row.
    T[-1, : n + m] = -T[:m, : n + m].sum(axis=0)
    T[-1, -1] = -b_eq.sum()
    allowed = np.ones(n + 2 * m, dtype=bool)
    try:
        _bland_pivot_loop(T, basis, allowed)
    except UnboundedError:
        # phase 1 is bounded above by zero, so this is a tolerance stall
        raise RuntimeError("phase 1 stalled on sub-tolerance pivots") from None
    # feasibility = no artificial carries mass (the objective-row rhs drifts
    # over many pivots and is not a reliable witness)
    leftover = max(
        (T[i, -1] for i in range(m) if basis[i] >= n + m), default=0.0
    )
    if leftover > 1e-7 * (1.0 + abs(b_eq).max(initial=0.0)):
        raise RuntimeError("phase 1 ended infeasible")

    # Pivot any artificial still in the basis out on a structural/surplus
    # column, or leave it pinned at zero if its row is redundant.
    for i in range(m):
        if basis[i] >= n + m:
            row = T[i, : n + m]
            cols = np.flatnonzero(np.abs(row) > PIVOT_TOL)
            if cols.size:
                enter = int(cols[0])
                piv = T[i, enter]
                T[i] /= piv
                for r in range(T.shape[0]):
                    if r != i and T[r, enter] != 0.0:
                        T[r] -= T[r, enter] * T[i]
                basis[i] = enter

    # Phase 2: maximize -c'x with artificial columns barred from entering.
    allowed[n + m :] = False
    cvec = np.zeros(n + 2 * m)
    cvec[:n] = -c
    T[-1, :-1] = -cvec
    T[-1, -1] = 0.0
    for i, bi in enumerate(basis):
        if cvec[bi] != 0.0:
            T[-1] += cvec[bi] * T[i]
    _bland_pivot_loop(T, basis, allowed)

    x = np.zeros(n + 2 * m)
    for i, bi in enumerate(basis):
        x[bi] = T[i, -1]
    objective = -float(T[-1, -1])
    residual = b - A @ x[:n]
    scale = 1.0 + max(abs(A).max(initial=0.0), abs(b).max(initial=0.0))
    if residual.max(initial=0.0) > 1e-9 * scale or x[:n].min(initial=0.0) < -1e-12 * scale:
        raise RuntimeError("two-phase simplex returned an infeasible point")
    return x[:n].copy(), objective


def no_detector_value(cost_matrix: np.ndarray) -> float:
    """Attacker's best payoff when the rule never alerts: the last rule
    basis column is the all-zeros rule, so this is the maximum entry of the
    last cost-matrix column."""
    return float(np.asarray(cost_matrix)[:, -1].max())


def solve_equilibrium(
    cost_matrix: np.ndarray,
    cost_matrix_pos: np.ndarray,
    shift: float,
    rule_basis: np.ndarray,
) -> Equilibrium:
    """Solve the game and lift the LP optimizers back to strategies.

    The primal gives the rule mixture (normalized w) and the detection rule
    through the rule basis.  The attack mixture comes from an independent
    second solve in the flipped-game form, cross-checked against the
    primal's final-tableau multipliers.  The reported value removes the
    positivity shift.
    """
    C = np.asarray(cost_matrix, dtype=np.float64)
    Cp = np.asarray(cost_matrix_pos, dtype=np.float64)
    if C.shape != Cp.shape or C.ndim != 2:
        raise ValueError("cost matrices must share one 2-D shape")
    if Cp.min() <= 0:
        raise ValueError("shifted cost matrix must be entrywise positive")
    n_attack, n_rules = Cp.shape

    # Normalize to unit scale: the mixtures are invariant, the value and the
    # LP objective rescale, and the simplex tolerances stay meaningful even
    # when cost entries reach ~1e6.
    scale = float(Cp.max())
    Cs = Cp / scale

    primal = simplex_solve(LinearProgram(c=np.ones(n_rules), A=Cs, b=np.ones(n_attack)))
    total_s = primal.objective
    if total_s <= 0:
        raise RuntimeError("primal optimum is not positive; game value undefined")
    total = total_s / scale

    # Attacker side: the flipped game f*J - Cs' has the attack mixture as its
    # column optimizer and value f - V(Cs); its entries live in [1, 2), so
    # this second solve is immune to the cost matrix's dynamic range.
    flip = float(Cs.max()) + 1.0
    flipped = simplex_solve(
        LinearProgram(c=np.ones(n_attack), A=flip - Cs.T, b=np.ones(n_rules))
    )
    value_s_dual = flip - 1.0 / flipped.objective
    if value_s_dual <= 0:
        raise RuntimeError("flipped-game value is not positive")
    dual_objective = 1.0 / value_s_dual / scale

    dual_from_tableau = primal.duals / scale
    gap = max(
        abs(total - dual_objective),
        abs(total - float(dual_from_tableau.sum())),
    )
    if gap > GAP_RTOL * (1.0 + abs(total)):
        raise RuntimeError(
            f"dual cross-check failed: primal {total!r}, dual {dual_objective!r}, "
            f"multipliers {dual_from_tableau.sum()!r}"
        )

    rule_mixture = np.clip(primal.x, 0.0, None)
    rule_mixture /= rule_mixture.sum()
    attack_mixture = np.clip(flipped.x, 0.0, None)
    attack_mixture /= attack_mixture.sum()
    rule = np.asarray(rule_basis) @ rule_mixture
    if rule.min() < -1e-9 or rule.max() > 1.0 + 1e-9:
        raise RuntimeError("detection rule escaped [0, 1]")
    rule = np.clip(rule, 0.0, 1.0)

    value = float(1.0 / total - shift)
    eq = Equilibrium(
        detection_rule=rule,
        rule_mixture=rule_mixture,
        attack_mixture=attack_mixture,
        value=value,
        value_no_detector=no_detector_value(C),
        lp_objective=float(total),
        duality_gap=float(gap),
    )
    for vec in (eq.rule_mixture, eq.attack_mixture):
        if abs(vec.sum() - 1.0) > 1e-9 or vec.min() < 0:
            raise RuntimeError("strategy mixture is not a distribution")
    return eq


def saddle_check(cost_matrix: np.ndarray, eq: Equilibrium, tol: float = SADDLE_TOL) -> SaddleReport:
    """Verify the saddle inequalities of a solved equilibrium on the
    un-shifted cost matrix."""
    C = np.asarray(cost_matrix, dtype=np.float64)
    attacker_best = float((C @ eq.rule_mixture).max())
    detector_best = float((eq.attack_mixture @ C).min())
    return SaddleReport(
        value=eq.value,
        attacker_best=attacker_best,
        detector_best=detector_best,
        tol=tol,
    )
