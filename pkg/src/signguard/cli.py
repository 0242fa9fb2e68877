"""Batch command-line front end.

Subcommands: solve, tables {I..V}, simulate, oracle, rho, figures
{fig4,fig5,fig6}.  Every run is deterministic given its seed and writes
byte-stable JSON/CSV artifacts carrying the fully resolved configuration.

Exit codes: 0 success, 2 configuration error, 3 tolerance failure,
4 internal invariant violation.  Failures emit one machine-readable JSON
error object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluate
from .channel import ChannelModel, build_transition_matrix, rho_mc_row, rho_row_analytic
from .config import ConfigError, RunConfig, config_from_dict, load_config
from .game import build_relaxed_game, exact_quotient
from .lp import saddle_check, solve_equilibrium

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3
EXIT_INTERNAL = 4

THREADS_ENV = "SIGNGUARD_THREADS"


def _fmt(x) -> str:
    """Fixed 17-significant-digit formatting for CSV value columns."""
    return format(float(x), ".17g")


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else config_from_dict({})
    overrides: dict = {}
    if getattr(args, "code", None):
        parts = args.code.split(",")
        if len(parts) != 4:
            raise ConfigError("--code", "expected n,k,d,q")
        try:
            n, k, d, q = (int(p) for p in parts)
        except ValueError:
            raise ConfigError("--code", "expected four integers n,k,d,q") from None
        overrides["code"] = {"n": n, "k": k, "d": d, "q": q}
    if getattr(args, "pe", None) is not None:
        overrides["channel"] = {"pe": args.pe}
    if not overrides:
        return cfg
    merged = cfg.to_raw_dict()
    merged.update(overrides)
    return config_from_dict(merged, source="command line")


def _seed(args, cfg: RunConfig) -> int:
    return args.seed if args.seed is not None else cfg.mc.seed


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _build_instance(cfg: RunConfig, seed: int):
    code = cfg.code
    ch = ChannelModel.for_code(code, cfg.pe)
    method = "analytic" if cfg.rho_method == "analytic" else "monte-carlo"
    R = build_transition_matrix(code, ch, method=method, trials=cfg.mc.trials, seed=seed)
    game = build_relaxed_game(code, ch, cfg.resolved_weights(), prior=cfg.prior, R=R)
    return ch, R, game


def cmd_solve(args) -> int:
    cfg = _resolve_config(args)
    seed = _seed(args, cfg)
    _, _, game = _build_instance(cfg, seed)
    eq = solve_equilibrium(game.cost_matrix, game.cost_matrix_pos, game.shift, game.rule_basis)
    saddle = saddle_check(game.cost_matrix, eq)
    if not saddle.ok:
        raise RuntimeError(
            f"saddle certificate failed: attacker {saddle.attacker_best!r}, "
            f"detector {saddle.detector_best!r}, value {saddle.value!r}"
        )
    payload = {
        "config": cfg.to_dict(),
        "seed": seed,
        "pi_star": [float(v) for v in eq.detection_rule],
        "sigma_star": [float(v) for v in eq.rule_mixture],
        "beta_star": [float(v) for v in eq.attack_mixture],
        "value": eq.value,
        "value_no_detector": eq.value_no_detector,
        "nu": game.attack_dim,
        "mu": game.rule_dim,
        "d_o": cfg.code.radius,
        "shift": game.shift,
        "duality_gap": eq.duality_gap,
        "saddle": {
            "attacker_best": saddle.attacker_best,
            "detector_best": saddle.detector_best,
            "tol": saddle.tol,
        },
    }
    _write_json(_out_dir(args) / "equilibrium.json", payload)
    print(f"value {eq.value:.6f} (no detector {eq.value_no_detector:.6f}), "
          f"rule {np.array2string(eq.detection_rule, precision=4)}")
    return EXIT_OK


def cmd_tables(args) -> int:
    out = _out_dir(args)
    cfg = _resolve_config(args)
    seed = _seed(args, cfg)
    method = "analytic" if cfg.rho_method == "analytic" else "monte-carlo"
    report = evaluate.reproduce_tables(
        args.table, rho_method=method, mc_trials=cfg.mc.trials, mc_seed=seed
    )
    header = [
        "code", "pe", "metric", "computed", "reference",
        "abs_deviation", "rel_deviation", "within_tolerance", "hard", "passed", "note",
    ]
    rows = [
        [
            c.code,
            "" if c.pe is None else repr(c.pe),
            c.metric,
            _fmt(c.computed),
            _fmt(c.reference),
            _fmt(c.abs_dev),
            "" if c.rel_dev is None else _fmt(c.rel_dev),
            str(c.within_tolerance).lower(),
            str(c.hard).lower(),
            str(c.passed).lower(),
            c.note,
        ]
        for c in report.cells
    ]
    _write_csv(out / f"table_{args.table}.csv", header, rows)
    payload = {"rho_method": method, "seed": seed, "mc_trials": cfg.mc.trials}
    payload.update(report.to_dict())
    _write_json(out / "report.json", payload)
    hard_cells = [c for c in report.cells if c.hard]
    print(
        f"table {args.table}: {len(report.cells)} cells, "
        f"{sum(c.passed for c in hard_cells)}/{len(hard_cells)} hard checks passed, "
        f"{sum(c.within_tolerance for c in report.cells)} within tolerance"
    )
    if not report.hard_pass:
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _resolve_config(args)
    seed = _seed(args, cfg)
    _, _, game = _build_instance(cfg, seed)
    eq = solve_equilibrium(game.cost_matrix, game.cost_matrix_pos, game.shift, game.rule_basis)
    ch = ChannelModel.for_code(cfg.code, cfg.pe)
    report = evaluate.simulate_no_attack(
        cfg.code, ch, eq.detection_rule, cfg.resolved_weights(), cfg.mc.trials, seed
    )
    payload = {
        "config": cfg.to_dict(),
        "seed": seed,
        "trials": report.trials,
        "pi_star": [float(v) for v in eq.detection_rule],
        "rates": {
            name: {"value": est.value, "stderr": est.stderr}
            for name, est in (
                ("decode_error", report.decode_error_rate),
                ("decode_failure", report.decode_failure_rate),
                ("false_alarm", report.false_alarm_rate),
                ("alert", report.alert_rate),
            )
        },
        "empirical_cost": report.empirical_cost,
        "analytic": {
            "decode_error_or_failure": evaluate.decode_failure_prob(cfg.code, ch),
            "false_alarm": evaluate.false_alarm_probability(
                eq.detection_rule, game.false_alarm_row
            ),
        },
    }
    _write_json(_out_dir(args) / "report.json", payload)
    print(
        f"simulated {report.trials} trials: error {report.decode_error_rate.value:.5f}, "
        f"failure {report.decode_failure_rate.value:.5f}, "
        f"false alarm {report.false_alarm_rate.value:.5f}"
    )
    return EXIT_OK


def cmd_oracle(args) -> int:
    cfg = _resolve_config(args)
    seed = _seed(args, cfg)
    ch, R, game = _build_instance(cfg, seed)
    eq = solve_equilibrium(game.cost_matrix, game.cost_matrix_pos, game.shift, game.rule_basis)
    w = cfg.resolved_weights()
    xq = exact_quotient(
        cfg.code, ch, w, R=R,
        bound=cfg.bounds.fullspace_max, codebook_bound=cfg.bounds.codebook_max,
    )
    best = evaluate.exact_best_response(xq, eq.detection_rule, R, w, game.false_alarm_row)
    contig = evaluate.verify_contiguousness(xq, cfg.code)
    conservative = best.cost <= eq.value + 1e-6
    payload = {
        "config": cfg.to_dict(),
        "seed": seed,
        "kappa": xq.kappa,
        "relaxed_value": eq.value,
        "exact_best_response": best.cost,
        "best_histogram": [int(v) for v in best.histogram],
        "conservative": conservative,
        "verdict": "PASS" if conservative else "FAIL",
        "contiguousness": {
            "classes": contig.classes,
            "violations": contig.violations,
            "violation_rate": contig.violation_rate,
        },
    }
    _write_json(_out_dir(args) / "report.json", payload)
    print(
        f"oracle verdict {payload['verdict']}: exact best response {best.cost:.6f} "
        f"vs relaxed value {eq.value:.6f} over {xq.kappa} classes "
        f"({contig.violations} contiguousness violations)"
    )
    return EXIT_OK if conservative else EXIT_TOLERANCE


def cmd_rho(args) -> int:
    cfg = _resolve_config(args)
    ch = ChannelModel.for_code(cfg.code, cfg.pe)
    if not 0 <= args.n1 <= cfg.code.n:
        raise ConfigError("--n1", f"must lie in [0, {cfg.code.n}]")
    if args.n2 is not None and not 0 <= args.n2 <= cfg.code.n:
        raise ConfigError("--n2", f"must lie in [0, {cfg.code.n}]")
    seed = _seed(args, cfg)
    if cfg.rho_method == "mc" or args.method == "mc":
        values, stderr = rho_mc_row(args.n1, ch, trials=cfg.mc.trials, seed=seed)
        method = "mc"
    else:
        values = rho_row_analytic(args.n1, ch)
        stderr = np.zeros_like(values)
        method = "analytic"
    targets = range(cfg.code.n + 1) if args.n2 is None else [args.n2]
    header = ["code", "pe", "method", "n1", "n2", "value", "stderr"]
    rows = [
        [cfg.code.label, repr(cfg.pe), method, args.n1, n2, _fmt(values[n2]), _fmt(stderr[n2])]
        for n2 in targets
    ]
    _write_csv(_out_dir(args) / "rho.csv", header, rows)
    for n2 in targets:
        print(f"rho({args.n1}, {n2}) = {values[n2]:.10g}")
    return EXIT_OK


def cmd_figures(args) -> int:
    rows = evaluate.figure_data(args.figure)
    header = ["code", "pe", "index", "value"]
    out_rows = [[label, repr(pe), idx, _fmt(value)] for label, pe, idx, value in rows]
    _write_csv(_out_dir(args) / f"figure_{args.figure}.csv", header, out_rows)
    print(f"{args.figure}: wrote {len(rows)} rows")
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON configuration file")
    parser.add_argument("--out", default=".", help="output directory (default: .)")
    parser.add_argument("--seed", type=int, default=None, help="RNG seed override")
    parser.add_argument("--pe", type=float, default=None, help="symbol error probability override")
    parser.add_argument("--code", default=None, help="code parameters as n,k,d,q")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="signguard",
        description="Equilibrium tamper-detection rules for coded road signs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance and write equilibrium.json")
    _add_common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("tables", help="reproduce a reference table")
    p.add_argument("table", choices=["I", "II", "III", "IV", "V"])
    _add_common(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("simulate", help="Monte Carlo no-attack round trips under the solved rule")
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("oracle", help="exact best-response audit of the relaxation")
    _add_common(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("rho", help="distance-transition probabilities for one starting distance")
    p.add_argument("--n1", type=int, required=True, help="starting distance")
    p.add_argument("--n2", type=int, default=None, help="ending distance (default: whole row)")
    p.add_argument("--method", choices=["analytic", "mc"], default="analytic")
    _add_common(p)
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("figures", help="columnar data behind the reference figures")
    p.add_argument("figure", choices=["fig4", "fig5", "fig6"])
    _add_common(p)
    p.set_defaults(func=cmd_figures)

    return parser


def _check_threads_env() -> None:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return
    try:
        threads = int(raw)
    except ValueError:
        raise ConfigError(THREADS_ENV, f"expected a positive integer, got {raw!r}") from None
    if threads < 1:
        raise ConfigError(THREADS_ENV, f"expected a positive integer, got {raw!r}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _check_threads_env()
        return args.func(args)
    except ConfigError as exc:
        _emit_error(exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except (ValueError, FileNotFoundError) as exc:
        _emit_error(exc, EXIT_CONFIG)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - boundary: report and exit 4
        _emit_error(exc, EXIT_INTERNAL)
        return EXIT_INTERNAL


def _emit_error(exc: Exception, code: int) -> None:
    payload = {"error": {"type": type(exc).__name__, "message": str(exc), "exit_code": code}}
    print(json.dumps(payload), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
