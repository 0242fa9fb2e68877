"""Run configuration: JSON files plus command-line overrides.

Every field is optional and has a documented default; validation happens at
parse time with field-precise error messages so batch runs fail fast and
machine-readably.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .codes import CodeParams
from .game import GameWeights, SignPrior

DEFAULT_CODE = CodeParams(7, 3, 5, 8)
DEFAULT_PE = 0.05


class ConfigError(ValueError):
    """Invalid configuration; `location` names the offending field."""

    def __init__(self, location: str, message: str):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass(frozen=True)
class McSettings:
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("mc.trials", "must be >= 1")
        if self.seed < 0:
            raise ConfigError("mc.seed", "must be >= 0")


@dataclass(frozen=True)
class EnumerationBounds:
    codebook_max: int = 1 << 21
    fullspace_max: int = 1 << 22

    def __post_init__(self):
        if self.codebook_max < 1 or self.fullspace_max < 1:
            raise ConfigError("bounds", "enumeration bounds must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    code: CodeParams = DEFAULT_CODE
    pe: float = DEFAULT_PE
    weights: GameWeights | None = None  # None: 100/100/codebook-size/100
    prior: SignPrior = field(default_factory=SignPrior)
    attack_probability: float | None = None
    mc: McSettings = field(default_factory=McSettings)
    bounds: EnumerationBounds = field(default_factory=EnumerationBounds)
    rho_method: str = "analytic"

    def __post_init__(self):
        if not 0.0 <= self.pe <= 1.0:
            raise ConfigError("channel.pe", f"must lie in [0, 1], got {self.pe}")
        if self.rho_method not in ("analytic", "mc"):
            raise ConfigError("rho_method", f"must be 'analytic' or 'mc', got {self.rho_method!r}")
        if self.attack_probability is not None and not 0.0 <= self.attack_probability <= 1.0:
            raise ConfigError("attack_probability", "must lie in [0, 1]")
        self.prior.validate_for(self.code)

    def resolved_weights(self) -> GameWeights:
        """Defaults filled in and the optional attack-probability prior
        folded into the objective weights."""
        w = self.weights or GameWeights.defaults_for(self.code)
        if self.attack_probability is not None:
            w = w.scaled_by_attack_probability(self.attack_probability)
        return w

    def to_dict(self) -> dict:
        """Fully resolved configuration for artifact provenance (weights have
        defaults filled in and the attack probability folded in)."""
        w = self.resolved_weights()
        return {
            "code": {"n": self.code.n, "k": self.code.k, "d": self.code.d, "q": self.code.q},
            "channel": {"pe": self.pe},
            "weights": {"g1": w.g1, "g2": w.g2, "g3": w.g3, "g4": w.g4},
            "prior": "uniform" if self.prior.probs is None else list(map(float, self.prior.probs)),
            "attack_probability": self.attack_probability,
            "mc": {"trials": self.mc.trials, "seed": self.mc.seed},
            "bounds": {
                "codebook_max": self.bounds.codebook_max,
                "fullspace_max": self.bounds.fullspace_max,
            },
            "rho_method": self.rho_method,
        }

    def to_raw_dict(self) -> dict:
        """Round-trippable form: weights stay unresolved so re-parsing (e.g.
        after a flag override) neither bakes in defaults nor re-applies the
        attack-probability scaling."""
        out = {
            "code": {"n": self.code.n, "k": self.code.k, "d": self.code.d, "q": self.code.q},
            "channel": {"pe": self.pe},
            "prior": "uniform" if self.prior.probs is None else list(map(float, self.prior.probs)),
            "mc": {"trials": self.mc.trials, "seed": self.mc.seed},
            "bounds": {
                "codebook_max": self.bounds.codebook_max,
                "fullspace_max": self.bounds.fullspace_max,
            },
            "rho_method": self.rho_method,
        }
        if self.weights is not None:
            w = self.weights
            out["weights"] = {"g1": w.g1, "g2": w.g2, "g3": w.g3, "g4": w.g4}
        if self.attack_probability is not None:
            out["attack_probability"] = self.attack_probability
        return out


def _require_keys(raw: dict, allowed: set[str], location: str) -> None:
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(location, f"unknown field(s) {sorted(unknown)}")


def _number(raw: dict, key: str, location: str, default, integer: bool = False):
    if key not in raw:
        return default
    value = raw[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{location}.{key}", f"expected a number, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{location}.{key}", f"expected an integer, got {value!r}")
        return int(value)
    return float(value)


def config_from_dict(raw: dict, source: str = "config") -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError(source, "top level must be a JSON object")
    _require_keys(
        raw,
        {"code", "channel", "weights", "prior", "attack_probability", "mc", "bounds", "rho_method"},
        source,
    )

    code = DEFAULT_CODE
    if "code" in raw:
        sub = raw["code"]
        if not isinstance(sub, dict):
            raise ConfigError("code", "expected an object {n, k, d, q}")
        _require_keys(sub, {"n", "k", "d", "q"}, "code")
        try:
            code = CodeParams(
                n=_number(sub, "n", "code", None, integer=True),
                k=_number(sub, "k", "code", None, integer=True),
                d=_number(sub, "d", "code", None, integer=True),
                q=_number(sub, "q", "code", None, integer=True),
            )
        except TypeError:
            raise ConfigError("code", "all of n, k, d, q are required") from None
        except ValueError as exc:
            raise ConfigError("code", str(exc)) from None

    pe = DEFAULT_PE
    if "channel" in raw:
        sub = raw["channel"]
        if not isinstance(sub, dict):
            raise ConfigError("channel", "expected an object {pe}")
        _require_keys(sub, {"pe"}, "channel")
        pe = _number(sub, "pe", "channel", DEFAULT_PE)

    weights = None
    if "weights" in raw:
        sub = raw["weights"]
        if not isinstance(sub, dict):
            raise ConfigError("weights", "expected an object {g1, g2, g3, g4}")
        _require_keys(sub, {"g1", "g2", "g3", "g4"}, "weights")
        base = GameWeights.defaults_for(code)
        try:
            weights = GameWeights(
                g1=_number(sub, "g1", "weights", base.g1),
                g2=_number(sub, "g2", "weights", base.g2),
                g3=_number(sub, "g3", "weights", base.g3),
                g4=_number(sub, "g4", "weights", base.g4),
            )
        except ValueError as exc:
            raise ConfigError("weights", str(exc)) from None

    prior = SignPrior()
    if "prior" in raw and raw["prior"] != "uniform":
        if not isinstance(raw["prior"], list):
            raise ConfigError("prior", "expected 'uniform' or a list of probabilities")
        try:
            prior = SignPrior(probs=raw["prior"])
        except ValueError as exc:
            raise ConfigError("prior", str(exc)) from None

    pa = None
    if raw.get("attack_probability") is not None:
        pa = _number(raw, "attack_probability", source, None)

    mc = McSettings()
    if "mc" in raw:
        sub = raw["mc"]
        if not isinstance(sub, dict):
            raise ConfigError("mc", "expected an object {trials, seed}")
        _require_keys(sub, {"trials", "seed"}, "mc")
        mc = McSettings(
            trials=_number(sub, "trials", "mc", McSettings.trials, integer=True),
            seed=_number(sub, "seed", "mc", McSettings.seed, integer=True),
        )

    bounds = EnumerationBounds()
    if "bounds" in raw:
        sub = raw["bounds"]
        if not isinstance(sub, dict):
            raise ConfigError("bounds", "expected an object {codebook_max, fullspace_max}")
        _require_keys(sub, {"codebook_max", "fullspace_max"}, "bounds")
        bounds = EnumerationBounds(
            codebook_max=_number(
                sub, "codebook_max", "bounds", EnumerationBounds.codebook_max, integer=True
            ),
            fullspace_max=_number(
                sub, "fullspace_max", "bounds", EnumerationBounds.fullspace_max, integer=True
            ),
        )

    rho_method = raw.get("rho_method", "analytic")
    if not isinstance(rho_method, str):
        raise ConfigError("rho_method", f"expected a string, got {rho_method!r}")

    try:
        return RunConfig(
            code=code,
            pe=pe,
            weights=weights,
            prior=prior,
            attack_probability=pa,
            mc=mc,
            bounds=bounds,
            rho_method=rho_method,
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(source, str(exc)) from None


def load_config(path: str | Path) -> RunConfig:
    """Parse a UTF-8 JSON configuration file (no comments)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return config_from_dict(raw, source=str(path))
