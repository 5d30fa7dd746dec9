"""JSON run configuration for the command-line front end.

Example document::

    {
      "kind": "pow",
      "params": {"e": 10000, "P": 12.5, "A": 1.01, "t": 36, "N": 1000, "c": 125},
      "attack_value": {"kind": "constant", "k": 45000},
      "mode": "continuous",
      "reward_regime": "fixed",
      "bounds": {"cost": [1e-3, 1e6], "N": [1, 1e5], "P": [1e-3, 1e3]},
      "N_pin": null,
      "simulation": {"rounds": 5000, "seed": 0, "entry_rule": "one_per_round",
                     "attack_timing": "equilibrium"},
      "output": {"path": null, "format": "csv"}
    }

``params.e`` may be omitted when the rate comes from ``--rate-source``.
Rates ``r`` are per block; convert annual rates before writing them here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .abm import AttackTiming, EntryRule
from .econ import AttackValueModel, ConsensusKind, NetworkParams, NodeMode
from .errors import ConfigError, DomainError
from .permissioned import Bounds, RewardRegime

PARAM_NAMES = ("e", "P", "A", "t", "N", "c", "S", "r")


@dataclass(frozen=True)
class SimSettings:
    rounds: int | None = None
    seed: int = 0
    entry_rule: EntryRule = EntryRule.ONE_PER_ROUND
    attack_timing: AttackTiming = AttackTiming.EQUILIBRIUM


@dataclass(frozen=True)
class OutputSettings:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class RunConfig:
    kind: ConsensusKind
    params: dict[str, float | None]
    V: AttackValueModel
    mode: NodeMode = NodeMode.CONTINUOUS
    reward_regime: RewardRegime = RewardRegime.FIXED
    bounds: Bounds | None = None
    N_pin: float | None = None
    simulation: SimSettings = field(default_factory=SimSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def network(self, e: float | None = None) -> NetworkParams:
        """Build validated network parameters, optionally overriding e."""
        p = dict(self.params)
        if e is not None:
            p["e"] = e
        if p.get("e") is None:
            raise ConfigError("params.e", "missing; give it literally or via --rate-source")
        if self.kind is ConsensusKind.POS and p.get("S") is None:
            raise ConfigError("params.S", "required for this PoS command")
        if self.kind is ConsensusKind.POW:
            p["S"] = p["r"] = None
        kwargs = {k: v for k, v in p.items() if v is not None}
        try:
            return NetworkParams(**kwargs)
        except DomainError as exc:
            raise ConfigError("params", str(exc)) from exc

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "params": {k: self.params.get(k) for k in PARAM_NAMES},
            "attack_value": self.V.to_dict(),
            "mode": self.mode.value,
            "reward_regime": self.reward_regime.value,
            "bounds": None if self.bounds is None else {
                "cost": list(self.bounds.cost), "N": list(self.bounds.N), "P": list(self.bounds.P)},
            "N_pin": self.N_pin,
            "simulation": {
                "rounds": self.simulation.rounds,
                "seed": self.simulation.seed,
                "entry_rule": self.simulation.entry_rule.value,
                "attack_timing": self.simulation.attack_timing.value,
            },
            "output": {"path": self.output.path, "format": self.output.format},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False)


def _enum(cls, value, where):
    try:
        return cls(value)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(where, f"{value!r} is not one of: {choices}") from None


def _number(value, where, *, allow_none=False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(where, f"expected a finite number, got {value!r}")
    return value


def _check_params(raw: dict, kind: ConsensusKind) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("params", "expected an object")
    unknown = sorted(set(raw) - set(PARAM_NAMES))
    if unknown:
        raise ConfigError(f"params.{unknown[0]}", "unknown parameter")
    p = {k: _number(raw.get(k), f"params.{k}", allow_none=True) for k in PARAM_NAMES}
    for name in ("P", "A", "t"):
        if p[name] is None:
            raise ConfigError(f"params.{name}", "required")
    for name in ("e", "P", "c", "r"):
        if p[name] is not None and p[name] <= 0:
            raise ConfigError(f"params.{name}", f"must be > 0, got {p[name]!r}")
    if p["A"] <= 1:
        raise ConfigError("params.A", f"must exceed 1, got {p['A']!r}")
    if p["t"] < 1 or int(p["t"]) != p["t"]:
        raise ConfigError("params.t", f"must be a positive integer, got {p['t']!r}")
    if p["N"] is not None and p["N"] < 1:
        raise ConfigError("params.N", f"must be >= 1, got {p['N']!r}")
    if p["S"] is not None and p["S"] < 0:
        raise ConfigError("params.S", f"must be >= 0, got {p['S']!r}")
    if kind is ConsensusKind.POW and p["c"] is None:
        raise ConfigError("params.c", "required for pow")
    if kind is ConsensusKind.POS and p["r"] is None:
        raise ConfigError("params.r", "required for pos")
    return p


def _bounds(raw) -> Bounds | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigError("bounds", "expected an object with cost, N, P pairs")
    pairs = {}
    for name in ("cost", "N", "P"):
        pair = raw.get(name, list(getattr(Bounds, name)))
        if not isinstance(pair, (list, tuple)) or len(pair) != 2:
            raise ConfigError(f"bounds.{name}", "expected [low, high]")
        pairs[name] = tuple(_number(v, f"bounds.{name}") for v in pair)
    try:
        return Bounds(**pairs)
    except DomainError as exc:
        raise ConfigError("bounds", str(exc)) from exc


def config_from_dict(doc: Any) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "expected a JSON object")
    known = {"kind", "params", "attack_value", "mode", "reward_regime", "bounds", "N_pin", "simulation", "output"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError(unknown[0], "unknown field")
    kind = _enum(ConsensusKind, doc.get("kind", "pow"), "kind")
    params = _check_params(doc.get("params", {}), kind)

    av = doc.get("attack_value")
    if av is None:
        raise ConfigError("attack_value", "required")
    try:
        V = AttackValueModel.from_dict(av)
    except KeyError as exc:
        raise ConfigError(f"attack_value.{exc.args[0]}", "required") from None
    except (DomainError, ValueError, TypeError) as exc:
        raise ConfigError("attack_value", str(exc)) from None

    sim_raw = doc.get("simulation") or {}
    rounds = sim_raw.get("rounds")
    if rounds is not None and (isinstance(rounds, bool) or not isinstance(rounds, int) or rounds < 1):
        raise ConfigError("simulation.rounds", f"must be a positive integer, got {rounds!r}")
    seed = sim_raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("simulation.seed", f"must be an unsigned 64-bit integer, got {seed!r}")
    sim = SimSettings(
        rounds,
        seed,
        _enum(EntryRule, sim_raw.get("entry_rule", "one_per_round"), "simulation.entry_rule"),
        _enum(AttackTiming, sim_raw.get("attack_timing", "equilibrium"), "simulation.attack_timing"),
    )
    out_raw = doc.get("output") or {}
    fmt = out_raw.get("format", "csv")
    if fmt not in ("csv", "jsonl"):
        raise ConfigError("output.format", f"must be csv or jsonl, got {fmt!r}")

    N_pin = _number(doc.get("N_pin"), "N_pin", allow_none=True)
    cfg = RunConfig(
        kind=kind,
        params=params,
        V=V,
        mode=_enum(NodeMode, doc.get("mode", "continuous"), "mode"),
        reward_regime=_enum(RewardRegime, doc.get("reward_regime", "fixed"), "reward_regime"),
        bounds=_bounds(doc.get("bounds")),
        N_pin=N_pin,
        simulation=sim,
        output=OutputSettings(out_raw.get("path"), fmt),
    )
    if params["e"] is not None:
        if kind is ConsensusKind.POW or params["S"] is not None:
            cfg.network()
    return cfg


def load_config(path: str | Path) -> RunConfig:
    """Parse a config file; JSON syntax errors report line and column."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), f"cannot read: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    return config_from_dict(doc)


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, simulation=replace(cfg.simulation, seed=seed))
