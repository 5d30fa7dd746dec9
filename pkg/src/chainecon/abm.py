"""Agent-based oracle for the free-entry and attack conditions.

Honest nodes enter while a newcomer would break even and leave while
incumbents lose money. A rational attacker prices a t-block takeover
block by block and attacks when the takeover pays. The dynamics are
scaffolding for checking the closed forms, not a model of real networks.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

from .econ import (
    AttackValueModel,
    ConsensusKind,
    NetworkParams,
    NodeMode,
    as_value_model,
    attack_profit,
    fe_nodes_pow,
)
from .errors import DomainError

TRACE_HEADER = ("round", "N", "node_profit", "attack_profit", "attacked")


class Lcg64:
    """64-bit linear congruential generator (Knuth's MMIX constants)."""

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407
    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        if not 0 <= seed <= self.MASK:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & self.MASK
        return self.state

    def below(self, n: int) -> int:
        """Uniform-ish integer in [0, n) from the high 32 bits."""
        if not 0 < n <= 1 << 32:
            raise DomainError(f"range must be in (0, 2**32], got {n!r}")
        return ((self.next_u64() >> 32) * n) >> 32


class EntryRule(str, Enum):
    ONE_PER_ROUND = "one_per_round"
    PROPORTIONAL = "proportional"


class AttackTiming(str, Enum):
    # attacker moves only in rounds where nobody entered or left
    EQUILIBRIUM = "equilibrium"
    # attacker may strike during the entry transient as well
    ANY_ROUND = "any_round"


@dataclass(frozen=True)
class SimConfig:
    kind: ConsensusKind
    params: NetworkParams
    V: AttackValueModel
    rounds: int
    seed: int = 0
    entry_rule: EntryRule = EntryRule.ONE_PER_ROUND
    attack_timing: AttackTiming = AttackTiming.EQUILIBRIUM

    def __post_init__(self):
        object.__setattr__(self, "kind", ConsensusKind(self.kind))
        object.__setattr__(self, "entry_rule", EntryRule(self.entry_rule))
        object.__setattr__(self, "attack_timing", AttackTiming(self.attack_timing))
        object.__setattr__(self, "V", as_value_model(self.V))
        if self.kind is ConsensusKind.POS and self.params.kind is not ConsensusKind.POS:
            raise DomainError("PoS simulation needs params with S and r")
        if isinstance(self.rounds, bool) or not isinstance(self.rounds, int) or self.rounds < 1:
            raise DomainError(f"rounds must be a positive integer, got {self.rounds!r}")
        if self.params.N != int(self.params.N):
            raise DomainError("initial N must be a whole number of nodes")
        Lcg64(self.seed)


@dataclass(frozen=True)
class TraceRow:
    round: int
    N: int
    node_profit: float
    attack_profit: float
    attacker_active: bool
    attacked: bool


@dataclass(frozen=True)
class AttackLedger:
    """Dollar flows of one simulated takeover window."""

    cost: float
    revenue: float
    value: float

    @property
    def profit(self) -> float:
        return self.value - (self.cost - self.revenue)


@dataclass(frozen=True)
class SimOutcome:
    trace: tuple[TraceRow, ...]
    N_final: int
    converged: bool
    attacked: bool
    # some visited round offered the attacker a profit, acted on or not
    attack_opportunity: bool
    incumbents: tuple[int, ...] = field(repr=False, default=())


def simulate_attack_window(params: NetworkParams, N: int, value: float) -> AttackLedger:
    """Account a t-block takeover of an N-node network, one block at a time.

    The attacker runs A*N nodes' worth of capacity (or stake) every block and,
    since honest builders on the attack chain are out-run (PoW) or slashed
    (PoS), collects every block reward in the window.
    """
    if params.kind is ConsensusKind.POS:
        per_block_cost = params.A * N * params.e * params.S * params.r
    else:
        per_block_cost = params.A * N * params.c
    reward = params.e * params.P
    cost = revenue = 0.0
    for _ in range(params.t):
        cost += per_block_cost
        revenue += reward
    return AttackLedger(cost=cost, revenue=revenue, value=value)


def run_sim(config: SimConfig) -> SimOutcome:
    p = config.params
    reward = p.e * p.P
    node_cost = p.c  # for PoS this is r*e*S
    value = config.V(p.e)
    target = fe_nodes_pow(p.e, p.P, node_cost, NodeMode.INTEGER)
    rng = Lcg64(config.seed)
    proportional = config.entry_rule is EntryRule.PROPORTIONAL
    anytime = config.attack_timing is AttackTiming.ANY_ROUND

    N = int(p.N)
    incumbents = list(range(N))
    next_id = N
    ledger_cache: dict[int, float] = {}
    rows = []
    attacked = opportunity = False

    for rnd in range(1, config.rounds + 1):
        moved = 0
        if reward / (N + 1) - node_cost >= 0:
            step = max(1, math.ceil(abs(target - N) / 4)) if proportional else 1
            incumbents.extend(range(next_id, next_id + step))
            next_id += step
            N += step
            moved = step
        elif reward / N - node_cost < 0 and N > 1:
            step = max(1, math.ceil(abs(N - target) / 4)) if proportional else 1
            step = min(step, N - 1)
            for _ in range(step):
                incumbents.pop(rng.below(len(incumbents)))
            N -= step
            moved = -step

        gain = ledger_cache.get(N)
        if gain is None:
            gain = simulate_attack_window(p, N, value).profit
            ledger_cache[N] = gain
        active = anytime or moved == 0
        strike = active and gain > 0
        opportunity = opportunity or gain > 0
        rows.append(TraceRow(rnd, N, reward / N - node_cost, gain, active, strike))
        if strike:
            attacked = True
            break

    tail = max(1, len(rows) // 10)
    converged = len({r.N for r in rows[-tail:]}) == 1
    return SimOutcome(tuple(rows), N, converged, attacked, opportunity, tuple(incumbents))


def write_trace_csv(outcome: SimOutcome, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for row in outcome.trace:
            w.writerow([row.round, row.N, repr(row.node_profit), repr(row.attack_profit), int(row.attacked)])


def read_trace_csv(path: str | Path) -> list[tuple[int, int, float, float, bool]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {header!r}")
        return [(int(a), int(b), float(c), float(d), e == "1") for a, b, c, d, e in reader]


@dataclass(frozen=True)
class AgreementRow:
    index: int
    N_final: int
    N_closed_form: int
    node_gap: int
    attacked: bool
    closed_form_attack: bool

    @property
    def attack_match(self) -> bool:
        return self.attacked == self.closed_form_attack


@dataclass(frozen=True)
class AgreementReport:
    rows: tuple[AgreementRow, ...]

    @property
    def exact_fraction(self) -> float:
        hits = sum(r.node_gap == 0 and r.attack_match for r in self.rows)
        return hits / len(self.rows)

    @property
    def within_one_fraction(self) -> float:
        return sum(r.node_gap <= 1 for r in self.rows) / len(self.rows)

    @property
    def attack_match_fraction(self) -> float:
        return sum(r.attack_match for r in self.rows) / len(self.rows)


def _agreement_row(item: tuple[int, SimConfig]) -> AgreementRow:
    index, config = item
    p = config.params
    outcome = run_sim(config)
    n_star = fe_nodes_pow(p.e, p.P, p.c, NodeMode.INTEGER)
    at_eq = NetworkParams(**{**p.to_dict(), "N": max(n_star, 1)})
    expected = attack_profit(config.kind, config.V, at_eq) > 0
    return AgreementRow(index, outcome.N_final, n_star, abs(outcome.N_final - n_star), outcome.attacked, expected)


def sweep_sim_vs_closed_form(configs: Sequence[SimConfig], max_workers: int | None = None) -> AgreementReport:
    """Run every config and compare it with the free-entry and attack closed forms.

    Rows keep config order whatever the completion order of parallel workers.
    """
    if not configs:
        raise DomainError("need at least one simulation config")
    items = list(enumerate(configs))
    if max_workers and max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_agreement_row, items))
    else:
        rows = [_agreement_row(item) for item in items]
    return AgreementReport(tuple(rows))
