"""Cost-minimizing design of a permissioned network.

The designer picks the per-node cost (or stake), the node count and, when the
reward is endogenous, the block reward, to minimize total cost per block
subject to attack deterrence (IC) and non-negative node payoffs (N*c <= e*P).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .econ import (
    ABS_TOL,
    AttackValueModel,
    ConsensusKind,
    ValueLike,
    _positive,
    _supermajority,
    as_value_model,
    budish_condition,
    min_block_reward,
)
from .errors import DomainError, InfeasibleError, InvalidRegimeError

SPLIT_NOTE = (
    "only the total cost is pinned down at the optimum; the per-node cost/N "
    "split shown uses the caller's pinned N, or the midpoint of the N bounds"
)


class RewardRegime(str, Enum):
    FIXED = "fixed"
    ENDOGENOUS = "endogenous"


@dataclass(frozen=True)
class Bounds:
    """Search box. ``cost`` is dollars per node (PoW) or stake tokens (PoS)."""

    cost: tuple[float, float] = (1e-6, 1e9)
    N: tuple[float, float] = (1.0, 1e6)
    P: tuple[float, float] = (1e-6, 1e6)

    def __post_init__(self):
        for name in ("cost", "N", "P"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo <= 0 or hi <= 0:
                raise DomainError(f"bounds.{name} must be strictly positive, got {(lo, hi)!r}")
            if lo > hi:
                raise DomainError(f"bounds.{name} is empty: {lo!r} > {hi!r}")
            object.__setattr__(self, name, (float(lo), float(hi)))


@dataclass(frozen=True)
class DesignerProblem:
    kind: ConsensusKind
    V: AttackValueModel
    e: float
    A: float
    t: float
    regime: RewardRegime = RewardRegime.ENDOGENOUS
    P: float | None = None
    bounds: Bounds = field(default_factory=Bounds)
    r: float | None = None
    N_pin: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ConsensusKind(self.kind))
        object.__setattr__(self, "regime", RewardRegime(self.regime))
        object.__setattr__(self, "V", as_value_model(self.V))
        _positive("e", self.e)
        _positive("t", self.t)
        _supermajority(self.A)
        if not isinstance(self.bounds, Bounds):
            raise DomainError("bounds must be a Bounds instance")
        if self.regime is RewardRegime.FIXED:
            if self.P is None:
                raise DomainError("fixed reward regime needs a block reward P")
            _positive("P", self.P)
        elif self.P is not None:
            raise DomainError("endogenous reward regime must not carry P")
        if self.kind is ConsensusKind.POS:
            if self.r is None:
                raise DomainError("PoS designer problem needs an interest rate r")
            _positive("r", self.r)
        if self.N_pin is not None:
            lo, hi = self.bounds.N
            if not lo <= self.N_pin <= hi:
                raise DomainError(f"pinned N={self.N_pin!r} lies outside bounds {self.bounds.N!r}")

    @classmethod
    def fixed(cls, kind, V: ValueLike, e, A, t, P, **kw) -> DesignerProblem:
        return cls(kind, as_value_model(V), e, A, t, RewardRegime.FIXED, P, **kw)

    @classmethod
    def endogenous(cls, kind, V: ValueLike, e, A, t, **kw) -> DesignerProblem:
        return cls(kind, as_value_model(V), e, A, t, RewardRegime.ENDOGENOUS, None, **kw)

    def _dollars_per_node(self, cost_or_stake):
        if self.kind is ConsensusKind.POS:
            return self.r * self.e * cost_or_stake
        return cost_or_stake

    def _cost_or_stake(self, dollars_per_node: float) -> float:
        if self.kind is ConsensusKind.POS:
            return dollars_per_node / (self.e * self.r)
        return dollars_per_node


@dataclass(frozen=True)
class DesignerSolution:
    c_or_S: float | None
    N: float | None
    P: float
    total_cost: float
    binding: frozenset[str]
    feasible: bool
    note: str = SPLIT_NOTE


def _ic_total_cost(problem: DesignerProblem, P: float) -> float:
    # aggregate cost at which IC binds: (V + t e P) / (A t)
    e, A, t = problem.e, problem.A, problem.t
    return (problem.V(e) + t * e * P) / (A * t)


def _split(problem: DesignerProblem, total: float) -> tuple[float, float]:
    if problem.N_pin is not None:
        N = float(problem.N_pin)
    else:
        lo, hi = problem.bounds.N
        N = (lo + hi) / 2
    return problem._cost_or_stake(total / N), N


def solve_designer(problem: DesignerProblem) -> DesignerSolution:
    """Analytic optimum of the designer's problem.

    With an endogenous reward the designer lowers P until participation binds,
    landing on the minimum sustainable reward and the permissionless cost e*P.
    With a fixed reward the network can sit on the IC curve instead, which is
    cheaper whenever the stability condition holds strictly.
    """
    if problem.regime is RewardRegime.ENDOGENOUS:
        P = min_block_reward(problem.V, problem.e, problem.A, problem.t)
        total = problem.e * P
        c_or_S, N = _split(problem, total)
        return DesignerSolution(c_or_S, N, P, total, frozenset({"IC", "FE"}), True)

    P = problem.P
    verdict = budish_condition(problem.V, problem.e, P, problem.A, problem.t, problem.kind)
    if not verdict.sustainable:
        return DesignerSolution(None, None, P, math.inf, frozenset(), False,
                                "stability condition fails: no (cost, N) meets IC and FE")
    total = _ic_total_cost(problem, P)
    binding = frozenset({"IC", "FE"}) if verdict.boundary else frozenset({"IC"})
    c_or_S, N = _split(problem, total)
    return DesignerSolution(c_or_S, N, P, total, binding, True)


def cost_savings(problem: DesignerProblem) -> float:
    """Dollar saving per block of a permissioned network over free entry.

    Only defined for a fixed reward; equals the stability margin / (A*t).
    """
    if problem.regime is not RewardRegime.FIXED:
        raise InvalidRegimeError("cost savings exist only with a fixed block reward")
    verdict = budish_condition(problem.V, problem.e, problem.P, problem.A, problem.t, problem.kind)
    if not verdict.sustainable:
        raise InfeasibleError(f"stability margin {verdict.margin!r} < 0: no feasible design")
    return verdict.margin / (problem.A * problem.t)


def grid_search_oracle(problem: DesignerProblem, resolution: int = 200) -> DesignerSolution:
    """Brute-force the designer problem on a log-spaced grid over the bounds box.

    Returns the cheapest grid point satisfying both constraints, ties broken by
    the lexicographically smallest (cost, N, P) grid index. When no grid point
    is feasible the solution comes back with ``feasible=False``.

    Accuracy hinges on the N*c products being dense near the optimum. Cost and
    N axes with equal (or simply related) log-spans put those products on a
    coarse lattice, and the feasible wedge narrows as A approaches 1, so keep
    the box reasonably tight around the region of interest.
    """
    if resolution < 16:
        raise DomainError(f"resolution must be >= 16 points per axis, got {resolution!r}")
    b = problem.bounds
    cost_axis = np.geomspace(*b.cost, resolution)
    n_axis = np.geomspace(*b.N, resolution)
    if problem.regime is RewardRegime.FIXED:
        p_axis = np.array([float(problem.P)])
    else:
        p_axis = np.geomspace(*b.P, resolution)

    e, A, t = problem.e, problem.A, problem.t
    value = problem.V(e)
    per_node = problem._dollars_per_node(cost_axis)
    total = np.multiply.outer(per_node, n_axis)  # [i_cost, i_N] -> N * c
    deterrence = A * t * total

    best = math.inf
    best_idx = None
    for k, P in enumerate(p_axis):
        reward = e * P
        ok = (deterrence - t * reward >= value) & (total <= reward)
        if not ok.any():
            continue
        masked = np.where(ok, total, np.inf)
        m = masked.min()
        i, j = np.argwhere(masked == m)[0]
        cand = (int(i), int(j), k)
        if m < best or (m == best and cand < best_idx):
            best, best_idx = float(m), cand

    if best_idx is None:
        return DesignerSolution(None, None, float(p_axis[0]), math.inf, frozenset(), False,
                                "no feasible grid point in the bounds box")
    i, j, k = best_idx
    P = float(p_axis[k])
    binding = set()
    if abs(A * t * best - t * e * P - value) <= ABS_TOL * max(1.0, value):
        binding.add("IC")
    if abs(best - e * P) <= ABS_TOL * max(1.0, e * P):
        binding.add("FE")
    return DesignerSolution(float(cost_axis[i]), float(n_axis[j]), P, best, frozenset(binding), True,
                            f"grid optimum at index {best_idx}, resolution {resolution}")
