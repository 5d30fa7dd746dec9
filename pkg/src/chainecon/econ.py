"""Closed-form sustainability conditions for PoW and PoS blockchains.

Symbols follow the usual notation of the majority-attack literature:

* ``c``  dollar cost per block of running one node
* ``P``  block reward in tokens (transaction fees folded in)
* ``e``  exchange rate, dollars per token
* ``N``  number of nodes
* ``S``  stake per node in tokens (PoS)
* ``r``  per-block interest rate (PoS opportunity cost, not annualized)
* ``A``  supermajority factor an attacker must reach (A > 1)
* ``t``  number of blocks the attacker must control

Every function here is pure; the dataclasses are frozen.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Union

from .errors import DomainError, UndefinedElasticityError

REL_TOL = 1e-9
FD_TOL = 1e-6
ABS_TOL = 1e-6


def fd_step(x: float) -> float:
    """Central-difference step used throughout: max(1e-6, 1e-6*|x|)."""
    return max(1e-6, 1e-6 * abs(x))


class ConsensusKind(str, Enum):
    POW = "pow"
    POS = "pos"


class NodeMode(str, Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"


class ValueKind(str, Enum):
    CONSTANT = "constant"
    POWER_LAW = "power_law"
    TABULATED = "tabulated"


def _positive(name: str, value: float) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise DomainError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return float(value)


def _supermajority(A: float) -> float:
    A = _positive("A", A)
    if A <= 1:
        raise DomainError(f"A must exceed 1, got {A!r}")
    return A


@dataclass(frozen=True)
class AttackValueModel:
    """Private benefit V(e) an attacker extracts from controlling the chain.

    Use the ``constant``, ``power_law`` and ``tabulated`` constructors rather
    than building instances directly. Tabulated models interpolate linearly
    between knots and are flat beyond the first and last knot.
    """

    kind: ValueKind
    k: float = 0.0
    eta: float = 0.0
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", ValueKind(self.kind))
        if self.kind is ValueKind.TABULATED:
            if not self.table:
                raise DomainError("tabulated V needs at least one (e, V) knot")
            knots = tuple((float(x), float(v)) for x, v in self.table)
            xs = [x for x, _ in knots]
            vs = [v for _, v in knots]
            if any(not math.isfinite(x) or x <= 0 for x in xs):
                raise DomainError("tabulated V knots must have e > 0")
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise DomainError("tabulated V knots must be strictly increasing in e")
            if any(not math.isfinite(v) or v < 0 for v in vs):
                raise DomainError("tabulated V values must be finite and >= 0")
            if any(b < a for a, b in zip(vs, vs[1:])):
                raise DomainError("tabulated V must be non-decreasing in e")
            object.__setattr__(self, "table", knots)
            return
        if not math.isfinite(self.k) or self.k < 0:
            raise DomainError(f"V scale k must be finite and >= 0, got {self.k!r}")
        if self.kind is ValueKind.POWER_LAW and (not math.isfinite(self.eta) or self.eta < 0):
            raise DomainError(f"power-law eta must be >= 0, got {self.eta!r}")
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "eta", float(self.eta) if self.kind is ValueKind.POWER_LAW else 0.0)

    @classmethod
    def constant(cls, k: float) -> AttackValueModel:
        return cls(ValueKind.CONSTANT, k=k)

    @classmethod
    def power_law(cls, k: float, eta: float) -> AttackValueModel:
        return cls(ValueKind.POWER_LAW, k=k, eta=eta)

    @classmethod
    def tabulated(cls, pairs: Iterable[tuple[float, float]]) -> AttackValueModel:
        return cls(ValueKind.TABULATED, table=tuple(pairs))

    def __call__(self, e: float) -> float:
        e = _positive("e", e)
        if self.kind is ValueKind.CONSTANT:
            return self.k
        if self.kind is ValueKind.POWER_LAW:
            return self.k * e**self.eta
        xs = [x for x, _ in self.table]
        if e <= xs[0]:
            return self.table[0][1]
        if e >= xs[-1]:
            return self.table[-1][1]
        i = bisect.bisect_right(xs, e) - 1
        (x0, v0), (x1, v1) = self.table[i], self.table[i + 1]
        return v0 + (v1 - v0) * (e - x0) / (x1 - x0)

    def with_scale(self, k: float) -> AttackValueModel:
        """Return the model with its scale set to ``k``.

        For tabulated models ``k`` multiplies every tabulated value.
        """
        if self.kind is ValueKind.TABULATED:
            if not math.isfinite(k) or k < 0:
                raise DomainError(f"V scale must be >= 0, got {k!r}")
            return replace(self, table=tuple((x, v * k) for x, v in self.table))
        return replace(self, k=k)

    def to_dict(self) -> dict:
        if self.kind is ValueKind.CONSTANT:
            return {"kind": "constant", "k": self.k}
        if self.kind is ValueKind.POWER_LAW:
            return {"kind": "power_law", "k": self.k, "eta": self.eta}
        return {"kind": "tabulated", "table": [list(p) for p in self.table]}

    @classmethod
    def from_dict(cls, doc: dict) -> AttackValueModel:
        kind = ValueKind(doc["kind"])
        if kind is ValueKind.CONSTANT:
            return cls.constant(doc["k"])
        if kind is ValueKind.POWER_LAW:
            return cls.power_law(doc["k"], doc["eta"])
        return cls.tabulated(tuple(p) for p in doc["table"])


ValueLike = Union[AttackValueModel, float, int]


def as_value_model(v: ValueLike) -> AttackValueModel:
    """Accept a bare number as shorthand for a constant attack value."""
    if isinstance(v, AttackValueModel):
        return v
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return AttackValueModel.constant(float(v))
    raise DomainError(f"cannot interpret {v!r} as an attack value model")


@dataclass(frozen=True)
class NetworkParams:
    """Full parameter set of one network.

    PoS networks are recognised by ``S`` and ``r`` being set; their per-node
    dollar cost ``c`` is then ``r*e*S``. Passing ``c`` as well is allowed if it
    agrees with ``r*e*S`` to REL_TOL, in which case the given ``c`` is kept.
    """

    e: float
    P: float
    A: float
    t: int
    N: float = 1.0
    c: float | None = None
    S: float | None = None
    r: float | None = None

    def __post_init__(self):
        _positive("e", self.e)
        _positive("P", self.P)
        _supermajority(self.A)
        if isinstance(self.t, bool) or not isinstance(self.t, (int, float)) or self.t < 1 or int(self.t) != self.t:
            raise DomainError(f"t must be a positive integer number of blocks, got {self.t!r}")
        object.__setattr__(self, "t", int(self.t))
        if not isinstance(self.N, (int, float)) or not math.isfinite(self.N) or self.N < 1:
            raise DomainError(f"N must be >= 1, got {self.N!r}")
        if (self.S is None) != (self.r is None):
            raise DomainError("PoS parameters need both S and r")
        if self.S is not None:
            if not math.isfinite(self.S) or self.S < 0:
                raise DomainError(f"S must be >= 0, got {self.S!r}")
            _positive("r", self.r)
            implied = self.r * self.e * self.S
            if self.c is None:
                object.__setattr__(self, "c", implied)
            elif not math.isclose(self.c, implied, rel_tol=REL_TOL):
                raise DomainError(f"c={self.c!r} disagrees with r*e*S={implied!r}")
        if self.c is None:
            raise DomainError("PoW parameters need a per-node cost c")
        _positive("c", self.c)

    @property
    def kind(self) -> ConsensusKind:
        return ConsensusKind.POS if self.S is not None else ConsensusKind.POW

    @classmethod
    def pos(cls, e: float, P: float, A: float, t: int, N: float, S: float, r: float) -> NetworkParams:
        return cls(e=e, P=P, A=A, t=t, N=N, S=S, r=r)

    def matched_pos(self, r: float) -> NetworkParams:
        """PoS twin of this network: same dollar cost per node, S = c/(r*e)."""
        _positive("r", r)
        return replace(self, S=self.c / (r * self.e), r=r)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("e", "P", "A", "t", "N", "c", "S", "r")}


@dataclass(frozen=True)
class SustainabilityVerdict:
    margin: float
    sustainable: bool
    boundary: bool
    kind: ConsensusKind = field(default=ConsensusKind.POW, compare=False)

    @property
    def label(self) -> str:
        if self.boundary:
            return "boundary"
        return "sustainable" if self.sustainable else "unsustainable"


# -- free entry ---------------------------------------------------------------


def fe_nodes_pow(e: float, P: float, c: float, mode: NodeMode | str = NodeMode.CONTINUOUS) -> float:
    """Free-entry node count for PoW.

    Continuous mode returns eP/c. Integer mode returns the largest N with
    eP/N >= c (never below 0).
    """
    e, P, c = _positive("e", e), _positive("P", P), _positive("c", c)
    reward = e * P
    if NodeMode(mode) is NodeMode.CONTINUOUS:
        return reward / c
    n = max(0, math.floor(reward / c))
    # division rounding can put floor() one off the defining inequality
    while n > 0 and reward / n < c:
        n -= 1
    while reward / (n + 1) >= c:
        n += 1
    return n


def fe_stake_pos(P: float, r: float, N: float) -> float:
    """Free-entry stake per node for PoS, S = P/(rN); e does not enter."""
    P, r, N = _positive("P", P), _positive("r", r), _positive("N", N)
    return P / (r * N)


# -- incentive compatibility ----------------------------------------------------


def ic_min_cost_pow(V: ValueLike, e: float, P: float, A: float, t: float, N: float) -> float:
    """Smallest per-node cost c with A*t*N*c - t*e*P >= V(e)."""
    V = as_value_model(V)
    e, P, t, N = _positive("e", e), _positive("P", P), _positive("t", t), _positive("N", N)
    A = _supermajority(A)
    return (V(e) + t * e * P) / (A * t * N)


def ic_nodes_pow(V: ValueLike, e: float, P: float, A: float, t: float, c: float) -> float:
    """Node count at which the IC constraint binds for a given per-node cost."""
    V = as_value_model(V)
    e, P, t, c = _positive("e", e), _positive("P", P), _positive("t", t), _positive("c", c)
    A = _supermajority(A)
    return (V(e) + t * e * P) / (A * t * c)


def ic_min_stake_pos(V: ValueLike, e: float, P: float, A: float, t: float, N: float, r: float) -> float:
    """Smallest stake S with A*N*t*e*S*r - t*e*P >= V(e)."""
    V = as_value_model(V)
    e, P, t, N, r = (_positive(n, x) for n, x in (("e", e), ("P", P), ("t", t), ("N", N), ("r", r)))
    A = _supermajority(A)
    return (V(e) + t * e * P) / (e * A * N * t * r)


# -- stability ------------------------------------------------------------------


def attack_value_threshold(e: float, P: float, A: float, t: float) -> float:
    """Largest attack value a network on its free-entry curve deters: (A-1)ePt."""
    e, P, t = _positive("e", e), _positive("P", P), _positive("t", t)
    A = _supermajority(A)
    return (A - 1) * e * P * t


def budish_condition(
    V: ValueLike,
    e: float,
    P: float,
    A: float,
    t: float,
    kind: ConsensusKind | str = ConsensusKind.POW,
    abs_tol: float = ABS_TOL,
) -> SustainabilityVerdict:
    """Evaluate (A-1)ePt >= V(e).

    The condition does not depend on the consensus kind; ``kind`` is only
    recorded on the verdict.
    """
    kind = ConsensusKind(kind)
    V = as_value_model(V)
    margin = attack_value_threshold(e, P, A, t) - V(e)
    return SustainabilityVerdict(
        margin=margin,
        sustainable=margin >= 0,
        boundary=abs(margin) <= abs_tol,
        kind=kind,
    )


def min_block_reward(V: ValueLike, e: float, A: float, t: float) -> float:
    """Smallest block reward (tokens) satisfying the stability condition."""
    V = as_value_model(V)
    e, t = _positive("e", e), _positive("t", t)
    A = _supermajority(A)
    return V(e) / (e * (A - 1) * t)


def attack_profit(kind: ConsensusKind | str, V: ValueLike, params: NetworkParams) -> float:
    """Attacker's net dollar gain; an attack is rational iff this is > 0.

    PoW: V(e) - (A*N*c - e*P)*t.  PoS: V(e) - (A*N*t*e*S*r - t*e*P).
    """
    kind = ConsensusKind(kind)
    V = as_value_model(V)
    p = params
    if kind is ConsensusKind.POW:
        return V(p.e) - (p.A * p.N * p.c - p.e * p.P) * p.t
    if p.S is None or p.r is None:
        raise DomainError("PoS attack profit needs S and r")
    return V(p.e) - (p.A * p.N * p.t * p.e * p.S * p.r - p.t * p.e * p.P)


def total_network_cost(kind: ConsensusKind | str, params: NetworkParams) -> float:
    """Dollar cost per block of the whole network.

    For PoS this is e*S*N*r, evaluated through the per-node cost c = r*e*S
    fixed when the parameters were built, so a PoS network matched to a PoW
    one reports the identical figure.
    """
    kind = ConsensusKind(kind)
    if kind is ConsensusKind.POS and params.S is None:
        raise DomainError("PoS network cost needs S and r")
    return params.N * params.c


# -- elasticity and comparative statics ----------------------------------------


def elasticity_of_attack_value(V: ValueLike, e: float) -> float:
    """(e/V) dV/de at ``e``.

    Power laws return eta exactly. Tabulated models use a central difference
    in log-log space across the knots surrounding ``e``.
    """
    V = as_value_model(V)
    e = _positive("e", e)
    value = V(e)
    if value == 0:
        raise UndefinedElasticityError(f"V({e!r}) is zero; elasticity undefined")
    if V.kind is ValueKind.CONSTANT:
        return 0.0
    if V.kind is ValueKind.POWER_LAW:
        return V.eta
    return _tabulated_elasticity(V, e, value)


def _tabulated_elasticity(V: AttackValueModel, e: float, value: float) -> float:
    xs = [x for x, _ in V.table]
    if len(xs) < 2 or e < xs[0] or e > xs[-1]:
        return 0.0
    hi = bisect.bisect_left(xs, e)
    if xs[hi] == e:
        lo, hi = max(hi - 1, 0), min(hi + 1, len(xs) - 1)
    else:
        lo = hi - 1
    (x0, v0), (x1, v1) = V.table[lo], V.table[hi]
    if v0 > 0 and v1 > 0:
        return (math.log(v1) - math.log(v0)) / (math.log(x1) - math.log(x0))
    # a zero knot has no logarithm; use the slope of the interpolant instead
    return e * (v1 - v0) / (x1 - x0) / value


def classify_elasticity(elasticity: float, tol: float = FD_TOL) -> str:
    """How a rising exchange rate moves sustainability at a fixed reward."""
    if abs(elasticity - 1) <= tol:
        return "neutral"
    return "tightens" if elasticity > 1 else "relaxes"


def margin_slope_in_e(V: ValueLike, e: float, P: float, A: float, t: float) -> float:
    """Central-difference d(margin)/de at fixed P."""
    V = as_value_model(V)
    h = fd_step(e)
    if e - h <= 0:
        raise DomainError("e too small for a central difference")
    up = budish_condition(V, e + h, P, A, t).margin
    down = budish_condition(V, e - h, P, A, t).margin
    return (up - down) / (2 * h)


def fe_comparative_static(branch: str, e: float, c: float, A: float | None = None) -> float:
    """dN/dP along the free-entry curve (e/c) or the binding IC curve (e/(Ac))."""
    e, c = _positive("e", e), _positive("c", c)
    if branch == "fe":
        return e / c
    if branch == "ic":
        if A is None:
            raise DomainError("the ic branch needs A")
        return e / (_supermajority(A) * c)
    raise DomainError(f"branch must be 'fe' or 'ic', got {branch!r}")
