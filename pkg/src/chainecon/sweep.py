"""Parameter sweeps, FE/IC frontier curves and plot-data emission."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .econ import (
    AttackValueModel,
    ValueLike,
    as_value_model,
    budish_condition,
    elasticity_of_attack_value,
    min_block_reward,
    _positive,
    _supermajority,
)
from .errors import ChainEconError, SpecError
from .permissioned import DesignerProblem, solve_designer

AXIS_NAMES = ("c", "P", "e", "A", "t", "r", "S", "N", "V_scale")
OUTPUTS = ("verdict", "margin", "min_reward", "fe_curve", "ic_curve", "designer_cost", "elasticity")


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise SpecError(f"unknown axis {self.name!r}; expected one of {AXIS_NAMES}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or self.lo <= 0 or self.hi <= self.lo:
            raise SpecError(f"axis {self.name}: bounds must satisfy 0 < lo < hi, got {(self.lo, self.hi)}")
        if isinstance(self.points, bool) or not isinstance(self.points, int) or self.points < 2:
            raise SpecError(f"axis {self.name}: need at least 2 points, got {self.points!r}")
        if self.spacing not in ("linear", "log"):
            raise SpecError(f"axis {self.name}: spacing must be 'linear' or 'log'")

    def values(self) -> list[float]:
        space = np.geomspace if self.spacing == "log" else np.linspace
        vals = [float(v) for v in space(self.lo, self.hi, self.points)]
        # pin the end points exactly; geomspace can drift in the last ulp
        vals[0], vals[-1] = float(self.lo), float(self.hi)
        return vals


@dataclass(frozen=True)
class SweepSpec:
    axes: tuple[Axis, ...]
    fixed: dict[str, float]
    V: AttackValueModel
    outputs: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "V", as_value_model(self.V))
        if not 1 <= len(self.axes) <= 3:
            raise SpecError(f"a sweep takes 1 to 3 axes, got {len(self.axes)}")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise SpecError(f"duplicate axis names in {names}")
        if not self.outputs:
            raise SpecError("no outputs requested")
        bad = [o for o in self.outputs if o not in OUTPUTS]
        if bad:
            raise SpecError(f"unknown outputs {bad}; expected a subset of {OUTPUTS}")
        unknown = [k for k in self.fixed if k not in AXIS_NAMES]
        if unknown:
            raise SpecError(f"unknown fixed parameters {unknown}")
        clash = set(names) & set(self.fixed)
        if clash:
            raise SpecError(f"parameters both swept and fixed: {sorted(clash)}")

    @classmethod
    def from_dict(cls, doc: dict) -> SweepSpec:
        try:
            axes = tuple(
                Axis(a["name"], float(a["min"]), float(a["max"]), a["points"], a.get("spacing", "linear"))
                for a in doc["axes"]
            )
            V = AttackValueModel.from_dict(doc["attack_value"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, SpecError):
                raise
            raise SpecError(f"malformed sweep spec: {exc}") from exc
        return cls(axes, dict(doc.get("fixed", {})), V, tuple(doc.get("outputs", ())))

    def to_dict(self) -> dict:
        return {
            "axes": [
                {"name": a.name, "min": a.lo, "max": a.hi, "points": a.points, "spacing": a.spacing}
                for a in self.axes
            ],
            "fixed": dict(self.fixed),
            "attack_value": self.V.to_dict(),
            "outputs": list(self.outputs),
        }


@dataclass
class SweepResult:
    columns: tuple[str, ...]
    rows: list[tuple[Any, ...]] = field(default_factory=list)

    def column(self, name: str) -> list[Any]:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]


def _need(point: dict, *names: str) -> list[float]:
    missing = [n for n in names if n not in point]
    if missing:
        raise SpecError(f"output needs parameters {missing} (sweep them or fix them)")
    return [point[n] for n in names]


def _evaluate(output: str, point: dict, V: AttackValueModel) -> Any:
    if output == "verdict":
        e, P, A, t = _need(point, "e", "P", "A", "t")
        return budish_condition(V, e, P, A, t).sustainable
    if output == "margin":
        e, P, A, t = _need(point, "e", "P", "A", "t")
        return budish_condition(V, e, P, A, t).margin
    if output == "min_reward":
        e, A, t = _need(point, "e", "A", "t")
        return min_block_reward(V, e, A, t)
    if output == "fe_curve":
        e, P, N = _need(point, "e", "P", "N")
        return e * P / N
    if output == "ic_curve":
        e, P, A, t, N = _need(point, "e", "P", "A", "t", "N")
        return _ic_height(V(e), e, P, A, t, N)
    if output == "designer_cost":
        e, P, A, t = _need(point, "e", "P", "A", "t")
        sol = solve_designer(DesignerProblem.fixed("pow", V, e, A, t, P))
        return sol.total_cost if sol.feasible else None
    if output == "elasticity":
        (e,) = _need(point, "e")
        return elasticity_of_attack_value(V, e) if V(e) > 0 else None
    raise SpecError(f"unknown output {output!r}")


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate every requested output on the Cartesian grid of the axes.

    Rows are ordered outer-to-inner axis, each ascending; one row per grid point.
    """
    columns = tuple(f"param_{a.name}" for a in spec.axes) + tuple(f"output_{o}" for o in spec.outputs)
    result = SweepResult(columns)
    grids = [a.values() for a in spec.axes]
    names = [a.name for a in spec.axes]
    for combo in itertools.product(*grids):
        point = {**spec.fixed, **dict(zip(names, combo))}
        V = spec.V.with_scale(point["V_scale"]) if "V_scale" in point else spec.V
        try:
            values = tuple(_evaluate(o, point, V) for o in spec.outputs)
        except SpecError:
            raise
        except ChainEconError as exc:
            raise SpecError(f"grid point {dict(zip(names, combo))}: {exc}") from exc
        result.rows.append(tuple(combo) + values)
    return result


@dataclass(frozen=True)
class FrontierPoint:
    N: float
    c_fe: float
    c_ic: float


def _ic_height(value: float, e: float, P: float, A: float, t: float, N: float) -> float:
    return (value + t * e * P) / (A * t * N)


def fe_ic_frontier(V: ValueLike, e: float, P: float, A: float, t: float, N_values: Iterable[float]) -> list[FrontierPoint]:
    """Heights of the free-entry curve eP/N and the IC curve (V+teP)/(AtN).

    Both scale as 1/N, so which one lies on top is the same at every N and is
    decided by the stability condition alone.
    """
    V = as_value_model(V)
    e, P, t = _positive("e", e), _positive("P", P), _positive("t", t)
    A = _supermajority(A)
    value = V(e)
    out = []
    for N in N_values:
        N = _positive("N", N)
        out.append(FrontierPoint(N, e * P / N, _ic_height(value, e, P, A, t, N)))
    return out


def frontier_table(points: Sequence[FrontierPoint]) -> SweepResult:
    return SweepResult(("param_N", "output_c_fe", "output_c_ic"), [(p.N, p.c_fe, p.c_ic) for p in points])


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_plot_data(result: SweepResult, path: str | Path, fmt: str = "csv") -> Path:
    """Write ``result`` as CSV or JSON lines.

    Floats use Python's shortest round-trip repr, so re-reading reproduces
    every value bit for bit. Line endings are always LF.
    """
    if not result.rows:
        raise SpecError("nothing to emit: empty result set")
    path = Path(path)
    if fmt == "csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(result.columns)
            for row in result.rows:
                w.writerow([_csv_cell(v) for v in row])
    elif fmt == "jsonl":
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(json.dumps({"columns": list(result.columns)}) + "\n")
            for row in result.rows:
                fh.write(json.dumps(dict(zip(result.columns, row)), allow_nan=False) + "\n")
    else:
        raise SpecError(f"unknown output format {fmt!r}; use 'csv' or 'jsonl'")
    return path


def read_plot_data(path: str | Path) -> SweepResult:
    """Parse a CSV written by :func:`emit_plot_data` back into typed values."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        columns = tuple(next(reader))
        result = SweepResult(columns)
        for raw in reader:
            result.rows.append(tuple(_parse_cell(v) for v in raw))
    return result


def _parse_cell(v: str) -> Any:
    if v == "":
        return None
    if v in ("true", "false"):
        return v == "true"
    return float(v)
