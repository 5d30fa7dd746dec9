"""Command-line front end.

Exit codes: 0 success (analyze: sustainable), 1 invalid input,
2 unsustainable / infeasible, 3 boundary case (analyze only).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import econ
from .abm import SimConfig, run_sim, write_trace_csv
from .config import RunConfig, load_config, with_seed
from .econ import ConsensusKind, NodeMode
from .errors import ChainEconError, ConfigError
from .market_feed import FeedConfig, FeedError, fetch_rate, source_from_string
from .permissioned import Bounds, DesignerProblem, cost_savings, grid_search_oracle, solve_designer
from .sweep import SweepSpec, emit_plot_data, fe_ic_frontier, frontier_table, run_sweep

log = logging.getLogger("chainecon")

EXIT_OK, EXIT_INVALID, EXIT_UNSUSTAINABLE, EXIT_BOUNDARY = 0, 1, 2, 3


def _emit(report: dict, as_json: bool, out=None) -> None:
    out = out or sys.stdout
    if as_json:
        out.write(json.dumps(report, allow_nan=False) + "\n")
        return
    for key, value in report.items():
        if isinstance(value, float):
            value = f"{value:.10g}"
        out.write(f"{key}: {value}\n")


def _resolve_rate(cfg: RunConfig, args) -> float | None:
    literal = cfg.params.get("e")
    if not args.rate_source:
        return literal
    if literal is not None:
        log.warning("params.e=%r given literally; ignoring --rate-source %s", literal, args.rate_source)
        return literal
    sample = fetch_rate(FeedConfig(source_from_string(args.rate_source, args.rate_pointer)))
    return sample.e


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("--config", "a config file is required for this command")
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = with_seed(cfg, args.seed)
    return cfg


def _network(cfg: RunConfig, args) -> econ.NetworkParams:
    e = _resolve_rate(cfg, args)
    if cfg.kind is ConsensusKind.POS and cfg.params.get("S") is None:
        # default the stake to its free-entry level
        N = cfg.params.get("N") or 1.0
        S = econ.fe_stake_pos(cfg.params["P"], cfg.params["r"], N)
        cfg = replace(cfg, params={**cfg.params, "S": S, "N": N})
    return cfg.network(e)


def cmd_analyze(cfg: RunConfig, args) -> int:
    p = _network(cfg, args)
    V = cfg.V
    verdict = econ.budish_condition(V, p.e, p.P, p.A, p.t, cfg.kind)
    report = {
        "kind": cfg.kind.value,
        "verdict": verdict.label,
        "sustainable": verdict.sustainable,
        "boundary": verdict.boundary,
        "margin": verdict.margin,
        "attack_value": V(p.e),
        "attack_value_threshold": econ.attack_value_threshold(p.e, p.P, p.A, p.t),
    }
    if cfg.kind is ConsensusKind.POW:
        n_fe = econ.fe_nodes_pow(p.e, p.P, p.c, cfg.mode)
        report["fe_nodes"] = n_fe
        report["total_network_cost"] = (
            econ.total_network_cost(cfg.kind, replace(p, N=n_fe)) if n_fe >= 1 else n_fe * p.c
        )
    else:
        s_fe = econ.fe_stake_pos(p.P, p.r, p.N)
        report["fe_stake"] = s_fe
        report["total_network_cost"] = econ.total_network_cost(cfg.kind, replace(p, S=s_fe, c=None))
    report["min_block_reward"] = econ.min_block_reward(V, p.e, p.A, p.t)
    if V(p.e) > 0:
        el = econ.elasticity_of_attack_value(V, p.e)
        report["elasticity"] = el
        report["elasticity_class"] = econ.classify_elasticity(el)
    else:
        report["elasticity"] = None
        report["elasticity_class"] = "undefined"
    _emit(report, args.json)
    if verdict.boundary:
        return EXIT_BOUNDARY
    return EXIT_OK if verdict.sustainable else EXIT_UNSUSTAINABLE


def cmd_min_reward(cfg: RunConfig, args) -> int:
    e = _resolve_rate(cfg, args)
    if e is None:
        raise ConfigError("params.e", "missing; give it literally or via --rate-source")
    A, t = cfg.params["A"], cfg.params["t"]
    P_star = econ.min_block_reward(cfg.V, e, A, t)
    _emit({"min_block_reward": P_star, "min_block_reward_dollars": e * P_star}, args.json)
    return EXIT_OK


def _designer_problem(cfg: RunConfig, e: float) -> DesignerProblem:
    p = cfg.params
    kw = {"bounds": cfg.bounds or Bounds(), "N_pin": cfg.N_pin}
    if cfg.kind is ConsensusKind.POS:
        kw["r"] = p["r"]
    try:
        return DesignerProblem(cfg.kind, cfg.V, e, p["A"], p["t"], cfg.reward_regime,
                               p["P"] if cfg.reward_regime.value == "fixed" else None, **kw)
    except ChainEconError as exc:
        raise ConfigError("bounds" if "bound" in str(exc) else "params", str(exc)) from exc


def cmd_permissioned(cfg: RunConfig, args) -> int:
    e = _resolve_rate(cfg, args)
    if e is None:
        raise ConfigError("params.e", "missing; give it literally or via --rate-source")
    problem = _designer_problem(cfg, e)
    sol = solve_designer(problem)
    report = {
        "kind": cfg.kind.value,
        "reward_regime": problem.regime.value,
        "feasible": sol.feasible,
        "P": sol.P,
        "total_cost": sol.total_cost if sol.feasible else None,
        "c_or_S": sol.c_or_S,
        "N": sol.N,
        "binding": sorted(sol.binding),
        "note": sol.note,
    }
    if problem.regime.value == "fixed" and sol.feasible:
        report["cost_savings"] = cost_savings(problem)
        report["permissionless_cost"] = e * problem.P
    if args.oracle:
        grid = grid_search_oracle(problem, args.resolution)
        report["oracle_feasible"] = grid.feasible
        report["oracle_total_cost"] = grid.total_cost if grid.feasible else None
        if grid.feasible and sol.feasible and sol.total_cost > 0:
            report["oracle_gap"] = grid.total_cost / sol.total_cost - 1
    _emit(report, args.json)
    return EXIT_OK if sol.feasible else EXIT_UNSUSTAINABLE


def cmd_simulate(cfg: RunConfig, args) -> int:
    if cfg.params.get("N") is None:
        cfg = replace(cfg, params={**cfg.params, "N": 1})
    p = _network(cfg, args)
    n_star = econ.fe_nodes_pow(p.e, p.P, p.c, NodeMode.INTEGER)
    rounds = cfg.simulation.rounds or max(100, 10 * (n_star + int(p.N)))
    sim = SimConfig(cfg.kind, p, cfg.V, rounds, cfg.simulation.seed,
                    cfg.simulation.entry_rule, cfg.simulation.attack_timing)
    outcome = run_sim(sim)
    out_path = args.output or cfg.output.path
    if out_path:
        write_trace_csv(outcome, out_path)
    at_eq = replace(p, N=max(n_star, 1))
    closed_attack = econ.attack_profit(cfg.kind, cfg.V, at_eq) > 0
    report = {
        "kind": cfg.kind.value,
        "rounds_run": len(outcome.trace),
        "N_final": outcome.N_final,
        "N_closed_form": n_star,
        "node_gap": abs(outcome.N_final - n_star),
        "converged": outcome.converged,
        "attacked": outcome.attacked,
        "attack_opportunity": outcome.attack_opportunity,
        "closed_form_attack": closed_attack,
        "nodes_agree": abs(outcome.N_final - n_star) <= 1,
        "attack_agrees": outcome.attacked == closed_attack,
        "trace": out_path,
    }
    _emit(report, args.json)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec_path = args.spec or args.config
    if not spec_path:
        raise ConfigError("--config", "a sweep spec file is required")
    try:
        doc = json.loads(Path(spec_path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{spec_path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    except OSError as exc:
        raise ConfigError(str(spec_path), f"cannot read: {exc.strerror}") from None
    out = args.output or doc.get("output")
    if not out:
        raise ConfigError("output", "give --output or an 'output' entry in the spec")
    fmt = args.format or ("jsonl" if str(out).endswith(".jsonl") else "csv")

    if args.frontier:
        fr = doc.get("frontier")
        if not isinstance(fr, dict) or not {"N_min", "N_max", "points"} <= set(fr):
            raise ConfigError("frontier", "expected {N_min, N_max, points[, spacing]}")
        fixed = doc.get("fixed", {})
        missing = [k for k in ("e", "P", "A", "t") if k not in fixed]
        if missing:
            raise ConfigError(f"fixed.{missing[0]}", "the frontier needs e, P, A and t fixed")
        spec = SweepSpec.from_dict({**doc, "axes": [
            {"name": "N", "min": fr["N_min"], "max": fr["N_max"], "points": fr["points"],
             "spacing": fr.get("spacing", "log")}], "fixed": {k: v for k, v in fixed.items() if k != "N"},
            "outputs": doc.get("outputs") or ["fe_curve"]})
        points = fe_ic_frontier(spec.V, fixed["e"], fixed["P"], fixed["A"], fixed["t"], spec.axes[0].values())
        result = frontier_table(points)
    else:
        spec = SweepSpec.from_dict({k: v for k, v in doc.items() if k not in ("output", "frontier")})
        result = run_sweep(spec)
    emit_plot_data(result, out, fmt)
    _emit({"rows": len(result.rows), "columns": list(result.columns), "output": str(out)}, args.json)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (sweep: sweep spec)")
    common.add_argument("--json", action="store_true", help="emit one machine-readable JSON document")
    common.add_argument("--rate-source", help="fixture path or http(s) URL for the exchange rate e")
    common.add_argument("--rate-pointer", help="JSON pointer to the rate (default /rate for URLs)")
    common.add_argument("--seed", type=int, help="unsigned 64-bit seed for the simulator")
    common.add_argument("--output", help="output file (trace CSV or sweep data)")
    common.add_argument("--dump-config", action="store_true", help="print the normalized config and exit")

    parser = argparse.ArgumentParser(
        prog="chainecon",
        description="Sustainability economics of PoW/PoS, permissionless/permissioned blockchains. "
        "Interest rates r are per block: convert annual rates before use.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common], help="stability verdict and equilibrium figures")
    sub.add_parser("min-reward", parents=[common], help="minimum sustainable block reward")
    perm = sub.add_parser("permissioned", parents=[common], help="permissioned designer optimum")
    perm.add_argument("--oracle", action="store_true", help="cross-check with the grid-search oracle")
    perm.add_argument("--resolution", type=int, default=200, help="oracle points per axis")
    sub.add_parser("simulate", parents=[common], help="agent-based entry/attack simulation")
    sw = sub.add_parser("sweep", parents=[common], help="parameter sweep to CSV/JSONL")
    sw.add_argument("spec", nargs="?", help="sweep spec JSON (alternative to --config)")
    sw.add_argument("--frontier", action="store_true", help="emit FE and IC curve heights over N")
    sw.add_argument("--format", choices=("csv", "jsonl"))
    return parser


COMMANDS = {
    "analyze": cmd_analyze,
    "min-reward": cmd_min_reward,
    "permissioned": cmd_permissioned,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("error: --seed: must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.command == "sweep":
            if args.dump_config:
                src = args.spec or args.config
                doc = json.loads(Path(src).read_text(encoding="utf-8"))
                print(json.dumps({**doc, **SweepSpec.from_dict(doc).to_dict()}, indent=2))
                return EXIT_OK
            return cmd_sweep(args)
        cfg = _load(args)
        if args.dump_config:
            print(cfg.dumps())
            return EXIT_OK
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FeedError as exc:
        print(f"error: rate source {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ChainEconError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
