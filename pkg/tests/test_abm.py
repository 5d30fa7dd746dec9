import random

import pytest

from chainecon.abm import (
    AttackTiming,
    EntryRule,
    Lcg64,
    SimConfig,
    read_trace_csv,
    run_sim,
    simulate_attack_window,
    sweep_sim_vs_closed_form,
    write_trace_csv,
)
from chainecon.econ import (
    REL_TOL,
    AttackValueModel,
    NetworkParams,
    NodeMode,
    attack_profit,
    budish_condition,
    fe_nodes_pow,
)
from chainecon.errors import DomainError


def btc_case_pow(V, N=1, rounds=5000, **kw):
    p = NetworkParams(e=10000.0, P=12.5, A=1.01, t=36, N=N, c=125.0)
    return SimConfig("pow", p, AttackValueModel.constant(V), rounds, **kw)


def random_config(rng: random.Random, kind="pow", max_nodes=300) -> SimConfig:
    """Random config whose free-entry node count stays at or below ``max_nodes``."""
    e = 10 ** rng.uniform(0, 4)
    P = 10 ** rng.uniform(-1, 2)
    n_star = rng.randint(1, max_nodes)
    c = e * P / (n_star + rng.random())
    A = rng.uniform(1.01, 3)
    t = rng.randint(1, 50)
    V = (A - 1) * e * P * t * 10 ** rng.uniform(-1, 1)
    N0 = rng.randint(1, 2 * n_star)
    if kind == "pos":
        r = 10 ** rng.uniform(-5, -2)
        p = NetworkParams(e=e, P=P, A=A, t=t, N=N0, c=c).matched_pos(r)
    else:
        p = NetworkParams(e=e, P=P, A=A, t=t, N=N0, c=c)
    return SimConfig(kind, p, AttackValueModel.constant(V), 10 * max(n_star, N0), seed=rng.getrandbits(64))


class TestLcg:
    def test_known_sequence(self):
        g = Lcg64(0)
        assert g.next_u64() == 1442695040888963407
        assert g.next_u64() == (1442695040888963407 * 6364136223846793005 + 1442695040888963407) % 2**64

    def test_below_range(self):
        g = Lcg64(7)
        draws = [g.below(5) for _ in range(2000)]
        assert set(draws) == {0, 1, 2, 3, 4}

    @pytest.mark.parametrize("seed", [-1, 2**64])
    def test_seed_range(self, seed):
        with pytest.raises(DomainError):
            Lcg64(seed)


class TestConfig:
    def test_rounds_positive(self):
        with pytest.raises(DomainError):
            btc_case_pow(0, rounds=0)

    def test_whole_initial_N(self):
        p = NetworkParams(e=1.0, P=1.0, A=2, t=1, N=1.5, c=0.1)
        with pytest.raises(DomainError):
            SimConfig("pow", p, 0, 10)

    def test_pos_needs_stake(self):
        p = NetworkParams(e=1.0, P=1.0, A=2, t=1, N=1, c=0.1)
        with pytest.raises(DomainError):
            SimConfig("pos", p, 0, 10)


class TestExamples:
    def test_no_attack_value_converges_to_free_entry(self):
        out = run_sim(btc_case_pow(0))
        assert out.N_final == 1000
        assert not out.attacked and out.converged
        assert len(out.trace) == 5000

    def test_one_dollar_over_boundary_is_attacked(self):
        out = run_sim(btc_case_pow(45001))
        assert out.attacked and out.N_final == 1000
        last = out.trace[-1]
        assert last.attacked and last.attack_profit == pytest.approx(1.0, abs=1e-6)
        assert len(out.trace) == 1000

    def test_boundary_value_is_not_attacked(self):
        assert not run_sim(btc_case_pow(45000)).attacked

    def test_matched_pos_twin(self):
        for V in (0, 45000, 45001):
            pow_cfg = btc_case_pow(V)
            pos_cfg = SimConfig("pos", pow_cfg.params.matched_pos(1e-4), pow_cfg.V, pow_cfg.rounds)
            a, b = run_sim(pow_cfg), run_sim(pos_cfg)
            assert (a.N_final, a.attacked) == (b.N_final, b.attacked)


class TestDynamics:
    def test_deterministic(self, tmp_path):
        cfg = btc_case_pow(0, N=1500, rounds=1000, seed=99)
        a, b = run_sim(cfg), run_sim(cfg)
        assert a == b and a.incumbents == b.incumbents
        write_trace_csv(a, tmp_path / "a.csv")
        write_trace_csv(b, tmp_path / "b.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_seed_only_permutes_exits(self):
        a = run_sim(btc_case_pow(0, N=1500, rounds=1000, seed=1))
        b = run_sim(btc_case_pow(0, N=1500, rounds=1000, seed=2))
        assert [r.N for r in a.trace] == [r.N for r in b.trace]
        assert a.incumbents != b.incumbents
        assert len(a.incumbents) == 1000

    def test_exit_from_above(self):
        out = run_sim(btc_case_pow(0, N=1200, rounds=2000))
        assert out.N_final == 1000 and out.converged

    def test_convergence_with_five_times_target_rounds(self, rng):
        for _ in range(20):
            cfg = random_config(rng, max_nodes=200)
            cfg = SimConfig(cfg.kind, NetworkParams(**{**cfg.params.to_dict(), "N": 1}), AttackValueModel.constant(0),
                            5 * max(1, fe_nodes_pow(cfg.params.e, cfg.params.P, cfg.params.c, NodeMode.INTEGER)) + 1)
            n_star = fe_nodes_pow(cfg.params.e, cfg.params.P, cfg.params.c, NodeMode.INTEGER)
            out = run_sim(cfg)
            assert out.N_final in (max(n_star, 1), n_star + 1)

    def test_proportional_rule(self):
        out = run_sim(btc_case_pow(0, N=1, rounds=200, entry_rule=EntryRule.PROPORTIONAL))
        assert out.N_final == 1000 and out.converged
        assert len({r.N for r in out.trace[:5]}) == 5

    def test_any_round_timing_strikes_during_transient(self):
        out = run_sim(btc_case_pow(0, attack_timing=AttackTiming.ANY_ROUND))
        # a small network early on is cheap to overrun even when V is zero
        assert out.attacked and out.N_final < 1000
        eq = run_sim(btc_case_pow(0))
        assert eq.attack_opportunity and not eq.attacked

    def test_attacked_implies_positive_row(self, rng):
        for _ in range(30):
            out = run_sim(random_config(rng))
            if out.attacked:
                assert any(r.attack_profit > 0 for r in out.trace)
                assert out.trace[-1].attacked


class TestAttackAccounting:
    def test_pos_slashing_ledger(self, rng):
        for _ in range(100):
            e, P, A, t = 10 ** rng.uniform(0, 4), 10 ** rng.uniform(-1, 2), rng.uniform(1.01, 3), rng.randint(1, 100)
            N, S, r = rng.randint(1, 5000), 10 ** rng.uniform(-2, 3), 10 ** rng.uniform(-6, -2)
            p = NetworkParams.pos(e=e, P=P, A=A, t=t, N=N, S=S, r=r)
            led = simulate_attack_window(p, N, 0.0)
            closed = A * N * t * e * S * r - t * e * P
            assert led.cost - led.revenue == pytest.approx(closed, rel=REL_TOL, abs=REL_TOL * led.cost)
            assert led.revenue == pytest.approx(t * e * P, rel=REL_TOL)

    def test_ledger_matches_closed_form_profit(self, rng):
        for _ in range(100):
            cfg = random_config(rng, kind=rng.choice(["pow", "pos"]))
            p = cfg.params
            led = simulate_attack_window(p, int(p.N), cfg.V(p.e))
            expect = attack_profit(cfg.kind, cfg.V, p)
            assert led.profit == pytest.approx(expect, rel=1e-9, abs=1e-9 * (led.cost + led.value))


class TestTraceCsv:
    def test_schema_and_roundtrip(self, tmp_path):
        out = run_sim(btc_case_pow(45001))
        path = tmp_path / "trace.csv"
        write_trace_csv(out, path)
        text = path.read_bytes()
        assert text.startswith(b"round,N,node_profit,attack_profit,attacked\n")
        assert b"\r" not in text
        rows = read_trace_csv(path)
        assert len(rows) == len(out.trace)
        for (rnd, N, np_, ap, hit), row in zip(rows, out.trace):
            assert (rnd, N, np_, ap, hit) == (row.round, row.N, row.node_profit, row.attack_profit, row.attacked)

    def test_rejects_foreign_header(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a,b\n")
        with pytest.raises(ValueError):
            read_trace_csv(path)


class TestAgreementSweep:
    def test_zero_attack_value_never_attacked(self, rng):
        configs = []
        for _ in range(20):
            cfg = random_config(rng)
            configs.append(SimConfig(cfg.kind, cfg.params, AttackValueModel.constant(0), cfg.rounds, cfg.seed))
        rep = sweep_sim_vs_closed_form(configs)
        assert not any(r.attacked for r in rep.rows)
        assert rep.within_one_fraction == 1.0

    def test_negative_margin_always_attacked(self, rng):
        configs = []
        while len(configs) < 20:
            cfg = random_config(rng)
            p = cfg.params
            n_star = fe_nodes_pow(p.e, p.P, p.c, NodeMode.INTEGER)
            if n_star < 1:
                continue
            v = budish_condition(cfg.V, p.e, p.P, p.A, p.t)
            if v.margin < -1e-6:
                configs.append(cfg)
        rep = sweep_sim_vs_closed_form(configs)
        assert all(r.attacked for r in rep.rows)
        assert rep.attack_match_fraction == 1.0

    def test_order_is_config_order_with_workers(self, rng):
        configs = [random_config(rng, max_nodes=50) for _ in range(6)]
        serial = sweep_sim_vs_closed_form(configs)
        parallel = sweep_sim_vs_closed_form(configs, max_workers=2)
        assert serial == parallel
        assert [r.index for r in parallel.rows] == list(range(6))

    def test_empty(self):
        with pytest.raises(DomainError):
            sweep_sim_vs_closed_form([])
