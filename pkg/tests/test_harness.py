import numpy as np
import pytest

from macontrol.harness import (ConfigError, ExperimentConfig,
                               config_hash, constant_strategy,
                               cost_descent_strategy, demo_oco_counterexample,
                               demo_shared_controls, measure_regret_terms,
                               offline_best_dac, parse_config, run_experiment,
                               serialize_config, simulate_fixed_dac,
                               stable_pair_system)
from macontrol.lds import LinearSystem, QuadCost, generate_disturbances, natures_x


class TestConfig:
    def test_admire_defaults_from_empty_text(self):
        cfg = parse_config("", scenario="admire")
        assert cfg.scenario == "admire"
        assert cfg.h == 5 and cfg.m == 5
        assert cfg.lr_num == pytest.approx(0.001)
        assert cfg.effective_Tb() == 10

    def test_negative_T_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("T = -1", scenario="admire")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config("bogus = 1", scenario="admire")

    def test_malformed_value(self):
        with pytest.raises(ConfigError):
            parse_config("T = twelve", scenario="admire")

    def test_missing_scenario(self):
        with pytest.raises(ConfigError):
            parse_config("T = 100")

    def test_roundtrip(self):
        cfg = parse_config("T = 123\nseed = 9\nprofile = sinusoidal\nlr_num = 0.0005",
                           scenario="stable-pair")
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert config_hash(again) == config_hash(cfg)

    def test_comments_and_blanks_skipped(self):
        cfg = parse_config("# a comment\n\nT = 50\n", scenario="admire")
        assert cfg.T == 50

    def test_out_of_range_h(self):
        with pytest.raises(ConfigError):
            parse_config("h = 0", scenario="admire")
        with pytest.raises(ConfigError):
            parse_config("h = 5000", scenario="admire")

    def test_overrides_applied_last(self):
        cfg = parse_config("T = 50", scenario="admire", overrides={"T": "70"})
        assert cfg.T == 70


class TestRunExperiment:
    def test_zero_everything_costs_zero(self):
        cfg = ExperimentConfig(scenario="stable-pair", T=50, profile="zero",
                               controller="zero")
        run = run_experiment(cfg)
        assert np.array_equal(run.costs, np.zeros(50))
        assert np.array_equal(run.xs, np.zeros((51, 2)))

    def test_equal_configs_identical_logs(self, tmp_path):
        cfg = ExperimentConfig(scenario="stable-pair", T=120, seed=4,
                               controller="magpc")
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run_experiment(cfg).log.write_csv(p1)
        run_experiment(cfg).log.write_csv(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_admire_magpc_gaussian_bounded(self):
        cfg = ExperimentConfig(scenario="admire", T=2000, seed=0,
                               profile="gaussian", controller="magpc")
        run = run_experiment(cfg)
        assert run.log.state_norms.max() < 50.0

    def test_burn_in_matches_natures_x(self):
        cfg = ExperimentConfig(scenario="stable-pair", T=60, seed=2,
                               controller="magpc")
        run = run_experiment(cfg)
        xnat = natures_x(run.system_eff, run.w)
        Tb = run.controller.Tb
        assert np.array_equal(run.xs[:Tb + 1], xnat[:Tb + 1])

    def test_failure_agent_bounds_checked(self):
        cfg = ExperimentConfig(scenario="stable-pair", T=30, controller="magpc",
                               failure_agent=3)
        with pytest.raises(ConfigError):
            run_experiment(cfg)

    def test_log_self_consistency(self):
        cfg = ExperimentConfig(scenario="stable-pair", T=100, seed=1,
                               controller="magpc")
        log = run_experiment(cfg).log
        assert log.T == 100
        ref = np.cumsum(log.costs) / np.arange(1, 101)
        assert np.allclose(log.avg_costs, ref, rtol=1e-12)
        assert float(log.summary["total_cost"]) == pytest.approx(log.costs.sum(), rel=1e-12)

    def test_csv_format(self, tmp_path):
        cfg = ExperimentConfig(scenario="stable-pair", T=10, controller="magpc",
                               failure_agent=1, failure_t=5)
        run = run_experiment(cfg)
        path = tmp_path / "run.csv"
        run.log.write_csv(path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "t,cost,avg_cost,state_norm,u1,u2,failed"
        assert len(lines) == 11
        failed = [int(ln.split(",")[-1]) for ln in lines[1:]]
        assert failed[:4] == [0, 0, 0, 0] and all(f == 1 for f in failed[4:])


class TestOfflineOracle:
    def test_matches_grid_on_tiny_instance(self):
        sys = LinearSystem(np.array([[0.5]]), [np.array([[1.0]])])
        cost = QuadCost(np.eye(1), 0.1 * np.eye(1))
        w = generate_disturbances("gaussian", 3, 200, 1).w
        M, total, converged, _ = offline_best_dac(sys, cost, w, 1, 5.0)
        assert converged
        grid = np.linspace(-2, 2, 2001)
        best = np.inf
        for g in grid:
            _, _, costs = simulate_fixed_dac(sys, cost, w, np.array([[g]]), 1)
            best = min(best, costs.sum())
        assert total <= best + 1e-6

    def test_comparator_trajectory_consistent(self):
        sys = stable_pair_system()
        cost = QuadCost(np.eye(2), np.eye(2))
        w = generate_disturbances("gaussian", 5, 300, 2).w
        M, total, converged, _ = offline_best_dac(sys, cost, w, 2, 10.0)
        _, _, costs = simulate_fixed_dac(sys, cost, w, M, 2)
        assert costs.sum() == pytest.approx(total, rel=1e-8)


class TestRegretDecomposition:
    def test_zero_disturbance_run_has_zero_burn_in(self):
        cfg = ExperimentConfig(scenario="stable-pair", T=80, profile="zero",
                               controller="magpc")
        run = run_experiment(cfg)
        d = measure_regret_terms(run)
        assert d.burn_in == 0.0

    def test_identity_on_random_instance(self):
        cfg = ExperimentConfig(scenario="stable-pair", T=400, seed=8,
                               controller="magpc", lr_num=0.01)
        run = run_experiment(cfg)
        d = measure_regret_terms(run)
        assert abs(d.terms_sum() - d.total_regret) <= 1e-8

    def test_frozen_at_optimum_policy_regret_small(self):
        from macontrol.controllers import MagpcController
        from macontrol.harness import simulate, RunResult
        sys = stable_pair_system()
        cost = QuadCost(np.eye(2), np.eye(2))
        m, h, T = 3, 3, 2000
        trace = generate_disturbances("gaussian", 12, T, 2)
        M_star, _, _, _ = offline_best_dac(sys, cost, trace.w, m, 10.0)
        ctrl = MagpcController(sys, cost, m, h, schedule=lambda t: 0.0)
        ctrl.learners[0].iterate = M_star[:1].copy()
        ctrl.learners[1].iterate = M_star[1:].copy()
        xs, us, costs, _ = simulate(sys, cost, ctrl, trace, sys.input_dims)
        cfg = ExperimentConfig(scenario="stable-pair", T=T, seed=12, h=h, m=m)
        run = RunResult(cfg, sys, cost, sys, None, ctrl, trace, xs, us, costs, None)
        d = measure_regret_terms(run)
        assert d.policy_regret <= 2.0 * d.measured_eps + 1e-8


class TestOcoDemo:
    def test_scripted_game_constants_exact(self):
        rep = demo_oco_counterexample(100)
        assert np.max(np.abs(rep.scripted_joint_losses - 0.2)) <= 1e-12
        assert abs(rep.scripted_player_best - 1.1) <= 1e-12
        assert abs(rep.scripted_regret_per_round - 0.2) <= 1e-12
        assert rep.scripted_player_regret < 0  # negative individual regret

    def test_odd_T_rejected(self):
        with pytest.raises(ValueError):
            demo_oco_counterexample(101)

    def test_ogd_improves_on_scripted(self):
        rep = demo_oco_counterexample(2000)
        assert rep.ogd_avg_regret < rep.scripted_regret_per_round


class TestSharedControls:
    def test_constant_zero(self):
        rep = demo_shared_controls(constant_strategy(0.0), 200)
        assert rep.regret_traj1 == pytest.approx(0.0, abs=1e-12)
        assert rep.regret_traj2 == pytest.approx(1.0, abs=1e-12)
        assert rep.max_regret >= 0.25

    def test_constant_one(self):
        rep = demo_shared_controls(constant_strategy(1.0), 200)
        assert rep.regret_traj1 == pytest.approx(1.0, abs=1e-12)
        assert rep.max_regret >= 0.25

    def test_constant_half_exactly_quarter(self):
        rep = demo_shared_controls(constant_strategy(0.5), 200)
        assert rep.regret_traj1 == pytest.approx(0.25, abs=1e-12)
        assert rep.regret_traj2 == pytest.approx(0.25, abs=1e-12)
        assert rep.max_regret == pytest.approx(0.25, abs=1e-12)

    def test_battery_floor(self):
        for strat in (constant_strategy(0.0), constant_strategy(1.0),
                      constant_strategy(0.5), cost_descent_strategy()):
            rep = demo_shared_controls(strat, 500)
            assert rep.max_regret >= 0.25 - 1e-9

    def test_out_of_range_clamped_with_warning(self):
        with pytest.warns(UserWarning):
            rep = demo_shared_controls(constant_strategy(1.7), 50)
        assert np.all(rep.u1 <= 1.0)
