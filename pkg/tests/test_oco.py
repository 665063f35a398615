import numpy as np
import pytest

from macontrol.oco import (BallDomain, JointDecision, LearnerState,
                           best_fixed_decision, eval_multiagent_regret,
                           multiplayer_oco_round, multiplayer_ocom_round,
                           ogd_step, play_ocom, windows_from_history)


class TestBallDomain:
    def test_projection_inside_unchanged(self):
        dom = BallDomain(2.0, (3,))
        x = np.array([0.5, -0.5, 0.1])
        assert np.array_equal(dom.project(x), x)

    def test_projection_to_boundary(self):
        dom = BallDomain(1.0, (2,))
        p = dom.project(np.array([3.0, 4.0]))
        assert abs(np.linalg.norm(p) - 1.0) < 1e-12

    def test_projection_nonexpansive(self):
        rng = np.random.default_rng(0)
        dom = BallDomain(1.5, (4,))
        for _ in range(200):
            a, b = rng.standard_normal((2, 4)) * 3
            pa, pb = dom.project(a), dom.project(b)
            assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) * (1 + 1e-12)


class TestOgdStep:
    def test_zero_gradient_no_move(self):
        st = LearnerState(BallDomain(1.0, (2,)), x0=np.array([0.3, 0.1]))
        before = st.iterate.copy()
        ogd_step(st, np.zeros(2))
        assert np.array_equal(st.iterate, before)

    def test_big_step_lands_on_boundary(self):
        st = LearnerState(BallDomain(1.0, (2,)), step_schedule=lambda t: 100.0)
        ogd_step(st, np.array([1.0, 0.0]))
        assert abs(np.linalg.norm(st.iterate) - 1.0) < 1e-12

    def test_nonfinite_rejected(self):
        st = LearnerState(BallDomain(1.0, (2,)))
        with pytest.raises(ValueError):
            ogd_step(st, np.array([np.nan, 0.0]))

    def test_standard_regret_bound(self):
        # constant linear loss <g, x>; eta_t = R/(||g|| sqrt(t)) gives
        # average regret <= 3 R ||g|| / sqrt(T), checked via the ledger
        R = 1.0
        g = np.array([2.0, -1.0])
        gn = np.linalg.norm(g)
        st = LearnerState(BallDomain(R, (2,)), step_schedule=lambda t: R / (gn * np.sqrt(t)))
        T = 10_000
        for _ in range(T):
            ogd_step(st, g)
        comparator = -g / gn * R  # best fixed point in the ball
        assert st.ledger_regret(comparator) / T <= 3 * R * gn / np.sqrt(T)

    def test_ledger_evaluates_any_comparator(self):
        rng = np.random.default_rng(1)
        st = LearnerState(BallDomain(1.0, (2,)), step_schedule=lambda t: 0.1 / t)
        gs, xs = [], []
        for _ in range(30):
            g = rng.standard_normal(2)
            xs.append(st.iterate.copy())
            ogd_step(st, g)
            gs.append(g)
        comp = rng.standard_normal(2) * 0.3
        direct = sum(float(g @ (x - comp)) for g, x in zip(gs, xs))
        assert abs(st.ledger_regret(comp) - direct) < 1e-10


def quad_grads(S, b):
    """Per-agent gradient oracle for the joint quadratic z'Sz + b'z."""
    def oracle(joint):
        z = joint.concat()
        g = 2.0 * S @ z + b
        out, pos = [], 0
        for part in joint.parts:
            n = part.size
            out.append(g[pos:pos + n].reshape(part.shape))
            pos += n
        return out
    return oracle


class TestMultiplayerOco:
    def test_single_agent_reduces_to_ogd(self):
        rng = np.random.default_rng(2)
        S = np.eye(2) * 0.5
        b = rng.standard_normal(2)
        sched = lambda t: 0.2 / np.sqrt(t)
        ln_multi = LearnerState(BallDomain(1.0, (2,)), step_schedule=sched)
        ln_solo = LearnerState(BallDomain(1.0, (2,)), step_schedule=sched)
        oracle = quad_grads(S, b)
        for _ in range(50):
            multiplayer_oco_round([ln_multi], oracle)
            g = oracle(JointDecision([ln_solo.iterate]))[0]
            ogd_step(ln_solo, g)
        assert np.array_equal(ln_multi.iterate, ln_solo.iterate)

    def test_decisions_committed_before_gradients(self):
        seen = []

        def oracle(joint):
            seen.append(joint[0].copy())
            return [np.ones(1)]

        ln = LearnerState(BallDomain(1.0, (1,)), step_schedule=lambda t: 0.5)
        d1, _ = multiplayer_oco_round([ln], oracle)
        d2, _ = multiplayer_oco_round([ln], oracle)
        assert seen[0] == d1[0] and seen[1] == d2[0]
        assert d2[0] != d1[0]  # the update landed after the oracle saw d1

    def test_oracle_arity_checked(self):
        ln = LearnerState(BallDomain(1.0, (1,)))
        with pytest.raises(ValueError):
            multiplayer_oco_round([ln], lambda joint: [])

    def test_gradient_decomposition(self):
        # per-agent slices of the joint gradient agree with the full gradient
        rng = np.random.default_rng(3)
        for _ in range(20):
            G = rng.standard_normal((5, 5))
            S = G @ G.T
            b = rng.standard_normal(5)
            parts = [rng.standard_normal(2), rng.standard_normal(3)]
            joint = JointDecision(parts)
            grads = quad_grads(S, b)(joint)
            joint_grad = 2.0 * S @ joint.concat() + b
            assert np.allclose(np.concatenate(grads), joint_grad, atol=1e-10)


class TestMultiplayerOcoM:
    def test_h_zero_reduces_to_memoryless(self):
        rng = np.random.default_rng(4)
        S = np.eye(2)
        b = rng.standard_normal(2)
        sched = lambda t: 0.1 / np.sqrt(t)
        mk = lambda: [LearnerState(BallDomain(1.0, (1,)), step_schedule=sched,
                                   x0=np.array([0.5])) for _ in range(2)]
        plain, mem = mk(), mk()
        oracle = quad_grads(S, b)
        for _ in range(30):
            multiplayer_oco_round(plain, oracle)
            window = [JointDecision([ln.iterate.copy() for ln in mem])]
            multiplayer_ocom_round(
                mem, 0, window,
                lambda aw: [g[None] for g in oracle(JointDecision([a[0] for a in aw]))])
        for lp, lm in zip(plain, mem):
            assert np.allclose(lp.iterate, lm.iterate, atol=1e-14)

    def test_frozen_learners_constant(self):
        learners = [LearnerState(BallDomain(1.0, (1,)), step_schedule=lambda t: 0.0,
                                 x0=np.array([0.4]))]
        hist = play_ocom(learners, 2, lambda t, aw: [np.ones((3, 1))], 10)
        assert all(d[0] == 0.4 for d in hist)

    def test_window_length_enforced(self):
        ln = LearnerState(BallDomain(1.0, (1,)))
        with pytest.raises(ValueError):
            multiplayer_ocom_round([ln], 2, [JointDecision([np.zeros(1)])],
                                   lambda aw: [np.zeros((3, 1))])

    def test_regret_bounded_by_ledger_sum(self):
        # on random quadratic memory losses, measured multi-agent regret is
        # at most the sum of the learners' ledger regrets (convexity chain)
        for seed in range(5):
            rng = np.random.default_rng(seed)
            k, d, h, T = 2, 1, 2, 120
            dim = (h + 1) * k * d
            Gs = rng.standard_normal((T, dim, dim)) * 0.3
            Ss = np.einsum("tij,tkj->tik", Gs, Gs)
            bs = rng.standard_normal((T, dim)) * 0.2

            def flatten(agent_windows):
                # window-major: [x^1_j, x^2_j] for j = 0..h
                return np.concatenate([np.concatenate([aw[j] for aw in agent_windows])
                                       for j in range(h + 1)])

            def loss(t, v):
                return float(v @ Ss[t] @ v + bs[t] @ v)

            def grad_at(t, agent_windows):
                v = flatten(agent_windows)
                g = 2.0 * Ss[t] @ v + bs[t]
                blocks = g.reshape(h + 1, k, d)
                return [blocks[:, i, :] for i in range(k)]

            learners = [LearnerState(BallDomain(1.0, (d,)),
                                     step_schedule=lambda t: 0.1 / np.sqrt(t))
                        for _ in range(k)]
            history = play_ocom(learners, h, grad_at, T)

            played = sum(
                loss(t, flatten([np.stack([jd[i] for jd in windows_from_history(history, h, t)])
                                 for i in range(k)]))
                for t in range(T))

            # independent comparator: exact minimizer of the repeated-point loss
            R = np.tile(np.eye(k * d), (h + 1, 1))
            Hbar = sum(R.T @ Ss[t] @ R for t in range(T))
            bbar = sum(R.T @ bs[t] for t in range(T))
            xbar = np.linalg.solve(2.0 * Hbar, -bbar)
            assert np.linalg.norm(xbar) < 1.0  # interior, so exact
            best = float(xbar @ Hbar @ xbar + bbar @ xbar)
            regret = played - best
            ledger = sum(learners[i].ledger_regret(xbar[i * d:(i + 1) * d])
                         for i in range(k))
            assert regret <= ledger + 1e-9 * T

    def test_determinism(self):
        def run():
            rng = np.random.default_rng(9)
            Ss = [np.eye(2) * s for s in rng.random(40)]
            learners = [LearnerState(BallDomain(1.0, (1,)),
                                     step_schedule=lambda t: 0.2 / np.sqrt(t))
                        for _ in range(2)]

            def grad_at(t, aw):
                v = np.concatenate([np.concatenate([a[j] for a in aw]) for j in range(2)])
                g = 2.0 * np.kron(np.eye(2), Ss[t]) @ v
                blocks = g.reshape(2, 2, 1)
                return [blocks[:, i, :] for i in range(2)]

            hist = play_ocom(learners, 1, grad_at, 40)
            return np.array([d.concat() for d in hist])

        assert np.array_equal(run(), run())


class TestEvalMultiagentRegret:
    def test_constant_at_minimizer_zero_regret(self):
        dom = BallDomain(1.0, (2,))
        target = np.array([0.2, -0.1])

        def loss(window):
            return float(sum(np.sum((w - target) ** 2) for w in window))

        windows = [np.stack([target, target]) for _ in range(20)]
        rep = eval_multiagent_regret([loss] * 20, windows, dom)
        assert abs(rep.regret) <= 1e-8

    def test_scripted_alternation_regret(self):
        # the two-player game: alternating +-1 mirrors give 0.2 per round
        def loss(window):
            x = window[-1]
            return float((x[0] - x[1]) ** 2 + 0.1 * (x[0] ** 2 + x[1] ** 2))

        T = 50
        windows = [np.array([[1.0, 1.0] if t % 2 == 0 else [-1.0, -1.0]])
                   for t in range(T)]
        rep = eval_multiagent_regret([loss] * T, windows, BallDomain(2.0, (2,)))
        assert abs(rep.regret - 0.2) < 1e-6

    def test_regret_nonnegative_for_convex(self):
        rng = np.random.default_rng(11)
        dom = BallDomain(1.0, (2,))
        for seed in range(5):
            S = np.eye(2) + 0.1 * seed

            def loss(window, S=S):
                return float(sum(w @ S @ w for w in window))

            windows = [np.stack([rng.standard_normal(2) * 0.3]) for _ in range(15)]
            rep = eval_multiagent_regret([loss] * 15, windows, dom)
            assert rep.regret >= -1e-8


class TestBestFixedDecision:
    def test_grid_path_small_dim(self):
        dom = BallDomain(2.0, (1,))
        x, val, converged, _ = best_fixed_decision(
            [lambda z: float((z[0] - 0.7) ** 2)], dom)
        assert abs(x[0] - 0.7) < 1e-6 and converged

    def test_pgd_path_larger_dim(self):
        dom = BallDomain(5.0, (4,))
        target = np.array([1.0, -0.5, 0.2, 0.0])
        x, val, converged, _ = best_fixed_decision(
            [lambda z: float(np.sum((z - target) ** 2))], dom,
            grad=lambda z: 2.0 * (z - target))
        assert np.allclose(x, target, atol=1e-6) and converged
