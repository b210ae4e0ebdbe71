"""Discrete fictitious-play runners: step semantics, invariants, convergence."""

import numpy as np
import pytest

import stogames as sg

from oracles import random_game


def fresh(game, **kw):
    cfg = sg.RunConfig(**kw)
    return cfg, sg.make_fp_state(game, cfg)


def all_payoffs(game, fp):
    if fp.u.ndim == 2:
        return np.array(
            [
                [sg.shapley_payoff(game, i, s, fp.u[i], fp.x[s]) for s in range(game.num_states)]
                for i in range(game.num_players)
            ]
        )
    return np.array(
        [sg.shapley_payoff(game, 0, s, fp.u, fp.x[s]) for s in range(game.num_states)]
    )


class TestAfpStep:
    def test_first_visit_overwrites_prior(self):
        g = sg.reference_instance()
        cfg, fp = fresh(g, procedure="afp", steps=1, seed=0)
        rng = np.random.default_rng(0)
        tie = sg.TieBreak()
        s0 = fp.current_state
        sg.afp_step(g, fp, sg.make_schedule("constant-one"), rng, tie)
        played = fp.x[s0]
        for i in range(g.num_players):
            assert set(np.unique(played[i])) <= {0.0, 1.0}
            assert played[i].sum() == 1.0

    def test_two_sample_mean(self):
        # matching pennies: the mismatcher ties (lowest -> 0) at step one and
        # strictly prefers the other action at step two, so its empirical
        # action is the two-sample mean (0.5, 0.5)
        g = sg.matching_pennies(0.5)
        cfg, fp = fresh(g, procedure="afp", steps=2, seed=0)
        rng = np.random.default_rng(0)
        tie = sg.TieBreak()
        sched = sg.make_schedule("constant-one")
        sg.afp_step(g, fp, sched, rng, tie)
        np.testing.assert_array_equal(fp.x[0, 1], [1.0, 0.0])
        sg.afp_step(g, fp, sched, rng, tie)
        np.testing.assert_allclose(fp.x[0, 1], [0.5, 0.5])

    def test_u_updates_every_state_even_unvisited(self):
        # state 0 is absorbing; state 1 is never visited but its estimate moves
        transitions = np.zeros((2, 4, 2))
        transitions[:, :, 0] = 1.0
        rewards = np.tile(np.array([1.0, 1.0, 1.0, 1.0]), (2, 2, 1))
        g = sg.Game(2, (2, 2), rewards, transitions, 0.5)
        cfg, fp = fresh(g, procedure="afp", steps=1, seed=0)
        with pytest.warns(RuntimeWarning, match="non-ergodic"):
            traj = sg.run_fp(g, cfg, sg.make_schedule("constant-one"))
        assert traj.records[-1].u[1] != 0.0
        assert traj.metadata["final_counts"][1] == 0

    def test_running_mean_of_payoffs(self):
        g = sg.reference_instance()
        cfg, fp = fresh(g, procedure="afp", steps=1, seed=3)
        rng = np.random.default_rng(3)
        tie = sg.TieBreak()
        sched = sg.make_schedule("constant-one")
        logged = []
        for _ in range(40):
            logged.append(all_payoffs(g, fp))
            sg.afp_step(g, fp, sched, rng, tie)
        np.testing.assert_allclose(fp.u, np.mean(logged, axis=0), atol=1e-12)

    def test_empirical_mean_identity_and_count_identity(self):
        g = sg.reference_instance()
        cfg, fp = fresh(g, procedure="afp", steps=1, seed=4)
        rng = np.random.default_rng(4)
        tie = sg.TieBreak()
        sched = sg.make_schedule("constant-one")
        played = {s: [] for s in range(g.num_states)}
        for n in range(200):
            s = fp.current_state
            actions = [
                tie.pick(sg.action_values(g, i, s, fp.u, fp.x[s]))
                for i in range(g.num_players)
            ]
            sg.afp_step(g, fp, sched, rng, tie)
            played[s].append(actions)
            # simplex preservation at every step
            for ss in range(g.num_states):
                for i, n_a in enumerate(g.num_actions):
                    assert abs(fp.x[ss, i, :n_a].sum() - 1.0) < 1e-9
                    assert np.all(fp.x[ss, i] >= -1e-15)
        assert fp.counts.sum() == 200
        for s in range(g.num_states):
            if not played[s]:
                continue
            mean = np.zeros((g.num_players, g.max_actions))
            for actions in played[s]:
                for i, a in enumerate(actions):
                    mean[i, a] += 1.0
            mean /= len(played[s])
            np.testing.assert_allclose(fp.x[s], mean, atol=1e-10)

    def test_u_bounded_by_prior_and_rewards(self):
        rng = np.random.default_rng(5)
        g = random_game(rng, identical=True)
        cfg, fp = fresh(g, procedure="afp", steps=1, seed=5, u0=2.0)
        bound = max(2.0, g.reward_bound())
        step_rng = np.random.default_rng(5)
        tie = sg.TieBreak()
        sched = sg.make_schedule("inv-log")
        for _ in range(2000):
            sg.afp_step(g, fp, sched, step_rng, tie)
            assert np.max(np.abs(fp.u)) <= bound + 1e-12

    def test_stale_selection_flag_runs(self):
        g = sg.reference_instance()
        base = sg.RunConfig(procedure="afp", steps=3000, seed=6)
        alt = sg.RunConfig(procedure="afp", steps=3000, seed=6, stale_u_selection=True)
        t1 = sg.run_fp(g, base, sg.make_schedule("constant-one"))
        t2 = sg.run_fp(g, alt, sg.make_schedule("constant-one"))
        # same game class and seed: both settle near the same energy level
        assert abs(sg.energy(g, t1.records[-1].u, t1.final_x)) < 0.2
        assert abs(sg.energy(g, t2.records[-1].u, t2.final_x)) < 0.2


class TestSfpStep:
    def test_first_step_sets_pure_profile(self):
        g = sg.reference_instance()
        cfg, fp = fresh(g, procedure="sfp", steps=1)
        sg.sfp_step(g, fp, sg.make_schedule("constant-one"), sg.TieBreak())
        for s in range(g.num_states):
            for i in range(g.num_players):
                assert set(np.unique(fp.x[s, i])) <= {0.0, 1.0}

    def test_converges_on_coordination_game(self):
        # classical fictitious play on a single-state identical-interest game
        payoffs = np.array([[1.0, 0.0, 0.0, 0.8]])
        rewards = np.stack([payoffs, payoffs])
        g = sg.Game(1, (2, 2), rewards, np.ones((1, 4, 1)), 0.6)
        cfg = sg.RunConfig(procedure="sfp", steps=4000, record_stride=0)
        traj = sg.run_fp(g, cfg, sg.make_schedule("constant-one"))
        rep = sg.one_shot_deviation_check(g, traj.final_x, epsilon=1e-2)
        assert rep.is_epsilon_equilibrium

    def test_nonergodic_game_allowed_without_warning(self):
        transitions = np.zeros((2, 4, 2))
        transitions[0, :, 0] = 1.0
        transitions[1, :, 1] = 1.0
        rewards = np.tile(np.array([0.2, 0.4, 0.6, 0.8]), (2, 2, 1))
        g = sg.Game(2, (2, 2), rewards, transitions, 0.5)
        cfg = sg.RunConfig(procedure="sfp", steps=50)
        import warnings as w

        with w.catch_warnings():
            w.simplefilter("error")
            sg.run_fp(g, cfg, sg.make_schedule("constant-one"))

    def test_identical_priors_give_identical_estimates_bitwise(self):
        rng = np.random.default_rng(9)
        g = random_game(rng, identical=True)
        cfg = sg.RunConfig(procedure="sfp", steps=300, per_player_u=True, record_stride=0)
        traj = sg.run_fp(g, cfg, sg.make_schedule("constant-one"))
        u = traj.records[-1].u
        assert u.shape == (2, g.num_states)
        assert np.array_equal(u[0], u[1])


class TestVisitIndexed:
    def test_constant_weights_reduce_to_per_visit_mean(self):
        g = sg.reference_instance()
        cfg, fp = fresh(g, procedure="afp-visit", steps=1, seed=10)
        rng = np.random.default_rng(10)
        tie = sg.TieBreak()
        weights = sg.make_visit_weights("one")
        observed = {s: [] for s in range(g.num_states)}
        for _ in range(100):
            s = fp.current_state
            observed[s].append(sg.shapley_payoff(g, 0, s, fp.u, fp.x[s]))
            sg.afp_visit_step(g, fp, weights, rng, tie)
        for s in range(g.num_states):
            if observed[s]:
                assert fp.u[s] == pytest.approx(np.mean(observed[s]), abs=1e-12)

    def test_weighted_mean_hand_value(self):
        # alpha(k) = k+1, two visits with payoffs f0, f1:
        # u = (f0/1 + f1/2) / (1 + 1/2)
        g = sg.matching_pennies(0.5)
        cfg, fp = fresh(g, procedure="afp-visit", steps=2, seed=1)
        rng = np.random.default_rng(1)
        tie = sg.TieBreak()
        weights = sg.make_visit_weights("linear")
        f0 = sg.shapley_payoff(g, 0, 0, fp.u, fp.x[0])
        sg.afp_visit_step(g, fp, weights, rng, tie)
        f1 = sg.shapley_payoff(g, 0, 0, fp.u, fp.x[0])
        sg.afp_visit_step(g, fp, weights, rng, tie)
        assert fp.u[0] == pytest.approx((f0 / 1 + f1 / 2) / (1 + 1 / 2), abs=1e-14)

    def test_unvisited_state_estimate_frozen(self):
        transitions = np.zeros((2, 4, 2))
        transitions[:, :, 0] = 1.0
        rewards = np.tile(np.array([1.0, 1.0, 1.0, 1.0]), (2, 2, 1))
        g = sg.Game(2, (2, 2), rewards, transitions, 0.5)
        cfg = sg.RunConfig(procedure="afp-visit", steps=30, u0=0.25)
        with pytest.warns(RuntimeWarning, match="non-ergodic"):
            traj = sg.run_fp(g, cfg, sg.make_schedule("constant-one"),
                             visit_weights=sg.make_visit_weights("one"))
        assert traj.records[-1].u[1] == 0.25

    def test_slowdown_warning_for_growing_weights(self):
        g = sg.reference_instance()
        cfg = sg.RunConfig(procedure="afp-visit", steps=10, seed=0)
        with pytest.warns(RuntimeWarning, match="slowdown"):
            sg.run_fp(g, cfg, sg.make_schedule("constant-one"),
                      visit_weights=sg.make_visit_weights("linear"))


class TestDoubling:
    def test_trigger_direct_scan(self):
        # alpha=1, beta=1: smallest n with 2M exp(-H_{n+1}) <= 4 delta M alpha
        M, delta = 3.0, 0.2
        t = sg.doubling_trigger(1.0, 1.0, M, delta)
        h = np.cumsum(1.0 / np.arange(1, t + 3))
        cond = 2 * M * np.exp(-h) <= 4 * delta * M * 1.0
        assert cond[t] and not np.any(cond[:t])

    def test_trigger_monotone_in_alpha(self):
        prev = -1
        for k in range(6):
            t = sg.doubling_trigger(2.0 ** (-k), 0.7, 2.0, 0.3)
            assert t > prev
            prev = t

    def test_trigger_loosens_as_delta_grows(self):
        ts = [sg.doubling_trigger(0.25, 0.8, 2.0, d) for d in (0.3, 0.6, 0.9)]
        assert ts[0] >= ts[1] >= ts[2]

    def test_alpha_halving_sequence(self):
        g = sg.matching_pennies(0.7)
        cfg = sg.RunConfig(steps=30_000, seed=3, record_stride=0)
        traj = sg.run_doubling_zero_sum(g, cfg)
        alphas = [a for _, a in traj.metadata["alpha_history"]]
        assert alphas == [2.0 ** (-k) for k in range(1, len(alphas) + 1)]

    def test_rejects_perturbed_zero_sum(self):
        g = sg.matching_pennies(0.7)
        rewards = g.rewards.copy()
        rewards[1, 0, 0] += 1e-3
        bad = sg.Game(1, (2, 2), rewards, g.transitions, 0.7)
        with pytest.raises(ValueError, match="zero-sum"):
            sg.run_doubling_zero_sum(bad, sg.RunConfig(steps=10))

    def test_rejects_identical_interest(self):
        g = sg.reference_instance()
        with pytest.raises(ValueError, match="zero-sum"):
            sg.run_doubling_zero_sum(g, sg.RunConfig(steps=10))


class TestRunFp:
    def test_stride_zero_keeps_ends_only(self):
        g = sg.reference_instance()
        cfg = sg.RunConfig(procedure="afp", steps=500, seed=0, record_stride=0)
        traj = sg.run_fp(g, cfg, sg.make_schedule("constant-one"))
        assert len(traj.records) == 2
        assert traj.records[0].t == 0.0
        assert traj.records[1].t == 500.0

    def test_energy_vanishes_on_random_ergodic_game(self):
        rng = np.random.default_rng(21)
        g = random_game(rng, identical=True, delta=0.7)
        cfg = sg.RunConfig(procedure="afp", steps=100_000, seed=21, record_stride=0)
        traj = sg.run_fp(g, cfg, sg.make_schedule("constant-one"))
        w = sg.energy(g, traj.records[-1].u, traj.final_x)
        assert abs(w) <= 0.05

    def test_team_offsets_recovered_in_estimates(self):
        spec = sg.GeneratorSpec(game_class="team", seed=2, offsets=(0.0, 0.5))
        g, _ = sg.generate_game(spec)
        u0 = np.array([[0.0, 0.0], [0.2, 0.2]])
        cfg = sg.RunConfig(procedure="afp", steps=100_000, seed=2, u0=u0, record_stride=0)
        traj = sg.run_fp(g, cfg, sg.make_schedule("constant-one"))
        u = traj.records[-1].u
        assert np.max(np.abs(u[1] - u[0] - 0.5)) <= 1e-2
        assert traj.records[-1].prior_dev is not None
