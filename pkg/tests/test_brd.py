"""Euler-integrated best-response dynamics: step kernel, variants, bounds."""

import numpy as np
import pytest

import stogames as sg

from oracles import random_game


def coordination_game(delta=0.6):
    payoffs = np.array([[1.0, 0.0, 0.0, 0.8]])
    rewards = np.stack([payoffs, payoffs])
    return sg.Game(1, (2, 2), rewards, np.ones((1, 4, 1)), delta)


class TestEulerStep:
    def test_convex_move_toward_reply(self):
        # player 0 strictly prefers action 1; x moves 10% of the way there
        rewards = np.array([[[0.0, 0.0, 1.0, 1.0]], [[0.0] * 4]])
        g = sg.Game(1, (2, 2), rewards, np.ones((1, 4, 1)), 0.5)
        brd = sg.make_brd_state(g, u0=0.0, x0=None, per_player=True)
        brd.x[0, 0] = [1.0, 0.0]
        cfg = sg.IntegratorConfig(variant="sbrd", h=0.1, horizon=1.0)
        sg.euler_step(g, brd, sg.make_divisor("one"), sg.constant_rates(), cfg, sg.TieBreak())
        np.testing.assert_allclose(brd.x[0, 0], [0.9, 0.1])

    def test_rest_point_is_fixed(self):
        g = coordination_game()
        x = sg.pure_profile(g, [[0, 0]])
        u = sg.stationary_value(g, 0, x)
        brd = sg.make_brd_state(g, u0=u, x0=x)
        cfg = sg.IntegratorConfig(variant="sbrd", h=0.05, horizon=1.0)
        before_x, before_u = brd.x.copy(), brd.u.copy()
        for _ in range(10):
            sg.euler_step(g, brd, sg.make_divisor("one"), sg.constant_rates(), cfg, sg.TieBreak())
        np.testing.assert_array_equal(brd.x, before_x)
        np.testing.assert_allclose(brd.u, before_u, atol=1e-15)

    def test_full_async_degenerates_to_sbrd(self):
        g = sg.reference_instance()
        div = sg.make_divisor("one")
        runs = {}
        for variant in ("sbrd", "abrd-full"):
            cfg = sg.IntegratorConfig(variant=variant, h=0.02, horizon=10.0, record_stride=50)
            runs[variant] = sg.run_brd(g, cfg, div, sg.constant_rates(), u0=0.0)
        a, b = runs["sbrd"].records[-1], runs["abrd-full"].records[-1]
        assert np.array_equal(a.u, b.u)
        assert np.array_equal(runs["sbrd"].final_x, runs["abrd-full"].final_x)

    def test_simplex_safety_config_rejected(self):
        with pytest.raises(ValueError, match="simplex"):
            sg.IntegratorConfig(variant="sbrd", h=1.5, horizon=1.0)


class TestRunBrd:
    def test_divisor_must_be_at_least_one(self):
        g = sg.reference_instance()
        bad = sg.DivisorSchedule("bad", lambda t: 0.5)
        cfg = sg.IntegratorConfig(variant="sbrd", h=0.01, horizon=1.0)
        with pytest.raises(ValueError, match="a\\(t\\) >= 1"):
            sg.run_brd(g, cfg, bad, sg.constant_rates())

    def test_boundedness_along_trajectory(self):
        rng = np.random.default_rng(2)
        g = random_game(rng, identical=True)
        u0 = np.array([1.5, -1.5])
        cfg = sg.IntegratorConfig(variant="abrd", h=0.05, horizon=40.0, record_stride=1)
        rates = sg.piecewise_random_rates(g.num_states, 0.3, seed=4)
        traj = sg.run_brd(g, cfg, sg.make_divisor("one"), rates, u0=u0)
        gamma0 = traj.records[0].gamma
        M = max(np.max(np.abs(u0)), np.max(np.abs(gamma0)), g.reward_bound()) + 1.0
        for r in traj.records:
            assert np.max(np.abs(r.u)) <= M + 1e-6
            assert np.max(np.abs(r.gamma)) <= M + 1e-6

    def test_simplex_preserved_every_step(self):
        g = sg.reference_instance()
        brd = sg.make_brd_state(g, u0=0.0, x0=None)
        cfg = sg.IntegratorConfig(variant="abrd", h=0.5, horizon=1.0)
        rates = sg.piecewise_random_rates(2, 0.25, seed=9)
        div = sg.make_divisor("t-plus-1")
        tie = sg.TieBreak()
        for _ in range(400):
            sg.euler_step(g, brd, div, rates, cfg, tie)
            sums = brd.x[:, :, :2].sum(axis=2)
            np.testing.assert_allclose(sums, 1.0, atol=1e-9)
            assert np.all(brd.x >= -1e-15)

    def test_first_order_step_refinement(self):
        # mid-transient the Euler error scales like h: halving h roughly
        # halves the distance to a much finer reference
        g = sg.reference_instance()
        div, rates = sg.make_divisor("one"), sg.constant_rates()

        def final_u(h):
            cfg = sg.IntegratorConfig(variant="sbrd", h=h, horizon=2.0, record_stride=0)
            return sg.run_brd(g, cfg, div, rates, u0=0.0).records[-1].u

        ref = final_u(0.0005)
        e1 = np.max(np.abs(final_u(0.02) - ref))
        e2 = np.max(np.abs(final_u(0.01) - ref))
        assert e1 / e2 == pytest.approx(2.0, rel=0.35)

    def test_zero_sum_records_duality_gap(self):
        g = sg.matching_pennies(0.7)
        cfg = sg.IntegratorConfig(variant="abrd", h=0.01, horizon=30.0, record_stride=100)
        traj = sg.run_brd(g, cfg, sg.make_divisor("t-plus-1"), sg.constant_rates(), u0=0.0)
        assert traj.zero_sum
        assert all(r.dual_gap is not None and r.dual_gap[0] >= 0 for r in traj.records)
        assert traj.records[-1].dual_gap[0] < traj.records[1].dual_gap[0]

    def test_zero_sum_energy_decay_inequality(self):
        # discretized d/dt of w_s stays below -beta_minus w_s + 4 delta M / a(t)
        # up to the first-order truncation slack
        g = sg.matching_pennies(0.7)
        h = 0.01
        beta_minus = 0.5
        rates = sg.piecewise_random_rates(1, beta_minus, seed=3)
        div = sg.make_divisor("t-plus-1")
        cfg = sg.IntegratorConfig(variant="abrd", h=h, horizon=20.0)
        brd = sg.make_brd_state(g, u0=0.0, x0=None)
        tie = sg.TieBreak()
        M = g.reward_bound() + 1.0
        for _ in range(int(20.0 / h)):
            w_before = sg.duality_gap(g, brd.u, brd.x, 0)
            t_before = brd.t
            sg.euler_step(g, brd, div, rates, cfg, tie)
            w_after = sg.duality_gap(g, brd.u, brd.x, 0)
            bound = -beta_minus * w_before + 4 * g.delta * M / div(t_before)
            assert (w_after - w_before) / h <= bound + 50 * h

    def test_team_game_per_player_estimates(self):
        spec = sg.GeneratorSpec(game_class="team", seed=5, offsets=(0.0, 0.5))
        g, _ = sg.generate_game(spec)
        u0 = np.array([[0.0, 0.0], [0.3, 0.3]])
        cfg = sg.IntegratorConfig(variant="sbrd", h=0.01, horizon=60.0, record_stride=100)
        traj = sg.run_brd(g, cfg, sg.make_divisor("one"), sg.constant_rates(), u0=u0)
        assert traj.per_player and traj.team
        devs = [r.prior_dev for r in traj.records]
        assert devs[-1] <= devs[0] + 1e-6
        assert devs[-1] < 1e-6


class TestPsi:
    def test_zero_when_not_overestimating(self):
        g = coordination_game()
        x = sg.pure_profile(g, [[0, 0]])
        u = sg.stationary_value(g, 0, x) - 1.0  # strictly below the payoff
        assert sg.psi_overestimation(g, u, x) == 0.0

    def test_single_positive_part(self):
        rng = np.random.default_rng(6)
        g = random_game(rng, identical=True)
        x = sg.uniform_profile(g)
        # u equal to the auxiliary payoff would be a fixed point; push one
        # coordinate of the fixed point up by 1
        u = sg.stationary_value(g, 0, x)
        u2 = u.copy()
        u2[1] += 1.0
        # raising u2[1] also raises f at both states through the continuation
        gamma = np.array([sg.shapley_payoff(g, 0, s, u2, x[s]) for s in range(2)])
        expected = np.maximum(u2 - gamma, 0.0).sum()
        assert sg.psi_overestimation(g, u2, x) == pytest.approx(expected, abs=1e-12)
        assert expected > 0.0

    def test_decay_bound_along_full_async_run(self):
        # delta |S| < 1: psi(t) <= psi(1) exp((delta|S|-1) beta_minus (t-1)) + tol
        rng = np.random.default_rng(7)
        g = random_game(rng, identical=True, delta=0.4)
        beta_minus = 0.25
        rates = sg.piecewise_random_rates(2, beta_minus, seed=8)
        cfg = sg.IntegratorConfig(variant="abrd-full", h=0.001, horizon=30.0, record_stride=1000)
        traj = sg.run_brd(g, cfg, sg.make_divisor("one"), rates, u0=1.0)
        times = np.array([r.t for r in traj.records])
        psis = np.array([r.psi for r in traj.records])
        k1 = int(np.argmin(np.abs(times - 1.0)))
        assert abs(times[k1] - 1.0) < 1e-9
        decay = (g.delta * g.num_states - 1.0) * beta_minus
        for k in range(k1, len(times)):
            bound = psis[k1] * np.exp(decay * (times[k] - times[k1])) + 0.01
            assert psis[k] <= bound
