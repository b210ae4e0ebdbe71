"""Exact evaluation of stationary profiles and (epsilon-)equilibrium checks.

Stationary values come from a direct dense linear solve of the Bellman system;
equilibrium verification offers two independent routes: the one-shot deviation
principle at every (player, state), and brute-force enumeration of all pure
stationary deviations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .game import Game, action_values, extend_reward, extend_transition, shapley_payoff

VALUE_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class EquilibriumReport:
    """Outcome of a deviation check.

    ``worst_where`` is a state index for the one-shot check and a pure
    stationary strategy (one action per state) for the brute-force check.
    """

    is_epsilon_equilibrium: bool
    epsilon: float
    worst_player: int
    worst_where: object
    worst_gain: float
    values: np.ndarray  # (players, states)
    method: str

    def to_dict(self) -> dict:
        where = self.worst_where
        if isinstance(where, tuple):
            where = list(where)
        return {
            "is_epsilon_equilibrium": self.is_epsilon_equilibrium,
            "epsilon": self.epsilon,
            "worst_deviation": {
                "player": self.worst_player,
                "where": where,
                "gain": self.worst_gain,
            },
            "values": self.values.tolist(),
            "method": self.method,
        }


def _profile_dynamics(game: Game, player: int, x: np.ndarray):
    """Per-state expected reward vector and transition matrix under profile x."""
    r = np.array([extend_reward(game, player, s, x[s]) for s in range(game.num_states)])
    P = np.vstack([extend_transition(game, s, x[s]) for s in range(game.num_states)])
    return r, P


def stationary_value(game: Game, player: int, x: np.ndarray) -> np.ndarray:
    """Normalized discounted value vector of a stationary profile for one player.

    Solves (I - delta P(x)) u = (1 - delta) r(x); the solution is unique for
    delta < 1.  Raises if the solved residual is not tiny (numerical
    corruption).
    """
    r, P = _profile_dynamics(game, player, x)
    A = np.eye(game.num_states) - game.delta * P
    u = np.linalg.solve(A, (1.0 - game.delta) * r)
    residual = np.max(np.abs(A @ u - (1.0 - game.delta) * r))
    if residual > VALUE_RESIDUAL_TOL * (1.0 + np.max(np.abs(u))):
        raise ArithmeticError(f"stationary value residual {residual:g} too large")
    return u


def stationary_values(game: Game, x: np.ndarray) -> np.ndarray:
    """Stationary value vectors for all players, shape (players, states)."""
    return np.vstack([stationary_value(game, i, x) for i in range(game.num_players)])


def one_shot_deviation_check(game: Game, x: np.ndarray, epsilon: float) -> EquilibriumReport:
    """Equilibrium check via the one-shot deviation principle.

    The reported gain is the largest auxiliary-game improvement
    max_y f^i_{s,u^i}(y, x^{-i}_s) - f^i_{s,u^i}(x_s) over players and states,
    with u^i the exact stationary value of x for player i.
    """
    values = stationary_values(game, x)
    worst = (-np.inf, 0, 0)
    for i in range(game.num_players):
        for s in range(game.num_states):
            vals = action_values(game, i, s, values[i], x[s])
            gain = float(vals.max() - shapley_payoff(game, i, s, values[i], x[s]))
            if gain > worst[0]:
                worst = (gain, i, s)
    gain, player, state = worst
    return EquilibriumReport(
        is_epsilon_equilibrium=bool(gain <= epsilon),
        epsilon=float(epsilon),
        worst_player=player,
        worst_where=state,
        worst_gain=gain,
        values=values,
        method="one-shot",
    )


def brute_deviation_check(
    game: Game, x: np.ndarray, epsilon: float, cap: int = 10**6
) -> EquilibriumReport:
    """Equilibrium check by enumerating every pure stationary deviation.

    For each player the gain of a deviation b is the largest per-state value
    improvement of (b, x^{-i}) over x.  Enumeration size |A^i|^|S| per player
    is capped.
    """
    values = stationary_values(game, x)
    worst = (-np.inf, 0, None)
    for i in range(game.num_players):
        n_strategies = game.num_actions[i] ** game.num_states
        if n_strategies > cap:
            raise ValueError(
                f"player {i} has {n_strategies} pure stationary strategies (cap {cap})"
            )
        for b in itertools.product(range(game.num_actions[i]), repeat=game.num_states):
            xb = x.copy()
            xb[:, i, :] = 0.0
            for s, a in enumerate(b):
                xb[s, i, a] = 1.0
            dev = stationary_value(game, i, xb)
            gain = float(np.max(dev - values[i]))
            if gain > worst[0]:
                worst = (gain, i, b)
    gain, player, strategy = worst
    return EquilibriumReport(
        is_epsilon_equilibrium=bool(gain <= epsilon),
        epsilon=float(epsilon),
        worst_player=player,
        worst_where=strategy,
        worst_gain=gain,
        values=values,
        method="brute-force",
    )


def bellman_residuals(game: Game, u: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Per-state Bellman error f_{s,u}(x_s) - u_s for a single shared u vector."""
    u = np.asarray(u, dtype=float)
    return np.array(
        [shapley_payoff(game, 0, s, u, x[s]) - u[s] for s in range(game.num_states)]
    )
