"""Convergence measures along runs: Bellman gaps, optimality gaps, duality gap.

All gap functions accept either a shared continuation vector ``u`` of shape
(S,) or per-player vectors of shape (P, S).  With a shared vector, player 1 of
a zero-sum game sees its negative (it is sufficient to track player 0's
payoff).
"""

from __future__ import annotations

import numpy as np

from .game import Game, action_values, shapley_payoff


def player_view(game: Game, u: np.ndarray, player: int) -> np.ndarray:
    """Continuation vector as seen by ``player``."""
    u = np.asarray(u, dtype=float)
    if u.ndim == 2:
        return u[player]
    if player > 0 and game.is_zero_sum():
        return -u
    return u


def optimality_gaps(game: Game, u: np.ndarray, x: np.ndarray, state: int) -> np.ndarray:
    """Per-player gap max_y f^i(y, x^{-i}_s) - f^i(x_s); zero iff x_s is a Nash
    profile of the auxiliary game at (state, u)."""
    gaps = np.empty(game.num_players)
    for i in range(game.num_players):
        ui = player_view(game, u, i)
        vals = action_values(game, i, state, ui, x[state])
        gaps[i] = vals.max() - shapley_payoff(game, i, state, ui, x[state])
    return np.maximum(gaps, 0.0)


def duality_gap(game: Game, u: np.ndarray, x: np.ndarray, state: int) -> float:
    """Zero-sum energy max_{a1} f^1(a1, x^2_s) - min_{a2} f^1(x^1_s, a2).

    Nonnegative; zero iff (x^1_s, x^2_s) is a saddle point of the auxiliary
    game.
    """
    if not game.is_zero_sum():
        raise ValueError("duality gap is defined for two-player zero-sum games only")
    u0 = player_view(game, u, 0)
    row_best = action_values(game, 0, state, u0, x[state]).max()
    # player 1 maximizing its own payoff minimizes player 0's
    col_best = -action_values(game, 1, state, player_view(game, u, 1), x[state]).max()
    return max(0.0, float(row_best - col_best))


def energy(game: Game, u: np.ndarray, x: np.ndarray) -> float:
    """min_s (f_{s,u}(x_s) - u_s), the identical-interest convergence energy."""
    u = np.asarray(u, dtype=float)
    return float(
        min(shapley_payoff(game, 0, s, u, x[s]) - u[s] for s in range(game.num_states))
    )


def psi_overestimation(game: Game, u: np.ndarray, x: np.ndarray) -> float:
    """Total positive part sum_s (u_s - f_{s,u}(x_s))_+ (single shared u)."""
    u = np.asarray(u, dtype=float)
    return float(
        sum(max(0.0, u[s] - shapley_payoff(game, 0, s, u, x[s])) for s in range(game.num_states))
    )


def prior_deviation(game: Game, u: np.ndarray, offsets: np.ndarray) -> float:
    """max over players/states of |u^i_s - u^0_s - M_i| for team offsets M."""
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        return 0.0
    dev = u - u[0][None, :] - np.asarray(offsets, dtype=float)[:, None]
    return float(np.max(np.abs(dev)))


def discrete_gronwall_bound(y0: float, g: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Bound sequence y0 * prod_{k<=n}(1+g_k) + sum_{k<=n} b_k.

    For sequences with 0 < 1 + g_n < 1 and y_{n+1} - y_n <= g_{n+1} y_n +
    b_{n+1} (b nonnegative), every y_n is dominated by the returned bound;
    index n of the result bounds y after n recurrence steps (entry 0 is y0).
    """
    g = np.asarray(g, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(1.0 + g <= 0.0) or np.any(1.0 + g >= 1.0):
        raise ValueError("hypothesis requires 0 < 1 + g_n < 1")
    bound = np.empty(len(g) + 1)
    bound[0] = y0
    bound[1:] = y0 * np.cumprod(1.0 + g) + np.cumsum(b)
    return bound


def detect_convergence(trajectory, window: int = 100, tol: float = 1e-3):
    """Trailing-window convergence verdict on a trajectory.

    A window is quiet when both max_s |Delta_s| <= tol over all its records and
    each u coordinate varies by at most tol within it.  Returns
    ``(converged, first_index)`` where ``first_index`` is the start of the
    earliest window from which quietness holds through the end (None when not
    converged).  Declared on diagnostics only, never on x: actions may drift
    along equilibrium components with identical payoffs.
    """
    records = trajectory.records
    if window < 2:
        raise ValueError("window must be at least 2")
    if len(records) < window:
        raise ValueError(f"trajectory has {len(records)} records, needs >= {window}")
    deltas = np.array([np.max(np.abs(r.bellman_gap)) for r in records])
    us = np.array([np.ravel(r.u) for r in records])
    n = len(records)
    quiet = np.zeros(n, dtype=bool)
    for k in range(window - 1, n):
        lo = k - window + 1
        if deltas[lo : k + 1].max() > tol:
            continue
        spread = us[lo : k + 1].max(axis=0) - us[lo : k + 1].min(axis=0)
        if spread.max() <= tol:
            quiet[k] = True
    if not quiet[n - 1]:
        return False, None
    k = n - 1
    while k - 1 >= window - 1 and quiet[k - 1]:
        k -= 1
    return True, int(k - window + 1)
