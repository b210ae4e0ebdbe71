"""Finite discounted stochastic games and their auxiliary one-shot (Shapley) games.

A game holds reward tensors ``rewards[player, state, joint]`` and transition
tensors ``transitions[state, joint, next_state]`` where ``joint`` is the flat
joint-action index (lexicographic, player 0 most significant).  Mixed profiles
are arrays ``x[state, player, action]`` padded with zeros when players have
unequal action counts; continuation-payoff vectors are plain ``(S,)`` arrays
(or ``(P, S)`` when players keep separate estimates).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

TRANSITION_ROW_TOL = 1e-9
SIMPLEX_TOL = 1e-9
TIE_TOL = 1e-12


def _frozen_array(values, dtype=float) -> np.ndarray:
    a = np.ascontiguousarray(np.asarray(values, dtype=dtype))
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Game:
    """A finite discounted stochastic game.

    ``rewards[i, s, j]`` is player ``i``'s stage reward in state ``s`` under
    flat joint action ``j``; ``transitions[s, j]`` is the next-state
    distribution.  ``delta`` is the discount factor in (0, 1); total payoffs
    are normalized by ``1 - delta``.  Instances are immutable (arrays are
    marked read-only) and safe to share across threads.
    """

    num_states: int
    num_actions: tuple[int, ...]
    rewards: np.ndarray
    transitions: np.ndarray
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "num_actions", tuple(int(a) for a in self.num_actions))
        object.__setattr__(self, "rewards", _frozen_array(self.rewards))
        object.__setattr__(self, "transitions", _frozen_array(self.transitions))
        p, s, j = len(self.num_actions), self.num_states, self.num_joint_actions
        if self.rewards.shape != (p, s, j):
            raise ValueError(f"rewards shape {self.rewards.shape} != {(p, s, j)}")
        if self.transitions.shape != (s, j, s):
            raise ValueError(f"transitions shape {self.transitions.shape} != {(s, j, s)}")

    @property
    def num_players(self) -> int:
        return len(self.num_actions)

    @property
    def num_joint_actions(self) -> int:
        return int(np.prod(self.num_actions))

    @property
    def action_shape(self) -> tuple[int, ...]:
        return self.num_actions

    @property
    def max_actions(self) -> int:
        return max(self.num_actions)

    def joint_index(self, actions: Sequence[int]) -> int:
        """Flat index of a per-player action tuple (player 0 most significant)."""
        return int(np.ravel_multi_index(tuple(actions), self.action_shape))

    def joint_action(self, index: int) -> tuple[int, ...]:
        """Per-player action tuple for a flat joint index."""
        return tuple(int(a) for a in np.unravel_index(index, self.action_shape))

    def is_identical_interest(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.rewards - self.rewards[0]) <= tol))

    def is_zero_sum(self, tol: float = 1e-12) -> bool:
        if self.num_players != 2:
            return False
        return bool(np.all(np.abs(self.rewards[0] + self.rewards[1]) <= tol))

    def team_offsets(self, tol: float = 1e-9) -> np.ndarray | None:
        """Per-player constants ``M_i`` when rewards satisfy r^i = r^0 + M_i, else None.

        Player 0 is the reference (M_0 = 0).
        """
        diffs = self.rewards - self.rewards[0]
        offsets = diffs.reshape(self.num_players, -1).mean(axis=1)
        if np.all(np.abs(diffs - offsets[:, None, None]) <= tol):
            return offsets
        return None

    def reward_bound(self) -> float:
        return float(np.max(np.abs(self.rewards)))


def validate_game(game: Game) -> list[str]:
    """Report-style validation; returns an empty list iff all invariants hold."""
    problems = []
    if not (0.0 < game.delta < 1.0):
        problems.append(f"delta out of (0,1): {game.delta}")
    if not np.all(np.isfinite(game.rewards)):
        bad = np.argwhere(~np.isfinite(game.rewards))[0]
        problems.append(f"non-finite reward at [player={bad[0]}][state={bad[1]}][joint={bad[2]}]")
    if any(a < 1 for a in game.num_actions):
        problems.append(f"empty action set in num_actions={game.num_actions}")
    if not np.all(np.isfinite(game.transitions)):
        bad = np.argwhere(~np.isfinite(game.transitions))[0]
        problems.append(f"non-finite transition at [state={bad[0]}][joint={bad[1]}]")
        return problems
    negative = np.argwhere(game.transitions < 0)
    for s, j, t in negative[:10]:
        problems.append(f"negative transition entry at [state={s}][joint={j}][next={t}]")
    row_sums = game.transitions.sum(axis=2)
    bad_rows = np.argwhere(np.abs(row_sums - 1.0) > TRANSITION_ROW_TOL)
    for s, j in bad_rows[:10]:
        problems.append(
            f"transition row [state={s}][joint={j}] sums to {row_sums[s, j]:.12g}, not 1"
        )
    return problems


def renormalized(game: Game) -> Game:
    """Copy of the game with transition rows rescaled to sum to one.

    Never applied implicitly; callers opt in (e.g. via the CLI flag).
    """
    sums = game.transitions.sum(axis=2, keepdims=True)
    if np.any(sums <= 0):
        raise ValueError("cannot renormalize a transition row with non-positive sum")
    return Game(
        num_states=game.num_states,
        num_actions=game.num_actions,
        rewards=game.rewards,
        transitions=game.transitions / sums,
        delta=game.delta,
    )


# ---------------------------------------------------------------------------
# Mixed profiles


def uniform_profile(game: Game) -> np.ndarray:
    """Profile ``x[s, i, a]`` with each player uniform over its own actions."""
    x = np.zeros((game.num_states, game.num_players, game.max_actions))
    for i, n in enumerate(game.num_actions):
        x[:, i, :n] = 1.0 / n
    return x


def pure_profile(game: Game, actions) -> np.ndarray:
    """Profile playing ``actions[s][i]`` with probability one."""
    actions = np.asarray(actions, dtype=int)
    x = np.zeros((game.num_states, game.num_players, game.max_actions))
    for s in range(game.num_states):
        for i in range(game.num_players):
            x[s, i, actions[s, i]] = 1.0
    return x


def validate_profile(game: Game, x: np.ndarray) -> list[str]:
    """Check that every ``x[s, i]`` is a distribution over player i's actions."""
    problems = []
    x = np.asarray(x, dtype=float)
    expected = (game.num_states, game.num_players, game.max_actions)
    if x.shape != expected:
        return [f"profile shape {x.shape} != {expected}"]
    for s in range(game.num_states):
        for i, n in enumerate(game.num_actions):
            row = x[s, i]
            if np.any(row[:n] < -SIMPLEX_TOL):
                problems.append(f"negative probability at [state={s}][player={i}]")
            if abs(row[:n].sum() - 1.0) > SIMPLEX_TOL:
                problems.append(
                    f"slice [state={s}][player={i}] sums to {row[:n].sum():.12g}, not 1"
                )
            if np.any(row[n:] != 0.0):
                problems.append(f"padding entries not zero at [state={s}][player={i}]")
    return problems


def joint_distribution(game: Game, x_s: np.ndarray) -> np.ndarray:
    """Distribution over flat joint actions induced by per-player mixed actions."""
    d = np.asarray(x_s[0][: game.num_actions[0]], dtype=float)
    for k in range(1, game.num_players):
        d = np.multiply.outer(d, x_s[k][: game.num_actions[k]])
    return d.ravel()


# ---------------------------------------------------------------------------
# Multilinear extensions and the auxiliary game


def _check_x_s(game: Game, x_s) -> np.ndarray:
    x_s = np.asarray(x_s, dtype=float)
    if x_s.ndim != 2 or x_s.shape[0] != game.num_players or x_s.shape[1] < game.max_actions:
        raise ValueError(
            f"per-state profile shape {x_s.shape} incompatible with "
            f"{game.num_players} players / action counts {game.num_actions}"
        )
    return x_s


def extend_reward(game: Game, player: int, state: int, x_s) -> float:
    """Multilinear expectation of ``rewards[player, state]`` under mixed actions."""
    x_s = _check_x_s(game, x_s)
    return float(joint_distribution(game, x_s) @ game.rewards[player, state])


def extend_transition(game: Game, state: int, x_s) -> np.ndarray:
    """Next-state distribution under mixed actions at ``state``."""
    x_s = _check_x_s(game, x_s)
    return joint_distribution(game, x_s) @ game.transitions[state]


def shapley_payoff(game: Game, player: int, state: int, u: np.ndarray, x_s) -> float:
    """Auxiliary-game payoff (1-delta) r(x) + delta P(x) . u at one state."""
    x_s = _check_x_s(game, x_s)
    u = np.asarray(u, dtype=float)
    if u.shape != (game.num_states,):
        raise ValueError(f"continuation vector shape {u.shape} != ({game.num_states},)")
    d = joint_distribution(game, x_s)
    q = (1.0 - game.delta) * game.rewards[player, state] + game.delta * (
        game.transitions[state] @ u
    )
    return float(d @ q)


def action_values(game: Game, player: int, state: int, u: np.ndarray, x_s) -> np.ndarray:
    """Auxiliary payoffs of each pure own-action against the others' mixed actions."""
    q = (1.0 - game.delta) * game.rewards[player, state] + game.delta * (
        game.transitions[state] @ u
    )
    t = np.moveaxis(q.reshape(game.action_shape), player, 0)
    for k in reversed([k for k in range(game.num_players) if k != player]):
        t = t @ np.asarray(x_s[k][: game.num_actions[k]], dtype=float)
    return t


class TieBreak:
    """Resolves argmax ties: lowest action index, or seeded uniform choice.

    Deterministic given the policy kind and seed.  Candidates are the values
    within an absolute 1e-12 band of the maximum.
    """

    def __init__(self, kind: str = "lowest", seed: int | None = None):
        if kind not in ("lowest", "random"):
            raise ValueError(f"unknown tie-break kind {kind!r}")
        self.kind = kind
        self.seed = seed
        self._rng = np.random.default_rng(seed) if kind == "random" else None

    def pick(self, values: np.ndarray) -> int:
        values = np.asarray(values, dtype=float)
        if self.kind == "lowest":
            return int(np.argmax(values))
        candidates = np.flatnonzero(values >= values.max() - TIE_TOL)
        return int(candidates[self._rng.integers(len(candidates))])

    def __repr__(self):
        return f"TieBreak({self.kind!r}, seed={self.seed})"


def best_response(
    game: Game,
    player: int,
    state: int,
    u: np.ndarray,
    x_s,
    tie_break: TieBreak | None = None,
) -> tuple[int, float]:
    """Best pure reply in the auxiliary game; returns (action, attained value).

    ``x_s`` supplies the other players' mixed actions (the player's own row is
    ignored).
    """
    x_s = _check_x_s(game, x_s)
    vals = action_values(game, player, state, np.asarray(u, dtype=float), x_s)
    tie_break = tie_break or TieBreak()
    a = tie_break.pick(vals)
    return a, float(vals[a])


# ---------------------------------------------------------------------------
# Play


def sample_transition(game: Game, state: int, action, rng: np.random.Generator) -> int:
    """Draw the next state by inverse CDF over the stored row; reproducible per seed."""
    j = action if np.isscalar(action) else game.joint_index(action)
    row = game.transitions[state, j]
    c = np.cumsum(row)
    return int(np.searchsorted(c, rng.random() * c[-1], side="right").clip(0, game.num_states - 1))


class ErgodicityResult(NamedTuple):
    is_ergodic: bool
    steps: int | None
    failure_pair: tuple[int, int] | None


def is_ergodic(game: Game) -> ErgodicityResult:
    """Action-robust ergodicity check.

    Builds B[s, s'] = 1 iff the transition s -> s' has positive probability
    under EVERY joint action, then looks for a boolean power B^T that is
    all-ones.  T at most (|S|-1)^2 + 1 (Wielandt's primitivity bound) suffices;
    the smallest such T is returned, or a disconnected (s, s') witness.
    """
    robust = np.all(game.transitions > 0, axis=1)  # (S, S')
    bound = (game.num_states - 1) ** 2 + 1
    power = np.eye(game.num_states, dtype=bool)
    for t in range(1, bound + 1):
        power = power @ robust
        if power.all():
            return ErgodicityResult(True, t, None)
    s, sp = np.argwhere(~power)[0]
    return ErgodicityResult(False, None, (int(s), int(sp)))
