"""Game constructors: the bundled reference instance and seeded random families."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .game import Game

# Bundled 2-state, 2-player, 2-action identical-interest instance (delta = 0.7).
# Orientation convention: REFERENCE_P[k][a0][a1] is the probability of moving
# from state k to state 1 (the second state), with player 0's action indexing
# rows.  Under this convention the instance has two pure stationary equilibria,
# with values (0.6186, 0.4691) and (0.5187, 0.4040); the deterministic
# best-response flow from uniform actions and zero priors settles on the
# latter.  Which equilibrium a run reaches depends on priors and tie-breaks.
REFERENCE_P = (
    ((0.09, 0.05), (0.95, 0.79)),
    ((0.20, 0.66), (0.79, 0.54)),
)
REFERENCE_R = (
    ((0.65, 0.37), (0.00, 0.73)),
    ((0.19, 0.07), (0.30, 0.07)),
)
REFERENCE_DELTA = 0.7
REFERENCE_NAME = "paper-instance"


def reference_instance() -> Game:
    """The bundled 2-state identical-interest example game."""
    transitions = np.zeros((2, 4, 2))
    rewards = np.zeros((2, 2, 4))
    for s in range(2):
        P = np.asarray(REFERENCE_P[s])
        R = np.asarray(REFERENCE_R[s])
        for a0 in range(2):
            for a1 in range(2):
                j = a0 * 2 + a1
                transitions[s, j] = (1.0 - P[a0, a1], P[a0, a1])
                rewards[:, s, j] = R[a0, a1]
    return Game(
        num_states=2,
        num_actions=(2, 2),
        rewards=rewards,
        transitions=transitions,
        delta=REFERENCE_DELTA,
    )


def matching_pennies(delta: float = 0.7) -> Game:
    """Matching pennies as a one-state zero-sum stochastic game."""
    r0 = np.array([[1.0, -1.0, -1.0, 1.0]])  # joint order (0,0),(0,1),(1,0),(1,1)
    rewards = np.stack([r0, -r0])
    transitions = np.ones((1, 4, 1))
    return Game(num_states=1, num_actions=(2, 2), rewards=rewards, transitions=transitions, delta=delta)


GAME_CLASSES = ("identical-interest", "zero-sum", "team")


@dataclass(frozen=True)
class GeneratorSpec:
    game_class: str = "identical-interest"
    num_states: int = 2
    num_actions: tuple[int, ...] = (2, 2)
    delta: float = 0.7
    seed: int = 0
    offsets: tuple[float, ...] | None = None  # team class: r^i = r + offsets[i]

    def __post_init__(self):
        if self.game_class not in GAME_CLASSES:
            raise ValueError(f"unknown game class {self.game_class!r}")
        if self.game_class == "zero-sum" and len(self.num_actions) != 2:
            raise ValueError("zero-sum games have exactly two players")
        if self.game_class == "team":
            offs = self.offsets or (0.0,) * len(self.num_actions)
            if len(offs) != len(self.num_actions):
                raise ValueError("need one offset per player")
            object.__setattr__(self, "offsets", tuple(float(o) for o in offs))


def generate_game(spec: GeneratorSpec) -> tuple[Game, dict]:
    """Seeded random game with uniform[0,1) entries and normalized transitions.

    Rows drawn uniform are strictly positive almost surely, so generated games
    are ergodic in one step.  Returns the game plus a metadata block that makes
    the draw reproducible.
    """
    rng = np.random.default_rng(spec.seed)
    P = len(spec.num_actions)
    S = spec.num_states
    J = int(np.prod(spec.num_actions))
    transitions = rng.uniform(size=(S, J, S))
    transitions /= transitions.sum(axis=2, keepdims=True)
    base = rng.uniform(size=(S, J))
    if spec.game_class == "identical-interest":
        rewards = np.broadcast_to(base, (P, S, J)).copy()
    elif spec.game_class == "zero-sum":
        rewards = np.stack([base, -base])
    else:
        offsets = np.asarray(spec.offsets)
        rewards = base[None, :, :] + offsets[:, None, None]
    game = Game(
        num_states=S,
        num_actions=spec.num_actions,
        rewards=rewards,
        transitions=transitions,
        delta=spec.delta,
    )
    metadata = {
        "class": spec.game_class,
        "seed": spec.seed,
        "offsets": list(spec.offsets) if spec.offsets else None,
    }
    return game, metadata
