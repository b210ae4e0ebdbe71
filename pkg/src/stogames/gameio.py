"""JSON serialization of games and profiles.

Game schema: ``num_states``, ``num_actions`` (per-player list), ``delta``,
``rewards`` indexed [player][state][joint], ``transitions`` indexed
[state][joint][next], joint indices lexicographic with player 0 most
significant, plus an optional ``metadata`` block.  Profile schema:
``{"x": [state][player][action]}`` with per-player action lists.
"""

from __future__ import annotations

import hashlib
import json

import numpy as np

from .game import Game, validate_game


class InputError(Exception):
    """Malformed or invalid input file."""


def game_to_dict(game: Game, metadata: dict | None = None) -> dict:
    d = {
        "num_states": game.num_states,
        "num_actions": list(game.num_actions),
        "delta": game.delta,
        "rewards": game.rewards.tolist(),
        "transitions": game.transitions.tolist(),
    }
    if metadata:
        d["metadata"] = metadata
    return d


def game_from_dict(d: dict) -> Game:
    try:
        return Game(
            num_states=int(d["num_states"]),
            num_actions=tuple(int(a) for a in d["num_actions"]),
            rewards=np.asarray(d["rewards"], dtype=float),
            transitions=np.asarray(d["transitions"], dtype=float),
            delta=float(d["delta"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed game description: {exc}") from exc


def save_game(path, game: Game, metadata: dict | None = None):
    with open(path, "w") as fh:
        json.dump(game_to_dict(game, metadata), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_game(path, validate: bool = True) -> tuple[Game, dict]:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read game file {path}: {exc}") from exc
    game = game_from_dict(d)
    if validate:
        problems = validate_game(game)
        if problems:
            raise InputError(f"invalid game in {path}: " + "; ".join(problems))
    return game, d.get("metadata", {})


def game_hash(game: Game) -> str:
    blob = json.dumps(game_to_dict(game), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def profile_to_dict(game: Game, x: np.ndarray) -> dict:
    return {
        "x": [
            [list(map(float, x[s, i, : game.num_actions[i]])) for i in range(game.num_players)]
            for s in range(game.num_states)
        ]
    }


def profile_from_dict(game: Game, d: dict) -> np.ndarray:
    try:
        rows = d["x"]
        x = np.zeros((game.num_states, game.num_players, game.max_actions))
        for s in range(game.num_states):
            for i in range(game.num_players):
                row = rows[s][i]
                if len(row) != game.num_actions[i]:
                    raise ValueError(
                        f"state {s} player {i}: {len(row)} probabilities, "
                        f"expected {game.num_actions[i]}"
                    )
                x[s, i, : game.num_actions[i]] = row
        return x
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise InputError(f"malformed profile: {exc}") from exc


def save_profile(path, game: Game, x: np.ndarray):
    with open(path, "w") as fh:
        json.dump(profile_to_dict(game, x), fh, indent=1)
        fh.write("\n")


def load_profile(path, game: Game) -> np.ndarray:
    try:
        with open(path) as fh:
            d = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read profile file {path}: {exc}") from exc
    return profile_from_dict(game, d)
