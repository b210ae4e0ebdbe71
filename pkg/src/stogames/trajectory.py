"""Time-indexed run records and their flat CSV serialization.

CSV contract (one row per record, header mandatory): ``t, state`` then one
column per state for each diagnostic block, in order ``u``, ``gamma``,
``delta``, ``optgap``, then ``dualgap`` columns (zero-sum runs only), ``psi``
(identical-interest continuous runs) and ``prior_dev`` (team runs with
per-player estimates).  With per-player estimates the u/gamma/delta blocks
expand state-major to ``<name>_{s}_p{i}``.  Missing diagnostics (e.g. the
current state of a synchronous run) are emitted as empty fields.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import (
    duality_gap,
    optimality_gaps,
    player_view,
    prior_deviation,
    psi_overestimation,
)
from .game import Game, shapley_payoff


@dataclass
class TrajectoryRecord:
    t: float
    state: int | None
    u: np.ndarray              # (S,) or (P, S)
    gamma: np.ndarray          # f_{s,u}(x_s), same shape as u
    bellman_gap: np.ndarray    # gamma - u
    opt_gap: np.ndarray        # (S,) sum over players of per-player gaps
    dual_gap: np.ndarray | None = None
    psi: float | None = None
    prior_dev: float | None = None


@dataclass
class Trajectory:
    records: list[TrajectoryRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    per_player: bool = False
    zero_sum: bool = False
    team: bool = False
    continuous: bool = False
    final_x: np.ndarray | None = None

    @property
    def final_u(self) -> np.ndarray:
        return self.records[-1].u

    def append(self, record: TrajectoryRecord):
        if self.records and record.t <= self.records[-1].t:
            raise ValueError("trajectory time index must be strictly increasing")
        self.records.append(record)

    def has_psi(self) -> bool:
        return self.continuous and not self.per_player and not self.zero_sum

    def column_names(self, num_states: int, num_players: int) -> list[str]:
        cols = ["t", "state"]
        for name in ("u", "gamma", "delta"):
            for s in range(num_states):
                if self.per_player:
                    cols.extend(f"{name}_{s}_p{i}" for i in range(num_players))
                else:
                    cols.append(f"{name}_{s}")
        cols.extend(f"optgap_{s}" for s in range(num_states))
        if self.zero_sum:
            cols.extend(f"dualgap_{s}" for s in range(num_states))
        if self.has_psi():
            cols.append("psi")
        if self.team and self.per_player:
            cols.append("prior_dev")
        return cols

    def to_csv(self, num_states: int, num_players: int) -> str:
        out = io.StringIO()
        out.write(",".join(self.column_names(num_states, num_players)) + "\n")
        for r in self.records:
            row = [repr(float(r.t)), "" if r.state is None else str(r.state)]
            for block in (r.u, r.gamma, r.bellman_gap):
                a = np.atleast_2d(block)  # (P or 1, S)
                for s in range(num_states):
                    row.extend(repr(float(v)) for v in a[:, s])
            row.extend(repr(float(v)) for v in r.opt_gap)
            if self.zero_sum:
                row.extend(repr(float(v)) for v in r.dual_gap)
            if self.has_psi():
                row.append("" if r.psi is None else repr(float(r.psi)))
            if self.team and self.per_player:
                row.append("" if r.prior_dev is None else repr(float(r.prior_dev)))
            out.write(",".join(row) + "\n")
        return out.getvalue()

    def write_csv(self, path, num_states: int, num_players: int):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv(num_states, num_players))


def record_diagnostics(
    game: Game,
    t: float,
    state: int | None,
    u: np.ndarray,
    x: np.ndarray,
    *,
    zero_sum: bool = False,
    with_psi: bool = False,
    offsets: np.ndarray | None = None,
) -> TrajectoryRecord:
    """Evaluate the standard diagnostics for one snapshot."""
    u = np.asarray(u, dtype=float)
    S = game.num_states
    if u.ndim == 2:
        gamma = np.array(
            [
                [shapley_payoff(game, i, s, u[i], x[s]) for s in range(S)]
                for i in range(u.shape[0])
            ]
        )
    else:
        gamma = np.array([shapley_payoff(game, 0, s, u, x[s]) for s in range(S)])
        if zero_sum:
            pass  # player 0's view; player 1's is its negative
    opt = np.array([optimality_gaps(game, u, x, s).sum() for s in range(S)])
    dual = np.array([duality_gap(game, u, x, s) for s in range(S)]) if zero_sum else None
    psi = psi_overestimation(game, u, x) if (with_psi and u.ndim == 1) else None
    dev = prior_deviation(game, u, offsets) if (offsets is not None and u.ndim == 2) else None
    return TrajectoryRecord(
        t=float(t),
        state=state,
        u=u.copy(),
        gamma=gamma,
        bellman_gap=gamma - u,
        opt_gap=opt,
        dual_gap=dual,
        psi=psi,
        prior_dev=dev,
    )


def load_csv_columns(path) -> dict[str, np.ndarray]:
    """Read a trajectory CSV back as named columns (empty fields -> NaN)."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    cols: dict[str, np.ndarray] = {}
    for k, name in enumerate(header):
        vals = [row[k] if k < len(row) else "" for row in rows]
        cols[name] = np.array([float(v) if v != "" else np.nan for v in vals])
    return cols
