"""Euler integration of the continuous-time best-response dynamics.

Three variants share one step kernel.  In all of them each player's mixed
action at each state drifts toward a pure best reply in the auxiliary game;
they differ in how the continuation estimates move:

* ``sbrd``: every state at unit rate, du_s = (f_s - u_s) / a(t).
* ``abrd``: actions move at per-state rates beta_s(t) in [beta_minus, 1] while
  estimates keep the uniform divisor a(t).
* ``abrd-full``: estimates also ride the per-state rates, with the divisor
  evaluated on the state's own accumulated clock B_s = integral of beta_s.

The right-hand side is discontinuous across best-reply switches, so a plain
first-order Euler scheme is used; higher order would buy nothing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .diagnostics import psi_overestimation
from .game import Game, TieBreak, action_values, shapley_payoff, uniform_profile
from .schedules import DivisorSchedule, RateSchedule
from .trajectory import Trajectory, record_diagnostics

VARIANTS = ("sbrd", "abrd", "abrd-full")


@dataclass
class IntegratorConfig:
    variant: str = "sbrd"
    h: float = 0.01
    horizon: float = 100.0
    record_stride: int = 10           # record every k-th step (plus t=0 and final)
    tie_break: str = "lowest"
    tie_seed: int | None = None
    per_player_u: bool | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not (0.0 < self.h <= 1.0):
            raise ValueError("need 0 < h <= 1 for simplex safety")
        if self.horizon <= 0:
            raise ValueError("horizon must be positive")


@dataclass
class BRDState:
    t: float
    u: np.ndarray                 # (S,) shared or (P, S)
    x: np.ndarray                 # (S, P, A)
    b_accum: np.ndarray           # (S,) integral of beta_s (abrd-full clock)
    mode: str


def _classify(game: Game, per_player: bool | None) -> str:
    if per_player:
        return "per-player"
    if game.is_identical_interest():
        return "shared"
    if game.is_zero_sum():
        return "shared-zs"
    if per_player is None and game.team_offsets() is not None:
        return "per-player"
    raise ValueError(
        "continuous dynamics need an identical-interest, zero-sum or team game"
    )


def _view(game: Game, state_u: np.ndarray, mode: str, player: int) -> np.ndarray:
    if mode == "per-player":
        return state_u[player]
    if mode == "shared-zs" and player == 1:
        return -state_u
    return state_u


def make_brd_state(game: Game, u0, x0, per_player: bool | None = None) -> BRDState:
    mode = _classify(game, per_player)
    x = uniform_profile(game) if x0 is None else np.array(x0, dtype=float)
    u0 = np.asarray(u0, dtype=float)
    if mode == "per-player":
        if u0.ndim == 0:
            u = np.full((game.num_players, game.num_states), float(u0))
        elif u0.ndim == 1:
            u = np.tile(u0, (game.num_players, 1))
        else:
            u = u0.copy()
    else:
        if u0.ndim == 2:
            raise ValueError("per-player prior supplied but shared estimates requested")
        u = np.full(game.num_states, float(u0)) if u0.ndim == 0 else u0.copy()
    return BRDState(t=0.0, u=u, x=x, b_accum=np.zeros(game.num_states), mode=mode)


def euler_step(
    game: Game,
    brd: BRDState,
    divisor: DivisorSchedule,
    rates: RateSchedule,
    cfg: IntegratorConfig,
    tie: TieBreak,
) -> BRDState:
    """Advance one Euler step of length cfg.h; all drifts use the pre-step state."""
    S, P = game.num_states, game.num_players
    h = cfg.h
    betas = np.array([rates.beta(s, brd.t) for s in range(S)])
    if cfg.variant == "sbrd":
        betas = np.ones(S)
    x_new = brd.x.copy()
    for s in range(S):
        for i in range(P):
            ui = _view(game, brd.u, brd.mode, i)
            b = tie.pick(action_values(game, i, s, ui, brd.x[s]))
            move = h * betas[s]
            row = x_new[s, i]
            row *= 1.0 - move
            row[b] += move
    if brd.mode == "per-player":
        f = np.array(
            [[shapley_payoff(game, i, s, brd.u[i], brd.x[s]) for s in range(S)] for i in range(P)]
        )
    else:
        f = np.array([shapley_payoff(game, 0, s, brd.u, brd.x[s]) for s in range(S)])
    if cfg.variant == "abrd-full":
        div = np.array([divisor(brd.b_accum[s]) for s in range(S)])
        gain = h * betas / div
        brd.b_accum += h * betas
    else:
        gain = np.full(S, h / divisor(brd.t))
    brd.u += gain * (f - brd.u) if brd.u.ndim == 1 else gain[None, :] * (f - brd.u)
    brd.x = x_new
    brd.t += h
    return brd


def run_brd(
    game: Game,
    cfg: IntegratorConfig,
    divisor: DivisorSchedule,
    rates: RateSchedule,
    u0=0.0,
    x0=None,
) -> Trajectory:
    """Integrate to cfg.horizon, recording diagnostics and a final equilibrium report."""
    from .equilibrium import one_shot_deviation_check

    if divisor(0.0) < 1.0:
        raise ValueError("divisor must satisfy a(t) >= 1")
    brd = make_brd_state(game, u0, x0, cfg.per_player_u)
    tie = TieBreak(cfg.tie_break, seed=cfg.tie_seed)
    offsets = game.team_offsets()
    team = brd.mode == "per-player" and offsets is not None
    traj = Trajectory(
        metadata={
            "variant": cfg.variant,
            "h": cfg.h,
            "horizon": cfg.horizon,
            "divisor": divisor.name,
            "rates": rates.name,
            "beta_minus": rates.beta_minus,
        },
        per_player=brd.mode == "per-player",
        zero_sum=game.is_zero_sum(),
        team=team,
        continuous=True,
    )

    def snapshot():
        traj.append(
            record_diagnostics(
                game,
                t=brd.t,
                state=None,
                u=brd.u,
                x=brd.x,
                zero_sum=traj.zero_sum,
                with_psi=traj.has_psi(),
                offsets=offsets if team else None,
            )
        )

    steps = int(round(cfg.horizon / cfg.h))
    snapshot()
    for k in range(steps):
        euler_step(game, brd, divisor, rates, cfg, tie)
        if (cfg.record_stride and (k + 1) % cfg.record_stride == 0 and k + 1 < steps) or (
            k + 1 == steps
        ):
            snapshot()
    traj.final_x = brd.x.copy()
    traj.metadata["final_psi"] = (
        psi_overestimation(game, brd.u, brd.x) if traj.has_psi() else None
    )
    traj.metadata["equilibrium"] = one_shot_deviation_check(game, brd.x, epsilon=1e-3).to_dict()
    return traj
