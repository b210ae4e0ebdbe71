"""Discrete-time fictitious-play runners.

Three step rules share the same skeleton: every player best-replies in the
auxiliary game given its continuation estimate, empirical actions move toward
the reply, and the continuation estimates chase the auxiliary payoff.

* asynchronous (``afp``): one current state; its empirical action is updated
  with the per-visit step 1/count, while the estimate of EVERY state moves by
  alpha_n/sigma_n toward f evaluated at that state's (possibly stale)
  empirical action.
* synchronous (``sfp``): no current state; replies are chosen and the
  empirical action updated at every state each step.
* visit-indexed (``afp-visit``): only the current state's estimate moves,
  with per-visit weights 1/alpha(k) accumulated in W_s (a weighted running
  mean of the auxiliary payoffs observed at the state's visits).

A zero-sum variant halves its slow step alpha whenever the step counter
crosses a computable trigger, so the asymptotic error bound shrinks to zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import player_view
from .game import Game, TieBreak, action_values, is_ergodic, sample_transition, shapley_payoff, uniform_profile
from .schedules import StepSchedule, VisitWeights
from .trajectory import Trajectory, record_diagnostics

CALIBRATION_STEPS = 10_000  # play prefix used to estimate the minimum state frequency


@dataclass
class RunConfig:
    procedure: str = "afp"            # "sfp" | "afp" | "afp-visit"
    steps: int = 1000
    seed: int | None = None
    tie_break: str = "lowest"
    u0: float | np.ndarray = 0.0
    x0: np.ndarray | None = None      # None -> uniform
    per_player_u: bool | None = None  # None -> derived from the game class
    initial_state: int = 0
    record_stride: int = 0            # 0 -> initial and final records only
    stale_u_selection: bool = False   # replies respond to the pre-update estimate

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


@dataclass
class FPState:
    n: int
    x: np.ndarray                     # (S, P, A) empirical actions
    u: np.ndarray                     # (S,) shared or (P, S) per player
    counts: np.ndarray                # (S,) visits
    current_state: int | None
    mode: str                         # "shared" | "shared-zs" | "per-player"
    weight_sums: np.ndarray | None = None   # (S,) visit-indexed accumulators W_s
    u_stale: np.ndarray | None = None       # estimate before the last update


def classify_mode(game: Game, per_player: bool | None) -> str:
    """Pick the estimate layout for a game (shared vector vs per player)."""
    if per_player:
        return "per-player"
    if game.is_identical_interest():
        return "shared"
    if game.is_zero_sum():
        return "shared-zs"
    if per_player is None:
        if game.team_offsets() is None:
            warnings.warn(
                "game is neither identical-interest, zero-sum nor team; "
                "running with per-player estimates, convergence not guaranteed",
                RuntimeWarning,
            )
        return "per-player"
    raise ValueError("shared estimates need an identical-interest or zero-sum game")


def _view(game: Game, fp: FPState, player: int, stale: bool = False) -> np.ndarray:
    u = fp.u_stale if (stale and fp.u_stale is not None) else fp.u
    if fp.mode == "per-player":
        return u[player]
    if fp.mode == "shared-zs" and player == 1:
        return -u
    return u


def _payoffs_all_states(game: Game, fp: FPState) -> np.ndarray:
    """f at every state under the current estimates; matches fp.u's shape."""
    S = game.num_states
    if fp.mode == "per-player":
        return np.array(
            [
                [shapley_payoff(game, i, s, fp.u[i], fp.x[s]) for s in range(S)]
                for i in range(game.num_players)
            ]
        )
    return np.array([shapley_payoff(game, 0, s, fp.u, fp.x[s]) for s in range(S)])


def _select_actions(game: Game, fp: FPState, state: int, tie: TieBreak, stale: bool) -> np.ndarray:
    return np.array(
        [
            tie.pick(action_values(game, i, state, _view(game, fp, i, stale), fp.x[state]))
            for i in range(game.num_players)
        ],
        dtype=int,
    )


def make_fp_state(game: Game, config: RunConfig) -> FPState:
    mode = classify_mode(game, config.per_player_u)
    x = uniform_profile(game) if config.x0 is None else np.array(config.x0, dtype=float)
    u0 = np.asarray(config.u0, dtype=float)
    if mode == "per-player":
        if u0.ndim == 0:
            u = np.full((game.num_players, game.num_states), float(u0))
        elif u0.ndim == 1:
            u = np.tile(u0, (game.num_players, 1))
        else:
            u = u0.copy()
        if u.shape != (game.num_players, game.num_states):
            raise ValueError(f"per-player prior shape {u0.shape} invalid")
    else:
        if u0.ndim == 2:
            raise ValueError("per-player prior supplied but shared estimates requested")
        u = np.full(game.num_states, float(u0)) if u0.ndim == 0 else u0.copy()
    cur = config.initial_state if config.procedure != "sfp" else None
    weight = np.zeros(game.num_states) if config.procedure == "afp-visit" else None
    return FPState(
        n=0, x=x, u=u, counts=np.zeros(game.num_states, dtype=np.int64),
        current_state=cur, mode=mode, weight_sums=weight, u_stale=u.copy(),
    )


def _update_x_at(fp: FPState, state: int, actions: np.ndarray, step: float):
    row = fp.x[state]
    row *= 1.0 - step
    for i, a in enumerate(actions):
        row[i, a] += step


def afp_step(
    game: Game,
    fp: FPState,
    schedule: StepSchedule,
    rng: np.random.Generator,
    tie: TieBreak,
    stale_u: bool = False,
) -> FPState:
    """One asynchronous step at fp.current_state.

    Replies are chosen against the pre-update empirical action and estimate,
    the visit count increments before the empirical mean moves (so the first
    visit overwrites the arbitrary prior), every state's estimate moves by
    alpha_n/sigma_n toward f at its pre-update empirical action, and the next
    state is drawn from the chosen joint action.  ``stale_u`` makes replies
    respond to the estimate before its previous update instead (the ordering
    used by the doubling-trick loop).
    """
    s = fp.current_state
    actions = _select_actions(game, fp, s, tie, stale=stale_u)
    f_all = _payoffs_all_states(game, fp)
    fp.counts[s] += 1
    _update_x_at(fp, s, actions, 1.0 / fp.counts[s])
    step = schedule.step(fp.n)
    fp.u_stale = fp.u.copy()
    fp.u += step * (f_all - fp.u)
    fp.current_state = sample_transition(game, s, tuple(actions), rng)
    fp.n += 1
    return fp


def sfp_step(game: Game, fp: FPState, schedule: StepSchedule, tie: TieBreak) -> FPState:
    """One synchronous step: every state picks replies and updates; no randomness."""
    S = game.num_states
    replies = np.array([_select_actions(game, fp, s, tie, stale=False) for s in range(S)])
    f_all = _payoffs_all_states(game, fp)
    x_step = 1.0 / (fp.n + 1)
    for s in range(S):
        _update_x_at(fp, s, replies[s], x_step)
    fp.counts += 1
    step = schedule.step(fp.n)
    fp.u_stale = fp.u.copy()
    fp.u += step * (f_all - fp.u)
    fp.n += 1
    return fp


def afp_visit_step(
    game: Game,
    fp: FPState,
    weights: VisitWeights,
    rng: np.random.Generator,
    tie: TieBreak,
) -> FPState:
    """One visit-indexed asynchronous step.

    Only the current state's estimate moves: with k prior visits the new
    observation f carries weight 1/alpha(k), and the estimate is the weighted
    running mean maintained through the accumulator W_s.
    """
    s = fp.current_state
    actions = _select_actions(game, fp, s, tie, stale=False)
    if fp.mode == "per-player":
        f_here = np.array(
            [shapley_payoff(game, i, s, fp.u[i], fp.x[s]) for i in range(game.num_players)]
        )
    else:
        f_here = shapley_payoff(game, 0, s, fp.u, fp.x[s])
    k = int(fp.counts[s])
    w = 1.0 / weights.alpha(k)
    fp.weight_sums[s] += w
    fp.u_stale = fp.u.copy()
    if fp.mode == "per-player":
        fp.u[:, s] += (w / fp.weight_sums[s]) * (f_here - fp.u[:, s])
    else:
        fp.u[s] += (w / fp.weight_sums[s]) * (f_here - fp.u[s])
    fp.counts[s] += 1
    _update_x_at(fp, s, actions, 1.0 / fp.counts[s])
    fp.current_state = sample_transition(game, s, tuple(actions), rng)
    fp.n += 1
    return fp


def _trajectory_for(game: Game, config: RunConfig, fp: FPState, tags: dict) -> Trajectory:
    offsets = game.team_offsets()
    team = fp.mode == "per-player" and offsets is not None
    return Trajectory(
        metadata={"procedure": config.procedure, "seed": config.seed, **tags},
        per_player=fp.mode == "per-player",
        zero_sum=game.is_zero_sum(),
        team=team,
        continuous=False,
    )


def _snapshot(game: Game, traj: Trajectory, fp: FPState, offsets):
    traj.append(
        record_diagnostics(
            game,
            t=float(fp.n),
            state=fp.current_state,
            u=fp.u,
            x=fp.x,
            zero_sum=traj.zero_sum,
            with_psi=False,
            offsets=offsets if traj.team else None,
        )
    )


def run_fp(
    game: Game,
    config: RunConfig,
    schedule: StepSchedule,
    visit_weights: VisitWeights | None = None,
) -> Trajectory:
    """Iterate the configured step rule, recording diagnostics every stride.

    A record stride of 0 keeps only the initial and final snapshots.  Per-player
    priors (a (P, S) ``u0``) switch every estimate to its own player, which is
    the team-game setting.
    """
    if config.procedure not in ("sfp", "afp", "afp-visit"):
        raise ValueError(f"unknown procedure {config.procedure!r}")
    if config.procedure != "sfp" and not is_ergodic(game).is_ergodic:
        warnings.warn(
            "asynchronous fictitious play on a non-ergodic game: some states may "
            "never be visited and their estimates never corrected",
            RuntimeWarning,
        )
    if config.procedure == "afp-visit":
        visit_weights = visit_weights or VisitWeights("one", lambda k: 1.0)
        if visit_weights.alpha(1) != visit_weights.alpha(0):
            warnings.warn(
                "visit-indexed weights grow with the visit count; convergence at "
                "desk scale is not expected (double-exponential slowdown)",
                RuntimeWarning,
            )
    fp = make_fp_state(game, config)
    rng = np.random.default_rng(config.seed)
    tie = TieBreak(config.tie_break, seed=None if config.seed is None else config.seed + 1)
    offsets = game.team_offsets()
    traj = _trajectory_for(game, config, fp, {"schedule": schedule.name})
    _snapshot(game, traj, fp, offsets)
    stride = config.record_stride
    for k in range(config.steps):
        if config.procedure == "sfp":
            sfp_step(game, fp, schedule, tie)
        elif config.procedure == "afp":
            afp_step(game, fp, schedule, rng, tie, stale_u=config.stale_u_selection)
        else:
            afp_visit_step(game, fp, visit_weights, rng, tie)
        if (stride and fp.n % stride == 0 and fp.n < config.steps) or fp.n == config.steps:
            _snapshot(game, traj, fp, offsets)
    traj.final_x = fp.x.copy()
    traj.metadata["final_counts"] = fp.counts.tolist()
    return traj


# ---------------------------------------------------------------------------
# Zero-sum doubling trick


def doubling_trigger(
    alpha: float, beta_minus: float, M: float, delta: float, max_n: int = 10**7
) -> int:
    """Smallest n with exp(-beta_minus * sum_{k<=n} alpha/sigma_k) * 2M <= 4 delta M alpha.

    With a constant step alpha, sigma_k = (k+1) alpha, so the decay sum is the
    harmonic number H_{n+1}.  Discrete analogue of the time after which the
    continuous duality-gap envelope has shrunk to the 4*delta*M*alpha level.
    """
    if not (0.0 < alpha <= 1.0 and 0.0 < beta_minus <= 1.0 and M > 0.0):
        raise ValueError("need alpha, beta_minus in (0,1] and M > 0")
    target = 2.0 * delta * alpha  # (4 delta M alpha) / (2 M)
    if target <= 0.0:
        raise ValueError("delta must be positive")
    h = 0.0
    for n in range(max_n):
        h += 1.0 / (n + 1)
        if math.exp(-beta_minus * h) <= target:
            return n
    raise ValueError(f"trigger not reached within {max_n} steps")


def run_doubling_zero_sum(game: Game, config: RunConfig) -> Trajectory:
    """Fictitious play with a doubling trick on the slow step, for zero-sum games.

    Per iteration: the current state's empirical action absorbs the incoming
    action with step 1/(n+1); every estimate moves by alpha/sigma_n toward f at
    the pre-update empirical actions; the next state is drawn and the next
    reply chosen there against the updated empirical action but the pre-update
    estimate; alpha halves once the counter crosses the trigger.  The minimum
    state frequency standing in for the unknown visit rate bound is estimated
    over a calibration prefix of the play, during which alpha stays put.
    """
    if not game.is_zero_sum(tol=1e-9):
        raise ValueError("doubling-trick runner requires a two-player zero-sum game")
    if not is_ergodic(game).is_ergodic:
        warnings.warn("doubling-trick play on a non-ergodic game", RuntimeWarning)
    cfg = config
    fp = make_fp_state(game, cfg)
    if fp.mode != "shared-zs":
        raise ValueError("doubling-trick runner tracks player 0's shared estimate")
    rng = np.random.default_rng(cfg.seed)
    tie = TieBreak(cfg.tie_break, seed=None if cfg.seed is None else cfg.seed + 1)
    M = max(game.reward_bound(), float(np.max(np.abs(fp.u)))) + 1.0
    alpha = 1.0
    sigma = 0.0
    harmonic = 0.0
    calibration = min(CALIBRATION_STEPS, cfg.steps)
    beta_minus = None
    traj = _trajectory_for(game, cfg, fp, {"schedule": "doubling"})
    traj.metadata["alpha_history"] = []
    _snapshot(game, traj, fp, None)
    s = fp.current_state
    actions = _select_actions(game, fp, s, tie, stale=False)
    stride = cfg.record_stride
    for n in range(cfg.steps):
        f_all = _payoffs_all_states(game, fp)
        fp.counts[s] += 1
        _update_x_at(fp, s, actions, 1.0 / (n + 1))
        s_next = sample_transition(game, s, tuple(actions), rng)
        next_actions = _select_actions(game, fp, s_next, tie, stale=False)  # u not yet updated
        sigma += alpha
        fp.u += (alpha / sigma) * (f_all - fp.u)
        if n + 1 == calibration:
            beta_minus = max(float(fp.counts.min()) / calibration, 1e-9)
            traj.metadata["beta_minus"] = beta_minus
        if n >= 1:
            harmonic += 1.0 / n
            if beta_minus is not None and math.exp(-beta_minus * harmonic) <= 2.0 * game.delta * alpha:
                alpha *= 0.5
                traj.metadata["alpha_history"].append([n, alpha])
        s, actions = s_next, next_actions
        fp.current_state = s
        fp.n = n + 1
        if (stride and fp.n % stride == 0 and fp.n < cfg.steps) or fp.n == cfg.steps:
            _snapshot(game, traj, fp, None)
    traj.final_x = fp.x.copy()
    traj.metadata["final_alpha"] = alpha
    return traj
