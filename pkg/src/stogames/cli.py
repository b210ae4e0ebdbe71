"""Command-line entry point: game generation, runs, and equilibrium verification.

Exit codes: 0 success (and, for ``verify``, equilibrium confirmed), 1
verification failure, 2 usage error, 3 invalid input file.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .brd import IntegratorConfig, run_brd
from .diagnostics import detect_convergence
from .equilibrium import brute_deviation_check, one_shot_deviation_check
from .fp import RunConfig, run_doubling_zero_sum, run_fp
from .game import Game, renormalized, validate_game
from .gameio import InputError, game_hash, load_game, load_profile, save_game
from .generators import REFERENCE_NAME, GeneratorSpec, generate_game, reference_instance
from .schedules import (
    constant_rates,
    make_divisor,
    make_schedule,
    make_visit_weights,
    occupancy_rates,
    piecewise_random_rates,
)

DISCRETE_PROCS = ("sfp", "afp", "afp-visit", "doubling-zs")
CONTINUOUS_PROCS = ("sbrd", "abrd", "abrd-full")


class UsageError(Exception):
    pass


def _load_game(token: str, renormalize: bool) -> Game:
    if token == REFERENCE_NAME:
        return reference_instance()
    game, _ = load_game(token, validate=not renormalize)
    if renormalize:
        game = renormalized(game)
        problems = validate_game(game)
        if problems:
            raise InputError("game invalid after renormalization: " + "; ".join(problems))
    return game


def _parse_u0(args, game: Game):
    if args.u0_per_player is not None:
        consts = [float(v) for v in args.u0_per_player.split(",")]
        if len(consts) != game.num_players:
            raise UsageError(f"--u0-per-player needs {game.num_players} values")
        return np.array([[c] * game.num_states for c in consts], dtype=float)
    return float(args.u0)


def _run_one(token: str, args, seed: int | None, csv_path: Path, summary_path: Path) -> dict:
    game = _load_game(token, args.renormalize)
    u0 = _parse_u0(args, game)
    per_player = True if args.per_player_u or getattr(u0, "ndim", 0) == 2 else None
    t0 = time.perf_counter()
    if args.proc in CONTINUOUS_PROCS:
        cfg = IntegratorConfig(
            variant=args.proc,
            h=args.h,
            horizon=args.horizon,
            record_stride=args.stride,
            tie_break=args.tie_break,
            tie_seed=None if seed is None else seed + 1,
            per_player_u=per_player,
        )
        divisor = make_divisor(args.divisor)
        if args.rates == "constant-one":
            rates = constant_rates()
        elif args.rates == "piecewise-random":
            rates = piecewise_random_rates(game.num_states, args.beta_minus, seed or 0)
        else:
            rates = occupancy_rates(game, args.beta_minus, seed or 0)
        traj = run_brd(game, cfg, divisor, rates, u0=u0, x0=None)
    else:
        cfg = RunConfig(
            procedure="afp" if args.proc == "doubling-zs" else args.proc,
            steps=args.steps,
            seed=seed,
            tie_break=args.tie_break,
            u0=u0,
            per_player_u=per_player,
            record_stride=args.stride,
            stale_u_selection=args.stale_u_selection,
        )
        if args.proc == "doubling-zs":
            if not game.is_zero_sum(tol=1e-9):
                raise UsageError("doubling-zs requires a two-player zero-sum game")
            traj = run_doubling_zero_sum(game, cfg)
        else:
            schedule = make_schedule(args.schedule)
            weights = make_visit_weights(args.visit_alpha) if args.proc == "afp-visit" else None
            traj = run_fp(game, cfg, schedule, visit_weights=weights)
    wall = time.perf_counter() - t0
    traj.metadata["game_hash"] = game_hash(game)
    traj.write_csv(csv_path, game.num_states, game.num_players)
    report = one_shot_deviation_check(game, traj.final_x, epsilon=args.epsilon)
    window = min(100, len(traj.records))
    if window >= 2:
        converged, index = detect_convergence(traj, window=window, tol=args.conv_tol)
    else:
        converged, index = None, None
    summary = {
        "procedure": args.proc,
        "game": token,
        "seed": seed,
        "final_u": traj.final_u.tolist(),
        "equilibrium": report.to_dict(),
        "converged": converged,
        "convergence_index": index,
        "wall_clock_s": wall,
        "metadata": {k: v for k, v in traj.metadata.items() if k != "equilibrium"},
    }
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=1, default=_json_default)
        fh.write("\n")
    return summary


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _with_suffix(path: Path, k: int) -> Path:
    return path.with_name(f"{path.stem}-{k}{path.suffix}")


def cmd_generate(args) -> int:
    offsets = tuple(float(v) for v in args.offsets.split(",")) if args.offsets else None
    spec = GeneratorSpec(
        game_class=args.game_class,
        num_states=args.states,
        num_actions=tuple(int(a) for a in args.actions.split(",")),
        delta=args.delta,
        seed=args.seed,
        offsets=offsets,
    )
    game, metadata = generate_game(spec)
    problems = validate_game(game)
    if problems:
        raise UsageError("generated game failed validation: " + "; ".join(problems))
    save_game(args.out, game, metadata)
    return 0


def cmd_run(args) -> int:
    csv_path, summary_path = Path(args.out_csv), Path(args.out_summary)
    if args.ensemble > 1:
        if args.seed is None:
            raise UsageError("--ensemble needs --seed for reproducible replicas")
        jobs = [
            (args.game, args, args.seed + k, _with_suffix(csv_path, k), _with_suffix(summary_path, k))
            for k in range(args.ensemble)
        ]
        with ProcessPoolExecutor(max_workers=min(args.ensemble, 8)) as pool:
            futures = [pool.submit(_run_one, *job) for job in jobs]
            for f in futures:
                f.result()
        return 0
    summary = _run_one(args.game, args, args.seed, csv_path, summary_path)
    print(json.dumps({"final_u": summary["final_u"], "converged": summary["converged"]}))
    return 0


def cmd_verify(args) -> int:
    game = _load_game(args.game, args.renormalize)
    x = load_profile(args.profile, game)
    one_shot = one_shot_deviation_check(game, x, epsilon=args.epsilon)
    brute = brute_deviation_check(game, x, epsilon=args.epsilon, cap=args.cap)
    report = {
        "epsilon": args.epsilon,
        "one_shot": one_shot.to_dict(),
        "brute_force": brute.to_dict(),
    }
    text = json.dumps(report, indent=1, default=_json_default)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    ok = one_shot.is_epsilon_equilibrium and brute.is_epsilon_equilibrium
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stogames",
                                description="Learning dynamics for finite discounted stochastic games")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a seeded random game as JSON")
    g.add_argument("--class", dest="game_class", default="identical-interest",
                   choices=("identical-interest", "zero-sum", "team"))
    g.add_argument("--states", type=int, default=2)
    g.add_argument("--actions", default="2,2", help="per-player action counts, e.g. 2,2")
    g.add_argument("--delta", type=float, default=0.7)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--offsets", default=None, help="team reward offsets, e.g. 0,0.5")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="run a learning procedure and export its trajectory")
    r.add_argument("--game", required=True,
                   help=f"game JSON path or the token '{REFERENCE_NAME}'")
    r.add_argument("--proc", required=True, choices=DISCRETE_PROCS + CONTINUOUS_PROCS)
    r.add_argument("--steps", type=int, default=10_000, help="discrete procedures")
    r.add_argument("--horizon", type=float, default=100.0, help="continuous procedures")
    r.add_argument("--h", type=float, default=0.01, help="Euler step size")
    r.add_argument("--schedule", default="constant-one", choices=("constant-one", "inv-log"))
    r.add_argument("--visit-alpha", default="one", choices=("one", "linear"))
    r.add_argument("--divisor", default="one", choices=("one", "t-plus-1"))
    r.add_argument("--rates", default="constant-one",
                   choices=("constant-one", "piecewise-random", "occupancy"))
    r.add_argument("--beta-minus", type=float, default=0.5)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--stride", type=int, default=100, help="record every k-th step (0: ends only)")
    r.add_argument("--tie-break", default="lowest", choices=("lowest", "random"))
    r.add_argument("--u0", type=float, default=0.0)
    r.add_argument("--u0-per-player", default=None, help="per-player prior constants, e.g. 0,0.2")
    r.add_argument("--per-player-u", action="store_true")
    r.add_argument("--stale-u-selection", action="store_true",
                   help="replies respond to the pre-update payoff estimate")
    r.add_argument("--epsilon", type=float, default=1e-3, help="final equilibrium check tolerance")
    r.add_argument("--conv-tol", type=float, default=1e-3)
    r.add_argument("--renormalize", action="store_true",
                   help="rescale transition rows to sum to one before validating")
    r.add_argument("--ensemble", type=int, default=1, help="run N seeded replicas in parallel")
    r.add_argument("--out-csv", required=True)
    r.add_argument("--out-summary", required=True)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="check a stationary profile for equilibrium")
    v.add_argument("--game", required=True)
    v.add_argument("--profile", required=True)
    v.add_argument("--epsilon", type=float, default=1e-3)
    v.add_argument("--cap", type=int, default=10**6)
    v.add_argument("--renormalize", action="store_true")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
