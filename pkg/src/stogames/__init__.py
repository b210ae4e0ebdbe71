"""Learning dynamics for finite discounted stochastic games.

Fictitious-play procedures (discrete time) and best-response dynamics
(continuous time, Euler-integrated) that converge to stationary Nash
equilibria in identical-interest, zero-sum and team games, plus exact
evaluation and verification tools.
"""

from .brd import BRDState, IntegratorConfig, euler_step, make_brd_state, run_brd
from .diagnostics import (
    detect_convergence,
    discrete_gronwall_bound,
    duality_gap,
    energy,
    optimality_gaps,
    prior_deviation,
    psi_overestimation,
)
from .equilibrium import (
    EquilibriumReport,
    bellman_residuals,
    brute_deviation_check,
    one_shot_deviation_check,
    stationary_value,
    stationary_values,
)
from .fp import (
    FPState,
    RunConfig,
    afp_step,
    afp_visit_step,
    doubling_trigger,
    make_fp_state,
    run_doubling_zero_sum,
    run_fp,
    sfp_step,
)
from .game import (
    ErgodicityResult,
    Game,
    TieBreak,
    action_values,
    best_response,
    extend_reward,
    extend_transition,
    is_ergodic,
    joint_distribution,
    pure_profile,
    renormalized,
    sample_transition,
    shapley_payoff,
    uniform_profile,
    validate_game,
    validate_profile,
)
from .gameio import (
    InputError,
    game_from_dict,
    game_hash,
    game_to_dict,
    load_game,
    load_profile,
    save_game,
    save_profile,
)
from .generators import (
    GeneratorSpec,
    generate_game,
    matching_pennies,
    reference_instance,
)
from .schedules import (
    DivisorSchedule,
    RateSchedule,
    StepSchedule,
    VisitWeights,
    constant_rates,
    make_divisor,
    make_schedule,
    make_visit_weights,
    occupancy_rates,
    piecewise_random_rates,
)
from .trajectory import Trajectory, TrajectoryRecord, load_csv_columns, record_diagnostics

__version__ = "0.1.0"
