"""Equilibrium solvers and convergence benchmarks for normal-form games.

The library couples five no-regret/best-response dynamics (fictitious play,
regret matching, RM+, greedy-weight regret matching, and dynamic weighted
fictitious play) with an exploitability evaluator, deterministic random-game
generation, and a benchmark harness for convergence-rate comparisons.
"""

from .games import (
    Game,
    MixedStrategy,
    StrategyProfile,
    action_values,
    expected_payoff,
    format_game,
    load_game,
    make_game,
    parse_game,
    profile_from_vectors,
    pure_profile,
    pure_strategy,
    save_game,
    uniform_profile,
    uniform_strategy,
)
from .metrics import (
    ExploitabilityReport,
    best_response,
    exploitability,
    player_exploitability,
)
from .generator import (
    NAMED_GAMES,
    Prng,
    box_muller,
    named_game,
    random_zero_sum,
)
from .solvers import (
    SOLVERS,
    DWFPState,
    FPState,
    RMState,
    StepOutcome,
    TraceRow,
    average_strategy,
    cumulative_weight_of,
    current_profile,
    dwfp_gap,
    dwfp_init,
    dwfp_speed,
    dwfp_step,
    dwfp_weight,
    fp_init,
    fp_step,
    greedy_rm_step,
    greedy_weight,
    init_state,
    log_schedule,
    potential,
    regret_vector,
    rm_init,
    rm_plus_step,
    rm_step,
    run,
    step_state,
)
from .harness import (
    ExperimentConfig,
    SlopeFit,
    confidence_interval,
    dwfp_average_at_weights,
    fit_loglog_slope,
    load_config_file,
    mean_trace,
    read_trace_csv,
    run_experiment,
    seeded_init_actions,
    small_step_fp_oracle,
    small_step_gap,
    weight_correspondence,
    write_trace_csv,
)
from .cli import cli_main

__version__ = "0.1.0"
