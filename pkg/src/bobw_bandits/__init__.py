"""Best-of-both-worlds FTRL bandits under arbitrarily delayed feedback."""

from .baselines import UcbState, ftrl_no_ix_factory, ucb_delayed_step
from .diagnostics import (
    RunHistory,
    check_drift,
    check_rearrangement,
    greedy_rearrangement,
    lambda_sum_report,
    run_invariant_suite,
    skip_set_minimizer,
)
from .environments import (
    EnvironmentInstance,
    InvalidConfig,
    build_environment,
    ground_truth_sigma,
    loss_at,
)
from .ftrl import (
    NonConvergence,
    RegularizerParams,
    SimplexPoint,
    regularizer_value,
    sample_arm,
    solve_ftrl,
)
from .harness import (
    ExperimentConfig,
    RegretTrace,
    aggregate,
    run_experiment,
    write_csv,
)
from .scheduler import (
    DelayedBobwScheduler,
    MultipleSkips,
    SchedulerError,
    implicit_exploration,
)

__all__ = [
    "DelayedBobwScheduler",
    "EnvironmentInstance",
    "ExperimentConfig",
    "InvalidConfig",
    "MultipleSkips",
    "NonConvergence",
    "RegretTrace",
    "RegularizerParams",
    "RunHistory",
    "SchedulerError",
    "SimplexPoint",
    "UcbState",
    "aggregate",
    "build_environment",
    "check_drift",
    "check_rearrangement",
    "ftrl_no_ix_factory",
    "greedy_rearrangement",
    "ground_truth_sigma",
    "implicit_exploration",
    "lambda_sum_report",
    "loss_at",
    "regularizer_value",
    "run_experiment",
    "run_invariant_suite",
    "sample_arm",
    "skip_set_minimizer",
    "solve_ftrl",
    "ucb_delayed_step",
    "write_csv",
]
