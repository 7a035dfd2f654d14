"""Online fair allocation under CES welfare."""
from .arrivals import (GaussianNoise, IidEmpirical, IndependentRedraw, Matched, PeriodicBoost, Synthetic,
                       TraceReplay, make_rng, measure_l1_discrepancy, sample_history, sample_online)
from .instance import AllocationPlan, ItemSequence, load_csv, save_csv, utilities_of
from .online import AlgorithmKind, AllocationTrajectory, greedy_step, run_greedy, run_online
from .solver import (PreconditionError, SolveOptions, SolveResult, brute_force_oracle, opt_welfare,
                     solve_hindsight, solve_program)
from .welfare import (WelfareSpec, conjugate, dual_objective, eval_log_welfare, eval_welfare,
                      grad_log_welfare, smoothness_constants)

__version__ = "0.1.0"

__all__ = [
    "AlgorithmKind", "AllocationPlan", "AllocationTrajectory", "GaussianNoise", "IidEmpirical",
    "IndependentRedraw", "ItemSequence", "Matched", "PeriodicBoost", "PreconditionError", "SolveOptions",
    "SolveResult", "Synthetic", "TraceReplay", "WelfareSpec", "brute_force_oracle", "conjugate",
    "dual_objective", "eval_log_welfare", "eval_welfare", "grad_log_welfare", "greedy_step", "load_csv",
    "make_rng", "measure_l1_discrepancy", "opt_welfare", "run_greedy", "run_online", "sample_history",
    "sample_online", "save_csv", "smoothness_constants", "solve_hindsight", "solve_program", "utilities_of",
]
