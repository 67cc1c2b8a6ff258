"""Learning in repeated two-player zero-sum matrix games from noisy bandit feedback."""

__version__ = "0.1.0"

from banditgames.games import (
    GameSolution,
    MixedStrategy,
    PayoffMatrix,
    SolverError,
    best_response_row,
    brute_force_solution,
    expected_payoff,
    kl_divergence,
    solve_zero_sum,
)

__all__ = [
    "__version__",
    "GameSolution",
    "MixedStrategy",
    "PayoffMatrix",
    "SolverError",
    "best_response_row",
    "brute_force_solution",
    "expected_payoff",
    "kl_divergence",
    "solve_zero_sum",
]
