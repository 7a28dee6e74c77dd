"""Regime-switching jump-diffusion models: expectations, relative entropy and minimal entropy martingale measures."""

from ._core import *  # noqa: F401,F403
from ._core import (
    MemmProblem,
    closed_form_entropy,
    figure_one_problem,
    solve_horizon,
    solve_levy,
    solve_long_term,
    solve_short_term,
)

__all__ = [
    "MemmProblem",
    "closed_form_entropy",
    "figure_one_problem",
    "solve_horizon",
    "solve_levy",
    "solve_long_term",
    "solve_short_term",
]
