"""Benchmark objectives and classical baseline optimizers."""

from .bench import BenchRow, bench, final_values, initial_points, rows_to_csv
from .objectives import (
    FUNCTIONS,
    ObjectiveSpec,
    eval_objective,
    grad_objective,
    make_objective,
    sample_shift,
)
from .optimizers import (
    BASELINES,
    AdamState,
    OptResult,
    adam,
    adam_step,
    es_gradient,
    gd_step,
    gradient_descent,
    mu_plus_lambda_es,
    nelder_mead,
    openai_es,
    random_search,
    run_baseline,
    tabu_search,
)

__all__ = [
    "BASELINES", "FUNCTIONS", "AdamState", "BenchRow", "ObjectiveSpec", "OptResult", "adam",
    "adam_step", "bench", "es_gradient", "eval_objective", "final_values", "gd_step",
    "grad_objective", "gradient_descent", "initial_points", "make_objective", "mu_plus_lambda_es",
    "nelder_mead", "openai_es", "random_search", "rows_to_csv", "run_baseline", "sample_shift",
    "tabu_search",
]
