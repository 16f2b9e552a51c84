"""Baseline table: mean ± std of the best value after a fixed budget."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from ..envs.base import derive_seed
from .objectives import FUNCTIONS, eval_objective, grad_objective, make_objective
from .optimizers import BASELINES, run_baseline


@dataclass(frozen=True)
class BenchRow:
    function: str
    dim: int
    optimizer: str
    trials: int
    mean: float
    std: float


def initial_points(D: int, trials: int, seed: int) -> np.ndarray:
    """Starting points drawn uniformly from [0, 20]^D, the support of the shift."""
    return np.random.default_rng(seed).uniform(0.0, 20.0, (trials, D))


def final_values(function: str, D: int, optimizer: str, trials: int = 50, budget: int = 100,
                 seed: int = 0) -> np.ndarray:
    """Best value after ``budget`` evaluations for each trial.

    Each trial draws its own shift and starting point, so the mean does not
    hinge on a single offset.
    """
    out = np.empty(trials)
    for t in range(trials):
        spec = make_objective(function, D, derive_seed(seed, t))
        x0 = initial_points(D, 1, derive_seed(seed, 100 + t))[0]
        res = run_baseline(optimizer, lambda x: eval_objective(spec, x), lambda x: grad_objective(spec, x),
                           x0, budget, seed=derive_seed(seed, 200 + t))
        out[t] = res.f
    return out


def bench(functions: Iterable[str] = FUNCTIONS, dims: Sequence[int] = (2, 4, 8, 16),
          optimizers: Iterable[str] = BASELINES, trials: int = 50, budget: int = 100,
          seed: int = 0) -> List[BenchRow]:
    rows = []
    for fn in functions:
        for D in dims:
            for opt in optimizers:
                vals = final_values(fn, D, opt, trials, budget, seed)
                std = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
                rows.append(BenchRow(fn, D, opt, trials, float(vals.mean()), std))
    return rows


def rows_to_csv(rows: Iterable[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["function", "dim", "optimizer", "trials", "mean", "std", "cell"])
    for r in rows:
        w.writerow([r.function, r.dim, r.optimizer, r.trials, f"{r.mean:.6g}", f"{r.std:.6g}",
                    f"{r.mean:.2f} ± {r.std:.2f}"])
    return buf.getvalue()
