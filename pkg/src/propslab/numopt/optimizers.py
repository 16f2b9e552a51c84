"""Classical baseline optimizers (all minimising).

Every optimizer spends exactly ``budget`` objective evaluations and returns
an :class:`OptResult` whose ``trace[i]`` is the best value seen after
evaluation ``i + 1``. Gradient methods evaluate f at each new iterate
x_1 .. x_budget; derivative-free methods evaluate x0 first.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

Objective = Callable[[np.ndarray], float]


@dataclass
class OptResult:
    x: np.ndarray
    f: float
    trace: np.ndarray

    @property
    def evaluations(self) -> int:
        return len(self.trace)


class _Exhausted(Exception):
    pass


class _Budget:
    """Counts evaluations and keeps the incumbent; raises once the budget is spent."""

    def __init__(self, f: Objective, budget: int):
        if budget < 1:
            raise ValueError("budget must be >= 1")
        self.f = f
        self.budget = budget
        self.trace = []
        self.best_x = None
        self.best_f = math.inf

    def __call__(self, x) -> float:
        if len(self.trace) >= self.budget:
            raise _Exhausted
        x = np.array(x, dtype=float)
        fx = float(self.f(x))
        if fx < self.best_f:
            self.best_f, self.best_x = fx, x
        self.trace.append(self.best_f)
        return fx

    @property
    def left(self) -> int:
        return self.budget - len(self.trace)

    def result(self) -> OptResult:
        return OptResult(self.best_x, self.best_f, np.asarray(self.trace))


# gradient steps


def gd_step(x, g, lr: float = 0.005) -> np.ndarray:
    return np.asarray(x, dtype=float) - lr * np.asarray(g, dtype=float)


@dataclass(frozen=True)
class AdamState:
    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def init(cls, x) -> "AdamState":
        x = np.asarray(x, dtype=float)
        return cls(x, np.zeros_like(x), np.zeros_like(x), 0)


def adam_step(state: AdamState, g, lr: float = 0.5, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> AdamState:
    g = np.asarray(g, dtype=float)
    t = state.t + 1
    m = beta1 * state.m + (1 - beta1) * g
    v = beta2 * state.v + (1 - beta2) * g * g
    m_hat = m / (1 - beta1 ** t)
    v_hat = v / (1 - beta2 ** t)
    return AdamState(state.x - lr * m_hat / (np.sqrt(v_hat) + eps), m, v, t)


def gradient_descent(f: Objective, grad, x0, budget: int, lr: float = 0.005) -> OptResult:
    count = _Budget(f, budget)
    x = np.asarray(x0, dtype=float)
    for _ in range(budget):
        x = gd_step(x, grad(x), lr)
        count(x)
    return count.result()


def adam(f: Objective, grad, x0, budget: int, lr: float = 0.5) -> OptResult:
    count = _Budget(f, budget)
    state = AdamState.init(x0)
    for _ in range(budget):
        state = adam_step(state, grad(state.x), lr)
        count(state.x)
    return count.result()


# derivative-free


def nelder_mead(f: Objective, x0, budget: int, alpha: float = 1.0, gamma: float = 2.0, rho: float = 0.5,
                sigma: float = 0.5, initial_step: Optional[float] = None) -> OptResult:
    """Simplex search.

    The initial simplex is x0 plus one vertex per axis. By default each vertex
    scales its coordinate by 1.05 (0.00025 for a zero coordinate), the usual
    scipy convention; pass ``initial_step`` for a fixed absolute step instead.
    """
    x0 = np.asarray(x0, dtype=float)
    D = x0.size
    if budget < D + 1:
        raise ValueError(f"budget {budget} is below the simplex size {D + 1}")
    count = _Budget(f, budget)
    simplex = [x0]
    for i in range(D):
        v = x0.copy()
        if initial_step is not None:
            v[i] += initial_step
        else:
            v[i] = 1.05 * v[i] if v[i] != 0 else 0.00025
        simplex.append(v)
    try:
        values = [count(p) for p in simplex]
        while True:
            order = np.argsort(values, kind="stable")
            simplex = [simplex[i] for i in order]
            values = [values[i] for i in order]
            centroid = np.mean(simplex[:-1], axis=0)
            worst = simplex[-1]
            xr = centroid + alpha * (centroid - worst)
            fr = count(xr)
            if values[0] <= fr < values[-2]:
                simplex[-1], values[-1] = xr, fr
                continue
            if fr < values[0]:
                xe = centroid + gamma * (xr - centroid)
                fe = count(xe)
                simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
                continue
            if fr < values[-1]:
                xc = centroid + rho * (xr - centroid)  # outside contraction
                fc = count(xc)
                if fc <= fr:
                    simplex[-1], values[-1] = xc, fc
                    continue
            else:
                xc = centroid + rho * (worst - centroid)  # inside contraction
                fc = count(xc)
                if fc < values[-1]:
                    simplex[-1], values[-1] = xc, fc
                    continue
            best = simplex[0]
            for i in range(1, D + 1):
                simplex[i] = best + sigma * (simplex[i] - best)
                values[i] = count(simplex[i])
    except _Exhausted:
        pass
    return count.result()


def random_search(f: Objective, x0, iters: int, sigma: float = 0.3, seed: Optional[int] = None) -> OptResult:
    """Hill climbing: perturb the incumbent with N(0, sigma^2), keep improvements."""
    rng = np.random.default_rng(seed)
    count = _Budget(f, iters)
    x = np.asarray(x0, dtype=float)
    fx = count(x)
    for _ in range(iters - 1):
        cand = x + rng.normal(0.0, sigma, x.size)
        fc = count(cand)
        if fc < fx:
            x, fx = cand, fc
    return count.result()


def tabu_search(f: Objective, x0, budget: int, tenure: int = 10, steps=(0.5, 1.0)) -> OptResult:
    """Move to the best non-tabu coordinate neighbour each round, even if it is worse.

    Recently visited points are tabu for ``tenure`` moves unless they beat
    the best value found so far (aspiration).
    """
    count = _Budget(f, budget)
    x = np.asarray(x0, dtype=float)
    moves = [(i, s) for i in range(x.size) for step in steps for s in (step, -step)]
    tabu = deque(maxlen=tenure)
    try:
        count(x)
        tabu.append(tuple(x.round(9)))
        while True:
            best_move, best_val = None, math.inf
            for i, s in moves:
                cand = x.copy()
                cand[i] += s
                key = tuple(cand.round(9))
                incumbent = count.best_f
                fc = count(cand)
                if key in tabu and not fc < incumbent:
                    continue
                if fc < best_val:
                    best_move, best_val = cand, fc
            if best_move is None:
                # every neighbour is tabu: fall back to the least recent entry's release
                tabu.popleft()
                continue
            x = best_move
            tabu.append(tuple(x.round(9)))
    except _Exhausted:
        pass
    return count.result()


def mu_plus_lambda_es(f: Objective, x0, budget: int, mu: int = 5, lam: int = 10, sigma: float = 1.0,
                      seed: Optional[int] = None) -> OptResult:
    """(mu + lambda)-ES with intermediate recombination of two parents and Gaussian mutation."""
    rng = np.random.default_rng(seed)
    count = _Budget(f, budget)
    x0 = np.asarray(x0, dtype=float)
    pop, vals = [], []
    try:
        pop.append(x0)
        vals.append(count(x0))
        for _ in range(mu - 1):
            p = x0 + rng.normal(0.0, sigma, x0.size)
            vals.append(count(p))
            pop.append(p)
        while True:
            kids, kid_vals = [], []
            for _ in range(lam):
                i, j = rng.choice(len(pop), size=2, replace=len(pop) < 2)
                child = 0.5 * (pop[i] + pop[j]) + rng.normal(0.0, sigma, x0.size)
                kid_vals.append(count(child))
                kids.append(child)
            union, union_vals = pop + kids, vals + kid_vals
            keep = np.argsort(union_vals, kind="stable")[:mu]
            pop = [union[k] for k in keep]
            vals = [union_vals[k] for k in keep]
    except _Exhausted:
        pass
    return count.result()


def es_gradient(f: Objective, x, eps: np.ndarray, sigma: float) -> np.ndarray:
    """Antithetic search-gradient estimate from half-population noise ``eps`` (shape (n/2, D))."""
    x = np.asarray(x, dtype=float)
    diffs = np.array([f(x + sigma * e) - f(x - sigma * e) for e in eps])
    return (diffs @ eps) / (2.0 * sigma * len(eps))


def openai_es(f: Objective, x0, budget: int, n: int = 20, sigma: float = 0.5, lr: float = 0.1,
              seed: Optional[int] = None) -> OptResult:
    if n < 2 or n % 2:
        raise ValueError("population size must be a positive even number (antithetic pairs)")
    rng = np.random.default_rng(seed)
    count = _Budget(f, budget)
    x = np.asarray(x0, dtype=float)
    try:
        count(x)
        while True:
            eps = rng.standard_normal((n // 2, x.size))
            x = x - lr * es_gradient(count, x, eps, sigma)
            count(x)
    except _Exhausted:
        pass
    return count.result()


BASELINES = ("gd", "adam", "nelder-mead", "random-search", "tabu", "mu-plus-lambda", "openai-es")


def run_baseline(name: str, f: Objective, grad, x0, budget: int, seed: Optional[int] = None) -> OptResult:
    if name == "gd":
        return gradient_descent(f, grad, x0, budget)
    if name == "adam":
        return adam(f, grad, x0, budget)
    if name == "nelder-mead":
        return nelder_mead(f, x0, budget)
    if name == "random-search":
        return random_search(f, x0, budget, seed=seed)
    if name == "tabu":
        return tabu_search(f, x0, budget)
    if name == "mu-plus-lambda":
        return mu_plus_lambda_es(f, x0, budget, seed=seed)
    if name == "openai-es":
        return openai_es(f, x0, budget, seed=seed)
    raise ValueError(f"unknown baseline {name!r}; expected one of {BASELINES}")
