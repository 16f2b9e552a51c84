"""Deterministic policies built from a flat parameter vector.

Linear layouts store the weight matrix W (obs_dim x n_out) row-major, then
the bias b (n_out). Tabular layouts store one action index per state.
"""

from __future__ import annotations

import math
import operator
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .envs.base import Discrete, EnvSpec
from .errors import InvalidTabularEntry, PolicyShapeMismatch, UnsupportedCombination

POLICY_KINDS = ("linear", "tabular")


@dataclass(frozen=True)
class LinearLayout:
    obs_dim: int
    n_out: int
    discrete: bool = True
    low: Optional[Tuple[float, ...]] = None
    high: Optional[Tuple[float, ...]] = None

    @property
    def rank(self) -> int:
        return self.obs_dim * self.n_out + self.n_out

    def unflatten(self, params) -> Tuple[np.ndarray, np.ndarray]:
        params = check_params(params, self.rank)
        split = self.obs_dim * self.n_out
        return params[:split].reshape(self.obs_dim, self.n_out), params[split:].copy()

    def flatten(self, W, b) -> np.ndarray:
        W = np.asarray(W, dtype=float)
        b = np.asarray(b, dtype=float)
        if W.shape != (self.obs_dim, self.n_out) or b.shape != (self.n_out,):
            raise PolicyShapeMismatch(f"expected W {self.obs_dim}x{self.n_out} and b {self.n_out}")
        return np.concatenate([W.ravel(), b])


@dataclass(frozen=True)
class TabularLayout:
    n_states: int
    action_set: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return self.n_states

    def unflatten(self, params) -> np.ndarray:
        return check_params(params, self.rank)

    def flatten(self, table) -> np.ndarray:
        return check_params(table, self.rank)


def check_params(params, rank: int) -> np.ndarray:
    arr = np.asarray(params, dtype=float).ravel()
    if arr.shape[0] != rank:
        raise PolicyShapeMismatch(f"expected {rank} parameters, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise PolicyShapeMismatch("parameters must be finite")
    return arr


def _check_state(state, obs_dim):
    if len(state) != obs_dim:
        raise PolicyShapeMismatch(f"state has {len(state)} features, layout expects {obs_dim}")


def linear_discrete_act(params, layout: LinearLayout, state: Sequence[float]) -> int:
    """argmax over state @ W + b; the lowest index wins ties."""
    _check_state(state, layout.obs_dim)
    W, b = layout.unflatten(params)
    scores = np.asarray(state, dtype=float) @ W + b
    return int(np.argmax(scores))


def linear_continuous_act(params, layout: LinearLayout, state: Sequence[float]) -> np.ndarray:
    _check_state(state, layout.obs_dim)
    W, b = layout.unflatten(params)
    action = np.asarray(state, dtype=float) @ W + b
    if layout.low is not None:
        action = np.clip(action, layout.low, layout.high)
    return action


def tabular_act(params, layout: TabularLayout, state: int) -> int:
    if not 0 <= state < layout.n_states:
        raise PolicyShapeMismatch(f"state {state} outside 0..{layout.n_states - 1}")
    table = layout.unflatten(params)
    return _table_entry(table[state], layout.action_set, state)


def _table_entry(value, action_set, state) -> int:
    a = int(value)
    if a != value or a not in action_set:
        raise InvalidTabularEntry(f"params[{state}] = {value!r} not in action set {list(action_set)}")
    return a


def layout_for(kind: str, spec: EnvSpec):
    if kind == "linear":
        if spec.obs_kind == "index":
            raise UnsupportedCombination(f"linear policy needs a feature observation; {spec.name} has state indices")
        space = spec.action_space
        if isinstance(space, Discrete):
            return LinearLayout(spec.obs_dim, space.n, discrete=True)
        return LinearLayout(spec.obs_dim, space.dim, discrete=False, low=space.low, high=space.high)
    if kind == "tabular":
        if spec.n_states is None or not isinstance(spec.action_space, Discrete):
            raise UnsupportedCombination(f"tabular policy needs discrete states and actions; {spec.name} has neither")
        return TabularLayout(spec.n_states, tuple(range(spec.action_space.n)))
    raise UnsupportedCombination(f"unknown policy kind {kind!r}")


def param_count(kind: str, spec: EnvSpec) -> int:
    return layout_for(kind, spec).rank


class LinearDiscretePolicy:
    """Per-step fast path of :func:`linear_discrete_act` (plain floats, no numpy)."""

    emits_valid_actions = True

    def __init__(self, params, layout: LinearLayout):
        W, b = layout.unflatten(params)
        self.layout = layout
        self._cols = [tuple(W[:, a].tolist()) for a in range(layout.n_out)]
        self._bias = b.tolist()

    def act(self, state) -> int:
        best, best_score = 0, -math.inf
        for a, (col, bias) in enumerate(zip(self._cols, self._bias)):
            score = bias + sum(map(operator.mul, state, col))
            if score > best_score:
                best, best_score = a, score
        return best


class LinearContinuousPolicy:
    emits_valid_actions = True

    def __init__(self, params, layout: LinearLayout):
        W, b = layout.unflatten(params)
        self.layout = layout
        self._cols = [tuple(W[:, a].tolist()) for a in range(layout.n_out)]
        self._bias = b.tolist()
        self._low = layout.low or (-math.inf,) * layout.n_out
        self._high = layout.high or (math.inf,) * layout.n_out

    def act(self, state) -> Tuple[float, ...]:
        return tuple(
            min(max(bias + sum(map(operator.mul, state, col)), lo), hi)
            for col, bias, lo, hi in zip(self._cols, self._bias, self._low, self._high)
        )


class TabularPolicy:
    emits_valid_actions = True

    def __init__(self, params, layout: TabularLayout, onehot: bool = False):
        self.layout = layout
        self._table = layout.unflatten(params).tolist()
        self._actions = frozenset(layout.action_set)
        self._onehot = onehot

    def act(self, state) -> int:
        s = state.index(1.0) if self._onehot else int(state)
        return _table_entry(self._table[s], self._actions, s)


def make_policy(kind: str, spec: EnvSpec, params):
    layout = layout_for(kind, spec)
    if kind == "tabular":
        return TabularPolicy(params, layout, onehot=spec.obs_kind == "onehot")
    if layout.discrete:
        return LinearDiscretePolicy(params, layout)
    return LinearContinuousPolicy(params, layout)
