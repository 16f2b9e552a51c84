from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional, Tuple, Union

from ..errors import InvalidAction, StepAfterEnd

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Child seed for stream ``index`` of ``seed``.

    ``splitmix64((splitmix64(seed mod 2**64) + index) mod 2**64)``. Used for
    per-episode seeds inside an evaluation block, per-iteration evaluation
    seeds inside a run, and per-trial seeds inside an experiment.
    """
    return splitmix64((splitmix64(seed & MASK64) + index) & MASK64)


@dataclass(frozen=True)
class Discrete:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Discrete space needs n >= 2")

    def describe(self) -> str:
        return f"Discrete({self.n})"


@dataclass(frozen=True)
class Continuous:
    dim: int
    low: Tuple[float, ...]
    high: Tuple[float, ...]

    def __post_init__(self):
        if len(self.low) != self.dim or len(self.high) != self.dim:
            raise ValueError("bounds must have one entry per dimension")
        if any(lo >= hi for lo, hi in zip(self.low, self.high)):
            raise ValueError("Continuous space needs low < high per dimension")

    def describe(self) -> str:
        return f"Box({self.dim},) in [{self.low}, {self.high}]"


ActionSpace = Union[Discrete, Continuous]


@dataclass(frozen=True)
class EnvSpec:
    """Identity and interface of one environment.

    ``obs_kind`` is ``"index"`` (observation is a state number),
    ``"onehot"`` (vector with a single 1 at the state number) or
    ``"vector"`` (real features).
    """

    name: str
    obs_dim: int
    action_space: ActionSpace
    max_steps: int
    obs_kind: str = "vector"
    n_states: Optional[int] = None

    def __post_init__(self):
        if self.max_steps <= 0:
            raise ValueError("max_steps must be positive")

    @property
    def discrete_actions(self) -> bool:
        return isinstance(self.action_space, Discrete)


class StepResult(NamedTuple):
    observation: Any
    reward: float
    terminated: bool
    truncated: bool


@dataclass(frozen=True)
class EpisodeReturn:
    total_reward: float
    steps: int


class Env:
    """Episodic environment with Gymnasium-style reset/step.

    Subclasses implement ``_reset(rng)`` returning the first observation and
    ``_step(action)`` returning ``(observation, reward, terminated)``. Step
    counting, truncation and action validation live here.
    """

    spec: EnvSpec

    def __init__(self):
        self.rng = random.Random(0)
        self._steps = 0
        self._done = True

    def reset(self, seed: int = 0):
        self.rng = random.Random(seed)
        self._steps = 0
        self._done = False
        return self._reset()

    def step(self, action) -> StepResult:
        if self._done:
            raise StepAfterEnd(f"{self.spec.name}: episode finished, call reset()")
        action = self._check_action(action)
        obs, reward, terminated = self._step(action)
        self._steps += 1
        truncated = (not terminated) and self._steps >= self.spec.max_steps
        self._done = terminated or truncated
        return StepResult(obs, reward, terminated, truncated)

    @property
    def steps(self) -> int:
        return self._steps

    def state_index(self, obs) -> int:
        """Map an observation to its discrete state number (tabular policies)."""
        if self.spec.obs_kind == "index":
            return int(obs)
        if self.spec.obs_kind == "onehot":
            return max(range(len(obs)), key=obs.__getitem__)
        raise TypeError(f"{self.spec.name} has a continuous state space")

    def _check_action(self, action):
        space = self.spec.action_space
        if isinstance(space, Discrete):
            try:
                a = int(action)
            except (TypeError, ValueError):
                raise InvalidAction(f"{self.spec.name}: action {action!r} is not an index")
            if a != action or not 0 <= a < space.n:
                raise InvalidAction(f"{self.spec.name}: action {action!r} outside Discrete({space.n})")
            return a
        if isinstance(action, (int, float)):
            action = (float(action),)
        if len(action) != space.dim:
            raise InvalidAction(f"{self.spec.name}: expected {space.dim} action dims, got {len(action)}")
        return tuple(min(max(float(v), lo), hi) for v, lo, hi in zip(action, space.low, space.high))

    def _reset(self):
        raise NotImplementedError

    def _step(self, action):
        raise NotImplementedError
