"""Native, seed-deterministic environments behind a common reset/step interface."""

from .base import (
    Continuous,
    Discrete,
    Env,
    EnvSpec,
    EpisodeReturn,
    StepResult,
    derive_seed,
    splitmix64,
)
from .control import CartPole, MountainCarContinuous, MountainCarDiscrete
from .games import Nim, Pong
from .grid import CliffWalking, FrozenLake, Maze
from .navigation import Navigation
from .rollout import episode_seeds, evaluate, rollout

ENVIRONMENTS = {
    cls.spec.name: cls
    for cls in (
        FrozenLake,
        CliffWalking,
        MountainCarDiscrete,
        MountainCarContinuous,
        CartPole,
        Maze,
        Navigation,
        Nim,
        Pong,
    )
}


def make_env(name: str) -> Env:
    try:
        return ENVIRONMENTS[name]()
    except KeyError:
        raise KeyError(f"unknown environment {name!r}; known: {', '.join(ENVIRONMENTS)}") from None


def env_spec(name: str) -> EnvSpec:
    return make_env(name).spec


def describe_envs():
    """Rows of (name, observation space, action space, max_steps) for listing."""
    rows = []
    for name, cls in ENVIRONMENTS.items():
        spec = cls.spec
        if spec.n_states is not None and spec.obs_kind == "index":
            obs = f"Discrete({spec.n_states})"
        else:
            obs = f"Box({spec.obs_dim},)"
        rows.append((name, obs, spec.action_space.describe(), spec.max_steps))
    return rows


__all__ = [
    "CartPole", "CliffWalking", "Continuous", "Discrete", "ENVIRONMENTS", "Env", "EnvSpec",
    "EpisodeReturn", "FrozenLake", "Maze", "MountainCarContinuous", "MountainCarDiscrete",
    "Navigation", "Nim", "Pong", "StepResult", "derive_seed", "describe_envs", "env_spec",
    "episode_seeds", "evaluate", "make_env", "rollout", "splitmix64",
]
