from __future__ import annotations

import math

from ..errors import PolicyShapeMismatch
from .base import EpisodeReturn, derive_seed


def rollout(env, policy, seed: int) -> EpisodeReturn:
    """Run one episode from ``env.reset(seed)`` and sum the rewards."""
    layout = getattr(policy, "layout", None)
    if layout is not None:
        expected = getattr(layout, "obs_dim", None)
        if expected is not None and expected != env.spec.obs_dim:
            raise PolicyShapeMismatch(
                f"policy built for {expected} features, {env.spec.name} emits {env.spec.obs_dim}"
            )
    obs = env.reset(seed)
    act = policy.act
    # inlined Env.step: same validation, counting and truncation, minus the per-step allocation
    check = env._check_action
    transition = env._step
    if getattr(policy, "emits_valid_actions", False):
        check = _identity
    max_steps = env.spec.max_steps
    total = 0.0
    steps = 0
    while True:
        obs, reward, terminated = transition(check(act(obs)))
        total += reward
        steps += 1
        if terminated or steps >= max_steps:
            env._steps = steps
            env._done = True
            return EpisodeReturn(total, steps)


def _identity(action):
    return action


def episode_seeds(seed: int, episodes: int):
    return [derive_seed(seed, i) for i in range(episodes)]


def evaluate(env, policy, episodes: int, seed: int) -> float:
    """Mean return over ``episodes`` rollouts seeded with ``derive_seed(seed, i)``."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    total = math.fsum(rollout(env, policy, s).total_reward for s in episode_seeds(seed, episodes))
    return total / episodes
