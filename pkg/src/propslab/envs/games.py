"""Nim against a perfect opponent, and single-player Pong against a wall that never misses."""

from __future__ import annotations

import math

from . import constants as C
from .base import Discrete, Env, EnvSpec


def nim_opponent_take(sticks: int) -> int:
    """Rule-based opponent: leave a position with (n - 1) % 4 == 0 if possible, else take 1."""
    for take in (1, 2, 3):
        if take <= sticks and (sticks - take - 1) % 4 == 0:
            return take
    return 1


class Nim(Env):
    """Misere Nim from 10 sticks; whoever takes the last stick loses.

    Action ``a`` removes ``a + 1`` sticks (clamped to what is left). The
    observation is a one-hot vector of length 11 over sticks remaining at the
    agent's turn.
    """

    spec = EnvSpec("nim", obs_dim=C.NIM_STICKS + 1, action_space=Discrete(3),
                   max_steps=C.NIM_MAX_STEPS, obs_kind="onehot", n_states=C.NIM_STICKS + 1)

    def __init__(self, sticks: int = C.NIM_STICKS):
        super().__init__()
        self.initial = sticks
        self.sticks = sticks

    def _obs(self):
        return tuple(1.0 if i == self.sticks else 0.0 for i in range(C.NIM_STICKS + 1))

    def _reset(self):
        self.sticks = self.initial
        return self._obs()

    def _step(self, action):
        self.sticks -= min(action + 1, self.sticks)
        if self.sticks == 0:
            return self._obs(), -1.0, True
        self.sticks -= nim_opponent_take(self.sticks)
        if self.sticks == 0:
            return self._obs(), 1.0, True
        return self._obs(), 0.0, False


class Pong(Env):
    """Agent paddle on the left edge of the unit square; the right wall returns every ball.

    Observation: (paddle_y, ball_x, ball_y, ball_vx, ball_vy).
    Actions: 0 paddle up, 1 paddle down, 2 stay.
    """

    spec = EnvSpec("pong", obs_dim=5, action_space=Discrete(3), max_steps=C.PONG_MAX_STEPS)

    def __init__(self):
        super().__init__()
        self.paddle = 0.5
        self.ball = (0.5, 0.5, -C.PONG_BALL_SPEED, 0.0)
        self.hits = 0

    def _obs(self):
        return (self.paddle,) + self.ball

    def _reset(self):
        angle = self.rng.uniform(-C.PONG_MAX_ANGLE, C.PONG_MAX_ANGLE)
        self.paddle = 0.5
        self.ball = (0.5, 0.5, -C.PONG_BALL_SPEED * math.cos(angle), C.PONG_BALL_SPEED * math.sin(angle))
        self.hits = 0
        return self._obs()

    def _step(self, action):
        half = C.PONG_PADDLE_HEIGHT / 2
        if action == 0:
            self.paddle = min(self.paddle + C.PONG_PADDLE_SPEED, 1.0 - half)
        elif action == 1:
            self.paddle = max(self.paddle - C.PONG_PADDLE_SPEED, half)

        x, y, vx, vy = self.ball
        x += vx
        y += vy
        if y < 0.0:
            y, vy = -y, -vy
        elif y > 1.0:
            y, vy = 2.0 - y, -vy
        if x > 1.0:
            x, vx = 2.0 - x, -vx
        reward = 0.0
        terminated = False
        if x < 0.0:
            if abs(y - self.paddle) <= half:
                x, vx = -x, -vx
                self.hits += 1
                reward = 1.0
                terminated = self.hits >= C.PONG_MAX_HITS
            else:
                terminated = True
        self.ball = (x, y, vx, vy)
        return self._obs(), reward, terminated
