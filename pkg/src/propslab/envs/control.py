"""Classic control: CartPole and the two MountainCar variants."""

from __future__ import annotations

import math

from . import constants as C
from .base import Continuous, Discrete, Env, EnvSpec

_INF = float("inf")


class CartPole(Env):
    spec = EnvSpec("cartpole", obs_dim=4, action_space=Discrete(2), max_steps=C.CARTPOLE_MAX_STEPS)

    _total_mass = C.CARTPOLE_MASS_CART + C.CARTPOLE_MASS_POLE
    _pm_length = C.CARTPOLE_MASS_POLE * C.CARTPOLE_HALF_LENGTH

    def __init__(self):
        super().__init__()
        self.state = (0.0, 0.0, 0.0, 0.0)

    def _reset(self):
        u = self.rng.uniform
        n = C.CARTPOLE_RESET_NOISE
        self.state = (u(-n, n), u(-n, n), u(-n, n), u(-n, n))
        return self.state

    def _step(self, action, _cos=math.cos, _sin=math.sin, _g=C.CARTPOLE_GRAVITY,
              _l=C.CARTPOLE_HALF_LENGTH, _mp=C.CARTPOLE_MASS_POLE, _f=C.CARTPOLE_FORCE,
              _tau=C.CARTPOLE_TAU, _xlim=C.CARTPOLE_X_LIMIT, _tlim=C.CARTPOLE_THETA_LIMIT):
        x, x_dot, theta, theta_dot = self.state
        total_mass = self._total_mass
        pm_length = self._pm_length
        force = _f if action == 1 else -_f
        cos_t = _cos(theta)
        sin_t = _sin(theta)
        temp = (force + pm_length * theta_dot * theta_dot * sin_t) / total_mass
        theta_acc = (_g * sin_t - cos_t * temp) / (_l * (4.0 / 3.0 - _mp * cos_t * cos_t / total_mass))
        x_acc = temp - pm_length * theta_acc * cos_t / total_mass
        x = x + _tau * x_dot
        x_dot = x_dot + _tau * x_acc
        theta = theta + _tau * theta_dot
        theta_dot = theta_dot + _tau * theta_acc
        self.state = (x, x_dot, theta, theta_dot)
        terminated = x < -_xlim or x > _xlim or theta < -_tlim or theta > _tlim
        return self.state, 1.0, terminated


def _mountain_car_reset(env):
    env.state = (env.rng.uniform(C.MCAR_RESET_LOW, C.MCAR_RESET_HIGH), 0.0)
    return env.state


def _integrate(position, velocity, accel):
    velocity = min(max(velocity + accel, -C.MCAR_MAX_SPEED), C.MCAR_MAX_SPEED)
    position = min(max(position + velocity, C.MCAR_MIN_POSITION), C.MCAR_MAX_POSITION)
    if position == C.MCAR_MIN_POSITION and velocity < 0:
        velocity = 0.0
    return position, velocity


class MountainCarDiscrete(Env):
    """Actions: 0 accelerate left, 1 coast, 2 accelerate right. -1 per step."""

    spec = EnvSpec("mountain-car-d", obs_dim=2, action_space=Discrete(3), max_steps=C.MCAR_D_MAX_STEPS)

    def __init__(self):
        super().__init__()
        self.state = (0.0, 0.0)

    def _reset(self):
        return _mountain_car_reset(self)

    def _step(self, action):
        position, velocity = self.state
        accel = (action - 1) * C.MCAR_D_FORCE - math.cos(3 * position) * C.MCAR_D_GRAVITY
        position, velocity = _integrate(position, velocity, accel)
        self.state = (position, velocity)
        return self.state, -1.0, position >= C.MCAR_D_GOAL and velocity >= 0


class MountainCarContinuous(Env):
    """Force in [-1, 1]; reward -0.1*a^2 per step and +100 on reaching the flag."""

    spec = EnvSpec("mountain-car-c", obs_dim=2, action_space=Continuous(1, (-1.0,), (1.0,)),
                   max_steps=C.MCAR_C_MAX_STEPS)

    def __init__(self):
        super().__init__()
        self.state = (0.0, 0.0)

    def _reset(self):
        return _mountain_car_reset(self)

    def _step(self, action):
        force = action[0]
        position, velocity = self.state
        accel = force * C.MCAR_C_POWER - C.MCAR_C_GRAVITY * math.cos(3 * position)
        position, velocity = _integrate(position, velocity, accel)
        self.state = (position, velocity)
        done = position >= C.MCAR_C_GOAL and velocity >= 0
        reward = -C.MCAR_C_ACTION_COST * force * force
        if done:
            reward += C.MCAR_C_GOAL_REWARD
        return self.state, reward, done
