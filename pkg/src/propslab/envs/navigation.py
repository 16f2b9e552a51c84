from __future__ import annotations

import math

from . import constants as C
from .base import Discrete, Env, EnvSpec


def _box_segments(x0, y0, x1, y1):
    # (axis, coordinate, lo, hi): axis 0 is a vertical wall x = coordinate
    return [(0, x0, y0, y1), (0, x1, y0, y1), (1, y0, x0, x1), (1, y1, x0, x1)]


_WALLS = _box_segments(*C.NAV_OUTER) + _box_segments(*C.NAV_INNER)


def ray_distance(x: float, y: float, angle: float, walls=_WALLS) -> float:
    """Distance from (x, y) along ``angle`` to the first wall it meets, capped at the lidar range."""
    dx, dy = math.cos(angle), math.sin(angle)
    best = math.inf
    for axis, coord, lo, hi in walls:
        if axis == 0:
            if abs(dx) < 1e-12:
                continue
            t = (coord - x) / dx
            hit = y + t * dy
        else:
            if abs(dy) < 1e-12:
                continue
            t = (coord - y) / dy
            hit = x + t * dx
        if 0.0 < t < best and lo <= hit <= hi:
            best = t
    return min(best, C.NAV_LIDAR_RANGE)


def on_track(x: float, y: float) -> bool:
    ox0, oy0, ox1, oy1 = C.NAV_OUTER
    ix0, iy0, ix1, iy1 = C.NAV_INNER
    inside_outer = ox0 < x < ox1 and oy0 < y < oy1
    inside_inner = ix0 <= x <= ix1 and iy0 <= y <= iy1
    return inside_outer and not inside_inner


class Navigation(Env):
    """Drive around a square ring track using five lidar readings.

    Lidar rays point at -90, -45, 0, 45 and 90 degrees from the heading
    (positive = counter-clockwise, i.e. to the agent's left), in that order.
    Actions: 0 forward, 1 rotate left, 2 rotate right.
    """

    spec = EnvSpec("navigation", obs_dim=5, action_space=Discrete(3), max_steps=C.NAV_MAX_STEPS)

    def __init__(self):
        super().__init__()
        self.x, self.y = C.NAV_START
        self.heading = C.NAV_START_HEADING

    def _obs(self):
        return tuple(ray_distance(self.x, self.y, self.heading + a) for a in C.NAV_LIDAR_ANGLES)

    def _reset(self):
        j = C.NAV_START_JITTER
        self.x = C.NAV_START[0] + self.rng.uniform(-j, j)
        self.y = C.NAV_START[1] + self.rng.uniform(-j, j)
        self.heading = C.NAV_START_HEADING + self.rng.uniform(-C.NAV_HEADING_JITTER, C.NAV_HEADING_JITTER)
        return self._obs()

    def _step(self, action):
        if action == 0:
            self.x += C.NAV_FORWARD_STEP * math.cos(self.heading)
            self.y += C.NAV_FORWARD_STEP * math.sin(self.heading)
            if not on_track(self.x, self.y):
                return self._obs(), C.NAV_CRASH_REWARD, True
            return self._obs(), C.NAV_FORWARD_REWARD, False
        self.heading += C.NAV_TURN if action == 1 else -C.NAV_TURN
        return self._obs(), C.NAV_TURN_REWARD, False
