"""Shifted benchmark objectives f'(x) = f(x - o) with analytic gradients."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from ..errors import DimensionError, NonSmoothPoint

FUNCTIONS = ("ackley", "rastrigin", "levy", "weierstrass", "salomon")
_RADIAL_EPS = 1e-12


@dataclass(frozen=True)
class ObjectiveSpec:
    function: str
    shift: Tuple[float, ...]
    a: float = None
    b: float = None
    c: float = None
    k_max: int = 20

    def __post_init__(self):
        if self.function not in FUNCTIONS:
            raise ValueError(f"unknown objective {self.function!r}; expected one of {FUNCTIONS}")
        if len(self.shift) < 1:
            raise DimensionError("objective needs at least one dimension")
        object.__setattr__(self, "shift", tuple(float(v) for v in self.shift))
        defaults = {"ackley": (20.0, 0.2, 2 * math.pi), "weierstrass": (0.5, 3.0, None)}.get(self.function)
        if defaults:
            for name, value in zip("abc", defaults):
                if getattr(self, name) is None:
                    object.__setattr__(self, name, value)

    @property
    def dim(self) -> int:
        return len(self.shift)

    @property
    def minimizer(self) -> np.ndarray:
        o = np.asarray(self.shift)
        return o + 1.0 if self.function == "levy" else o


def sample_shift(D: int, seed: int) -> np.ndarray:
    if D < 1:
        raise DimensionError("D must be >= 1")
    rng = np.random.default_rng(seed)
    o = rng.uniform(0.0, 20.0, D)
    # uniform() is half-open; keep the interval open at 0 as well
    while np.any(o == 0.0):
        o[o == 0.0] = rng.uniform(0.0, 20.0, int(np.sum(o == 0.0)))
    return o


def make_objective(function: str, D: int, seed: int, **constants) -> ObjectiveSpec:
    return ObjectiveSpec(function, tuple(sample_shift(D, seed).tolist()), **constants)


def _z(spec: ObjectiveSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise DimensionError(f"x has shape {x.shape}, objective expects ({spec.dim},)")
    return x - np.asarray(spec.shift)


def _ackley(z, a, b, c):
    D = z.size
    r = math.sqrt(float(np.dot(z, z)) / D)
    return -a * math.exp(-b * r) - math.exp(float(np.cos(c * z).sum()) / D) + a + math.e


def _ackley_grad(z, a, b, c):
    D = z.size
    r = math.sqrt(float(np.dot(z, z)) / D)
    if r < _RADIAL_EPS:
        raise NonSmoothPoint("Ackley is not differentiable at its centre")
    g1 = a * b * math.exp(-b * r) * z / (D * r)
    g2 = math.exp(float(np.cos(c * z).sum()) / D) * c * np.sin(c * z) / D
    return g1 + g2


def _rastrigin(z):
    return 10.0 * z.size + float(np.sum(z * z - 10.0 * np.cos(2 * math.pi * z)))


def _rastrigin_grad(z):
    return 2.0 * z + 20.0 * math.pi * np.sin(2 * math.pi * z)


def _levy(z):
    w = 1.0 + (z - 1.0) / 4.0
    head = math.sin(math.pi * w[0]) ** 2
    mid = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(math.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + math.sin(2 * math.pi * w[-1]) ** 2)
    return float(head + mid + tail)


def _levy_grad(z):
    w = 1.0 + (z - 1.0) / 4.0
    gw = np.zeros_like(w)
    gw[0] += 2 * math.pi * math.sin(math.pi * w[0]) * math.cos(math.pi * w[0])
    wm = w[:-1]
    s = np.sin(math.pi * wm + 1.0)
    gw[:-1] += 2 * (wm - 1.0) * (1.0 + 10.0 * s ** 2) + (wm - 1.0) ** 2 * 20.0 * math.pi * s * np.cos(math.pi * wm + 1.0)
    wl = w[-1]
    sl = math.sin(2 * math.pi * wl)
    gw[-1] += 2 * (wl - 1.0) * (1.0 + sl ** 2) + (wl - 1.0) ** 2 * 4 * math.pi * sl * math.cos(2 * math.pi * wl)
    return gw / 4.0


def _weierstrass_terms(a, b, k_max):
    k = np.arange(k_max + 1)
    return a ** k, b ** k


def _weierstrass(z, a, b, k_max):
    ak, bk = _weierstrass_terms(a, b, k_max)
    inner = np.cos(2 * math.pi * np.outer(z + 0.5, bk)) @ ak
    return float(inner.sum() - z.size * np.dot(ak, np.cos(math.pi * bk)))


def _weierstrass_grad(z, a, b, k_max):
    ak, bk = _weierstrass_terms(a, b, k_max)
    return -np.sin(2 * math.pi * np.outer(z + 0.5, bk)) @ (ak * 2 * math.pi * bk)


def _salomon(z):
    r = math.sqrt(float(np.dot(z, z)))
    return 1.0 - math.cos(2 * math.pi * r) + 0.1 * r


def _salomon_grad(z):
    r = math.sqrt(float(np.dot(z, z)))
    if r < _RADIAL_EPS:
        raise NonSmoothPoint("Salomon is not differentiable at its centre")
    return (2 * math.pi * math.sin(2 * math.pi * r) + 0.1) * z / r


def eval_objective(spec: ObjectiveSpec, x) -> float:
    z = _z(spec, x)
    fn = spec.function
    if fn == "ackley":
        return _ackley(z, spec.a, spec.b, spec.c)
    if fn == "rastrigin":
        return _rastrigin(z)
    if fn == "levy":
        return _levy(z)
    if fn == "weierstrass":
        return _weierstrass(z, spec.a, spec.b, spec.k_max)
    return _salomon(z)


def grad_objective(spec: ObjectiveSpec, x) -> np.ndarray:
    z = _z(spec, x)
    fn = spec.function
    if fn == "ackley":
        return _ackley_grad(z, spec.a, spec.b, spec.c)
    if fn == "rastrigin":
        return _rastrigin_grad(z)
    if fn == "levy":
        return _levy_grad(z)
    if fn == "weierstrass":
        return _weierstrass_grad(z, spec.a, spec.b, spec.k_max)
    return _salomon_grad(z)
