"""Larger policy parameterisations searched through a small latent vector.

* random orthonormal projections (theta = Q z) built by Householder QR of a
  seeded Gaussian matrix,
* small feed-forward policies whose layers are projected independently,
* dynamic motor primitives (tau^2 y'' = f(s)) with a normalised Gaussian
  forcing term, plus a tracking cost for a synthetic reference trajectory.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, LengthMismatch, NumericOverflow, PolicyShapeMismatch


def householder_qr(G: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Thin QR of a tall matrix by Householder reflections.

    Columns are sign-normalised so that diag(R) >= 0, which makes Q a
    deterministic function of G.
    """
    A = np.array(G, dtype=float)
    m, n = A.shape
    if n > m:
        raise DimensionError(f"need rows >= cols, got {m}x{n}")
    vs = []
    for j in range(n):
        x = A[j:, j]
        norm_x = np.linalg.norm(x)
        v = x.copy()
        v[0] += math.copysign(norm_x, x[0]) if x[0] != 0 else norm_x
        vnorm = np.linalg.norm(v)
        if vnorm > 0:
            v /= vnorm
            A[j:, j:] -= 2.0 * np.outer(v, v @ A[j:, j:])
        vs.append(v)
    R = np.triu(A[:n, :n])
    Q = np.zeros((m, n))
    Q[:n, :n] = np.eye(n)
    for j in reversed(range(n)):
        v = vs[j]
        Q[j:, :] -= 2.0 * np.outer(v, v @ Q[j:, :])
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return Q * signs, R * signs[:, None]


@dataclass(frozen=True)
class ProjectionMap:
    Q: np.ndarray = field(repr=False)
    D: int
    k: int
    seed: int

    def to_json(self, include_matrix: bool = False) -> str:
        payload = {"D": self.D, "k": self.k, "seed": self.seed}
        if include_matrix:
            payload["Q"] = self.Q.tolist()
        return json.dumps(payload)

    @classmethod
    def from_json(cls, text: str) -> "ProjectionMap":
        payload = json.loads(text)
        pm = make_projection(payload["D"], payload["k"], payload["seed"])
        if "Q" in payload and not np.allclose(pm.Q, np.asarray(payload["Q"]), atol=1e-12):
            raise ValueError("stored matrix does not match the one regenerated from its seed")
        return pm


def make_projection(D: int, k: int, seed: int) -> ProjectionMap:
    if not 1 <= k <= D:
        raise DimensionError(f"need 1 <= k <= D, got k={k}, D={D}")
    G = np.random.default_rng(seed).standard_normal((D, k))
    Q, _ = householder_qr(G)
    Q.setflags(write=False)
    return ProjectionMap(Q, D, k, seed)


def lift(pmap: ProjectionMap, z) -> np.ndarray:
    z = np.asarray(z, dtype=float).ravel()
    if z.shape[0] != pmap.k:
        raise DimensionError(f"latent vector has {z.shape[0]} entries, map expects {pmap.k}")
    return pmap.Q @ z


@dataclass(frozen=True)
class MlpLayout:
    sizes: Tuple[int, ...]
    activation: str = "tanh"
    low: Optional[Tuple[float, ...]] = None
    high: Optional[Tuple[float, ...]] = None

    def layer_counts(self) -> Tuple[int, ...]:
        return tuple(a * b + b for a, b in zip(self.sizes[:-1], self.sizes[1:]))

    @property
    def rank(self) -> int:
        return sum(self.layer_counts())

    def unflatten(self, params):
        params = np.asarray(params, dtype=float).ravel()
        if params.shape[0] != self.rank:
            raise PolicyShapeMismatch(f"MLP {self.sizes} needs {self.rank} parameters, got {params.shape[0]}")
        layers, start = [], 0
        for n_in, n_out in zip(self.sizes[:-1], self.sizes[1:]):
            W = params[start:start + n_in * n_out].reshape(n_in, n_out)
            start += n_in * n_out
            b = params[start:start + n_out]
            start += n_out
            layers.append((W, b))
        return layers


_ACTIVATIONS = {"tanh": np.tanh, "relu": lambda x: np.maximum(x, 0.0), "identity": lambda x: x}


def mlp_act(params, layout: MlpLayout, state) -> np.ndarray:
    h = np.asarray(state, dtype=float)
    if h.shape[0] != layout.sizes[0]:
        raise PolicyShapeMismatch(f"state has {h.shape[0]} features, MLP expects {layout.sizes[0]}")
    layers = layout.unflatten(params)
    act = _ACTIVATIONS[layout.activation]
    for i, (W, b) in enumerate(layers):
        h = h @ W + b
        if i < len(layers) - 1:
            h = act(h)
    if layout.low is not None:
        h = np.clip(h, layout.low, layout.high)
    return h


class MlpPolicy:
    def __init__(self, params, layout: MlpLayout):
        self.layout = layout
        self.params = np.asarray(params, dtype=float)
        layout.unflatten(self.params)

    def act(self, state):
        out = mlp_act(self.params, self.layout, state)
        return tuple(out.tolist())


class LayerwiseProjection:
    """One projection per MLP layer; the latent vector is the concatenation of per-layer latents."""

    def __init__(self, layout: MlpLayout, latent_dims: Sequence[int], seed: int):
        counts = layout.layer_counts()
        if len(latent_dims) != len(counts):
            raise DimensionError(f"need one latent size per layer ({len(counts)}), got {len(latent_dims)}")
        self.layout = layout
        self.maps = [make_projection(D, k, seed + i) for i, (D, k) in enumerate(zip(counts, latent_dims))]

    @property
    def k(self) -> int:
        return sum(m.k for m in self.maps)

    def lift(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float).ravel()
        if z.shape[0] != self.k:
            raise DimensionError(f"latent vector has {z.shape[0]} entries, expected {self.k}")
        parts, start = [], 0
        for m in self.maps:
            parts.append(lift(m, z[start:start + m.k]))
            start += m.k
        return np.concatenate(parts)


# Dynamic motor primitives


@dataclass(frozen=True)
class DmpParams:
    w: Tuple[float, ...]
    c: Tuple[float, ...]
    h: Tuple[float, ...]
    tau: float = 1.0
    y0: float = 0.0
    ydot0: float = 0.0
    duration: float = 1.0
    dt: float = 0.01

    def __post_init__(self):
        n = len(self.w)
        if n < 1 or len(self.c) != n or len(self.h) != n:
            raise DimensionError("w, c and h need the same non-zero length")
        if any(hi <= 0 for hi in self.h):
            raise ValueError("basis widths must be positive")
        if self.tau <= 0 or self.duration <= 0 or self.dt <= 0:
            raise ValueError("tau, duration and dt must be positive")


def default_basis(n: int) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    """Centres equally spaced on [0, 1], widths 1 / (2 * spacing^2)."""
    if n == 1:
        return (0.5,), (0.5,)
    centres = np.linspace(0.0, 1.0, n)
    spacing = centres[1] - centres[0]
    return tuple(centres.tolist()), (1.0 / (2.0 * spacing ** 2),) * n


def make_dmp(weights, **kwargs) -> DmpParams:
    c, h = default_basis(len(weights))
    return DmpParams(tuple(float(x) for x in weights), c, h, **kwargs)


def dmp_basis(s: float, c_i: float, h_i: float) -> float:
    return math.exp(-h_i * (s - c_i) ** 2)


def dmp_forcing(s: float, p: DmpParams) -> float:
    psi = np.exp(-np.asarray(p.h) * (s - np.asarray(p.c)) ** 2)
    total = psi.sum()
    if total <= 0.0:
        # every basis underflowed; fall back to the nearest centre
        return float(p.w[int(np.argmin(np.abs(s - np.asarray(p.c))))])
    return float(np.dot(p.w, psi) / total)


def dmp_rollout(p: DmpParams) -> np.ndarray:
    """Explicit Euler on y'' = f(s) / tau^2 with phase s = t / duration.

    Returns ``round(duration / dt) + 1`` samples starting at ``y0``.
    """
    n = int(round(p.duration / p.dt))
    y = np.empty(n + 1)
    y[0] = pos = p.y0
    vel = p.ydot0
    inv_tau2 = 1.0 / (p.tau * p.tau)
    for i in range(n):
        s = min(i * p.dt / p.duration, 1.0)
        acc = dmp_forcing(s, p) * inv_tau2
        pos, vel = pos + p.dt * vel, vel + p.dt * acc
        if not (math.isfinite(pos) and math.isfinite(vel)):
            raise NumericOverflow(f"DMP state diverged at step {i}")
        y[i + 1] = pos
    return y


def tracking_cost(trajectory, reference) -> float:
    a = np.asarray(trajectory, dtype=float)
    b = np.asarray(reference, dtype=float)
    if a.shape != b.shape:
        raise LengthMismatch(f"trajectory has {a.shape} samples, reference has {b.shape}")
    return float(np.mean((a - b) ** 2))
