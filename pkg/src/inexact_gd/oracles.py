"""Objectives, noise direction models and additively inexact oracles.

An :class:`InexactOracle` wraps an exact :class:`ObjectiveSpec` and returns

    grad_tilde(x) = grad f(x) + delta * u(x),   ||u(x)|| <= 1
    f_tilde(x)    = f(x) + small_delta * eta,   eta ~ U[-1, 1]

so that ``||grad f - grad_tilde|| <= delta`` and ``|f - f_tilde| <= small_delta``
hold at every query.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# Degenerate-norm floor used by the sphere sampler and the antigradient model.
TINY_NORM = 1e-300


def vec_norm(v: np.ndarray) -> float:
    """Euclidean norm; cheaper than ``np.linalg.norm`` for short vectors."""
    return math.sqrt(float(np.dot(v, v)))


def all_finite(v: np.ndarray) -> bool:
    return math.isfinite(float(np.dot(v, v))) or bool(np.isfinite(v).all())


class InvalidDimensionError(ValueError):
    pass


class NumericOverflowError(ArithmeticError):
    """A non-finite value appeared; ``point`` is the offending query point."""

    def __init__(self, message: str, point: np.ndarray):
        super().__init__(message)
        self.point = np.array(point, dtype=float, copy=True)


class RngStream:
    """Deterministic random stream identified by ``(seed, stream_id)``.

    Identical seed, stream id and query sequence give bit-identical draws.
    ``child(i)`` derives an independent sub-stream.
    """

    def __init__(self, seed: int, stream_id: int = 0, _path: tuple = ()):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._path = tuple(_path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self._path)
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self._path + (int(index),))

    def replay(self) -> "RngStream":
        """A fresh copy of this stream positioned at its start."""
        return RngStream(self.seed, self.stream_id, self._path)

    def normal(self, size) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self._path})"


@dataclass
class ObjectiveSpec:
    """An objective with exact value/gradient and optional known constants."""

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    f_star: Optional[float] = None
    lipschitz_L: Optional[float] = None
    pl_mu: Optional[float] = None
    name: str = "objective"

    def __post_init__(self):
        if self.dim < 1:
            raise InvalidDimensionError(f"dim must be positive, got {self.dim}")
        if self.lipschitz_L is not None and self.lipschitz_L <= 0:
            raise ValueError("lipschitz_L must be positive")
        if self.pl_mu is not None and self.pl_mu <= 0:
            raise ValueError("pl_mu must be positive")

    def gap(self, fx: float) -> float:
        """``f(x) - f*`` when ``f*`` is known, else the raw value."""
        return fx - self.f_star if self.f_star is not None else fx


class NoiseKind(str, enum.Enum):
    NONE = "none"
    RANDOM_SPHERE = "random"
    ANTIGRADIENT = "antigradient"
    CONSTANT = "constant"
    FIRST_COMPONENT_BIAS = "first-component"


@dataclass(frozen=True)
class NoiseDirectionModel:
    """Rule producing the unit (or zero) perturbation direction ``u(x)``.

    Use the classmethod constructors; ``constant`` normalizes its vector and
    rejects the zero vector.
    """

    kind: NoiseKind
    vector: Optional[np.ndarray] = field(default=None, compare=False)

    @classmethod
    def none(cls) -> "NoiseDirectionModel":
        return cls(NoiseKind.NONE)

    @classmethod
    def random_sphere(cls) -> "NoiseDirectionModel":
        return cls(NoiseKind.RANDOM_SPHERE)

    @classmethod
    def antigradient(cls) -> "NoiseDirectionModel":
        return cls(NoiseKind.ANTIGRADIENT)

    @classmethod
    def first_component_bias(cls) -> "NoiseDirectionModel":
        return cls(NoiseKind.FIRST_COMPONENT_BIAS)

    @classmethod
    def constant(cls, v) -> "NoiseDirectionModel":
        v = np.asarray(v, dtype=float).ravel()
        norm = np.linalg.norm(v)
        if not np.isfinite(norm) or norm < TINY_NORM:
            raise ValueError("constant noise vector must be finite and nonzero")
        unit = v / norm
        unit.setflags(write=False)
        return cls(NoiseKind.CONSTANT, unit)

    def __str__(self):
        if self.kind is NoiseKind.CONSTANT:
            return "constant(" + ",".join(repr(float(c)) for c in self.vector) + ")"
        return self.kind.value


def sample_unit_sphere(dim: int, rng: RngStream) -> np.ndarray:
    """Uniform sample from the unit sphere in ``R^dim`` (normalized Gaussian)."""
    if dim < 1:
        raise InvalidDimensionError(f"dim must be >= 1, got {dim}")
    while True:
        g = rng.normal(dim)
        norm = vec_norm(g)
        if norm >= TINY_NORM:
            return g / norm


def noise_direction(model: NoiseDirectionModel, x: np.ndarray, grad: np.ndarray,
                    rng: RngStream) -> np.ndarray:
    """Direction ``u`` with ``||u|| <= 1``; ``grad`` is the exact gradient at ``x``."""
    n = len(x)
    kind = model.kind
    if kind is NoiseKind.NONE:
        return np.zeros(n)
    if kind is NoiseKind.RANDOM_SPHERE:
        return sample_unit_sphere(n, rng)
    if kind is NoiseKind.ANTIGRADIENT:
        gnorm = vec_norm(grad)
        if gnorm < TINY_NORM:
            return np.zeros(n)
        return -grad / gnorm
    if kind is NoiseKind.CONSTANT:
        if len(model.vector) != n:
            raise InvalidDimensionError(
                f"constant noise vector has length {len(model.vector)}, expected {n}")
        return model.vector
    if kind is NoiseKind.FIRST_COMPONENT_BIAS:
        u = np.zeros(n)
        u[0] = -1.0
        return u
    raise ValueError(f"unknown noise model {model!r}")


class InexactOracle:
    """Gradient oracle with additive error at most ``delta`` and value oracle
    with additive error at most ``small_delta``.

    Gradient noise and value noise draw from two independent children of
    ``rng`` so changing ``small_delta`` never shifts the gradient noise.
    Query counters are kept for the solvers' bookkeeping.
    """

    def __init__(self, objective: ObjectiveSpec, delta: float = 0.0, small_delta: float = 0.0,
                 noise: Optional[NoiseDirectionModel] = None, rng: Optional[RngStream] = None):
        if delta < 0 or small_delta < 0:
            raise ValueError("noise levels must be nonnegative")
        self.objective = objective
        self.delta = float(delta)
        self.small_delta = float(small_delta)
        self.noise = noise if noise is not None else NoiseDirectionModel.none()
        self.rng = rng if rng is not None else RngStream(0)
        self._grad_rng = self.rng.child(0)
        self._value_rng = self.rng.child(1)
        self.grad_queries = 0
        self.value_queries = 0

    def gradient_pair(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(exact_grad, inexact_grad)`` at ``x`` (counts one query)."""
        self.grad_queries += 1
        g = np.asarray(self.objective.gradient(x), dtype=float)
        if not all_finite(g):
            raise NumericOverflowError("non-finite gradient", x)
        if self.delta == 0.0:
            return g, g.copy()
        u = noise_direction(self.noise, x, g, self._grad_rng)
        return g, g + self.delta * u

    def value_pair(self, x: np.ndarray) -> tuple[float, float]:
        """Return ``(exact_value, inexact_value)`` at ``x`` (counts one query)."""
        self.value_queries += 1
        fx = float(self.objective.value(x))
        if self.small_delta == 0.0:
            return fx, fx
        eta = self._value_rng.uniform(-1.0, 1.0)
        return fx, fx + self.small_delta * eta


def inexact_gradient(oracle: InexactOracle, x: np.ndarray) -> np.ndarray:
    return oracle.gradient_pair(x)[1]


def inexact_value(oracle: InexactOracle, x: np.ndarray) -> float:
    return oracle.value_pair(x)[1]


def default_fd_step(x: np.ndarray) -> float:
    return 1e-6 * max(1.0, float(np.linalg.norm(x)))


def finite_diff_gradient(objective: ObjectiveSpec, x: np.ndarray, h: Optional[float] = None) -> np.ndarray:
    """Central-difference gradient of ``objective.value`` at ``x``."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = default_fd_step(x)
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(len(x)):
        e[i] = h
        g[i] = (objective.value(x + e) - objective.value(x - e)) / (2 * h)
        e[i] = 0.0
    return g


def gradient_rel_error(objective: ObjectiveSpec, x: np.ndarray, h: Optional[float] = None) -> float:
    """``||fd - grad|| / max(1, ||grad||)`` at ``x``."""
    g = np.asarray(objective.gradient(x), dtype=float)
    fd = finite_diff_gradient(objective, x, h)
    return float(np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g)))
