"""Benchmark objectives: diagonal quadratic, the 3-D null-direction quadratic,
synthetic logistic regression, Rosenbrock and Nesterov-Skokov."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .oracles import ObjectiveSpec, RngStream


class InvalidConfigurationError(ValueError):
    pass


# --------------------------------------------------------------------------
# Diagonal quadratic  f(x) = 1/2 sum_j d_j x_j^2  with k zero coefficients
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticDiagProblem:
    d: np.ndarray
    n: int
    k: int
    mu: float
    L: float

    def value(self, x: np.ndarray) -> float:
        return 0.5 * float(np.dot(self.d, x * x))

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.d * x

    def nearest_minimizer(self, x: np.ndarray) -> np.ndarray:
        """Projection of ``x`` onto the solution set (zero out the curved coordinates)."""
        return np.where(self.d > 0, 0.0, x)

    def objective(self) -> ObjectiveSpec:
        return ObjectiveSpec(self.n, self.value, self.gradient, f_star=0.0,
                             lipschitz_L=self.L, pl_mu=self.mu, name="quadratic")


def make_quadratic_diag(n: int, k: int, mu: float, L: float, rng: RngStream) -> QuadraticDiagProblem:
    """k zero coefficients followed by n-k draws from U[mu, L].

    The smallest and largest draws are clamped to exactly mu and L so the
    stored constants are exact.
    """
    if not 0 <= k < n:
        raise InvalidConfigurationError(f"need 0 <= k < n, got n={n}, k={k}")
    if not 0 < mu <= L:
        raise InvalidConfigurationError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    vals = rng.uniform(mu, L, n - k)
    vals[np.argmin(vals)] = mu
    if n - k > 1:
        vals[np.argmax(vals)] = L
    d = np.concatenate([np.zeros(k), vals])
    # with a single curved coordinate mu and L cannot both be exact
    mu_eff, L_eff = float(vals.min()), float(vals.max())
    d.setflags(write=False)
    return QuadraticDiagProblem(d=d, n=n, k=k, mu=mu_eff, L=L_eff)


def quadratic_from_coefficients(d) -> QuadraticDiagProblem:
    d = np.array(d, dtype=float)
    if np.any(d < 0):
        raise InvalidConfigurationError("coefficients must be nonnegative")
    nz = d[d > 0]
    if len(nz) == 0:
        raise InvalidConfigurationError("need at least one positive coefficient")
    d.setflags(write=False)
    return QuadraticDiagProblem(d=d, n=len(d), k=int(np.sum(d == 0)),
                                mu=float(nz.min()), L=float(nz.max()))


# --------------------------------------------------------------------------
# f(x) = <Ax, x>,  A = diag(L, mu, 0)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Simple3DProblem:
    L: float
    mu: float

    def __post_init__(self):
        if not (self.L > self.mu > 0):
            raise InvalidConfigurationError("need L > mu > 0")

    def objective(self) -> ObjectiveSpec:
        # grad = 2Ax, so the gradient's Lipschitz constant is 2L and the PL modulus 2mu
        return ObjectiveSpec(3, lambda x: float(self.L * x[0] ** 2 + self.mu * x[1] ** 2),
                             lambda x: simple3d_eval_grad(self, x)[1], f_star=0.0,
                             lipschitz_L=2 * self.L, pl_mu=2 * self.mu, name="simple3d")


def simple3d_eval_grad(p: Simple3DProblem, x: np.ndarray) -> tuple[float, np.ndarray]:
    if len(x) != 3:
        raise InvalidConfigurationError("simple3d expects a 3-vector")
    f = p.L * x[0] ** 2 + p.mu * x[1] ** 2
    return float(f), np.array([2 * p.L * x[0], 2 * p.mu * x[1], 0.0])


# --------------------------------------------------------------------------
# Synthetic logistic regression with a finite, unbounded set of minimizers
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LogRegData:
    W: np.ndarray  # m x n, rows are samples
    y: np.ndarray  # labels in {-1, +1}
    k: int
    basis: Optional[np.ndarray] = None  # n x k orthonormal columns

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @property
    def n(self) -> int:
        return self.W.shape[1]

    def objective(self, f_star: Optional[float] = None) -> ObjectiveSpec:
        return ObjectiveSpec(self.n, lambda x: logreg_value(self, x),
                             lambda x: logreg_eval_grad(self, x)[1], f_star=f_star,
                             lipschitz_L=logreg_lipschitz(self), name="logreg")

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["label"] + [f"x{j}" for j in range(self.n)])
            for label, row in zip(self.y, self.W):
                w.writerow([int(label)] + [repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, k: int) -> "LogRegData":
        raw = np.loadtxt(Path(path), delimiter=",", skiprows=1, ndmin=2)
        return cls(W=raw[:, 1:], y=raw[:, 0].astype(int), k=k)


def _sign(v: np.ndarray) -> np.ndarray:
    return np.where(v >= 0, 1, -1)


def generate_logreg_data(n: int, m: int, k: int, rng: RngStream) -> LogRegData:
    if k < 1 or k > min(n, m // 2) or m - 2 * k < 0:
        raise InvalidConfigurationError(f"need 1 <= k <= min(n, m/2), got n={n}, m={m}, k={k}")
    basis, _ = np.linalg.qr(rng.normal((n, k)))
    V = rng.normal((m - 2 * k, k))
    W_tilde = basis @ V.T  # n x (m - 2k)
    x_ref = rng.normal(n)
    y_tilde = _sign(W_tilde.T @ x_ref)
    y1 = _sign(basis.T @ x_ref)
    y = np.concatenate([y1, -y1, y_tilde])
    W = np.hstack([basis, basis, W_tilde]).T
    return LogRegData(W=W, y=y, k=k, basis=basis)


def _log1p_exp(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z > 0
    out[pos] = z[pos] + np.log1p(np.exp(-z[pos]))
    out[~pos] = np.log1p(np.exp(z[~pos]))
    return out


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logreg_value(data: LogRegData, x: np.ndarray) -> float:
    return float(np.mean(_log1p_exp(-data.y * (data.W @ x))))


def logreg_eval_grad(data: LogRegData, x: np.ndarray) -> tuple[float, np.ndarray]:
    z = -data.y * (data.W @ x)
    f = float(np.mean(_log1p_exp(z)))
    g = data.W.T @ (-data.y * _sigmoid(z)) / data.m
    return f, g


def power_iteration_lambda_max(A: np.ndarray, rtol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Largest eigenvalue of the PSD matrix ``A.T @ A`` by power iteration."""
    n = A.shape[1]
    v = np.ones(n) / np.sqrt(n) + 1e-3 * np.arange(n) / n
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        lam_new = float(np.dot(v, w))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= rtol * abs(lam_new):
            return lam_new
        lam = lam_new
    return lam


def logreg_lipschitz(data: LogRegData) -> float:
    """``lambda_max(A^T A) / (4m)`` with rows of A equal to ``-y_i w_i``."""
    A = -data.y[:, None] * data.W
    return power_iteration_lambda_max(A) / (4 * data.m)


# --------------------------------------------------------------------------
# Rosenbrock and Nesterov-Skokov
# --------------------------------------------------------------------------

def rosenbrock_eval_grad(x: np.ndarray) -> tuple[float, np.ndarray]:
    if len(x) != 2:
        raise InvalidConfigurationError("rosenbrock expects a 2-vector")
    x1, x2 = x
    r = x2 - x1 * x1
    f = 100.0 * r * r + (x1 - 1.0) ** 2
    return float(f), np.array([-400.0 * x1 * r + 2.0 * (x1 - 1.0), 200.0 * r])


def rosenbrock_objective() -> ObjectiveSpec:
    return ObjectiveSpec(2, lambda x: float(100.0 * (x[1] - x[0] ** 2) ** 2 + (x[0] - 1.0) ** 2),
                         lambda x: rosenbrock_eval_grad(x)[1], f_star=0.0, name="rosenbrock")


@dataclass(frozen=True)
class NesterovSkokovProblem:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InvalidConfigurationError("Nesterov-Skokov needs n >= 2")

    def residuals(self, x: np.ndarray) -> np.ndarray:
        g = np.empty(self.n)
        g[0] = 0.5 * (x[0] - 1.0)
        g[1:] = x[1:] - 2.0 * x[:-1] ** 2 + 1.0
        return g

    def value(self, x: np.ndarray) -> float:
        g = self.residuals(x)
        return float(np.dot(g, g))

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        J = np.eye(self.n)
        J[0, 0] = 0.5
        idx = np.arange(1, self.n)
        J[idx, idx - 1] = -4.0 * x[:-1]
        return J

    def objective(self) -> ObjectiveSpec:
        return ObjectiveSpec(self.n, self.value,
                             lambda x: ns_eval_grad(self, x)[1], f_star=0.0,
                             name=f"nesterov-skokov-{self.n}")

    def start(self) -> np.ndarray:
        x0 = np.ones(self.n)
        x0[0] = -1.0
        return x0


def ns_eval_grad(p: NesterovSkokovProblem, x: np.ndarray) -> tuple[float, np.ndarray]:
    if len(x) != p.n:
        raise InvalidConfigurationError(f"expected a {p.n}-vector")
    g = p.residuals(x)
    # grad = 2 J^T g with J lower bidiagonal
    grad = np.empty(p.n)
    grad[0] = 0.5 * g[0]
    grad[1:] = g[1:]
    grad[:-1] += -4.0 * x[:-1] * g[1:]
    return float(np.dot(g, g)), 2.0 * grad


def ns_minor_positivity(p: NesterovSkokovProblem, x: np.ndarray) -> list[float]:
    """Leading principal minors of ``J J^T`` via the tridiagonal recursion.

    ``J J^T`` has diagonal ``(1/4, 16 x_1^2 + 1, ..., 16 x_{n-1}^2 + 1)`` and
    off-diagonal ``(-2 x_1, -4 x_2, ..., -4 x_{n-1})``.
    """
    x = np.asarray(x, dtype=float)
    if len(x) != p.n:
        raise InvalidConfigurationError(f"expected a {p.n}-vector")
    diag = np.concatenate([[0.25], 16.0 * x[:-1] ** 2 + 1.0])
    off = np.concatenate([[-2.0 * x[0]], -4.0 * x[1:-1]])
    minors = [diag[0], diag[1] * diag[0] - off[0] ** 2]
    for j in range(2, p.n):
        minors.append(diag[j] * minors[-1] - off[j - 1] ** 2 * minors[-2])
    return [float(v) for v in minors[: p.n]]
