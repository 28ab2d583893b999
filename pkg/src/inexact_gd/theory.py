"""Closed-form iteration budgets and distance bounds, plus post-hoc
certificates that replay a trajectory against the descent inequalities.

All ``log`` terms are natural logarithms. Ceiling/log terms whose argument is
at most 1 are clamped to zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .oracles import ObjectiveSpec
from .solvers import RuleKind, RunResult


class InfiniteBudgetError(ValueError):
    pass


class NotApplicableError(ValueError):
    pass


class PremiseViolatedError(ValueError):
    pass


class DimensionMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class TheoryInputs:
    L: float
    delta: float
    gap0: float
    mu: Optional[float] = None
    small_delta: float = 0.0
    L_min: Optional[float] = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.delta < 0 or self.small_delta < 0 or self.gap0 < 0:
            raise ValueError("delta, small_delta and gap0 must be nonnegative")
        if self.mu is not None and not self.mu > 0:
            raise ValueError("mu must be positive when given")
        if self.L_min is not None and not self.L_min > 0:
            raise ValueError("L_min must be positive when given")

    @property
    def gamma(self) -> Optional[float]:
        return None if self.L_min is None else self.L / self.L_min


def _need_mu(inp: TheoryInputs) -> float:
    if inp.mu is None:
        raise NotApplicableError("this bound needs the PL constant mu")
    return inp.mu


def _need_delta(inp: TheoryInputs) -> float:
    if inp.delta == 0:
        raise InfiniteBudgetError("delta = 0 gives no finite budget; use rule-based stopping")
    return inp.delta


def _clamped_log(arg: float) -> float:
    return math.log(arg) if arg > 1.0 else 0.0


def budget_const(inp: TheoryInputs) -> int:
    """``ceil((L/mu) ln(mu gap0 / (6 delta^2)))``, at least 0."""
    mu, delta = _need_mu(inp), _need_delta(inp)
    arg = mu * inp.gap0 / (6.0 * delta * delta)
    if arg <= 1.0:
        return 0
    return max(0, math.ceil(inp.L / mu * math.log(arg)))


def budget_no_pl(inp: TheoryInputs) -> float:
    """Strict upper bound ``2 L gap0 / delta^2`` on the stopping iteration."""
    delta = _need_delta(inp)
    return 2.0 * inp.L * inp.gap0 / (delta * delta)


def gap_guarantees(inp: TheoryInputs) -> tuple[float, float]:
    """``(7 delta^2 / mu, 5 delta^2 / mu)`` for the sqrt(6)- and 2-delta rules."""
    mu = _need_mu(inp)
    d2 = inp.delta * inp.delta
    return 7.0 * d2 / mu, 5.0 * d2 / mu


def dist_bound_const(inp: TheoryInputs) -> float:
    mu, delta = _need_mu(inp), _need_delta(inp)
    arg = mu * inp.gap0 / (6.0 * delta * delta)
    steps = math.ceil(math.log(arg)) if arg > 1.0 else 0
    return (2.0 * delta / mu) * math.sqrt(1.0 + inp.L / mu) * steps + 4.0 * math.sqrt(inp.L * inp.gap0) / mu


def dist_bounds_no_mu(inp: TheoryInputs, N: float) -> tuple[float, float]:
    """Distance bounds without mu: ``(2N delta/L + 2 sqrt(N gap0/L), (4 + 2 sqrt 2) gap0/delta)``."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    a = 2.0 * N * inp.delta / inp.L + 2.0 * math.sqrt(N) * math.sqrt(inp.gap0 / inp.L)
    b = (4.0 + 2.0 * math.sqrt(2.0)) * inp.gap0 / _need_delta(inp)
    return a, b


def budget_adaptive(inp: TheoryInputs) -> int:
    """``ceil((8L/mu) ln(mu gap0 / delta^2))``, at least 0."""
    mu, delta = _need_mu(inp), _need_delta(inp)
    arg = mu * inp.gap0 / (delta * delta)
    if arg <= 1.0:
        return 0
    return max(0, math.ceil(8.0 * inp.L / mu * math.log(arg)))


def budget_adaptive_delta(inp: TheoryInputs) -> float:
    """``2 L gap0 / (delta^2 - 16 L small_delta)``; needs ``delta^2 > 16 L small_delta``."""
    denom = inp.delta * inp.delta - 16.0 * inp.L * inp.small_delta
    if denom <= 0:
        raise PremiseViolatedError("need delta^2 > 16 L small_delta")
    return 2.0 * inp.L * inp.gap0 / denom


def dist_bound_adaptive(inp: TheoryInputs) -> tuple[float, float]:
    """Distance bounds for the adaptive method.

    Returns the bound with ``gamma = L / L_min`` and the relaxed bound
    (valid for any ``L_min > 0``) evaluated at ``N = budget_adaptive(inp)``.
    """
    if inp.L_min is None:
        raise NotApplicableError("adaptive distance bounds need L_min")
    mu, delta = _need_mu(inp), _need_delta(inp)
    L, gamma, L_min = inp.L, inp.gamma, inp.L_min
    log_term = _clamped_log(mu * inp.gap0 / (delta * delta))
    thm = (8.0 * delta / mu * math.sqrt(0.5 * gamma * gamma + 4.0 * gamma * L / mu) * log_term
           + 16.0 * math.sqrt(gamma * L * inp.gap0) / mu)
    N = budget_adaptive(inp)
    relaxed = (N * delta * math.sqrt(1.0 / (2.0 * L_min * L_min) + 4.0 / (mu * L_min))
               + 16.0 * math.sqrt(L / L_min) * math.sqrt(L * inp.gap0) / mu)
    return thm, relaxed


def effective_L_hat(accepted_L, mu: float) -> float:
    """Descriptive constant with ``prod(1 - mu/(4 L_j)) = (1 - mu/(4 L_hat))^N``.

    Carries no guarantee; returns nan when undefined.
    """
    L = np.asarray(accepted_L, dtype=float)
    if len(L) == 0 or np.any(L <= mu / 4):
        return math.nan
    geo = math.exp(np.mean(np.log1p(-mu / (4.0 * L))))
    return (mu / 4.0) / (1.0 - geo)


@dataclass
class BoundsReport:
    n_star_const: Optional[int] = None
    n_cap_no_pl: Optional[float] = None
    gap_guarantee_const: Optional[float] = None
    dist_bound_const: Optional[float] = None
    dist_bound_no_mu_a: Optional[float] = None
    dist_bound_no_mu_b: Optional[float] = None
    n_star_adaptive: Optional[int] = None
    n_cap_adaptive_delta: Optional[float] = None
    gap_guarantee_adaptive: Optional[float] = None
    dist_bound_adaptive: Optional[float] = None
    dist_bound_relaxed: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def bounds_report(inp: TheoryInputs, N: Optional[float] = None) -> BoundsReport:
    """Evaluate every applicable bound; inapplicable fields stay ``None``.

    The mu-free distance bound (a) is evaluated at ``N`` if given, else at
    the mu-free iteration cap.
    """
    rep = BoundsReport()

    def attempt(fn, *args):
        try:
            return fn(*args)
        except (NotApplicableError, InfiniteBudgetError, PremiseViolatedError):
            return None

    rep.n_star_const = attempt(budget_const, inp)
    rep.n_cap_no_pl = attempt(budget_no_pl, inp)
    gaps = attempt(gap_guarantees, inp)
    if gaps is not None:
        rep.gap_guarantee_const, rep.gap_guarantee_adaptive = gaps
    rep.dist_bound_const = attempt(dist_bound_const, inp)
    n_eval = N if N is not None else rep.n_cap_no_pl
    if n_eval is not None:
        no_mu = attempt(dist_bounds_no_mu, inp, n_eval)
        if no_mu is not None:
            rep.dist_bound_no_mu_a, rep.dist_bound_no_mu_b = no_mu
    rep.n_star_adaptive = attempt(budget_adaptive, inp)
    rep.n_cap_adaptive_delta = attempt(budget_adaptive_delta, inp)
    adapt = attempt(dist_bound_adaptive, inp)
    if adapt is not None:
        rep.dist_bound_adaptive, rep.dist_bound_relaxed = adapt
    return rep


# --------------------------------------------------------------------------
# Certificates
# --------------------------------------------------------------------------

CERT_RTOL = 1e-10


@dataclass
class CertificateReport:
    """Per-check flags. Flag ``i`` of a check refers to iterate ``x_i``;
    step inequalities ``x_k -> x_{k+1}`` are filed under ``k + 1``."""

    mode: str
    flags: dict[str, list[bool]] = field(default_factory=dict)
    worst_violation: float = 0.0
    skipped: dict[str, str] = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return all(all(v) for v in self.flags.values())

    def failed_indices(self) -> dict[str, list[int]]:
        return {name: [i for i, ok in enumerate(v) if not ok]
                for name, v in self.flags.items() if not all(v)}

    def add(self, name: str, lhs: np.ndarray, rhs: np.ndarray, tol: np.ndarray, offset: int = 0):
        excess = np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float) - tol
        ok = [True] * offset + [bool(e <= 0) for e in excess]
        self.flags[name] = ok
        if len(excess):
            self.worst_violation = max(self.worst_violation, float(np.max(np.maximum(excess, 0.0))))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "verdict": "pass" if self.verdict else "fail",
            "worst_violation": self.worst_violation,
            "checks": {name: all(v) for name, v in self.flags.items()},
            "failed_indices": self.failed_indices(),
            "skipped": self.skipped,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def verify_certificates(run: RunResult, problem: ObjectiveSpec, inp: TheoryInputs,
                        mode: str) -> CertificateReport:
    """Replay ``run`` with exact values/gradients and test each applicable inequality.

    const mode: the exact and inexact one-step descent bounds, the best
    gradient norm bound, the geometric decay down to ``delta^2 / (2 mu)`` and
    the stopping-point quality. adaptive mode: the accepted-step descent bound
    with ``4 small_delta`` slack, geometric decay with its floor, ``L_k`` range
    and the call-count bound.
    """
    if mode not in ("const", "adaptive"):
        raise ValueError("mode must be 'const' or 'adaptive'")
    if run.trajectory is None:
        raise ValueError("run was recorded without its trajectory")
    X = np.asarray(run.trajectory, dtype=float)
    if X.ndim != 2 or X.shape[1] != problem.dim:
        raise DimensionMismatchError(
            f"trajectory points have dimension {X.shape[-1]}, problem has {problem.dim}")
    if len(X) != len(run.records):
        raise DimensionMismatchError("trajectory and records have different lengths")

    f = np.array([problem.value(x) for x in X])
    gnorm = np.array([np.linalg.norm(problem.gradient(x)) for x in X])
    gt = run.column("tilde_grad_norm")
    tol = CERT_RTOL * (1.0 + np.abs(f))
    delta, sdelta, mu = inp.delta, inp.small_delta, inp.mu
    f_star = problem.f_star
    rep = CertificateReport(mode)
    n_steps = len(X) - 1
    df = f[1:] - f[:-1]

    if mode == "const":
        L = run.step_L if run.step_L is not None else inp.L
        rep.add("descent_exact", df, delta ** 2 / (2 * L) - gnorm[:-1] ** 2 / (2 * L), tol[:-1], offset=1)
        rep.add("descent_inexact", df, delta ** 2 / L - gt[:-1] ** 2 / (4 * L), tol[:-1], offset=1)
        if f_star is not None:
            gap = f - f_star
            gap0 = max(gap[0], 0.0)
            N = np.arange(1, n_steps + 1)
            best = np.minimum.accumulate(gnorm[:-1])
            rhs = delta + np.sqrt(2 * L * gap0 / N)
            rep.add("best_gradient", best, rhs, CERT_RTOL * (1.0 + rhs), offset=1)
            if mu is not None:
                k = np.arange(len(X))
                rhs = (1 - mu / L) ** k * gap0 + delta ** 2 / (2 * mu)
                rep.add("geometric_decay", gap, rhs, tol)
        else:
            rep.skipped["best_gradient"] = rep.skipped["geometric_decay"] = "f* unknown"
    else:
        Lk = run.column("L_k")[:n_steps]
        if np.any(np.isnan(Lk)):
            raise ValueError("adaptive certificates need an accepted L_k for every step")
        rep.add("adaptive_step", df,
                delta ** 2 / (2 * Lk) - gt[:-1] ** 2 / (4 * Lk) + 4 * sdelta, tol[:-1], offset=1)
        if run.L_min is not None and n_steps:
            rep.add("L_at_least_L_min", run.L_min - Lk, np.zeros(n_steps), 0.0)
        if run.L0 is not None and run.L0 <= 2 * inp.L and n_steps:
            rep.add("L_at_most_2L", Lk, 2 * inp.L * np.ones(n_steps), CERT_RTOL * inp.L)
        if run.L0 is not None and n_steps:
            calls = run.inner_eval_total()
            cap = 2 * n_steps + math.log2(2 * float(np.max(Lk)) / run.L0)
            rep.add("call_count", [calls], [cap], 0.0)
        if f_star is not None and mu is not None and n_steps:
            if np.min(Lk) >= mu / 4:
                gap = f - f_star
                contraction = np.concatenate([[1.0], np.cumprod(1 - mu / (4 * Lk))])
                floor = 3 * delta ** 2 / mu + 16 * float(np.max(Lk)) * sdelta / mu
                rep.add("geometric_decay", gap, contraction * max(gap[0], 0.0) + floor, tol)
            else:
                rep.skipped["geometric_decay"] = "some L_k < mu/4"
        elif f_star is None or mu is None:
            rep.skipped["geometric_decay"] = "needs f* and mu"

    if run.triggered and mu is not None and f_star is not None:
        factor = 7.0 if run.rule is RuleKind.CONST else 5.0
        rep.add("stop_quality", [f[-1] - f_star], [factor * delta ** 2 / mu], [tol[-1]],
                offset=len(X) - 1)
    return rep
