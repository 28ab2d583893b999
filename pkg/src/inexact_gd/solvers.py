"""Constant-step and adaptive-step gradient descent with early stopping.

Both methods query the inexact gradient at ``x_k``, test the stopping rule on
that same vector and only then move, so the output point of a triggered run
is the first iterate satisfying the rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .oracles import InexactOracle, NumericOverflowError, ObjectiveSpec, all_finite, vec_norm

SQRT6 = math.sqrt(6.0)
DEFAULT_MAX_ITERS = 1_000_000
# L_k above this multiple of max(L0, 1) means the value oracle is broken
INNER_LOOP_LIMIT = 2.0 ** 32


class InnerLoopDivergence(RuntimeError):
    pass


class RuleKind(str, enum.Enum):
    CONST = "const-rule"
    ADAPTIVE = "adaptive-rule"
    NONE = "none"


class StopReason(str, enum.Enum):
    RULE_TRIGGERED = "RuleTriggered"
    MAX_ITERS = "MaxIters"
    GRADIENT_OVERFLOW = "GradientOverflow"


def check_stop_const(tilde_grad: np.ndarray, delta: float) -> bool:
    """True iff ``||tilde_grad|| <= sqrt(6) * delta``."""
    return vec_norm(tilde_grad) <= SQRT6 * delta


def check_stop_adaptive(tilde_grad: np.ndarray, delta: float) -> bool:
    """True iff ``||tilde_grad|| <= 2 * delta``."""
    return vec_norm(tilde_grad) <= 2.0 * delta


@dataclass(frozen=True)
class StopRule:
    kind: RuleKind = RuleKind.CONST
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")

    def threshold(self, delta: float) -> float:
        if self.kind is RuleKind.CONST:
            return SQRT6 * delta
        if self.kind is RuleKind.ADAPTIVE:
            return 2.0 * delta
        return -math.inf

    def triggered(self, tilde_grad_norm: float, delta: float) -> bool:
        return tilde_grad_norm <= self.threshold(delta)


@dataclass(frozen=True)
class ConstStepConfig:
    L: float
    x0: np.ndarray
    stop: StopRule = field(default_factory=StopRule)

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("step constant L must be positive")


@dataclass(frozen=True)
class AdaptiveConfig:
    L0: float
    x0: np.ndarray
    L_min: float = 0.0
    stop: StopRule = field(default_factory=lambda: StopRule(RuleKind.ADAPTIVE))

    def __post_init__(self):
        if self.L_min < 0:
            raise ValueError("L_min must be nonnegative")
        if not self.L0 > 0 or self.L0 < self.L_min:
            raise ValueError("need L0 > 0 and L0 >= L_min")


@dataclass(frozen=True, slots=True)
class IterationRecord:
    k: int
    f_gap: float
    exact_grad_norm: float
    tilde_grad_norm: float
    dist_from_x0: float
    L_k: Optional[float] = None
    inner_evals: Optional[int] = None


@dataclass
class RunResult:
    records: list[IterationRecord]
    stop_reason: StopReason
    x_hat: np.ndarray
    total_value_queries: int
    total_grad_queries: int
    solver: str
    rule: RuleKind
    threshold: float
    delta: float
    small_delta: float
    x0: np.ndarray
    trajectory: Optional[np.ndarray] = None
    L0: Optional[float] = None
    L_min: Optional[float] = None
    step_L: Optional[float] = None

    @property
    def n_iters(self) -> int:
        """Index ``N`` of the output point."""
        return self.records[-1].k

    @property
    def triggered(self) -> bool:
        return self.stop_reason is StopReason.RULE_TRIGGERED

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) if getattr(r, name) is not None else np.nan
                         for r in self.records], dtype=float)

    def accepted_L(self) -> np.ndarray:
        return np.array([r.L_k for r in self.records if r.L_k is not None], dtype=float)

    def inner_eval_total(self) -> int:
        return int(sum(r.inner_evals or 0 for r in self.records))


def run_const_step_gd(problem: ObjectiveSpec, oracle: InexactOracle, cfg: ConstStepConfig,
                      keep_trajectory: bool = True) -> RunResult:
    """``x_{k+1} = x_k - grad_tilde(x_k) / L`` until the rule fires or the cap is hit."""
    x0 = np.array(cfg.x0, dtype=float)
    x = x0.copy()
    rule, delta, L = cfg.stop, oracle.delta, cfg.L
    thr = rule.threshold(delta)
    value, gap = problem.value, problem.gap
    records: list[IterationRecord] = []
    points = [x0.copy()] if keep_trajectory else None
    q0_grad, q0_val = oracle.grad_queries, oracle.value_queries
    reason = StopReason.MAX_ITERS
    for k in range(rule.max_iters + 1):
        try:
            g, gt = oracle.gradient_pair(x)
        except NumericOverflowError:
            reason = StopReason.GRADIENT_OVERFLOW
            break
        gt_norm = vec_norm(gt)
        records.append(IterationRecord(k, gap(value(x)), vec_norm(g), gt_norm, vec_norm(x - x0)))
        if gt_norm <= thr:
            reason = StopReason.RULE_TRIGGERED
            break
        if k == rule.max_iters:
            break
        x_new = x - gt / L
        if not all_finite(x_new):
            reason = StopReason.GRADIENT_OVERFLOW
            break
        x = x_new
        if keep_trajectory:
            points.append(x)
    if not records:
        raise NumericOverflowError("gradient at the starting point is not finite", x0)
    return RunResult(records, reason, x.copy(), oracle.value_queries - q0_val,
                     oracle.grad_queries - q0_grad, "const", rule.kind, rule.threshold(delta),
                     delta, oracle.small_delta, x0,
                     trajectory=np.array(points[: len(records)]) if keep_trajectory else None,
                     step_L=L)


def run_adaptive_gd(problem: ObjectiveSpec, oracle: InexactOracle, cfg: AdaptiveConfig,
                    keep_trajectory: bool = True) -> RunResult:
    """Gradient descent with a doubling/halving estimate ``L_k`` of the local
    smoothness constant, accepted against inexact function values.

    A candidate ``x_k - grad_tilde(x_k) / (2 L_k)`` is accepted when

        f~(x_{k+1}) <= f~(x_k) + <g~, x_{k+1} - x_k> + L_k ||x_{k+1} - x_k||^2
                       + delta^2 / (2 L_k) + 2 small_delta

    otherwise ``L_k`` doubles and the candidate is recomputed.
    """
    x0 = np.array(cfg.x0, dtype=float)
    x = x0.copy()
    rule, delta, sdelta = cfg.stop, oracle.delta, oracle.small_delta
    thr = rule.threshold(delta)
    slack_const = 2.0 * sdelta
    L = float(cfg.L0)
    L_cap = INNER_LOOP_LIMIT * max(cfg.L0, 1.0)
    L_floor = max(cfg.L_min, np.finfo(float).tiny)
    records: list[IterationRecord] = []
    points = [x0.copy()] if keep_trajectory else None
    q0_grad, q0_val = oracle.grad_queries, oracle.value_queries
    reason = StopReason.MAX_ITERS
    for k in range(rule.max_iters + 1):
        try:
            g, gt = oracle.gradient_pair(x)
        except NumericOverflowError:
            reason = StopReason.GRADIENT_OVERFLOW
            break
        gt_norm = vec_norm(gt)
        g_norm = vec_norm(g)
        dist = vec_norm(x - x0)
        if gt_norm <= thr or k == rule.max_iters:
            records.append(IterationRecord(k, problem.gap(problem.value(x)), g_norm, gt_norm, dist,
                                           None, 0))
            if gt_norm <= thr:
                reason = StopReason.RULE_TRIGGERED
            break
        fx, ft_x = oracle.value_pair(x)
        trials = 0
        while True:
            trials += 1
            cand = x - gt / (2.0 * L)
            dx = cand - x
            _, ft_c = oracle.value_pair(cand)
            rhs = ft_x + float(np.dot(gt, dx)) + L * float(np.dot(dx, dx)) + delta * delta / (2.0 * L) + slack_const
            if np.isfinite(ft_c) and ft_c <= rhs:
                break
            L *= 2.0
            if L > L_cap:
                raise InnerLoopDivergence(
                    f"L_k exceeded {L_cap:g} at iteration {k}; the value oracle looks inconsistent")
        records.append(IterationRecord(k, problem.gap(fx), g_norm, gt_norm, dist, L, trials))
        x = cand
        if keep_trajectory:
            points.append(x)
        L = max(L / 2.0, L_floor)
    if not records:
        raise NumericOverflowError("gradient at the starting point is not finite", x0)
    return RunResult(records, reason, x.copy(), oracle.value_queries - q0_val,
                     oracle.grad_queries - q0_grad, "adaptive", rule.kind, rule.threshold(delta),
                     delta, sdelta, x0,
                     trajectory=np.array(points[: len(records)]) if keep_trajectory else None,
                     L0=float(cfg.L0), L_min=float(cfg.L_min))
