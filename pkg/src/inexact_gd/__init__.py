"""Gradient descent with additively inexact gradients: oracles, benchmark
problems, constant-step and adaptive solvers with early stopping, closed-form
bounds and trajectory certificates."""

from .oracles import (InexactOracle, InvalidDimensionError, NoiseDirectionModel, NoiseKind,
                      NumericOverflowError, ObjectiveSpec, RngStream, finite_diff_gradient,
                      inexact_gradient, inexact_value, noise_direction, sample_unit_sphere)
from .problems import (InvalidConfigurationError, LogRegData, NesterovSkokovProblem,
                       QuadraticDiagProblem, Simple3DProblem, generate_logreg_data,
                       logreg_eval_grad, logreg_lipschitz, make_quadratic_diag,
                       ns_eval_grad, ns_minor_positivity, quadratic_from_coefficients,
                       rosenbrock_eval_grad, rosenbrock_objective, simple3d_eval_grad)
from .solvers import (AdaptiveConfig, ConstStepConfig, InnerLoopDivergence, IterationRecord,
                      RuleKind, RunResult, StopReason, StopRule, check_stop_adaptive,
                      check_stop_const, run_adaptive_gd, run_const_step_gd)
from .theory import (BoundsReport, CertificateReport, DimensionMismatchError, InfiniteBudgetError,
                     NotApplicableError, PremiseViolatedError, TheoryInputs, bounds_report,
                     budget_adaptive, budget_adaptive_delta, budget_const, budget_no_pl,
                     dist_bound_adaptive, dist_bound_const, dist_bounds_no_mu, effective_L_hat,
                     gap_guarantees, verify_certificates)

__version__ = "0.1.0"
