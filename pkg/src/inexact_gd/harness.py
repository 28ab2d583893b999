"""Experiment drivers behind the command-line interface.

Every command resolves an :class:`ExperimentSpec`, builds problems and
oracles from ``(seed, stream)`` pairs and writes CSV files whose leading
``# key=value`` lines record the fully resolved configuration. Output files
never contain timestamps, so reruns with the same seed are byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .oracles import (InexactOracle, NoiseDirectionModel, NoiseKind, NumericOverflowError,
                      ObjectiveSpec, RngStream, gradient_rel_error, sample_unit_sphere)
from .problems import (NesterovSkokovProblem, Simple3DProblem,
                       generate_logreg_data, make_quadratic_diag, ns_minor_positivity,
                       rosenbrock_objective)
from .solvers import (AdaptiveConfig, ConstStepConfig, InnerLoopDivergence, RuleKind, RunResult,
                      StopReason, StopRule, run_adaptive_gd, run_const_step_gd)
from .theory import TheoryInputs, bounds_report, verify_certificates

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_OVERFLOW = 0, 1, 2, 3

PROBLEMS = ("quadratic", "simple3d", "logreg", "rosenbrock", "nesterov-skokov")
SOLVERS = ("const", "adaptive")
STOPS = ("const-rule", "adaptive-rule", "none")
QUADRATIC_DIST = 948.7
CSV_COLUMNS = ("k", "f_gap", "exact_grad_norm", "tilde_grad_norm", "dist_from_x0", "L_k", "inner_evals")


class UsageError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    problem: str = "quadratic"
    solver: Optional[str] = None
    noise: str = "random"
    delta: float = 1e-4
    small_delta: Optional[float] = None
    mu: Optional[float] = None
    L: Optional[float] = None
    n: Optional[int] = None
    k: Optional[int] = None
    m: Optional[int] = None
    seed: int = 0
    trials: int = 1
    stop: Optional[str] = None
    max_iters: int = 1_000_000
    out: Optional[str] = None
    L0: Optional[float] = None
    L_min: Optional[float] = None
    ref_iters: int = 100_000

    def validate(self) -> None:
        if self.problem not in PROBLEMS:
            raise UsageError(f"unknown problem {self.problem!r}; choose from {', '.join(PROBLEMS)}")
        if self.solver is not None and self.solver not in SOLVERS:
            raise UsageError(f"unknown solver {self.solver!r}")
        if self.stop is not None and self.stop not in STOPS:
            raise UsageError(f"unknown stop rule {self.stop!r}")
        if not (self.delta >= 0 and math.isfinite(self.delta)):
            raise UsageError("delta must be a finite nonnegative number")
        if self.small_delta is not None and not self.small_delta >= 0:
            raise UsageError("small-delta must be nonnegative")
        for name in ("mu", "L", "L0"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"{name} must be positive")
        if self.L_min is not None and self.L_min < 0:
            raise UsageError("L-min must be nonnegative")
        if self.trials < 1 or self.max_iters < 0 or self.ref_iters < 0:
            raise UsageError("trials must be >= 1, max-iters and ref-iters >= 0")
        parse_noise(self.noise)

    def resolved(self) -> "ExperimentSpec":
        """Copy with every problem-dependent default filled in."""
        self.validate()
        s = replace(self)
        p = s.problem
        if p == "quadratic":
            s.n = 100 if s.n is None else s.n
            s.k = 10 if s.k is None else s.k
            s.mu = 0.1 if s.mu is None else s.mu
            s.L = 1.0 if s.L is None else s.L
        elif p == "simple3d":
            s.n, s.k = 3, 1
            s.mu = 0.1 if s.mu is None else s.mu
            s.L = 1.0 if s.L is None else s.L
        elif p == "logreg":
            s.n = 200 if s.n is None else s.n
            s.m = 700 if s.m is None else s.m
            s.k = 10 if s.k is None else s.k
        elif p == "rosenbrock":
            s.n = 2
        elif p == "nesterov-skokov":
            s.n = 3 if s.n is None else s.n
        if s.solver is None:
            s.solver = "adaptive" if p in ("rosenbrock", "nesterov-skokov") else "const"
        if s.stop is None:
            s.stop = "adaptive-rule" if s.solver == "adaptive" else "const-rule"
        if s.solver == "adaptive":
            s.L0 = 1.0 if s.L0 is None else s.L0
            s.L_min = 0.0 if s.L_min is None else s.L_min
            if s.L0 < s.L_min:
                raise UsageError("need L0 >= L-min")
        if s.solver == "const" and p in ("rosenbrock", "nesterov-skokov") and s.L is None:
            raise UsageError(f"{p} has no global L; pass --L for the constant-step solver")
        if p == "quadratic":
            if not 0 <= s.k < s.n:
                raise UsageError("quadratic needs 0 <= k < n")
            if s.mu > s.L:
                raise UsageError("quadratic needs mu <= L")
        if p == "simple3d" and not s.L > s.mu:
            raise UsageError("simple3d needs L > mu")
        if p == "nesterov-skokov" and s.n < 2:
            raise UsageError("nesterov-skokov needs n >= 2")
        if p == "logreg" and not 1 <= s.k <= min(s.n, s.m // 2):
            raise UsageError("logreg needs 1 <= k <= min(n, m/2)")
        return s

    def header(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "out"}


def parse_noise(text: str) -> tuple[str, Optional[list[float]]]:
    """``random``, ``antigradient``, ``none``, ``first-component``, ``constant``
    or ``constant:v1,v2,...``."""
    name, _, rest = text.partition(":")
    try:
        kind = NoiseKind(name)
    except ValueError:
        raise UsageError(f"unknown noise {text!r}") from None
    if rest and kind is not NoiseKind.CONSTANT:
        raise UsageError(f"noise {name!r} takes no vector")
    vec = None
    if rest:
        try:
            vec = [float(v) for v in rest.split(",")]
        except ValueError:
            raise UsageError(f"bad constant noise vector {rest!r}") from None
    return kind.value, vec


def default_constant_vector(problem: str, n: int) -> np.ndarray:
    """Null coordinate for simple3d, first axis for Rosenbrock, normalized ones otherwise."""
    if problem == "simple3d":
        return np.array([0.0, 0.0, 1.0])
    if problem == "rosenbrock":
        return np.array([1.0, 0.0])
    return np.ones(n) / math.sqrt(n)


def make_noise(spec: ExperimentSpec) -> NoiseDirectionModel:
    kind, vec = parse_noise(spec.noise)
    kind = NoiseKind(kind)
    if kind is NoiseKind.CONSTANT:
        v = default_constant_vector(spec.problem, spec.n) if vec is None else np.array(vec)
        if len(v) != spec.n:
            raise UsageError(f"constant noise vector has length {len(v)}, problem dimension is {spec.n}")
        try:
            return NoiseDirectionModel.constant(v)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    return {NoiseKind.NONE: NoiseDirectionModel.none,
            NoiseKind.RANDOM_SPHERE: NoiseDirectionModel.random_sphere,
            NoiseKind.ANTIGRADIENT: NoiseDirectionModel.antigradient,
            NoiseKind.FIRST_COMPONENT_BIAS: NoiseDirectionModel.first_component_bias}[kind]()


@dataclass
class BuiltProblem:
    objective: ObjectiveSpec
    x0: np.ndarray
    step_L: Optional[float]  # constant used by the constant-step method
    extras: dict = field(default_factory=dict)


def estimate_logreg_f_star(objective: ObjectiveSpec, x0: np.ndarray, L: float, iters: int) -> float:
    """Smallest value seen along ``iters`` exact gradient steps of size ``1/L``."""
    x = np.array(x0, dtype=float)
    best = objective.value(x)
    for _ in range(iters):
        x = x - objective.gradient(x) / L
        best = min(best, objective.value(x))
    return best


def build_problem(spec: ExperimentSpec, trial: int = 0) -> BuiltProblem:
    """Problem data use stream ``2*trial`` of the seed; oracles use ``2*trial + 1``."""
    rng = RngStream(spec.seed, 2 * trial)
    p = spec.problem
    if p == "quadratic":
        q = make_quadratic_diag(spec.n, spec.k, spec.mu, spec.L, rng)
        # ||x0 - x*|| = 948.7 to the nearest minimizer
        x0 = np.full(spec.n, QUADRATIC_DIST / math.sqrt(spec.n - spec.k))
        return BuiltProblem(q.objective(), x0, q.L, {"problem_obj": q})
    if p == "simple3d":
        s = Simple3DProblem(spec.L, spec.mu)
        # the divergence example steps with 1/L for f = <diag(L, mu, 0) x, x>
        return BuiltProblem(s.objective(), np.zeros(3), spec.L)
    if p == "logreg":
        data = generate_logreg_data(spec.n, spec.m, spec.k, rng)
        obj = data.objective()
        x0 = np.zeros(spec.n)
        f_star = estimate_logreg_f_star(obj, x0, obj.lipschitz_L, spec.ref_iters)
        obj.f_star = f_star
        step = spec.L if spec.L is not None else obj.lipschitz_L
        return BuiltProblem(obj, x0, step, {"estimated_f_star": f_star, "data": data,
                                             "lipschitz_L": obj.lipschitz_L})
    if p == "rosenbrock":
        return BuiltProblem(rosenbrock_objective(), np.array([1.0, 2.0]), spec.L)
    ns = NesterovSkokovProblem(spec.n)
    return BuiltProblem(ns.objective(), ns.start(), spec.L)


def default_small_delta(spec: ExperimentSpec, built: BuiltProblem) -> float:
    L = built.objective.lipschitz_L
    if spec.problem in ("rosenbrock", "nesterov-skokov") or L is None:
        return spec.delta ** 2
    return spec.delta ** 2 / (16.0 * L)


def execute(spec: ExperimentSpec, built: BuiltProblem, trial: int = 0,
            keep_trajectory: bool = True, warn=None) -> tuple[RunResult, float]:
    """Run the configured solver once. Returns the run and the value-noise level used."""
    sdelta = spec.small_delta if spec.small_delta is not None else default_small_delta(spec, built)
    L_true = built.objective.lipschitz_L
    if (spec.solver == "adaptive" and L_true is not None and spec.delta > 0
            and sdelta > spec.delta ** 2 / (16.0 * L_true) and warn is not None):
        warn(f"warning: small-delta={sdelta:g} exceeds delta^2/(16 L)={spec.delta ** 2 / (16 * L_true):g}; "
             "the adaptive guarantees do not apply")
    oracle = InexactOracle(built.objective, spec.delta, sdelta, make_noise(spec),
                           RngStream(spec.seed, 2 * trial + 1))
    rule = StopRule(RuleKind(spec.stop), spec.max_iters)
    # overflow is detected and reported by the solvers themselves
    with np.errstate(over="ignore", invalid="ignore"):
        if spec.solver == "const":
            cfg = ConstStepConfig(built.step_L, built.x0, rule)
            return run_const_step_gd(built.objective, oracle, cfg, keep_trajectory), sdelta
        cfg = AdaptiveConfig(spec.L0, built.x0, spec.L_min, rule)
        return run_adaptive_gd(built.objective, oracle, cfg, keep_trajectory), sdelta


def theory_inputs(spec: ExperimentSpec, built: BuiltProblem, sdelta: float) -> Optional[TheoryInputs]:
    obj = built.objective
    L = obj.lipschitz_L
    if L is None or obj.f_star is None:
        return None
    gap0 = max(obj.value(built.x0) - obj.f_star, 0.0)
    L_min = spec.L_min if spec.solver == "adaptive" and spec.L_min else None
    return TheoryInputs(L=L, delta=spec.delta, gap0=gap0, mu=obj.pl_mu, small_delta=sdelta, L_min=L_min)


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "" if math.isnan(v) else repr(v)
    if isinstance(v, (np.floating,)):
        return _fmt(float(v))
    return str(v)


def header_lines(meta: dict) -> str:
    return "".join(f"# {k}={_fmt(v) if not isinstance(v, str) else v}\n" for k, v in meta.items())


def run_to_csv(run: RunResult, meta: dict) -> str:
    buf = io.StringIO()
    buf.write(header_lines(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in run.records:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def table_to_csv(rows: list[dict], columns: list[str], meta: dict) -> str:
    buf = io.StringIO()
    buf.write(header_lines(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def write_text(path, text: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def write_plot_data(path, xs, ys) -> None:
    write_text(path, "".join(f"{_fmt(float(x))} {_fmt(float(y))}\n" for x, y in zip(xs, ys)))


def run_meta(spec: ExperimentSpec, run: RunResult, sdelta: float, built: BuiltProblem) -> dict:
    meta = spec.header()
    meta["small_delta"] = sdelta
    meta["step_L"] = built.step_L if spec.solver == "const" else None
    meta["noise_model"] = str(make_noise(spec))
    if "estimated_f_star" in built.extras:
        meta["estimated_f_star"] = built.extras["estimated_f_star"]
    meta["stop_reason"] = run.stop_reason.value
    meta["N"] = run.n_iters
    return meta


def _ratio(num: float, delta: float) -> float:
    return num / delta if delta > 0 else math.inf


def summary_line(run: RunResult, spec: ExperimentSpec, bounds: Optional[dict], seconds: float) -> str:
    last = run.records[-1]
    parts = [f"stop={run.stop_reason.value}", f"N={run.n_iters}", f"f_gap={last.f_gap:.6e}",
             f"grad/delta={_ratio(last.exact_grad_norm, spec.delta):.4g}",
             f"dist={last.dist_from_x0:.6g}"]
    for key, val in (bounds or {}).items():
        if val is not None:
            parts.append(f"{key}={val:.6g}")
    parts.append(f"time={seconds:.3f}s")
    return " ".join(parts)


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def _stdout(msg: str) -> None:
    print(msg, file=sys.stdout)


def _stderr(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_run(spec: ExperimentSpec, out=_stdout, err=_stderr) -> int:
    spec = spec.resolved()
    built = build_problem(spec)
    t0 = time.perf_counter()
    try:
        run, sdelta = execute(spec, built, warn=err)
    except InnerLoopDivergence as exc:
        err(f"error: {exc}")
        return EXIT_OVERFLOW
    except NumericOverflowError as exc:
        err(f"error: {exc} at {exc.point.tolist()}")
        return EXIT_OVERFLOW
    seconds = time.perf_counter() - t0
    inp = theory_inputs(spec, built, sdelta)
    bounds = asdict(bounds_report(inp, run.n_iters)) if inp is not None else None
    out_path = Path(spec.out) if spec.out else Path(f"run_{spec.problem}_{spec.solver}.csv")
    write_text(out_path, run_to_csv(run, run_meta(spec, run, sdelta, built)))
    if bounds is not None:
        write_text(out_path.with_suffix(".bounds.json"), bounds_report(inp, run.n_iters).to_json() + "\n")
        if run.trajectory is not None and run.stop_reason is not StopReason.GRADIENT_OVERFLOW:
            cert = verify_certificates(run, built.objective, inp, spec.solver)
            write_text(out_path.with_suffix(".certificates.json"), cert.to_json() + "\n")
    out(summary_line(run, spec, bounds, seconds))
    if run.stop_reason is StopReason.GRADIENT_OVERFLOW:
        err(f"error: gradient overflow; last finite iterate {run.x_hat.tolist()}")
        return EXIT_OVERFLOW
    return EXIT_OK


def _table_row(run: RunResult, delta: float, x_star_dist: Optional[float] = None) -> dict:
    last = run.records[-1]
    row = {"N": run.n_iters, "stop_reason": run.stop_reason.value, "f_gap": last.f_gap,
           "grad_over_delta": _ratio(last.exact_grad_norm, delta), "dist": last.dist_from_x0}
    if x_star_dist is not None:
        row["dist_ratio"] = last.dist_from_x0 / x_star_dist
    return row


def quadratic_table_rows(mus, deltas, trials: int, seed: int, base: ExperimentSpec) -> list[dict]:
    """One row per (mu, delta, trial, solver), both solvers under the sqrt(6)-delta rule."""
    rows = []
    for mu in mus:
        for delta in deltas:
            for trial in range(trials):
                for solver in SOLVERS:
                    spec = replace(base, problem="quadratic", mu=mu, delta=delta, seed=seed,
                                   solver=solver, stop="const-rule").resolved()
                    built = build_problem(spec, trial)
                    q = built.extras["problem_obj"]
                    run, sdelta = execute(spec, built, trial, keep_trajectory=False)
                    gap0 = built.objective.value(built.x0)
                    inp = TheoryInputs(L=q.L, mu=q.mu, delta=delta, gap0=gap0, small_delta=sdelta)
                    x_star_dist = float(np.linalg.norm(built.x0 - q.nearest_minimizer(built.x0)))
                    row = {"mu": mu, "delta": delta, "trial": trial, "solver": solver}
                    row.update(_table_row(run, delta, x_star_dist))
                    row["N_star"] = bounds_report(inp).n_star_const
                    row["gap_guarantee"] = 7 * delta ** 2 / q.mu
                    rows.append(row)
    return rows


def mean_rows(rows: list[dict], keys: list[str], values: list[str]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    for r in rows:
        groups.setdefault(tuple(r[k] for k in keys), []).append(r)
    out = []
    for key, members in groups.items():
        row = dict(zip(keys, key))
        row["trial"] = "mean"
        for v in values:
            row[v] = float(np.mean([m[v] for m in members]))
        out.append(row)
    return out


QUAD_COLUMNS = ["mu", "delta", "trial", "solver", "N", "N_star", "stop_reason", "f_gap",
                "gap_guarantee", "grad_over_delta", "dist", "dist_ratio"]


def cmd_table_quadratic(spec: ExperimentSpec, mus, deltas, out=_stdout) -> int:
    if any(not 0 < m <= 1 for m in mus) or any(not d > 0 for d in deltas):
        raise UsageError("mu values must lie in (0, 1] and delta values must be positive")
    base = replace(spec, problem="quadratic", L=1.0, n=spec.n or 100, k=spec.k or 10)
    rows = quadratic_table_rows(mus, deltas, spec.trials, spec.seed, base)
    rows += mean_rows(rows, ["mu", "delta", "solver"],
                      ["N", "N_star", "f_gap", "gap_guarantee", "grad_over_delta", "dist", "dist_ratio"])
    meta = base.header()
    meta.update(mu=",".join(map(repr, mus)), delta=",".join(map(repr, deltas)), solver="const,adaptive",
                stop="const-rule", x0_distance=QUADRATIC_DIST)
    path = spec.out or "table_quadratic.csv"
    write_text(path, table_to_csv(rows, QUAD_COLUMNS, meta))
    out(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def _grid_command(kind: str, spec: ExperimentSpec, cells, columns, path, out) -> int:
    rows = []
    for cell in cells:
        cspec = replace(spec, **cell).resolved()
        built = build_problem(cspec)
        try:
            run, sdelta = execute(cspec, built, keep_trajectory=False)
        except (InnerLoopDivergence, NumericOverflowError) as exc:
            _stderr(f"error: {exc}")
            return EXIT_OVERFLOW
        row = dict(cell)
        row.update(_table_row(run, cspec.delta))
        row["small_delta"] = sdelta
        rows.append(row)
        out(f"{kind} " + " ".join(f"{k}={v}" for k, v in cell.items())
            + f" N={run.n_iters} dist={row['dist']:.4g} f_gap={row['f_gap']:.4g}")
    meta = spec.header()
    for key in cells[0]:
        meta[key] = ",".join(str(c[key]) for c in cells)
    write_text(path, table_to_csv(rows, columns, meta))
    out(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def cmd_rosenbrock(spec: ExperimentSpec, noises, deltas, out=_stdout) -> int:
    spec = replace(spec, problem="rosenbrock", solver=spec.solver or "adaptive",
                   stop=spec.stop or "adaptive-rule")
    cells = [{"noise": nz, "delta": d} for nz in noises for d in deltas]
    cols = ["noise", "delta", "small_delta", "N", "stop_reason", "dist", "grad_over_delta", "f_gap"]
    return _grid_command("rosenbrock", spec, cells, cols, spec.out or "table_rosenbrock.csv", out)


def cmd_ns(spec: ExperimentSpec, ns, deltas, out=_stdout) -> int:
    spec = replace(spec, problem="nesterov-skokov", solver=spec.solver or "adaptive",
                   stop=spec.stop or "adaptive-rule")
    cells = [{"n": n, "delta": d} for n in ns for d in deltas]
    cols = ["n", "delta", "small_delta", "N", "stop_reason", "dist", "grad_over_delta", "f_gap"]
    return _grid_command("nesterov-skokov", spec, cells, cols, spec.out or "table_nesterov_skokov.csv", out)


def cmd_logreg(spec: ExperimentSpec, nostop_iters: int = 10_000, out=_stdout, err=_stderr) -> int:
    """Runs with and without the stop rule and writes CSVs plus curve files.

    Output paths share the prefix given by ``out``: ``<prefix>_stop.csv``,
    ``<prefix>_nostop.csv`` and ``<prefix>_<run>_<curve>.dat`` for the curves
    ``grad``, ``tilde_grad`` and ``dist`` against ``k``.
    """
    spec = replace(spec, problem="logreg").resolved()
    built = build_problem(spec)
    prefix = Path(spec.out or "logreg")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    built.extras["data"].to_csv(prefix.parent / f"{prefix.name}_data.csv")
    variants = {"stop": spec, "nostop": replace(spec, stop="none", max_iters=nostop_iters)}
    for label, vspec in variants.items():
        try:
            run, sdelta = execute(vspec, built, keep_trajectory=False, warn=err)
        except (InnerLoopDivergence, NumericOverflowError) as exc:
            err(f"error: {exc}")
            return EXIT_OVERFLOW
        meta = run_meta(vspec, run, sdelta, built)
        meta["estimated_f_star_iters"] = spec.ref_iters
        write_text(prefix.parent / f"{prefix.name}_{label}.csv", run_to_csv(run, meta))
        k = run.column("k")
        for curve, col in (("grad", "exact_grad_norm"), ("tilde_grad", "tilde_grad_norm"),
                           ("dist", "dist_from_x0")):
            write_plot_data(prefix.parent / f"{prefix.name}_{label}_{curve}.dat", k, run.column(col))
        out(f"logreg {label}: " + summary_line(run, vspec, None, 0.0).rsplit(" time=", 1)[0])
    return EXIT_OK


# --------------------------------------------------------------------------
# Validation
# --------------------------------------------------------------------------

@dataclass
class ValidationProblem:
    objective: ObjectiveSpec
    sample: Callable[[RngStream], np.ndarray]


def validation_problems() -> dict[str, ValidationProblem]:
    """Default problem registry for ``validate``; tests may substitute their own."""
    q = make_quadratic_diag(20, 3, 0.1, 1.0, RngStream(7, 0))
    data = generate_logreg_data(30, 60, 4, RngStream(7, 1))
    return {
        "quadratic": ValidationProblem(q.objective(), lambda r: r.normal(20)),
        "simple3d": ValidationProblem(Simple3DProblem(1.0, 0.1).objective(), lambda r: r.normal(3)),
        "logreg": ValidationProblem(data.objective(), lambda r: r.normal(30)),
        "rosenbrock": ValidationProblem(rosenbrock_objective(), lambda r: r.uniform(-2, 2, 2)),
        "nesterov-skokov": ValidationProblem(NesterovSkokovProblem(5).objective(),
                                             lambda r: r.uniform(-1.5, 1.5, 5)),
    }


def _check_gradients(problems: dict[str, ValidationProblem]) -> list[tuple[str, bool, str]]:
    results = []
    for name, vp in problems.items():
        rng = RngStream(11, 0)
        worst = max(gradient_rel_error(vp.objective, vp.sample(rng)) for _ in range(20))
        results.append((f"gradient:{name}", worst <= 1e-6, f"max rel err {worst:.2e}"))
    return results


def _check_oracles(problems: dict[str, ValidationProblem]) -> list[tuple[str, bool, str]]:
    results = []
    models = [NoiseDirectionModel.random_sphere(), NoiseDirectionModel.antigradient(),
              NoiseDirectionModel.first_component_bias()]
    for name, vp in problems.items():
        worst_g, worst_f = -np.inf, 0.0
        for j, model in enumerate(models):
            rng = RngStream(13, j)
            oracle = InexactOracle(vp.objective, 0.1, 0.01, model, RngStream(13, 10 + j))
            for _ in range(100):
                x = vp.sample(rng)
                g, gt = oracle.gradient_pair(x)
                f, ft = oracle.value_pair(x)
                # subtracting g back out of g + delta*u costs a few ulps of |g|
                excess = float(np.linalg.norm(g - gt)) - 0.1 - 1e-15 * (1 + float(np.linalg.norm(g)))
                worst_g = max(worst_g, excess)
                worst_f = max(worst_f, abs(f - ft))
        ok = worst_g <= 0 and worst_f <= 0.01
        results.append((f"oracle-bounds:{name}", ok,
                        f"grad err minus bound {worst_g:.2e}, max value err {worst_f:.3g}"))
    rng = RngStream(17)
    dev = max(abs(np.linalg.norm(sample_unit_sphere(d, rng)) - 1.0) for d in range(1, 200))
    results.append(("sphere-norms", dev <= 1e-12, f"max deviation {dev:.1e}"))
    return results


def _check_certificates() -> list[tuple[str, bool, str]]:
    results = []
    for solver in SOLVERS:
        for seed in range(3):
            spec = ExperimentSpec(problem="quadratic", solver=solver, delta=1e-4, seed=seed,
                                  L_min=0.025 if solver == "adaptive" else None).resolved()
            built = build_problem(spec)
            run, sdelta = execute(spec, built)
            rep = verify_certificates(run, built.objective, theory_inputs(spec, built, sdelta), solver)
            results.append((f"certificates:{solver}:seed{seed}", rep.verdict,
                            f"N={run.n_iters} worst violation {rep.worst_violation:.1e}"))
    return results


def _check_minors() -> list[tuple[str, bool, str]]:
    rng = RngStream(19)
    worst, monotone = 0.0, True
    for n in range(2, 9):
        p = NesterovSkokovProblem(n)
        for _ in range(20):
            x = rng.uniform(-1, 1, n)
            minors = ns_minor_positivity(p, x)
            J = p.jacobian(x)
            M = J @ J.T
            dense = [np.linalg.det(M[:j, :j]) for j in range(1, n + 1)]
            worst = max(worst, max(abs(a - b) / abs(b) for a, b in zip(minors, dense)))
            monotone &= all(b >= a * (1 - 1e-9) > 0 for a, b in zip(minors, minors[1:]))
    return [("ns-minors", worst <= 1e-8 and monotone, f"max rel err {worst:.1e}, monotone={monotone}")]


def _check_determinism() -> list[tuple[str, bool, str]]:
    spec = ExperimentSpec(problem="rosenbrock", delta=1e-2).resolved()
    texts = []
    for _ in range(2):
        built = build_problem(spec)
        run, sdelta = execute(spec, built)
        texts.append(run_to_csv(run, run_meta(spec, run, sdelta, built)))
    return [("determinism", texts[0] == texts[1], "two seeded reruns compared byte-for-byte")]


def cmd_validate(problems: Optional[dict[str, ValidationProblem]] = None, out=_stdout) -> int:
    problems = validation_problems() if problems is None else problems
    results = (_check_gradients(problems) + _check_oracles(problems) + _check_certificates()
               + _check_minors() + _check_determinism())
    width = max(len(name) for name, _, _ in results)
    for name, ok, detail in results:
        out(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  {detail}")
    failed = [name for name, ok, _ in results if not ok]
    if failed:
        out("validation failed: " + ", ".join(failed))
        return EXIT_VALIDATION
    out("all checks passed")
    return EXIT_OK
