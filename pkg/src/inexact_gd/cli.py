"""Command-line entry point: ``inexact-gd <command> [flags]``.

Values come from built-in defaults, then a flat ``key=value`` config file
(``--config``), then command-line flags, later sources winning.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields, replace
from typing import Optional, Sequence

from . import harness
from .harness import EXIT_USAGE, ExperimentSpec, UsageError

COMMANDS = ("run", "table-quadratic", "logreg", "rosenbrock", "nesterov-skokov", "validate")

# per-command grid defaults for the list-valued flags
GRID_DEFAULTS = {
    "table-quadratic": {"mu": [0.01, 0.1, 0.9, 0.99], "delta": [1e-7, 1e-4, 1e-1]},
    "rosenbrock": {"noise": ["random", "antigradient", "constant"], "delta": [1e-4, 1e-3, 1e-2]},
    "nesterov-skokov": {"n": [3, 5, 7], "delta": [1e-4, 1e-3, 1e-2]},
}
INT_KEYS = {"n", "k", "m", "seed", "trials", "max_iters", "ref_iters", "nostop_iters"}
FLOAT_KEYS = {"delta", "small_delta", "mu", "L", "L0", "L_min"}
STR_KEYS = {"problem", "solver", "noise", "stop", "out"}
CONFIG_KEYS = INT_KEYS | FLOAT_KEYS | STR_KEYS


def _split(values) -> list[str]:
    """Flatten comma-separated lists; ``constant:v1,v2`` noise tokens stay whole."""
    out = []
    for v in values:
        v = str(v)
        if ":" in v:
            out.append(v)
        else:
            out.extend(part for part in v.split(",") if part)
    return out


def _convert(key: str, text: str):
    try:
        if key in INT_KEYS:
            return int(text)
        if key in FLOAT_KEYS:
            return float(text)
    except ValueError:
        raise UsageError(f"bad value for {key}: {text!r}") from None
    return text


def read_config(path: str) -> dict[str, list[str]]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment, dashes in keys are allowed."""
    values: dict[str, list[str]] = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: expected key=value with a known key, got {raw!r}")
        values[key] = _split([val.strip()])
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem")
    common.add_argument("--solver")
    common.add_argument("--noise", nargs="+", help="random, antigradient, none, first-component, constant[:v1,v2,...]")
    common.add_argument("--delta", nargs="+", help="gradient error bound (list for grid commands)")
    common.add_argument("--small-delta", dest="small_delta")
    common.add_argument("--mu", nargs="+")
    common.add_argument("--L", dest="L")
    common.add_argument("--n", nargs="+")
    common.add_argument("--k")
    common.add_argument("--m")
    common.add_argument("--seed")
    common.add_argument("--trials")
    common.add_argument("--stop", help="const-rule, adaptive-rule or none")
    common.add_argument("--max-iters", dest="max_iters")
    common.add_argument("--out")
    common.add_argument("--config")
    common.add_argument("--L0", dest="L0")
    common.add_argument("--L-min", dest="L_min")
    common.add_argument("--ref-iters", dest="ref_iters", help="exact steps used to estimate the logistic f*")
    common.add_argument("--nostop-iters", dest="nostop_iters", help="iterations of the logreg run without stopping")

    parser = argparse.ArgumentParser(prog="inexact-gd",
                                     description="Gradient descent with inexact gradients: experiments and checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "run": "single solver run, per-iteration CSV",
        "table-quadratic": "iteration counts and accuracy over a mu x delta grid",
        "logreg": "logistic regression with and without the stopping rule",
        "rosenbrock": "adaptive method on Rosenbrock over noise x delta",
        "nesterov-skokov": "adaptive method on Nesterov-Skokov over n x delta",
        "validate": "run the invariant suite",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_values(command: str, ns: argparse.Namespace) -> dict[str, list[str]]:
    """Merge config-file values under the command-line ones."""
    merged: dict[str, list[str]] = {}
    if ns.config:
        merged.update(read_config(ns.config))
    for key in CONFIG_KEYS:
        val = getattr(ns, key, None)
        if val is not None:
            merged[key] = _split(val if isinstance(val, list) else [val])
    return merged


def make_spec(values: dict[str, list[str]], grid_keys=()) -> ExperimentSpec:
    kwargs = {}
    spec_fields = {f.name for f in fields(ExperimentSpec)}
    for key, vals in values.items():
        if key not in spec_fields or key in grid_keys:
            continue
        if len(vals) != 1:
            raise UsageError(f"{key} takes a single value for this command")
        kwargs[key] = _convert(key, vals[0])
    return ExperimentSpec(**kwargs)


def grid(values: dict[str, list[str]], command: str, key: str) -> list:
    if key in values:
        return [_convert(key, v) for v in values[key]]
    return list(GRID_DEFAULTS[command][key])


def dispatch(command: str, values: dict[str, list[str]]) -> int:
    if command == "validate":
        return harness.cmd_validate()
    if command == "run":
        return harness.cmd_run(make_spec(values))
    if command == "table-quadratic":
        spec = make_spec(values, grid_keys=("mu", "delta"))
        return harness.cmd_table_quadratic(spec, grid(values, command, "mu"), grid(values, command, "delta"))
    if command == "rosenbrock":
        spec = make_spec(values, grid_keys=("noise", "delta"))
        return harness.cmd_rosenbrock(spec, grid(values, command, "noise"), grid(values, command, "delta"))
    if command == "nesterov-skokov":
        spec = make_spec(values, grid_keys=("n", "delta"))
        return harness.cmd_ns(spec, grid(values, command, "n"), grid(values, command, "delta"))
    if command == "logreg":
        spec = make_spec(values)
        if "delta" not in values:
            spec = replace(spec, delta=0.1)
        nostop = _convert("nostop_iters", values["nostop_iters"][0]) if "nostop_iters" in values else 10_000
        return harness.cmd_logreg(spec, nostop_iters=nostop)
    raise UsageError(f"unknown command {command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return dispatch(ns.command, resolve_values(ns.command, ns))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
