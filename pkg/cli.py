"""Command-line front end: `flc <subcommand> [flags]`.

Every subcommand builds a report and hands it to `emit`, which renders CSV or JSON
with 17 significant digits. Data goes to standard output (or --out), diagnostics
to standard error.

Example:
  python cli.py relax --alpha 1 --c 1 --y0 2 --t-max 1 --steps 1
  python cli.py integrate --const 1 --alpha-cantor --stage 6 --format json
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from typing import Any, Callable, Sequence, TextIO

import numpy as np

import analysis
import expr
import fracops
import series
import solvers
import special
from errors import FractalCalculusError, IoError, UsageError
from special import FractalOrder, SeriesControl

logger = logging.getLogger(__name__)

PROG = "flc"
DEFAULT_ALPHA = 1.0
DEFAULT_CELLS = 1000
DEFAULT_CANTOR_STAGE = 6
FORMATS = ("csv", "json")
# upper bounds on sizes taken from the command line
MAX_DEGREE = 1000
MAX_TIMES = 64
MAX_SAMPLES = 100_000
MAX_SCALES = 40
MAX_STEPS = 1_000_000
MAX_SERIES_TERMS = 100_000
MAX_NX = 100_000
MAX_GRID_POINTS = 10_000_000
FUNCTIONS = ("gamma", "ml", "pow", "staircase")
PROFILES: dict[str, Callable[[float], float]] = {
    "zero": lambda x: 0.0,
    "unit": lambda x: 1.0,
    "gaussian": lambda x: math.exp(-x * x),
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    order: FractalOrder
    control: SeriesControl
    fmt: str = "csv"
    out: str | None = None
    cantor: bool = False


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]

    def to_dict(self) -> dict:
        return {"columns": list(self.columns), "rows": [list(row) for row in self.rows]}


# -- emission -------------------------------------------------------------

def _number(value: float) -> str:
    if not math.isfinite(value):
        raise IoError(f"cannot emit non-finite value {value!r}", operation="emit")
    return format(value, ".17g")


def _plain(report: Any) -> Any:
    if hasattr(report, "to_dict"):
        return _plain(report.to_dict())
    if isinstance(report, dict):
        return {str(k): _plain(v) for k, v in report.items()}
    if isinstance(report, (list, tuple, np.ndarray)):
        return [_plain(v) for v in report]
    if isinstance(report, (np.floating, np.integer)):
        return report.item()
    return report


def _json(value: Any) -> str:
    if isinstance(value, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{_json(v)}" for k, v in value.items()) + "}"
    if isinstance(value, list):
        return "[" + ",".join(_json(v) for v in value) + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return _number(value)
    if isinstance(value, str):
        return json.dumps(value)
    raise IoError(f"cannot emit {type(value).__name__}", operation="emit")


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _number(value)
    return str(value)


def _flatten(value: Any, prefix: str, rows: list[tuple[str, str]]) -> None:
    if isinstance(value, dict):
        for key, item in value.items():
            _flatten(item, f"{prefix}.{key}" if prefix else key, rows)
    elif isinstance(value, list):
        for index, item in enumerate(value):
            _flatten(item, f"{prefix}[{index}]", rows)
    else:
        rows.append((prefix, _cell(value)))


def emit(report: Any, fmt: str) -> bytes:
    """Render a report as CSV or JSON bytes; identical reports give identical bytes."""
    if fmt == "json":
        return (_json(_plain(report)) + "\n").encode("utf-8")
    if fmt != "csv":
        raise UsageError(f"unknown format {fmt!r}", operation="emit")
    if isinstance(report, solvers.GridFunction):
        return report.to_csv().encode("utf-8")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    if isinstance(report, Table):
        writer.writerow(report.columns)
        writer.writerows([_cell(_plain(v)) for v in row] for row in report.rows)
    else:
        rows: list[tuple[str, str]] = []
        _flatten(_plain(report), "", rows)
        writer.writerow(("field", "value"))
        writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


# -- argument handling ----------------------------------------------------

class _ArgumentParser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        raise UsageError(message, operation="usage")


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _bounded_int(limit: int) -> Callable[[str], int]:
    def parse(text: str) -> int:
        value = int(text)
        if value > limit:
            raise argparse.ArgumentTypeError(f"must be at most {limit}, got {value}")
        return value

    parse.__name__ = "int"
    return parse


def _axes(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _add_function_flags(parser: argparse.ArgumentParser, *, plane: bool = False) -> None:
    source = parser.add_argument_group("function")
    source.add_argument("--expr", help="expression in x (or t), e.g. 'E(x^a)'")
    source.add_argument("--const", type=float, help="constant function")
    source.add_argument("--function", choices=FUNCTIONS, help="built-in function")
    source.add_argument("--power", type=float, help="exponent for --function pow (default alpha)")
    source.add_argument("--stage", type=_bounded_int(fracops.MAX_CANTOR_STAGE), default=None, help="Cantor stage")
    if plane:
        source.add_argument("--expr-y", help="expression of the second variable")
        source.add_argument("--combine", choices=("sum", "product"), default="sum")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    order = common.add_mutually_exclusive_group()
    order.add_argument("--alpha", type=float, default=None, help=f"fractal order in (0, 1] (default {DEFAULT_ALPHA})")
    order.add_argument("--alpha-cantor", action="store_true", help="alpha = ln2/ln3 with Cantor partitions")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--out", help="write the report to this path instead of standard output")
    common.add_argument("--abs-tol", type=float, default=special.DEFAULT_ABS_TOL)
    common.add_argument("--max-terms", type=_bounded_int(MAX_SERIES_TERMS), default=special.DEFAULT_MAX_TERMS)
    common.add_argument("--verbose", action="store_true")

    parser = _ArgumentParser(prog=PROG, description="Local fractional calculus toolkit.")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = commands.add_parser("eval", parents=[common], help="evaluate an expression or special function")
    _add_function_flags(p)
    p.add_argument("--at", type=float, default=0.0)
    p.add_argument("--series", action="store_true", help="also evaluate the truncated series")
    p.add_argument("--degree", type=_bounded_int(MAX_DEGREE), default=series.DEFAULT_DEGREE)

    p = commands.add_parser("diff", parents=[common], help="rule-table derivative of an expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--times", type=_bounded_int(MAX_TIMES), default=1)
    p.add_argument("--series", action="store_true")
    p.add_argument("--degree", type=_bounded_int(MAX_DEGREE), default=series.DEFAULT_DEGREE)

    p = commands.add_parser("integrate", parents=[common], help="fractal sum over a partition")
    _add_function_flags(p)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    partition = p.add_mutually_exclusive_group()
    partition.add_argument("--uniform", type=_bounded_int(fracops.MAX_UNIFORM_CELLS), metavar="N")
    partition.add_argument("--cantor", type=_bounded_int(fracops.MAX_CANTOR_STAGE), metavar="STAGE")
    p.add_argument("--ratio", type=float, default=1.0 / 3.0, help="Cantor scale ratio")

    p = commands.add_parser("derivative", parents=[common], help="limit-definition derivative estimate")
    _add_function_flags(p, plane=True)
    p.add_argument("--at", type=float, default=0.0)
    p.add_argument("--at-y", type=float, default=0.0)
    p.add_argument("--times", type=_bounded_int(MAX_TIMES), default=1)
    p.add_argument("--axes", type=_axes, help="comma separated axes for a partial derivative, outer first")
    p.add_argument("--h0", type=float)
    p.add_argument("--step-ratio", type=float)
    p.add_argument("--count", type=int)

    p = commands.add_parser("taylor", parents=[common], help="generalized Taylor series")
    _add_function_flags(p, plane=True)
    p.add_argument("--derivs", type=_float_list, help="derivative values at x0, comma separated")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--x0-y", type=float, default=0.0)
    p.add_argument("--degree", type=_bounded_int(MAX_DEGREE), default=8)
    p.add_argument("--at", type=float)
    p.add_argument("--at-y", type=float)
    p.add_argument("--apply", choices=("derivative", "antiderivative"))
    p.add_argument("--times", type=_bounded_int(MAX_TIMES), default=1)
    p.add_argument("--mvt", action="store_true", help="locate mean-value witnesses on [x0, at]")
    p.add_argument("--undivided", action="store_true", help="keep the undivided two-variable coefficients")

    p = commands.add_parser("hoelder", parents=[common], help="Hoelder fit or continuity check")
    _add_function_flags(p, plane=True)
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--samples", type=_bounded_int(MAX_SAMPLES), default=analysis.DEFAULT_SAMPLES)
    p.add_argument("--scales", type=_bounded_int(MAX_SCALES), default=analysis.DEFAULT_SCALES)
    p.add_argument("--seed", type=int, default=analysis.DEFAULT_SEED)
    p.add_argument("--exponent", type=float)
    p.add_argument("--at", type=float, help="run a continuity check at this point instead of a fit")
    p.add_argument("--at-y", type=float)
    p.add_argument("--delta", type=_float_list, default=[0.1, 0.01, 0.001])
    p.add_argument("--bound", type=float, default=1.0)
    p.add_argument("--side", choices=analysis.SIDES, default="both")

    p = commands.add_parser("relax", parents=[common], help="relaxation equation")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--y0", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=1.0)
    p.add_argument("--steps", type=_bounded_int(MAX_STEPS), default=10)
    p.add_argument("--method", choices=("exact", "step", "series", "residual", "defect"), default="exact")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--degree", type=_bounded_int(MAX_DEGREE), default=series.DEFAULT_DEGREE)
    p.add_argument("--at", type=float, help="evaluation time for --method defect")

    p = commands.add_parser("pde", parents=[common], help="explicit schemes for the heat, wave and diffusion models")
    p.add_argument("--model", choices=("heat", "wave", "diffusion"), required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--conductivity", type=float, default=1.0)
    p.add_argument("--transfer", type=float, default=0.0)
    p.add_argument("--ambient", type=float, default=0.0)
    p.add_argument("--initial", type=float, default=1.0, help="uniform initial temperature (heat)")
    p.add_argument("--length", type=float, default=1.0)
    p.add_argument("--a2alpha", type=float, default=1.0)
    p.add_argument("--profile", choices=sorted(PROFILES), default="gaussian")
    p.add_argument("--rate", choices=sorted(PROFILES), default="gaussian")
    p.add_argument("--x-min", type=float, default=0.0)
    p.add_argument("--x-max", type=float, default=1.0)
    p.add_argument("--nx", type=_bounded_int(MAX_NX), default=51)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--t-max", type=float, default=1e-2)
    p.add_argument("--allow-unstable", action="store_true")

    p = commands.add_parser("defect", parents=[common], help="semigroup defect of E_alpha")
    p.add_argument("--at", type=float, default=1.0)
    p.add_argument("--at-y", type=float, default=1.0)
    return parser


def _run_config(args: argparse.Namespace) -> RunConfig:
    try:
        if args.alpha_cantor:
            order = FractalOrder.cantor()
        else:
            order = FractalOrder(DEFAULT_ALPHA if args.alpha is None else args.alpha)
        control = SeriesControl(args.abs_tol, args.max_terms)
    except FractalCalculusError as exc:
        raise UsageError(str(exc), operation="usage") from exc
    return RunConfig(args.command, order, control, args.format, args.out, args.alpha_cantor)


# -- function sources -----------------------------------------------------

def _ast_function(ast: expr.ExprAst, config: RunConfig) -> Callable[[float], float]:
    return lambda value: expr.eval_ast(ast, {"x": value, "t": value}, config.order)


def _expression_function(text: str, config: RunConfig) -> Callable[[float], float]:
    return _ast_function(expr.parse(text), config)


def _scalar_function(args: argparse.Namespace, config: RunConfig) -> Callable[[float], float]:
    if args.const is not None:
        constant = args.const
        return lambda value: constant
    if args.expr is not None:
        return _expression_function(args.expr, config)
    if args.function == "staircase":
        stage = 12 if args.stage is None else args.stage
        return lambda value: fracops.cantor_staircase(value, stage)
    if args.function == "gamma":
        return special.gamma
    if args.function == "ml":
        return lambda value: special.ml(config.order, value, config.control)
    if args.function == "pow":
        power = config.order.alpha if args.power is None else args.power
        return lambda value: special.fractal_pow(value, power)
    raise UsageError("one of --expr, --const or --function is required", operation=config.subcommand)


def _plane_function(args: argparse.Namespace, config: RunConfig) -> Callable[[float, float], float]:
    if args.expr is None or args.expr_y is None:
        raise UsageError("two-variable functions need --expr and --expr-y", operation=config.subcommand)
    g = _expression_function(args.expr, config)
    h = _expression_function(args.expr_y, config)
    if args.combine == "product":
        return lambda x, y: g(x) * h(y)
    return lambda x, y: g(x) + h(y)


def _rule_values(text: str, center: float, count: int, config: RunConfig) -> list[float]:
    """Rule-table derivatives of order k*alpha, k = 0..count-1, evaluated at center."""
    node = expr.parse(text)
    values = []
    for _ in range(count):
        values.append(expr.eval_ast(node, {"x": center, "t": center}, config.order))
        node = expr.diff_ast(node)
    return values


# -- subcommands ----------------------------------------------------------

def _cmd_eval(args, config: RunConfig):
    if args.expr is not None:
        ast = expr.parse(args.expr)
        report = {
            "expr": expr.to_text(ast),
            "alpha": config.order.alpha,
            "at": args.at,
            "value": expr.eval_ast(ast, {"x": args.at, "t": args.at}, config.order),
        }
        if args.series:
            S = expr.to_series(ast, config.order, args.degree)
            report["series_value"] = series.series_eval(S, args.at)
            report["coeffs"] = list(S.coeffs)
        return report
    report = {"function": args.function, "alpha": config.order.alpha, "at": args.at}
    if args.function == "ml":
        summed = special.ml_sum(config.order, args.at, config.control)
        report.update(value=summed.value, terms=summed.terms)
    else:
        report["value"] = _scalar_function(args, config)(args.at)
    return report


def _cmd_diff(args, config: RunConfig):
    if args.times < 1:
        raise UsageError(f"--times must be positive, got {args.times}", operation="diff")
    node = expr.parse(args.expr)
    for _ in range(args.times):
        node = expr.diff_ast(node)
    report = {"expr": expr.to_text(node)}
    if args.series:
        report["coeffs"] = list(expr.to_series(node, config.order, args.degree).coeffs)
    return report


def _cmd_integrate(args, config: RunConfig):
    f = _scalar_function(args, config)
    if args.cantor is not None:
        part = fracops.PartitionScheme.cantor(args.cantor, args.ratio)
    elif args.uniform is not None:
        part = fracops.PartitionScheme.uniform(args.uniform)
    elif config.cantor:
        stage = DEFAULT_CANTOR_STAGE if args.stage is None else args.stage
        part = fracops.PartitionScheme.cantor(stage)
    else:
        part = fracops.PartitionScheme.uniform(DEFAULT_CELLS)
    result = fracops.lf_integral(f, args.a, args.b, config.order, part)
    return {"alpha": config.order.alpha, "partition": part.kind, **result.to_dict()}


def _schedule(args, default: fracops.StepSchedule) -> fracops.StepSchedule:
    return fracops.StepSchedule(
        default.h0 if args.h0 is None else args.h0,
        default.ratio if args.step_ratio is None else args.step_ratio,
        default.count if args.count is None else args.count,
    )


def _cmd_derivative(args, config: RunConfig):
    if args.axes:
        f2 = _plane_function(args, config)
        default = fracops.DEFAULT_SCHEDULE if len(args.axes) == 1 else fracops.DEFAULT_ITERATED_SCHEDULE
        estimate = fracops.lf_partial_fd(f2, (args.at, args.at_y), config.order, args.axes, _schedule(args, default))
    elif args.times == 1:
        estimate = fracops.lf_derivative_fd(
            _scalar_function(args, config), args.at, config.order, _schedule(args, fracops.DEFAULT_SCHEDULE)
        )
    else:
        estimate = fracops.lf_derivative_iterated(
            _scalar_function(args, config),
            args.at,
            config.order,
            args.times,
            _schedule(args, fracops.DEFAULT_ITERATED_SCHEDULE),
        )
    return {"alpha": config.order.alpha, "at": args.at, **estimate.to_dict()}


def _cmd_taylor(args, config: RunConfig):
    if args.degree < 0:
        raise UsageError(f"--degree must be >= 0, got {args.degree}", operation="taylor")
    if args.expr_y is not None:
        return _taylor_plane(args, config)
    if args.derivs is not None:
        derivs = args.derivs
    elif args.expr is not None:
        derivs = _rule_values(args.expr, args.x0, args.degree + 1, config)
    else:
        raise UsageError("taylor needs --derivs or --expr", operation="taylor")
    S = series.taylor_from_derivatives(derivs, config.order, args.x0)
    if args.apply == "derivative":
        S = series.series_derivative(S, args.times)
    elif args.apply == "antiderivative":
        S = series.series_antiderivative(S, args.times)
    report: dict[str, Any] = {**S.to_dict(), "derivatives": series.rule_derivatives(S)}
    if args.at is not None:
        report["at"] = args.at
        report["value"] = series.series_eval(S, args.at)
        report["integral"] = series.series_integral(S, args.at)
        if args.expr is not None and args.apply is None:
            f = _expression_function(args.expr, config)
            report["remainder"] = series.taylor_remainder(f, S, args.at)
        if args.mvt:
            report["integral_mvt"] = series.integral_mvt_locate(S, args.at).to_dict()
            if args.expr is not None:
                ast = expr.parse(args.expr)
                f, falpha = _ast_function(ast, config), _ast_function(expr.diff_ast(ast), config)
                report["mvt"] = series.mvt_locate(f, falpha, args.x0, args.at, config.order).to_dict()
    return report


def _taylor_plane(args, config: RunConfig):
    if args.expr is None:
        raise UsageError("two-variable Taylor series need --expr and --expr-y", operation="taylor")
    gx = _rule_values(args.expr, args.x0, args.degree + 1, config)
    hy = _rule_values(args.expr_y, args.x0_y, args.degree + 1, config)

    def oracle(i: int, j: int) -> float:
        if args.combine == "product":
            return gx[i] * hy[j]
        if i == 0 and j == 0:
            return gx[0] + hy[0]
        if j == 0:
            return gx[i]
        return hy[j] if i == 0 else 0.0

    T = series.taylor2d(oracle, (args.x0, args.x0_y), config.order, args.degree, undivided=args.undivided)
    report: dict[str, Any] = T.to_dict()
    if args.at is not None and args.at_y is not None:
        report["at"] = [args.at, args.at_y]
        report["value"] = series.series2d_eval(T, args.at, args.at_y)
        report["remainder"] = series.taylor2d_remainder(_plane_function(args, config), T, args.at, args.at_y)
    return report


def _cmd_hoelder(args, config: RunConfig):
    if args.at is None:
        estimate = analysis.hoelder_fit(
            _scalar_function(args, config), args.a, args.b, args.samples,
            scales=args.scales, seed=args.seed, exponent=args.exponent,
        )
        return estimate.to_dict()
    if args.expr_y is not None:
        at_y = 0.0 if args.at_y is None else args.at_y
        report = analysis.lf_continuity_check_2d(
            _plane_function(args, config), (args.at, at_y), config.order, args.delta, args.bound, side=args.side
        )
    else:
        report = analysis.lf_continuity_check(
            _scalar_function(args, config), args.at, config.order, args.delta, args.bound, side=args.side
        )
    return report.to_dict()


def _cmd_relax(args, config: RunConfig):
    try:
        prob = solvers.RelaxationProblem(config.order, args.c, args.y0)
    except FractalCalculusError as exc:
        raise UsageError(str(exc), operation="relax") from exc
    if args.method == "residual":
        S = solvers.relax_series(prob, args.t0, args.degree)
        residual = solvers.relax_residual(S, args.c, config.order)
        return Table(("k", "residual"), tuple((k, r) for k, r in enumerate(residual)))
    if args.method == "defect":
        at = args.t_max if args.at is None else args.at
        return {
            "alpha": config.order.alpha,
            "t0": args.t0,
            "t": at,
            "defect": solvers.relax_series_defect(prob, args.t0, at, args.degree),
        }
    if args.steps < 1:
        raise UsageError(f"--steps must be positive, got {args.steps}; the time grid would be empty", operation="relax")
    if args.method == "step":
        dt = args.t_max / args.steps
        values = solvers.relax_step(prob, dt, args.t_max)
        times = solvers.relax_times(dt, args.t_max)
    elif args.method == "series":
        S = solvers.relax_series(prob, args.t0, args.degree)
        times = [float(t) for t in np.linspace(args.t0, args.t_max, args.steps + 1)]
        values = [series.series_eval(S, t) for t in times]
    else:
        times = [float(t) for t in np.linspace(0.0, args.t_max, args.steps + 1)]
        values = solvers.relax_exact(prob, times)
    return Table(("t", "y"), tuple(zip(times, values)))


def _cmd_pde(args, config: RunConfig):
    try:
        if args.model == "heat":
            model = solvers.HeatModel(
                config.order, args.kappa, args.conductivity, args.transfer, args.ambient, args.initial, args.length
            )
            x_min, x_max = 0.0, args.length
        elif args.model == "wave":
            model = solvers.WaveModel(config.order, PROFILES[args.rate], PROFILES[args.profile])
            x_min, x_max = args.x_min, args.x_max
        else:
            model = solvers.DiffusionModel(config.order, args.a2alpha, PROFILES[args.profile])
            x_min, x_max = args.x_min, args.x_max
    except FractalCalculusError as exc:
        raise UsageError(str(exc), operation="pde") from exc
    if not args.dt > 0 or args.t_max < 0:
        raise UsageError("--dt must be positive and --t-max nonnegative", operation="pde")
    levels = args.t_max / args.dt
    if not levels < MAX_GRID_POINTS:
        raise UsageError(f"--t-max / --dt must stay below {MAX_GRID_POINTS} time steps", operation="pde")
    steps = int(math.floor(levels + 1e-9))
    if (steps + 1) * args.nx > MAX_GRID_POINTS:
        raise UsageError(
            f"grid of {steps + 1} time levels by {args.nx} nodes exceeds {MAX_GRID_POINTS} points", operation="pde"
        )
    x_nodes = np.linspace(x_min, x_max, args.nx)
    t_nodes = args.dt * np.arange(steps + 1)
    return solvers.pde_solve(model, x_nodes, t_nodes, allow_unstable=args.allow_unstable)


def _cmd_defect(args, config: RunConfig):
    return {
        "alpha": config.order.alpha,
        "x": args.at,
        "y": args.at_y,
        "defect": special.ml_semigroup_defect(config.order, args.at, args.at_y, config.control),
    }


DISPATCH: dict[str, Callable[[argparse.Namespace, RunConfig], Any]] = {
    "eval": _cmd_eval,
    "diff": _cmd_diff,
    "integrate": _cmd_integrate,
    "derivative": _cmd_derivative,
    "taylor": _cmd_taylor,
    "hoelder": _cmd_hoelder,
    "relax": _cmd_relax,
    "pde": _cmd_pde,
    "defect": _cmd_defect,
}


def _write(payload: bytes, config: RunConfig, stdout: TextIO) -> None:
    if config.out is None:
        stdout.write(payload.decode("utf-8"))
        stdout.flush()
        return
    try:
        with open(config.out, "wb") as handle:
            handle.write(payload)
    except OSError as exc:
        raise IoError(f"cannot write {config.out}: {exc.strerror}", operation="emit") from exc


def dispatch(argv: Sequence[str]) -> tuple[RunConfig, bytes]:
    """Parse argv, run the subcommand and render its report."""
    args = build_parser().parse_args(list(argv))
    root = logging.getLogger()
    previous = root.level
    if args.verbose:
        root.setLevel(logging.DEBUG)
    try:
        config = _run_config(args)
        logger.debug("dispatching %s with alpha=%r format=%s", config.subcommand, config.order.alpha, config.fmt)
        report = DISPATCH[args.command](args, config)
        return config, emit(report, config.fmt)
    finally:
        root.setLevel(previous)


def run(argv: Sequence[str], stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    """Run one command line; returns the process exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    command = next((a for a in argv if a in DISPATCH), PROG)
    try:
        config, payload = dispatch(argv)
        _write(payload, config, stdout)
    except UsageError as exc:
        stderr.write(f"{PROG}: {exc.operation or command}: {exc.kind}: {exc}\n")
        return 2
    except FractalCalculusError as exc:
        stderr.write(f"{PROG}: {exc.operation or command}: {exc.kind}: {exc}\n")
        return 1
    except SystemExit as exc:
        return int(exc.code or 0)
    return 0


def main() -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    return run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
