"""The local fractional relaxation equation y^(a) + c^a y = 0 solved exactly, as a
series and by an explicit stepper, plus explicit schemes for the heat, wave and
diffusion models on fractal spaces."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

import series
import special
from errors import ConfigError, DomainError, StabilityError
from fracops import sample
from series import DEFAULT_DEGREE, FractalSeries
from special import FractalOrder

logger = logging.getLogger(__name__)

STABILITY_LIMIT = 0.5
GRID_RTOL = 1e-9


def _finite(name: str, value: float, operation: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite, got {value!r}", operation=operation)
    return value


@dataclass(frozen=True)
class RelaxationProblem:
    """y^(alpha)(t) + c**alpha y(t) = 0 with y(0) = y0."""

    order: FractalOrder
    c: float
    y0: float

    def __post_init__(self):
        c = _finite("rate c", self.c, "RelaxationProblem")
        if not c > 0:
            raise ConfigError(f"rate c must be positive, got {self.c!r}", operation="RelaxationProblem")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "y0", _finite("y0", self.y0, "RelaxationProblem"))

    @property
    def rate(self) -> float:
        """c**alpha."""
        return special.fractal_pow(self.c, self.order.alpha)


def relax_exact(prob: RelaxationProblem, t_grid: Sequence[float]) -> list[float]:
    """y(t) = y0 E_alpha(-(c t)**alpha) at each node."""
    times = [float(t) for t in t_grid]
    if not times:
        raise ConfigError("time grid must not be empty", operation="relax_exact")
    if any(t < 0 for t in times):
        raise DomainError(f"relaxation times must be >= 0, got {min(times)!r}", operation="relax_exact")
    if any(later < earlier for earlier, later in zip(times, times[1:])):
        raise ConfigError("time grid must be ascending", operation="relax_exact")
    a = prob.order.alpha
    return [prob.y0 * special.ml(prob.order, -special.fractal_pow(prob.c * t, a)) for t in times]


def relax_series(prob: RelaxationProblem, t0: float, degree: int = DEFAULT_DEGREE) -> FractalSeries:
    """Taylor expansion about t0 with a_k = y0 (-1)**k c**(k*a) E_a(-(c t0)**a) / Gamma(1 + k*a)."""
    if t0 < 0:
        raise DomainError(f"expansion point must be >= 0, got {t0!r}", operation="relax_series")
    if degree < 0:
        raise ConfigError(f"degree must be >= 0, got {degree!r}", operation="relax_series")
    a = prob.order.alpha
    base = prob.y0 * special.ml(prob.order, -special.fractal_pow(prob.c * t0, a))
    ladder = prob.order.ladder(degree)
    coeffs = [(-1) ** k * base * special.fractal_pow(prob.c, k * a) / ladder[k] for k in range(degree + 1)]
    return FractalSeries(prob.order, t0, tuple(coeffs))


def relax_residual(S: FractalSeries, c: float, order: FractalOrder) -> list[float]:
    """Coefficients of S^(alpha) + c**alpha S; the top term of S has no derivative partner and is left out."""
    if S.order != order:
        raise ConfigError(
            f"series order {S.order.alpha!r} does not match {order.alpha!r}", operation="relax_residual"
        )
    rate = special.fractal_pow(c, order.alpha)
    if S.degree <= 0:
        return [rate * S.coefficient(0)]
    derived = series.series_derivative(S).coeffs
    return [derived[k] + rate * S.coeffs[k] for k in range(S.degree)]


def relax_series_defect(prob: RelaxationProblem, t0: float, t: float, degree: int = DEFAULT_DEGREE) -> float:
    """|relax_series(t0) evaluated at t - relax_exact(t)|; vanishes at alpha == 1 or t0 == 0."""
    approx = series.series_eval(relax_series(prob, t0, degree), t)
    return abs(approx - relax_exact(prob, [t])[0])


def relax_times(dt: float, T: float) -> list[float]:
    steps = int(math.floor(T / dt + 1e-9))
    return [n * dt for n in range(steps + 1)]


def relax_step(prob: RelaxationProblem, dt: float, T: float) -> list[float]:
    """Explicit iterates y_{n+1} = (1 - c**a dt**a / Gamma(1 + a)) y_n sampled at n*dt."""
    if not dt > 0 or not T > 0:
        raise ConfigError(f"dt and T must be positive, got dt={dt!r}, T={T!r}", operation="relax_step")
    if dt > T:
        raise ConfigError(f"dt={dt!r} exceeds T={T!r}", operation="relax_step")
    q = prob.rate * special.fractal_pow(dt, prob.order.alpha) / prob.order.gamma_k(1)
    if q >= 2.0:
        raise StabilityError(f"step factor {q!r} >= 2; the iterates diverge", operation="relax_step")
    if q >= 1.0:
        logger.warning("relaxation step factor %r >= 1; iterates oscillate", q)
    factor = 1.0 - q
    values = [prob.y0]
    for _ in relax_times(dt, T)[1:]:
        values.append(values[-1] * factor)
    logger.debug("relax_step q=%r stable=%s over %d steps", q, q < 1.0, len(values) - 1)
    return values


Profile = Callable[[float], float]


@dataclass(frozen=True)
class HeatModel:
    """Transient heat conduction in a fractal rod of length L.

    The equation reads d^{2a}y/dx^{2a} = kappa d^a y/dt^a, insulated at x = 0 with the
    Robin row k d^a y/dx^a + h (y - y_inf) = 0 at x = L. kappa divides the spatial
    term, so the scheme and its stability ratio use 1/kappa as the diffusion coefficient.
    """

    order: FractalOrder
    kappa: float
    conductivity: float
    transfer: float
    ambient: float
    initial: float
    length: float

    def __post_init__(self):
        for name in ("kappa", "conductivity", "transfer", "ambient", "initial", "length"):
            object.__setattr__(self, name, _finite(name, getattr(self, name), "HeatModel"))
        if not self.kappa > 0 or not self.conductivity > 0 or not self.length > 0:
            raise ConfigError("kappa, conductivity and length must be positive", operation="HeatModel")
        if self.transfer < 0:
            raise ConfigError(f"transfer coefficient must be >= 0, got {self.transfer!r}", operation="HeatModel")

    @property
    def kind(self) -> str:
        return "heat"

    @property
    def coefficient(self) -> float:
        return 1.0 / self.kappa


@dataclass(frozen=True)
class WaveModel:
    """d^a y/dt^a = d^{2a}y/dx^{2a} with d^a y/dt^a = rate(x) at t = 0 and zero far field."""

    order: FractalOrder
    rate: Profile
    initial: Profile | None = None

    @property
    def kind(self) -> str:
        return "wave"

    @property
    def coefficient(self) -> float:
        return 1.0


@dataclass(frozen=True)
class DiffusionModel:
    """d^a y/dt^a = a2alpha d^{2a}y/dx^{2a} from the profile y(0, x) with zero far field."""

    order: FractalOrder
    a2alpha: float
    initial: Profile

    def __post_init__(self):
        value = _finite("a2alpha", self.a2alpha, "DiffusionModel")
        if not value > 0:
            raise ConfigError(f"a2alpha must be positive, got {self.a2alpha!r}", operation="DiffusionModel")
        object.__setattr__(self, "a2alpha", value)

    @property
    def kind(self) -> str:
        return "diffusion"

    @property
    def coefficient(self) -> float:
        return self.a2alpha


ModelSpec = Union[HeatModel, WaveModel, DiffusionModel]


@dataclass(frozen=True, eq=False)
class GridFunction:
    x_nodes: tuple[float, ...]
    t_nodes: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.t_nodes), len(self.x_nodes)):
            raise ConfigError(
                f"values of shape {self.values.shape} do not match {len(self.t_nodes)} times x {len(self.x_nodes)} nodes",
                operation="GridFunction",
            )

    def to_dict(self) -> dict:
        return {
            "x_nodes": list(self.x_nodes),
            "t_nodes": list(self.t_nodes),
            "values": [[float(v) for v in row] for row in self.values],
        }

    def to_csv(self) -> str:
        lines = [",".join(["t"] + [format(x, ".17g") for x in self.x_nodes])]
        for t, row in zip(self.t_nodes, self.values):
            lines.append(",".join([format(t, ".17g")] + [format(float(v), ".17g") for v in row]))
        return "\n".join(lines) + "\n"


def _uniform_step(nodes: np.ndarray, name: str) -> float:
    steps = np.diff(nodes)
    if np.any(steps <= 0):
        raise ConfigError(f"{name} nodes must be strictly ascending", operation="pde_solve")
    step = float(steps[0])
    if not np.allclose(steps, step, rtol=GRID_RTOL, atol=0.0):
        raise ConfigError(f"{name} nodes must be uniformly spaced", operation="pde_solve")
    return step


def _initial_profile(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    if isinstance(model, HeatModel):
        return np.full(x.size, model.initial)
    if model.initial is None:
        return np.zeros(x.size)
    return np.array([sample(model.initial, xi, operation="pde_solve") for xi in x])


def _apply_boundaries(model: ModelSpec, u: np.ndarray, dx: float) -> None:
    if isinstance(model, HeatModel):
        u[0] = u[1]
        conduct = model.conductivity * model.order.gamma_k(1) / special.fractal_pow(dx, model.order.alpha)
        u[-1] = (conduct * u[-2] + model.transfer * model.ambient) / (conduct + model.transfer)
    else:
        u[0] = 0.0
        u[-1] = 0.0


def pde_solve(
    model: ModelSpec,
    x_nodes: Sequence[float],
    t_nodes: Sequence[float],
    *,
    allow_unstable: bool = False,
) -> GridFunction:
    """Explicit forward-in-time, centred-in-space scheme with local fractional stencils.

    Time: Gamma(1+a) (u^{n+1} - u^n) / dt**a. Space: Gamma(1+a)**2 (u_{j+1} - 2u_j + u_{j-1}) / dx**(2a).
    """
    x = np.asarray(x_nodes, dtype=float)
    t = np.asarray(t_nodes, dtype=float)
    if x.ndim != 1 or x.size < 3:
        raise ConfigError("at least three space nodes are required", operation="pde_solve")
    if t.ndim != 1 or t.size < 1:
        raise ConfigError("at least one time node is required", operation="pde_solve")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise ConfigError("grid nodes must be finite", operation="pde_solve")
    dx = _uniform_step(x, "space")
    if isinstance(model, HeatModel) and (x[0] != 0.0 or not math.isclose(x[-1], model.length, rel_tol=GRID_RTOL)):
        raise ConfigError(f"heat grid must span [0, {model.length!r}]", operation="pde_solve")

    a = model.order.alpha
    values = np.empty((t.size, x.size))
    values[0] = _initial_profile(model, x)
    if t.size > 1:
        dt = _uniform_step(t, "time")
        g1 = model.order.gamma_k(1)
        r = model.coefficient * g1 * special.fractal_pow(dt, a) / special.fractal_pow(dx, 2 * a)
        if r > STABILITY_LIMIT:
            if not allow_unstable:
                raise StabilityError(f"stability ratio {r!r} exceeds {STABILITY_LIMIT}", operation="pde_solve")
            logger.warning("%s scheme running with stability ratio %r > %s", model.kind, r, STABILITY_LIMIT)
        logger.debug("%s scheme r=%r over %d steps", model.kind, r, t.size - 1)

        u = values[0].copy()
        for n in range(1, t.size):
            if isinstance(model, WaveModel) and n == 1:
                rate = np.array([sample(model.rate, xi, operation="pde_solve") for xi in x])
                u = u + rate * special.fractal_pow(dt, a) / g1
            else:
                u[1:-1] = u[1:-1] + r * (u[2:] - 2.0 * u[1:-1] + u[:-2])
            _apply_boundaries(model, u, dx)
            if not np.all(np.isfinite(u)):
                raise StabilityError(f"{model.kind} solution lost finiteness at t={t[n]!r}", operation="pde_solve")
            values[n] = u

    return GridFunction(tuple(float(v) for v in x), tuple(float(v) for v in t), values)
