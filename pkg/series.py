"""Rule-based calculus on truncated fractal power series.

A FractalSeries holds a_0..a_n with f(x) = sum a_k (x - x0)**(k*alpha). Term-wise
differentiation and integration follow the Gamma-ratio rules
d^a x^{ka} = Gamma(1+ka)/Gamma(1+(k-1)a) x^{(k-1)a}, so every operation here is
exact up to floating point rounding.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize

import special
from errors import ConfigError, DomainError, NoWitnessError, OracleError
from fracops import ScalarFunction, ScalarFunction2D, sample
from special import FractalOrder

logger = logging.getLogger(__name__)

DEFAULT_DEGREE = 32
CANON_FLOOR = 1e-300
MVT_SAMPLES = 256
MVT_RTOL = 1e-9


def _canonical(coeffs: Sequence[float]) -> tuple[float, ...]:
    values = [float(c) for c in coeffs]
    if not all(math.isfinite(c) for c in values):
        raise ConfigError("series coefficients must be finite", operation="FractalSeries")
    while values and abs(values[-1]) < CANON_FLOOR:
        values.pop()
    return tuple(values)


@dataclass(frozen=True)
class FractalSeries:
    order: FractalOrder
    x0: float
    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "coeffs", _canonical(self.coeffs))

    @property
    def degree(self) -> int:
        """Index of the last nonzero coefficient; -1 for the zero series."""
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> float:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0.0

    def to_dict(self) -> dict:
        return {"alpha": self.order.alpha, "x0": self.x0, "coeffs": list(self.coeffs)}


@dataclass(frozen=True)
class FractalSeries2D:
    """Triangular coefficients: coeffs[n][i] multiplies (x-x0)**(i*a) * (y-y0)**((n-i)*a)."""

    order: FractalOrder
    center: tuple[float, float]
    coeffs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(float(c) for c in row) for row in self.coeffs)
        for n, row in enumerate(rows):
            if len(row) != n + 1:
                raise ConfigError(f"row {n} must hold {n + 1} coefficients, got {len(row)}", operation="FractalSeries2D")
        object.__setattr__(self, "coeffs", rows)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def to_dict(self) -> dict:
        return {
            "alpha": self.order.alpha,
            "x0": self.center[0],
            "y0": self.center[1],
            "coeffs": [list(row) for row in self.coeffs],
        }


@dataclass(frozen=True)
class MvtWitness:
    xi: float
    residual: float

    def to_dict(self) -> dict:
        return {"xi": self.xi, "residual": self.residual}


def series_eval(S: FractalSeries, x: float) -> float:
    """Sum a_k (x - x0)**(k*alpha) in ascending k with exact (fsum) accumulation."""
    if x < S.x0:
        raise DomainError(f"series centred at {S.x0!r} evaluated left of its centre at {x!r}", operation="series_eval")
    h = x - S.x0
    a = S.order.alpha
    try:
        return math.fsum(c * special.fractal_pow(h, k * a) for k, c in enumerate(S.coeffs))
    except OverflowError:
        raise DomainError(f"series overflows at {x!r}", operation="series_eval") from None


def series_derivative(S: FractalSeries, times: int = 1) -> FractalSeries:
    """Term-wise local fractional derivative, applied `times` times."""
    coeffs = S.coeffs
    for _ in range(times):
        ladder = S.order.ladder(len(coeffs))
        coeffs = tuple(coeffs[k] * ladder[k] / ladder[k - 1] for k in range(1, len(coeffs)))
    return FractalSeries(S.order, S.x0, coeffs)


def series_antiderivative(S: FractalSeries, times: int = 1) -> FractalSeries:
    """Term-wise local fractional integral from x0, applied `times` times."""
    coeffs = S.coeffs
    for _ in range(times):
        if not coeffs:
            break
        ladder = S.order.ladder(len(coeffs))
        coeffs = (0.0,) + tuple(c * ladder[k] / ladder[k + 1] for k, c in enumerate(coeffs))
    return FractalSeries(S.order, S.x0, coeffs)


def series_integral(S: FractalSeries, x: float) -> float:
    """Local fractional integral of the series from x0 to x."""
    return series_eval(series_antiderivative(S), x)


def rule_derivatives(S: FractalSeries) -> list[float]:
    """f^(k*alpha)(x0) = a_k * Gamma(1 + k*alpha) for k = 0..degree."""
    ladder = S.order.ladder(len(S.coeffs))
    return [c * ladder[k] for k, c in enumerate(S.coeffs)]


def taylor_from_derivatives(derivs: Sequence[float], order: FractalOrder, x0: float = 0.0) -> FractalSeries:
    """Generalized Taylor polynomial with a_k = f^(k*alpha)(x0) / Gamma(1 + k*alpha)."""
    if len(derivs) == 0:
        raise ConfigError("at least one derivative value is required", operation="taylor_from_derivatives")
    ladder = order.ladder(len(derivs) - 1)
    return FractalSeries(order, x0, tuple(float(d) / ladder[k] for k, d in enumerate(derivs)))


def taylor_remainder(f: ScalarFunction, S: FractalSeries, x: float) -> float:
    return sample(f, x, operation="taylor_remainder") - series_eval(S, x)


def _locate(g: Callable[[float], float], lo: float, hi: float, tol: float, operation: str) -> MvtWitness:
    grid = np.linspace(lo, hi, MVT_SAMPLES + 2)[1:-1]
    values = [g(float(xi)) for xi in grid]
    for xi, value in zip(grid, values):
        if abs(value) <= tol:
            return MvtWitness(float(xi), value)
    for k in range(len(grid) - 1):
        if values[k] * values[k + 1] < 0:
            xi = optimize.bisect(g, float(grid[k]), float(grid[k + 1]), xtol=1e-15)
            residual = g(xi)
            if abs(residual) <= tol:
                logger.debug("%s witness xi=%r residual=%r", operation, xi, residual)
                return MvtWitness(float(xi), residual)
            raise NoWitnessError(f"bisection stalled at xi={xi!r} with residual {residual!r}", operation=operation)
    raise NoWitnessError(f"no sign change on ({lo!r}, {hi!r}) at {MVT_SAMPLES} samples", operation=operation)


def mvt_locate(
    f: ScalarFunction,
    falpha: ScalarFunction,
    x0: float,
    x: float,
    order: FractalOrder,
) -> MvtWitness:
    """Find xi in (x0, x) with f(x) - f(x0) = falpha(xi) (x - x0)**alpha / Gamma(1 + alpha)."""
    if not x0 < x:
        raise ConfigError(f"mean value interval needs x0 < x, got ({x0!r}, {x!r})", operation="mvt_locate")
    delta = sample(f, x, operation="mvt_locate") - sample(f, x0, operation="mvt_locate")
    scale = special.fractal_pow(x - x0, order.alpha) / order.gamma_k(1)

    def g(xi: float) -> float:
        return delta - sample(falpha, xi, operation="mvt_locate") * scale

    return _locate(g, x0, x, MVT_RTOL * max(1.0, abs(delta)), "mvt_locate")


def integral_mvt_locate(S: FractalSeries, x: float) -> MvtWitness:
    """Find xi in (x0, x) with the integral of S over [x0, x] equal to S(xi) (x - x0)**alpha / Gamma(1 + alpha)."""
    if not S.x0 < x:
        raise ConfigError(f"mean value interval needs x0 < x, got ({S.x0!r}, {x!r})", operation="integral_mvt_locate")
    total = series_integral(S, x)
    scale = special.fractal_pow(x - S.x0, S.order.alpha) / S.order.gamma_k(1)

    def g(xi: float) -> float:
        return total - series_eval(S, xi) * scale

    return _locate(g, S.x0, x, MVT_RTOL * max(1.0, abs(total)), "integral_mvt_locate")


MixedOracle = Callable[[int, int], float]


def taylor2d(
    oracle: MixedOracle,
    center: tuple[float, float],
    order: FractalOrder,
    degree: int = DEFAULT_DEGREE,
    *,
    undivided: bool = False,
) -> FractalSeries2D:
    """Two-variable Taylor coefficients from oracle(i, j) = d^{(i+j)a} f / dx^{ia} dy^{ja} at the centre.

    Coefficients are divided by Gamma(1+ia) Gamma(1+ja) so that alpha = 1 gives the
    classical formula; undivided=True keeps the undivided oracle values.
    """
    if degree < 0:
        raise ConfigError(f"degree must be >= 0, got {degree!r}", operation="taylor2d")
    ladder = order.ladder(degree)
    rows = []
    for n in range(degree + 1):
        row = []
        for i in range(n + 1):
            try:
                value = float(oracle(i, n - i))
            except Exception as exc:
                raise OracleError(f"oracle failed at ({i}, {n - i}): {exc}", operation="taylor2d") from exc
            if not math.isfinite(value):
                raise OracleError(f"oracle is not finite at ({i}, {n - i})", operation="taylor2d")
            row.append(value if undivided else value / (ladder[i] * ladder[n - i]))
        rows.append(tuple(row))
    return FractalSeries2D(order, center, tuple(rows))


def series2d_eval(T: FractalSeries2D, x: float, y: float) -> float:
    x0, y0 = T.center
    if x < x0 or y < y0:
        raise DomainError(f"2-D series centred at {T.center!r} evaluated at ({x!r}, {y!r})", operation="series2d_eval")
    a = T.order.alpha
    hx, hy = x - x0, y - y0
    try:
        return math.fsum(
            c * special.fractal_pow(hx, i * a) * special.fractal_pow(hy, (n - i) * a)
            for n, row in enumerate(T.coeffs)
            for i, c in enumerate(row)
        )
    except OverflowError:
        raise DomainError(f"2-D series overflows at ({x!r}, {y!r})", operation="series2d_eval") from None


def taylor2d_remainder(f: ScalarFunction2D, T: FractalSeries2D, x: float, y: float) -> float:
    return sample(f, x, y, operation="taylor2d") - series2d_eval(T, x, y)
