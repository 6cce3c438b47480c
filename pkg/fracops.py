"""Limit-definition operators: local fractional derivative quotients, fractal sums
over uniform and Cantor partitions, and local fractional partial derivatives."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

import special
from errors import ConfigError, DivergenceWarning, DomainError, EvaluationError, UnsupportedOrder
from special import FractalOrder

logger = logging.getLogger(__name__)

ScalarFunction = Callable[[float], float]
ScalarFunction2D = Callable[[float, float], float]

DEFAULT_RTOL = 1e-8
AXES = ("x", "y")
# partitions are materialized as float64 arrays of this many cells at most
MAX_UNIFORM_CELLS = 10_000_000
MAX_CANTOR_STAGE = 20


@dataclass(frozen=True)
class StepSchedule:
    """Geometric step sequence h_j = h0 * ratio**j, j = 0..count-1."""

    h0: float = 1e-1
    ratio: float = 0.5
    count: int = 20

    def __post_init__(self):
        if not self.h0 > 0:
            raise ConfigError(f"h0 must be positive, got {self.h0!r}", operation="StepSchedule")
        if not 0 < self.ratio < 1:
            raise ConfigError(f"ratio must lie in (0, 1), got {self.ratio!r}", operation="StepSchedule")
        if int(self.count) < 1:
            raise ConfigError(f"count must be positive, got {self.count!r}", operation="StepSchedule")

    def steps(self) -> np.ndarray:
        return self.h0 * self.ratio ** np.arange(int(self.count))


DEFAULT_SCHEDULE = StepSchedule()
# second differences lose accuracy like h**-2; stop the schedule early
DEFAULT_ITERATED_SCHEDULE = StepSchedule(count=10)


@dataclass(frozen=True)
class PartitionScheme:
    """Uniform partition into N cells, or the stage-n two-piece Cantor construction."""

    kind: str
    n: int
    ratio: float = 1.0 / 3.0

    def __post_init__(self):
        if self.kind == "uniform":
            if int(self.n) < 1:
                raise ConfigError(f"uniform partition needs N >= 1, got {self.n!r}", operation="PartitionScheme")
            if int(self.n) > MAX_UNIFORM_CELLS:
                raise ConfigError(
                    f"uniform partition is limited to {MAX_UNIFORM_CELLS} cells, got {self.n!r}", operation="PartitionScheme"
                )
        elif self.kind == "cantor":
            if int(self.n) < 0:
                raise ConfigError(f"cantor stage must be >= 0, got {self.n!r}", operation="PartitionScheme")
            if int(self.n) > MAX_CANTOR_STAGE:
                raise ConfigError(
                    f"cantor stage is limited to {MAX_CANTOR_STAGE}, got {self.n!r}", operation="PartitionScheme"
                )
            if not 0 < self.ratio <= 0.5:
                raise ConfigError(f"cantor ratio must lie in (0, 1/2], got {self.ratio!r}", operation="PartitionScheme")
        else:
            raise ConfigError(f"unknown partition kind {self.kind!r}", operation="PartitionScheme")

    @classmethod
    def uniform(cls, n: int) -> "PartitionScheme":
        return cls("uniform", int(n))

    @classmethod
    def cantor(cls, stage: int, ratio: float = 1.0 / 3.0) -> "PartitionScheme":
        return cls("cantor", int(stage), float(ratio))

    @property
    def dimension(self) -> float:
        if self.kind == "uniform":
            return 1.0
        return math.log(2.0) / math.log(1.0 / self.ratio)

    def cells(self, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
        """Left endpoints and lengths of the cells covering [a, b]."""
        if not a < b:
            raise ConfigError(f"partition needs a < b, got [{a!r}, {b!r}]", operation="PartitionScheme")
        if self.kind == "uniform":
            edges = np.linspace(a, b, int(self.n) + 1)
            return edges[:-1], np.diff(edges)
        left = np.array([float(a)])
        length = float(b - a)
        for _ in range(int(self.n)):
            shorter = length * self.ratio
            left = np.concatenate([left, left + (length - shorter)])
            length = shorter
        return np.sort(left), np.full(left.size, length)


@dataclass(frozen=True)
class DerivativeEstimate:
    value: float
    per_step_values: tuple[float, ...]
    converged: bool

    def to_dict(self) -> dict:
        return {"value": self.value, "per_step_values": list(self.per_step_values), "converged": self.converged}


@dataclass(frozen=True)
class IntegralResult:
    value: float
    divergent: bool
    cells: int

    def to_dict(self) -> dict:
        return {"value": self.value, "divergent": self.divergent, "cells": self.cells}


def sample(f: Callable[..., float], *point: float, operation: str) -> float:
    try:
        value = float(f(*point))
    except Exception as exc:
        raise EvaluationError(f"function failed at {point!r}: {exc}", operation=operation) from exc
    if not math.isfinite(value):
        raise EvaluationError(f"function is not finite at {point!r}", operation=operation)
    return value


def _estimate(values: list[float], order: FractalOrder, sched: StepSchedule, rtol: float) -> DerivativeEstimate:
    if len(values) == 1:
        return DerivativeEstimate(values[0], tuple(values), True)
    coarse, fine = values[-2], values[-1]
    # leading correction of the fractal Taylor ladder is one power of h**alpha
    shrink = sched.ratio ** order.alpha
    value = (fine - shrink * coarse) / (1.0 - shrink)
    converged = math.isclose(fine, coarse, rel_tol=rtol, abs_tol=0.0)
    logger.debug("extrapolated %r from %d steps (converged=%s)", value, len(values), converged)
    return DerivativeEstimate(value, tuple(values), converged)


def lf_derivative_fd(
    f: ScalarFunction,
    x0: float,
    order: FractalOrder,
    sched: StepSchedule | None = None,
    *,
    rtol: float = DEFAULT_RTOL,
) -> DerivativeEstimate:
    """Forward quotient Gamma(1+a) (f(x0+h) - f(x0)) / h**a over the schedule, extrapolated."""
    sched = sched or DEFAULT_SCHEDULE
    g1 = order.gamma_k(1)
    f0 = sample(f, x0, operation="lf_derivative_fd")
    values = []
    for h in sched.steps():
        x = x0 + h
        step = x - x0
        values.append(g1 * (sample(f, x, operation="lf_derivative_fd") - f0) / special.fractal_pow(step, order.alpha))
    return _estimate(values, order, sched, rtol)


def lf_derivative_iterated(
    f: ScalarFunction,
    x0: float,
    order: FractalOrder,
    times: int,
    sched: StepSchedule | None = None,
    *,
    rtol: float = DEFAULT_RTOL,
) -> DerivativeEstimate:
    """Apply the quotient `times` (1 or 2) times.

    The second application differentiates the first-level quotient q(s), taken from
    the base point at steps h and 2h, with respect to s**alpha.
    """
    if times < 1:
        raise ConfigError(f"times must be positive, got {times!r}", operation="lf_derivative_iterated")
    if times > 2:
        raise UnsupportedOrder(
            f"finite differences stop at two applications, got {times}; use the series route",
            operation="lf_derivative_iterated",
        )
    if times == 1:
        return lf_derivative_fd(f, x0, order, sched, rtol=rtol)

    sched = sched or DEFAULT_ITERATED_SCHEDULE
    a = order.alpha
    g1, g2 = order.gamma_k(1), order.gamma_k(2)
    f0 = sample(f, x0, operation="lf_derivative_iterated")
    values = []
    for h in sched.steps():
        near, far = x0 + h, x0 + 2.0 * h
        s_near, s_far = special.fractal_pow(near - x0, a), special.fractal_pow(far - x0, a)
        q_near = g1 * (sample(f, near, operation="lf_derivative_iterated") - f0) / s_near
        q_far = g1 * (sample(f, far, operation="lf_derivative_iterated") - f0) / s_far
        values.append(g2 / g1 * (q_far - q_near) / (s_far - s_near))
    return _estimate(values, order, sched, rtol)


def _axis_index(axis: str) -> int:
    if axis not in AXES:
        raise ConfigError(f"unknown axis {axis!r}; expected 'x' or 'y'", operation="lf_partial_fd")
    return AXES.index(axis)


def _shift(point: tuple[float, float], index: int, h: float) -> tuple[float, float]:
    moved = list(point)
    moved[index] += h
    return moved[0], moved[1]


def lf_partial_fd(
    f: ScalarFunction2D,
    point: tuple[float, float],
    order: FractalOrder,
    axes: Sequence[str],
    sched: StepSchedule | None = None,
    *,
    rtol: float = DEFAULT_RTOL,
) -> DerivativeEstimate:
    """Local fractional partial derivative; with two axes the first listed is the outer one."""
    axes = list(axes)
    if not axes:
        raise ConfigError("at least one axis is required", operation="lf_partial_fd")
    if len(axes) > 2:
        raise UnsupportedOrder(
            f"finite differences stop at mixed second order, got {len(axes)} axes; use the series route",
            operation="lf_partial_fd",
        )
    indices = [_axis_index(axis) for axis in axes]
    point = (float(point[0]), float(point[1]))

    def along(index: int) -> ScalarFunction:
        return lambda t: f(*_shift(point, index, t - point[index]))

    if len(indices) == 1:
        return lf_derivative_fd(along(indices[0]), point[indices[0]], order, sched, rtol=rtol)
    outer, inner = indices
    if outer == inner:
        return lf_derivative_iterated(along(outer), point[outer], order, 2, sched, rtol=rtol)

    sched = sched or DEFAULT_ITERATED_SCHEDULE
    a = order.alpha
    g1 = order.gamma_k(1)

    def inner_difference(base: tuple[float, float], h: float) -> float:
        return sample(f, *_shift(base, inner, h), operation="lf_partial_fd") - sample(
            f, *base, operation="lf_partial_fd"
        )

    values = []
    for h in sched.steps():
        moved = _shift(point, outer, h)
        s_outer = moved[outer] - point[outer]
        s_inner = _shift(point, inner, h)[inner] - point[inner]
        mixed = inner_difference(moved, h) - inner_difference(point, h)
        values.append(g1 * g1 * mixed / (special.fractal_pow(s_outer, a) * special.fractal_pow(s_inner, a)))
    return _estimate(values, order, sched, rtol)


def lf_integral(
    f: ScalarFunction,
    a: float,
    b: float,
    order: FractalOrder,
    part: PartitionScheme,
) -> IntegralResult:
    """Fractal sum (1/Gamma(1+alpha)) * sum f(t_j) * (dt_j)**alpha over the partition cells."""
    left, lengths = part.cells(a, b)
    values = np.array([sample(f, t, operation="lf_integral") for t in left], dtype=float)
    # numpy reduces contiguous float64 arrays pairwise, a fixed tree
    total = float(np.sum(values * np.power(lengths, order.alpha))) / order.gamma_k(1)
    divergent = part.kind == "uniform" and order.alpha < 1.0
    if divergent:
        warnings.warn(
            f"uniform fractal sum with alpha={order.alpha} grows like N**(1-alpha); N={part.n}",
            DivergenceWarning,
            stacklevel=2,
        )
    logger.debug("fractal sum over %d %s cells = %r", left.size, part.kind, total)
    return IntegralResult(total, divergent, int(left.size))


def cantor_staircase(x: float, stage: int) -> float:
    """Stage-n approximation of the middle-thirds Cantor function."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"Cantor staircase is defined on [0, 1], got {x!r}", operation="cantor_staircase")
    if stage < 0:
        raise ConfigError(f"stage must be >= 0, got {stage!r}", operation="cantor_staircase")
    value, scale = 0.0, 1.0
    for _ in range(int(stage)):
        if x <= 1.0 / 3.0:
            x = 3.0 * x
        elif x < 2.0 / 3.0:
            return value + 0.5 * scale
        else:
            value += 0.5 * scale
            x = 3.0 * x - 2.0
        scale *= 0.5
        x = min(max(x, 0.0), 1.0)
    return value + scale * x
