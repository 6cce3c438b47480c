"""Continuity diagnostics: Hoelder exponent fitting and sampled local fractional
continuity checks in one and two variables.

Sampling can refute continuity or support it; it never proves it.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

import special
from errors import ConfigError, DegenerateDataError
from fracops import ScalarFunction, ScalarFunction2D, sample
from special import FractalOrder

logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = 64
DEFAULT_SCALES = 12
DEFAULT_SEED = 20120
MIN_SAMPLES = 16
MIN_PAIRS = 8
CONTINUITY_SAMPLES = 16
SIDES = ("both", "right", "left")


@dataclass(frozen=True)
class HoelderEstimate:
    exponent_hat: float
    constant_hat: float
    fit_residual: float
    pairs_used: int

    def to_dict(self) -> dict:
        return {
            "exponent_hat": self.exponent_hat,
            "constant_hat": self.constant_hat,
            "fit_residual": self.fit_residual,
            "pairs_used": self.pairs_used,
        }


@dataclass(frozen=True)
class ContinuityReport:
    is_continuous: bool
    worst_pair: tuple[float, float]
    worst_ratio: float

    def to_dict(self) -> dict:
        return {
            "is_continuous": self.is_continuous,
            "worst_pair": list(self.worst_pair),
            "worst_ratio": self.worst_ratio,
        }


def hoelder_fit(
    f: ScalarFunction,
    a: float,
    b: float,
    nsamples: int = DEFAULT_SAMPLES,
    *,
    scales: int = DEFAULT_SCALES,
    seed: int = DEFAULT_SEED,
    exponent: float | None = None,
) -> HoelderEstimate:
    """Fit |f(x) - f(y)| <= C |x - y|**exponent over dyadic separations of [a, b].

    For each separation s = (b - a) / 2**j the largest sampled increment over base
    points x in [a, b - s] estimates the modulus of continuity; the exponent is the
    least-squares slope of its logarithm against log s. Base points are the two
    interval ends, a uniform grid of `nsamples` points and `nsamples // 2` seeded
    random points. With `exponent` given, the constant is taken at that exponent
    instead of the fitted one.
    """
    if not a < b:
        raise ConfigError(f"hoelder_fit needs a < b, got [{a!r}, {b!r}]", operation="hoelder_fit")
    if int(nsamples) < MIN_SAMPLES:
        raise ConfigError(f"nsamples must be >= {MIN_SAMPLES}, got {nsamples!r}", operation="hoelder_fit")
    if int(scales) < 2:
        raise ConfigError(f"at least two separations are needed, got scales={scales!r}", operation="hoelder_fit")

    rng = np.random.default_rng(seed)
    separations, moduli = [], []
    ratios: list[tuple[float, float]] = []
    pairs_used = 0
    for j in range(1, int(scales) + 1):
        s = (b - a) * 2.0 ** -j
        base = np.concatenate([
            [a, b - s],
            np.linspace(a, b - s, int(nsamples)),
            rng.uniform(a, b - s, int(nsamples) // 2),
        ])
        increments = np.array([
            abs(sample(f, x + s, operation="hoelder_fit") - sample(f, x, operation="hoelder_fit"))
            for x in base
        ])
        nonzero = increments[increments > 0]
        pairs_used += int(nonzero.size)
        if nonzero.size:
            separations.append(s)
            moduli.append(float(nonzero.max()))
            ratios.extend((float(d), s) for d in nonzero)

    if pairs_used < MIN_PAIRS or len(separations) < 2:
        raise DegenerateDataError(
            f"only {pairs_used} usable pairs over {len(separations)} separations",
            operation="hoelder_fit",
        )

    log_s, log_m = np.log(separations), np.log(moduli)
    slope, intercept = np.polyfit(log_s, log_m, 1)
    fit_residual = float(np.sqrt(np.mean((log_m - (slope * log_s + intercept)) ** 2)))
    used = float(slope) if exponent is None else float(exponent)
    constant = max(d / special.fractal_pow(s, used) for d, s in ratios) if used >= 0 else math.inf
    logger.debug("hoelder fit slope=%r constant=%r over %d pairs", slope, constant, pairs_used)
    return HoelderEstimate(float(slope), float(constant), fit_residual, pairs_used)


def _check_grid(delta_grid: Sequence[float], C: float, side: str, operation: str) -> list[float]:
    grid = [float(d) for d in delta_grid]
    if not grid:
        raise ConfigError("delta grid must not be empty", operation=operation)
    if any(not d > 0 for d in grid):
        raise ConfigError(f"delta grid entries must be positive, got {grid!r}", operation=operation)
    if any(later > earlier for earlier, later in zip(grid, grid[1:])):
        raise ConfigError(f"delta grid must be descending, got {grid!r}", operation=operation)
    if not C > 0:
        raise ConfigError(f"bound C must be positive, got {C!r}", operation=operation)
    if side not in SIDES:
        raise ConfigError(f"side must be one of {SIDES}, got {side!r}", operation=operation)
    return grid


def _offsets(delta: float, side: str) -> np.ndarray:
    steps = delta * np.arange(1, CONTINUITY_SAMPLES + 1) / CONTINUITY_SAMPLES
    if side == "right":
        return steps
    if side == "left":
        return -steps
    return np.concatenate([-steps, steps])


def lf_continuity_check(
    f: ScalarFunction,
    x0: float,
    order: FractalOrder,
    delta_grid: Sequence[float],
    C: float,
    *,
    side: str = "both",
) -> ContinuityReport:
    """Test |f(x) - f(x0)| <= C |x - x0|**alpha on samples within each delta of x0."""
    grid = _check_grid(delta_grid, C, side, "lf_continuity_check")
    f0 = sample(f, x0, operation="lf_continuity_check")
    worst_ratio, worst_pair = 0.0, (float(x0), float(x0))
    for delta in grid:
        for offset in _offsets(delta, side):
            x = x0 + float(offset)
            ratio = abs(sample(f, x, operation="lf_continuity_check") - f0) / special.fractal_pow(abs(x - x0), order.alpha)
            if ratio > worst_ratio:
                worst_ratio, worst_pair = ratio, (min(x0, x), max(x0, x))
    return ContinuityReport(worst_ratio <= C, worst_pair, worst_ratio)


def lf_continuity_check_2d(
    f: ScalarFunction2D,
    p0: tuple[float, float],
    order: FractalOrder,
    delta_grid: Sequence[float],
    C: float,
    *,
    side: str = "both",
) -> ContinuityReport:
    """Two-variable check on max-norm squares; worst_pair is the worst sampled point (x, y)."""
    grid = _check_grid(delta_grid, C, side, "lf_continuity_check_2d")
    x0, y0 = float(p0[0]), float(p0[1])
    f0 = sample(f, x0, y0, operation="lf_continuity_check_2d")
    worst_ratio, worst_pair = 0.0, (x0, y0)
    for delta in grid:
        offsets = np.concatenate([[0.0], _offsets(delta, side)])
        for dx in offsets:
            for dy in offsets:
                distance = max(abs(dx), abs(dy))
                if distance == 0:
                    continue
                x, y = x0 + float(dx), y0 + float(dy)
                value = sample(f, x, y, operation="lf_continuity_check_2d")
                ratio = abs(value - f0) / special.fractal_pow(distance, order.alpha)
                if ratio > worst_ratio:
                    worst_ratio, worst_pair = ratio, (x, y)
    return ContinuityReport(worst_ratio <= C, worst_pair, worst_ratio)
