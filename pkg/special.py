"""Special-function kernel: Gamma, the Mittag-Leffler series and fractal powers."""
from __future__ import annotations

import functools
import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sc

from errors import ConfigError, DomainError, PoleError, TruncationError

logger = logging.getLogger(__name__)

DEFAULT_ABS_TOL = 1e-14
DEFAULT_MAX_TERMS = 400
UNIT_ROUNDOFF = 2.0 ** -52


@functools.lru_cache(maxsize=256)
def _gamma_ladder(alpha: float, n: int) -> tuple[float, ...]:
    return tuple(float(v) for v in sc.gamma(1.0 + alpha * np.arange(n + 1)))


@dataclass(frozen=True)
class FractalOrder:
    """The fractal order alpha, restricted to 0 < alpha <= 1."""

    alpha: float

    def __post_init__(self):
        alpha = float(self.alpha)
        if not math.isfinite(alpha) or not 0.0 < alpha <= 1.0:
            raise DomainError(f"fractal order must lie in (0, 1], got {self.alpha!r}", operation="FractalOrder")
        object.__setattr__(self, "alpha", alpha)

    @classmethod
    def cantor(cls, ratio: float = 1.0 / 3.0) -> "FractalOrder":
        """Dimension ln2/ln(1/r) of the two-piece Cantor set with scale ratio r."""
        if not 0.0 < ratio <= 0.5:
            raise ConfigError(f"cantor ratio must lie in (0, 1/2], got {ratio!r}", operation="FractalOrder")
        return cls(math.log(2.0) / math.log(1.0 / ratio))

    def ladder(self, n: int) -> tuple[float, ...]:
        """Gamma(1 + k*alpha) for k = 0..n."""
        return _gamma_ladder(self.alpha, max(int(n), 0))

    def gamma_k(self, k: int) -> float:
        """Gamma(1 + k*alpha)."""
        return self.ladder(k)[k]


@dataclass(frozen=True)
class SeriesControl:
    """Truncation settings for the Mittag-Leffler series."""

    abs_tol: float = DEFAULT_ABS_TOL
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise ConfigError(f"abs_tol must be positive, got {self.abs_tol!r}", operation="SeriesControl")
        if int(self.max_terms) < 1:
            raise ConfigError(f"max_terms must be at least 1, got {self.max_terms!r}", operation="SeriesControl")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class MittagLefflerSum:
    value: float
    terms: int
    method: str = "series"


def gamma(x: float) -> float:
    """Gamma(x); raises PoleError at zero and the negative integers."""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x!r}", operation="gamma")
    return float(sc.gamma(x))


def fractal_pow(x: float, p: float) -> float:
    """x**p for x >= 0, with 0**0 == 1."""
    if x < 0:
        raise DomainError(f"fractal power of a negative base {x!r}", operation="fractal_pow")
    if p < 0:
        raise DomainError(f"negative fractal exponent {p!r}", operation="fractal_pow")
    if p == 0:
        return 1.0
    try:
        return math.pow(x, p)
    except OverflowError:
        raise DomainError(f"fractal power {x!r}**{p!r} overflows", operation="fractal_pow") from None


def _term_magnitude(absw: float, log_abs: float, k: int, alpha: float) -> float:
    g = float(sc.gamma(1.0 + k * alpha))
    if math.isfinite(g):
        try:
            return math.pow(absw, k) / g
        except OverflowError:
            pass
    return math.exp(k * log_abs - float(sc.gammaln(1.0 + k * alpha)))


def _series(order: FractalOrder, w: float, ctl: SeriesControl) -> MittagLefflerSum:
    absw = abs(w)
    log_abs = math.log(absw)
    negative = w < 0
    terms: list[float] = []
    current = 1.0
    for k in range(int(ctl.max_terms)):
        following = _term_magnitude(absw, log_abs, k + 1, order.alpha)
        terms.append(-current if negative and k % 2 else current)
        # tail domination: the next term is already below the current one
        if current < ctl.abs_tol and following < current:
            break
        current = following
    else:
        raise TruncationError(
            f"Mittag-Leffler series at w={w!r}, alpha={order.alpha!r} not converged in {ctl.max_terms} terms",
            operation="ml",
        )
    value = math.fsum(terms)
    if not math.isfinite(value):
        raise DomainError(f"Mittag-Leffler series overflows at w={w!r}", operation="ml")
    logger.debug("ml alpha=%s w=%s used %d terms", order.alpha, w, len(terms))
    return MittagLefflerSum(value, len(terms))


def _cancels(order: FractalOrder, absw: float, ctl: SeriesControl) -> bool:
    """Whether rounding in the alternating series at -absw can exceed abs_tol.

    The absolute terms sum to E_a(absw), which grows like exp(absw**(1/a)) / a.
    """
    spread = math.exp(min(math.log(absw) / order.alpha, 700.0))
    return spread - math.log(order.alpha) + math.log(UNIT_ROUNDOFF) > math.log(ctl.abs_tol)


def _negative_integral(order: FractalOrder, x: float, ctl: SeriesControl) -> MittagLefflerSum:
    """E_a(-x) for 0 < a < 1 and x > 0 from the completely monotone representation

        E_a(-x) = sin(pi a)/(pi a) * int_0^inf x exp(-v**(1/a)) / (v**2 + 2 x v cos(pi a) + x**2) dv

    whose integrand is positive, so nothing cancels.
    """
    a = order.alpha
    theta = math.pi * a
    cos_t = math.cos(theta)

    def decay(v: float) -> float:
        if v <= 0.0:
            return 1.0
        p = math.log(v) / a
        return 0.0 if p > 6.5 else math.exp(-math.exp(p))

    def integrand(v: float) -> float:
        return decay(v) / (v * (v / x) + 2.0 * v * cos_t + x)

    # exp(-v**(1/a)) underflows past v_max
    v_max = math.exp(6.5 * a)
    points = sorted({p for p in (x, -x * cos_t, 1.0) if 0.0 < p < v_max})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        raw, err = integrate.quad(
            integrand, 0.0, v_max, points=points or None, epsabs=0.1 * ctl.abs_tol, epsrel=1e-13, limit=200
        )
    scale = math.sin(theta) / theta
    value, err = scale * raw, scale * err
    if not math.isfinite(value) or err > 1e3 * ctl.abs_tol + 1e-12 * abs(value):
        raise TruncationError(
            f"Mittag-Leffler integral at w={-x!r}, alpha={a!r} only reached error {err!r}", operation="ml"
        )
    logger.debug("ml alpha=%s w=%s by quadrature, error estimate %s", a, -x, err)
    return MittagLefflerSum(value, 0, "integral")


def ml_sum(order: FractalOrder, w: float, ctl: SeriesControl | None = None) -> MittagLefflerSum:
    """Sum of w**k / Gamma(1 + k*alpha) together with the number of terms used.

    Negative arguments whose alternating series would lose more than abs_tol to
    cancellation are evaluated by quadrature instead (method "integral", terms 0).
    """
    ctl = ctl or DEFAULT_CONTROL
    w = float(w)
    if not math.isfinite(w):
        raise DomainError(f"Mittag-Leffler argument must be finite, got {w!r}", operation="ml")
    if w == 0.0:
        return MittagLefflerSum(1.0, 1)
    if order.alpha == 1.0 and w < 0:
        # E_1 is exp: sum the positive series and invert instead of cancelling
        mirrored = _series(order, -w, ctl)
        return MittagLefflerSum(1.0 / mirrored.value, mirrored.terms)
    if w < 0 and _cancels(order, -w, ctl):
        return _negative_integral(order, -w, ctl)
    return _series(order, w, ctl)


def ml(order: FractalOrder, w: float, ctl: SeriesControl | None = None) -> float:
    """One-parameter Mittag-Leffler function E_alpha(w); E_alpha(x^alpha) is ml(order, x**alpha)."""
    return ml_sum(order, w, ctl).value


def ml_semigroup_defect(order: FractalOrder, x: float, y: float, ctl: SeriesControl | None = None) -> float:
    """|E((x+y)^a) - E(x^a) E(y^a)|; zero only at alpha == 1."""
    if x < 0 or y < 0:
        raise DomainError(f"semigroup defect needs x, y >= 0, got ({x!r}, {y!r})", operation="ml_semigroup_defect")
    a = order.alpha
    joint = ml(order, fractal_pow(x + y, a), ctl)
    split = ml(order, fractal_pow(x, a), ctl) * ml(order, fractal_pow(y, a), ctl)
    return abs(joint - split)
