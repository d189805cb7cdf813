"""Gamma and two-parameter Mittag-Leffler functions.

Both are implemented in-repo (Lanczos approximation, direct series) because
their accuracy bounds everything built on top of the kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ConvergenceError, RangeError

# Lanczos coefficients for g = 7, giving ~15 significant digits on the
# positive real axis.
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_TWO_PI = 0.5 * math.log(2.0 * math.pi)

#: Largest |z| accepted by :func:`mittag_leffler`; the plain series loses
#: accuracy well before the alternating cancellation becomes catastrophic.
ML_Z_MAX = 30.0

_ML_MAX_TERMS = 5000


def _lanczos_series(z: float) -> float:
    s = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        s += c / (z + i)
    return s


def gamma_fn(x: float) -> float:
    """Gamma function on the real line, poles excluded.

    Relative error is below 1e-12 for x in [0.1, 50].
    """
    if math.isnan(x) or math.isinf(x):
        raise DomainError(f"gamma_fn: non-finite argument {x!r}")
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"gamma_fn: pole at non-positive integer {x!r}")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _SQRT_TWO_PI * t ** (z + 0.5) * math.exp(-t) * _lanczos_series(z)


def log_gamma(x: float) -> float:
    """log(Gamma(x)) for x > 0, usable far beyond the overflow range of Gamma."""
    if math.isnan(x) or x <= 0.0:
        raise DomainError(f"log_gamma: argument must be positive, got {x!r}")
    if x < 0.5:
        # recurrence keeps the Lanczos series in its accurate range
        return log_gamma(x + 1.0) - math.log(x)
    z = x - 1.0
    t = z + _LANCZOS_G + 0.5
    return _LOG_SQRT_TWO_PI + (z + 0.5) * math.log(t) - t + math.log(_lanczos_series(z))


@dataclass(frozen=True)
class MLParams:
    """Parameter pair of the two-parameter Mittag-Leffler function."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise DomainError(
                f"MLParams requires alpha > 0 and beta > 0, got ({self.alpha}, {self.beta})"
            )


def mittag_leffler(params: MLParams, z: float) -> float:
    """Two-parameter Mittag-Leffler function via direct series summation.

    The series sum_{k>=0} z^k / Gamma(alpha*k + beta) is truncated once the
    absolute term drops below 1e-16 * (1 + |partial sum|) for three
    consecutive terms.  Arguments with |z| > ML_Z_MAX raise ``RangeError``
    instead of silently returning an inaccurate sum.
    """
    if math.isnan(z) or math.isinf(z):
        raise DomainError(f"mittag_leffler: non-finite argument {z!r}")
    if abs(z) > ML_Z_MAX:
        raise RangeError(
            f"mittag_leffler: |z| = {abs(z):g} exceeds supported range {ML_Z_MAX:g}"
        )
    alpha, beta = params.alpha, params.beta
    total = 0.0
    term = 1.0 / gamma_fn(beta)
    small_streak = 0
    for k in range(_ML_MAX_TERMS):
        total += term
        if abs(term) < 1e-16 * (1.0 + abs(total)):
            small_streak += 1
            if small_streak >= 3:
                return total
        else:
            small_streak = 0
        # next term via a Gamma ratio; stable even when Gamma itself overflows
        ratio = math.exp(log_gamma(alpha * k + beta) - log_gamma(alpha * (k + 1) + beta))
        term = term * z * ratio
    raise ConvergenceError(
        f"mittag_leffler: series did not converge within {_ML_MAX_TERMS} terms "
        f"(alpha={alpha}, beta={beta}, z={z})"
    )
