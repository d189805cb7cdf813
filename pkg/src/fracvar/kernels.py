"""Kernel families for the weighted fractional operators.

A kernel is a two-argument weight k(x, t).  Families whose kernel depends
only on x - t are *difference* kernels; families with an integrable blow-up
at t = x are *singular* and are integrated through exact or
substitution-based moments rather than pointwise quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import DomainError, UnsupportedKernelError, UsageError
from .specfun import gamma_fn

FAMILIES = (
    "identity",
    "rl-power",
    "exponential",
    "cosh-difference",
    "power-cosh",
    "katugampola",
    "tabulated",
)


@dataclass(frozen=True)
class ParamSet:
    """Interval endpoints plus forward/backward branch weights.

    The dual set swaps the two weights; dualling twice restores the original.
    """

    a: float
    b: float
    p: float
    q: float

    def __post_init__(self):
        if not self.a < self.b:
            raise UsageError(f"ParamSet requires a < b, got a={self.a}, b={self.b}")

    def dual(self) -> "ParamSet":
        return ParamSet(self.a, self.b, self.q, self.p)


@dataclass(frozen=True)
class KernelSpec:
    """A tagged kernel family with its parameters.

    Use the factory classmethods; the ``family`` tags double as the names
    accepted in problem files.
    """

    family: str
    alpha: Optional[float] = None
    beta: Optional[float] = None
    rho: Optional[float] = None
    samples_s: Optional[Tuple[float, ...]] = None
    samples_k: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise UsageError(f"unknown kernel family {self.family!r}")
        if self.family in ("rl-power", "power-cosh", "katugampola"):
            if self.alpha is None or not 0.0 < self.alpha < 1.0:
                raise UsageError(f"{self.family} kernel requires 0 < alpha < 1, got {self.alpha}")
        if self.family == "exponential" and (self.alpha is None or not math.isfinite(self.alpha)):
            raise UsageError("exponential kernel requires a finite rate alpha")
        if self.family == "cosh-difference":
            if self.beta is None or self.beta < 0.0:
                raise UsageError(f"cosh-difference kernel requires beta >= 0, got {self.beta}")
        if self.family == "katugampola":
            if self.rho is None or self.rho <= -1.0:
                raise UsageError(f"katugampola kernel requires rho > -1, got {self.rho}")
        if self.family == "tabulated":
            s, k = self.samples_s, self.samples_k
            if s is None or k is None or len(s) != len(k) or len(s) < 2:
                raise UsageError("tabulated kernel requires matching s/k samples, n >= 2")
            if s[0] != 0.0 or any(s[i] >= s[i + 1] for i in range(len(s) - 1)):
                raise UsageError("tabulated kernel samples must start at s=0 and increase")

    # -- factories ---------------------------------------------------------

    @classmethod
    def identity(cls) -> "KernelSpec":
        return cls("identity")

    @classmethod
    def rl_power(cls, alpha: float) -> "KernelSpec":
        """(x - t)^(alpha-1) / Gamma(alpha): the Riemann-Liouville weight."""
        return cls("rl-power", alpha=alpha)

    @classmethod
    def exponential(cls, alpha: float) -> "KernelSpec":
        """exp(alpha * (x - t))."""
        return cls("exponential", alpha=alpha)

    @classmethod
    def cosh_difference(cls, beta: float) -> "KernelSpec":
        """cosh(beta * (x - t)); equals 1 at zero lag."""
        return cls("cosh-difference", beta=beta)

    @classmethod
    def power_cosh(cls, alpha: float) -> "KernelSpec":
        """(cosh x - cosh t)^(alpha-1) on 0 <= t < x."""
        return cls("power-cosh", alpha=alpha)

    @classmethod
    def katugampola(cls, alpha: float, rho: float) -> "KernelSpec":
        """((rho+1)^(1-alpha)/Gamma(alpha)) * (x^(rho+1) - t^(rho+1))^(alpha-1).

        Reduces to the Riemann-Liouville weight as rho -> 0.
        """
        return cls("katugampola", alpha=alpha, rho=rho)

    @classmethod
    def tabulated(cls, s, k) -> "KernelSpec":
        """Difference kernel sampled at lags s[0]=0 < s[1] < ...; linear interpolation."""
        return cls("tabulated", samples_s=tuple(float(v) for v in s),
                   samples_k=tuple(float(v) for v in k))

    # -- classification ----------------------------------------------------

    @property
    def is_difference(self) -> bool:
        return self.family in ("identity", "rl-power", "exponential",
                               "cosh-difference", "tabulated")

    @property
    def is_singular(self) -> bool:
        return self.family in ("rl-power", "power-cosh", "katugampola")


def _singular_tol(x: float, t: float) -> float:
    return 1e-14 * max(1.0, abs(x), abs(t))


def _check_nonnegative_args(spec: KernelSpec, x: float, t: float) -> None:
    if spec.family in ("power-cosh", "katugampola") and (t < 0.0 or x < 0.0):
        raise DomainError(f"{spec.family} kernel requires nonnegative arguments, got ({x}, {t})")


def eval_kernel(spec: KernelSpec, x: float, t: float) -> float:
    """Pointwise kernel value k(x, t); singular families reject x == t."""
    fam = spec.family
    if fam == "identity":
        return 1.0
    if fam == "exponential":
        return math.exp(spec.alpha * (x - t))
    if fam == "cosh-difference":
        return math.cosh(spec.beta * (x - t))
    if fam == "tabulated":
        s = x - t
        s_nodes = spec.samples_s
        if s < s_nodes[0] - 1e-12 or s > s_nodes[-1] + 1e-12:
            raise DomainError(f"tabulated kernel: lag {s:g} outside sampled range")
        return float(np.interp(s, s_nodes, spec.samples_k))
    # singular families below
    if abs(x - t) <= _singular_tol(x, t):
        raise DomainError(f"{fam} kernel is singular at x = t (x={x}, t={t})")
    _check_nonnegative_args(spec, x, t)
    if fam == "rl-power":
        s = x - t
        if s < 0.0:
            raise DomainError("rl-power kernel requires t < x")
        return s ** (spec.alpha - 1.0) / gamma_fn(spec.alpha)
    if fam == "power-cosh":
        c = math.cosh(x) - math.cosh(t)
        if c <= 0.0:
            raise DomainError("power-cosh kernel requires t < x")
        return c ** (spec.alpha - 1.0)
    if fam == "katugampola":
        r1 = spec.rho + 1.0
        d = x ** r1 - t ** r1
        if d <= 0.0:
            raise DomainError("katugampola kernel requires t < x")
        return (r1 ** (1.0 - spec.alpha) / gamma_fn(spec.alpha)) * d ** (spec.alpha - 1.0)
    raise UnsupportedKernelError(fam)


def eval_kernel_dt(spec: KernelSpec, x: float, t: float) -> float:
    """Partial derivative of the kernel with respect to its second argument."""
    fam = spec.family
    if fam == "identity":
        return 0.0
    if fam == "exponential":
        return -spec.alpha * math.exp(spec.alpha * (x - t))
    if fam == "cosh-difference":
        return -spec.beta * math.sinh(spec.beta * (x - t))
    if fam == "tabulated":
        # centred difference on the interpolant, step tied to the sample spacing
        s_nodes = spec.samples_s
        h = min(s_nodes[i + 1] - s_nodes[i] for i in range(len(s_nodes) - 1)) / 4.0
        return (eval_kernel(spec, x, t + h) - eval_kernel(spec, x, t - h)) / (2.0 * h)
    if abs(x - t) <= _singular_tol(x, t):
        raise DomainError(f"{fam} kernel derivative is singular at x = t")
    _check_nonnegative_args(spec, x, t)
    a = spec.alpha
    if fam == "rl-power":
        s = x - t
        if s < 0.0:
            raise DomainError("rl-power kernel requires t < x")
        return (1.0 - a) * s ** (a - 2.0) / gamma_fn(a)
    if fam == "power-cosh":
        c = math.cosh(x) - math.cosh(t)
        if c <= 0.0:
            raise DomainError("power-cosh kernel requires t < x")
        return (1.0 - a) * math.sinh(t) * c ** (a - 2.0)
    if fam == "katugampola":
        r1 = spec.rho + 1.0
        d = x ** r1 - t ** r1
        if d <= 0.0:
            raise DomainError("katugampola kernel requires t < x")
        if t == 0.0 and spec.rho < 0.0:
            raise DomainError(
                "katugampola kernel derivative is unbounded at t = 0 for rho < 0")
        coef = r1 ** (1.0 - a) / gamma_fn(a)
        return coef * (1.0 - a) * r1 * t ** spec.rho * d ** (a - 2.0)
    raise UnsupportedKernelError(fam)


# ---------------------------------------------------------------------------
# Moments: m0 = int k dt, m1 = int t k dt over a subinterval.
# Closed forms where the antiderivatives are elementary, otherwise adaptive
# Gauss-Kronrod after the substitution u = (distance)^alpha that removes the
# endpoint singularity.
# ---------------------------------------------------------------------------

_GK_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_GK_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _gk15(f, lo: float, hi: float) -> Tuple[float, float]:
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    fx = f(mid + half * _GK_XK)
    k = half * float(np.dot(_GK_WK, fx))
    g = half * float(np.dot(_GK_WG, fx[1::2]))
    return k, abs(k - g)


def adaptive_quad(f, lo: float, hi: float, tol: float = 1e-12, max_depth: int = 22) -> float:
    """Adaptive Gauss-Kronrod (G7, K15) with interval bisection."""
    if lo == hi:
        return 0.0
    val, err = _gk15(f, lo, hi)
    stack = [(lo, hi, val, err, 0)]
    total = 0.0
    while stack:
        a, b, v, e, depth = stack.pop()
        if e <= tol * max(1.0, abs(v)) or depth >= max_depth:
            total += v
            continue
        m = 0.5 * (a + b)
        v1, e1 = _gk15(f, a, m)
        v2, e2 = _gk15(f, m, b)
        stack.append((a, m, v1, e1, depth + 1))
        stack.append((m, b, v2, e2, depth + 1))
    return total


def _smooth_factor(spec: KernelSpec, x: float, t):
    """g(t) with k(x, t) = g(t) * |x - t|^(alpha-1); stable through t = x."""
    t = np.asarray(t, dtype=float)
    a = spec.alpha
    if spec.family == "power-cosh":
        d = x - t
        m = 0.5 * (x + t)
        half = 0.5 * d
        # cosh x - cosh t = 2 sinh((x+t)/2) sinh((x-t)/2)
        ratio = np.where(np.abs(half) < 1e-8,
                         np.sinh(m) * (1.0 + half * half / 6.0),
                         np.sinh(m) * np.sinh(half) / np.where(half == 0.0, 1.0, half))
        return ratio ** (a - 1.0)
    if spec.family == "katugampola":
        r1 = spec.rho + 1.0
        coef = r1 ** (1.0 - a) / gamma_fn(a)
        d = x - t
        close = np.abs(d) < 1e-7 * max(1.0, abs(x))
        mid = 0.5 * (x + t)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(close,
                             r1 * np.maximum(mid, 1e-300) ** spec.rho,
                             (x ** r1 - t ** r1) / np.where(d == 0.0, 1.0, d))
        return coef * ratio ** (a - 1.0)
    raise UnsupportedKernelError(spec.family)


def _origin_power(spec: KernelSpec) -> float:
    """Exponent c with k(t, 0) ~ t^c as t -> 0 for the non-difference families."""
    if spec.family == "katugampola":
        return (spec.rho + 1.0) * (spec.alpha - 1.0)
    if spec.family == "power-cosh":
        return 2.0 * (spec.alpha - 1.0)
    raise UnsupportedKernelError(spec.family)


def _backward_moments_at_origin(spec: KernelSpec, lo: float, hi: float
                                ) -> Tuple[float, float]:
    """(m0, m1) of int k(t, 0) (1, t) dt: at x = 0 the backward kernel is a
    pure power profile t^c times a smooth factor, so the generic |t - x|
    substitution does not apply.  Diverges (and raises) for c <= -1."""
    a = spec.alpha
    c = _origin_power(spec)
    if c <= -1.0 + 1e-12:
        raise DomainError(
            f"{spec.family} kernel: the backward branch at x = 0 diverges "
            f"(local profile t^{c:g})")
    if spec.family == "katugampola":
        r1 = spec.rho + 1.0
        coef = r1 ** (1.0 - a) / gamma_fn(a)
        m0 = coef * (hi ** (c + 1.0) - lo ** (c + 1.0)) / (c + 1.0)
        m1 = coef * (hi ** (c + 2.0) - lo ** (c + 2.0)) / (c + 2.0)
        return m0, m1

    # power-cosh: k(t, 0) = psi(t) t^c with psi smooth; regularise t^c by
    # integrating in u = t^(c+1+m) for each moment m
    def psi(t):
        t = np.asarray(t, dtype=float)
        half = 0.5 * t
        # (cosh t - 1)/t^2 via the cancellation-free 2 sinh^2(t/2)/t^2 form
        ratio = np.where(np.abs(half) < 1e-8, 0.5 * (1.0 + half * half / 3.0),
                         2.0 * (np.sinh(half) / np.where(t == 0.0, 1.0, t)) ** 2)
        return ratio ** (a - 1.0)

    out = []
    for m in (0, 1):
        p = c + 1.0 + m
        u_lo, u_hi = lo ** p, hi ** p

        def f(u, p=p):
            t = np.maximum(u, 0.0) ** (1.0 / p)
            return psi(t) / p

        out.append(adaptive_quad(f, u_lo, u_hi))
    return out[0], out[1]


def _singular_moments(spec: KernelSpec, x: float, lo: float, hi: float,
                      backward: bool) -> Tuple[float, float]:
    """Moments of g(t)|x-t|^(alpha-1) via the substitution u = |x-t|^alpha."""
    if backward and abs(x) <= 1e-13 * max(1.0, hi):
        return _backward_moments_at_origin(spec, lo, hi)
    a = spec.alpha
    if backward:
        u_lo, u_hi = (lo - x) ** a, (hi - x) ** a

        def point(u):
            return x + np.maximum(u, 0.0) ** (1.0 / a)
    else:
        u_lo, u_hi = (x - hi) ** a, (x - lo) ** a

        def point(u):
            return x - np.maximum(u, 0.0) ** (1.0 / a)

    def f0(u):
        t = point(u)
        return _smooth_factor(spec, x, t) / a

    def f1(u):
        t = point(u)
        return t * _smooth_factor(spec, x, t) / a

    m0 = adaptive_quad(f0, u_lo, u_hi)
    m1 = adaptive_quad(f1, u_lo, u_hi)
    return m0, m1


def _pl_integrals(s_nodes, k_vals, s0: float, s1: float) -> Tuple[float, float]:
    """Exact (int K, int s*K) over [s0, s1] for piecewise-linear K(s)."""
    s_nodes = np.asarray(s_nodes)
    k_vals = np.asarray(k_vals)
    if s0 < s_nodes[0] - 1e-12 or s1 > s_nodes[-1] + 1e-12:
        raise DomainError("tabulated kernel: integration range outside sampled lags")
    cuts = np.unique(np.concatenate((
        [s0, s1], s_nodes[(s_nodes > s0) & (s_nodes < s1)])))
    i0 = i1 = 0.0
    for left, right in zip(cuts[:-1], cuts[1:]):
        smid = 0.5 * (left + right)
        j = np.searchsorted(s_nodes, smid) - 1
        j = min(max(j, 0), len(s_nodes) - 2)
        c1 = (k_vals[j + 1] - k_vals[j]) / (s_nodes[j + 1] - s_nodes[j])
        c0 = k_vals[j] - c1 * s_nodes[j]
        i0 += c0 * (right - left) + 0.5 * c1 * (right ** 2 - left ** 2)
        i1 += 0.5 * c0 * (right ** 2 - left ** 2) + c1 * (right ** 3 - left ** 3) / 3.0
    return float(i0), float(i1)


def _moments_forward_arrays(spec: KernelSpec, x: float, lo, hi):
    """Vectorised (m0, m1) of int_{lo}^{hi} k(x, t) (1, t) dt with hi <= x."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    fam = spec.family
    if fam == "identity":
        return hi - lo, 0.5 * (hi * hi - lo * lo)
    if fam == "rl-power":
        a = spec.alpha
        ga = gamma_fn(a)
        u1 = np.maximum(x - lo, 0.0)
        u0 = np.maximum(x - hi, 0.0)
        m0 = (u1 ** a - u0 ** a) / (a * ga)
        m1 = x * m0 - (u1 ** (a + 1.0) - u0 ** (a + 1.0)) / ((a + 1.0) * ga)
        return m0, m1
    if fam == "exponential":
        r = spec.alpha
        if r == 0.0:
            return hi - lo, 0.5 * (hi * hi - lo * lo)
        e1 = np.exp(r * (x - lo))
        e0 = np.exp(r * (x - hi))
        m0 = (e1 - e0) / r
        m1 = (lo / r + 1.0 / r ** 2) * e1 - (hi / r + 1.0 / r ** 2) * e0
        return m0, m1
    if fam == "cosh-difference":
        rate = spec.beta
        if rate == 0.0:
            return hi - lo, 0.5 * (hi * hi - lo * lo)
        s1 = np.sinh(rate * (x - lo))
        s0 = np.sinh(rate * (x - hi))
        c1 = np.cosh(rate * (x - lo))
        c0 = np.cosh(rate * (x - hi))
        m0 = (s1 - s0) / rate
        m1 = (lo * s1 - hi * s0) / rate + (c1 - c0) / rate ** 2
        return m0, m1
    if fam == "tabulated":
        m0 = np.empty_like(lo)
        m1 = np.empty_like(lo)
        for i in range(lo.size):
            i0, i1 = _pl_integrals(spec.samples_s, spec.samples_k,
                                   x - hi.flat[i], x - lo.flat[i])
            m0.flat[i] = i0
            m1.flat[i] = x * i0 - i1
        return m0, m1
    # weakly singular, no elementary antiderivative
    m0 = np.empty_like(lo)
    m1 = np.empty_like(lo)
    for i in range(lo.size):
        m0.flat[i], m1.flat[i] = _singular_moments(spec, x, lo.flat[i], hi.flat[i], False)
    return m0, m1


def _moments_backward_arrays(spec: KernelSpec, x: float, lo, hi):
    """Vectorised (m0, m1) of int_{lo}^{hi} k(t, x) (1, t) dt with lo >= x."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if spec.family == "identity":
        return hi - lo, 0.5 * (hi * hi - lo * lo)
    if spec.is_difference:
        # reflect t -> 2x - t onto the forward closed forms
        m0, m1r = _moments_forward_arrays(spec, x, 2.0 * x - hi, 2.0 * x - lo)
        return m0, 2.0 * x * m0 - m1r
    m0 = np.empty_like(lo)
    m1 = np.empty_like(lo)
    for i in range(lo.size):
        m0.flat[i], m1.flat[i] = _singular_moments(spec, x, lo.flat[i], hi.flat[i], True)
    return m0, m1


def kernel_moments(spec: KernelSpec, x: float, lo: float, hi: float) -> Tuple[float, float]:
    """(int_{lo}^{hi} k(x,t) dt, int_{lo}^{hi} t k(x,t) dt); requires lo < hi <= x
    for the singular families."""
    if not lo < hi:
        raise UsageError(f"kernel_moments requires lo < hi, got ({lo}, {hi})")
    if spec.is_singular and hi > x + _singular_tol(x, hi):
        raise DomainError(f"{spec.family} kernel moments require hi <= x")
    m0, m1 = _moments_forward_arrays(spec, x, np.array([lo]), np.array([hi]))
    return float(m0[0]), float(m1[0])


def kernel_l1_norm(spec: KernelSpec, length: float) -> float:
    """Exact integral of |k(s)| over lags [0, length] for difference kernels."""
    if not spec.is_difference:
        raise UnsupportedKernelError(
            f"L1 norm is defined for difference kernels only, not {spec.family}")
    if spec.family == "identity":
        return length
    if spec.family == "rl-power":
        return length ** spec.alpha / gamma_fn(spec.alpha + 1.0)
    if spec.family == "exponential":
        r = spec.alpha
        return length if r == 0.0 else (math.exp(r * length) - 1.0) / r
    if spec.family == "cosh-difference":
        b = spec.beta
        return length if b == 0.0 else math.sinh(b * length) / b
    # tabulated: piecewise-linear |K|, split at sign changes
    s = np.asarray(spec.samples_s)
    k = np.asarray(spec.samples_k)
    if length > s[-1] + 1e-12:
        raise DomainError("tabulated kernel samples do not cover the requested range")
    total = 0.0
    for j in range(len(s) - 1):
        left, right = s[j], min(s[j + 1], length)
        if left >= length:
            break
        kl = float(np.interp(left, s, k))
        kr = float(np.interp(right, s, k))
        if kl * kr < 0.0:
            cross = left + (right - left) * kl / (kl - kr)
            total += 0.5 * abs(kl) * (cross - left) + 0.5 * abs(kr) * (right - cross)
        else:
            total += 0.5 * (abs(kl) + abs(kr)) * (right - left)
    return total
