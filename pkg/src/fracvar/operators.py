"""Weighted fractional operators on grid functions.

The integral operator applies product integration: the integrand is replaced
by its piecewise-linear interpolant and integrated exactly against kernel
moments, which keeps first/second order accuracy through integrable kernel
singularities.  The two derivative-type operators compose the integral with
grid differentiation on one side or the other.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import (GridMismatchError, IncompatibleDataError, NormBoundViolation,
                     UnsupportedKernelError, UsageError)
from .grid import GridFunction, fd_derivative, piecewise_linear_l1, trapezoid
from .kernels import (KernelSpec, ParamSet, _moments_backward_arrays,
                      _moments_forward_arrays, kernel_l1_norm)


class OperatorKind(enum.Enum):
    INTEGRAL = "integral"            # weighted two-branch integral
    RL_DERIVATIVE = "rl-derivative"  # derivative after the integral
    CAPUTO_DERIVATIVE = "caputo-derivative"  # integral after the derivative


@dataclass(frozen=True)
class OperatorConfig:
    """Which operator to apply, with its weights, order label and kernel.

    For the derivative kinds of order ``order`` the ``kernel`` field holds the
    complementary-order kernel used inside the integral (e.g. the rl-power
    kernel of order 1 - order).
    """

    pset: ParamSet
    order: float
    kernel: KernelSpec
    kind: OperatorKind = OperatorKind.INTEGRAL

    def __post_init__(self):
        if not 0.0 < self.order < 1.0:
            raise UsageError(f"operator order must lie in (0, 1), got {self.order}")

    def with_(self, **kw) -> "OperatorConfig":
        data = dict(pset=self.pset, order=self.order, kernel=self.kernel, kind=self.kind)
        data.update(kw)
        return OperatorConfig(**data)


def _check_grid(config: OperatorConfig, f: GridFunction) -> None:
    ps = config.pset
    if abs(f.a - ps.a) > 1e-12 or abs(f.b - ps.b) > 1e-12:
        raise GridMismatchError(
            f"grid [{f.a}, {f.b}] does not match parameter set [{ps.a}, {ps.b}]")


def _lag_moments(spec: KernelSpec, h: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """(mu0[L], nu[L]) for L = 1..n over the lag cells [(L-1)h, Lh].

    mu0 integrates k(s), nu integrates s*k(s); both a zero-padded slot at L=0
    so convolution indices line up with node indices.
    """
    edges = h * np.arange(n + 1, dtype=float)
    # forward moments at x = n*h over all cells reproduce the lag integrals
    m0, m1 = _moments_forward_arrays(spec, edges[-1], edges[:-1], edges[1:])
    # m1 is int t k(x-t) dt = x*mu0 - nu on each cell; recover nu and reverse
    nu = (edges[-1] * m0 - m1)[::-1]
    mu0 = m0[::-1]
    return np.concatenate(([0.0], mu0)), np.concatenate(([0.0], nu))


def _convolve_branch(cells: np.ndarray, slopes: np.ndarray,
                     mu0: np.ndarray, kappa: np.ndarray, n: int) -> np.ndarray:
    conv = np.convolve(cells, mu0) + np.convolve(slopes, kappa)
    return conv[:n + 1]


def frac_integral(config: OperatorConfig, f: GridFunction) -> GridFunction:
    """Weighted fractional integral: forward branch over [a, x] with kernel
    k(x, t), backward branch over [x, b] with kernel k(t, x)."""
    _check_grid(config, f)
    spec = config.kernel
    p, q = config.pset.p, config.pset.q
    t = f.nodes
    h = f.h
    n = f.n
    vals = f.values
    cells = vals[:-1]
    slopes = np.diff(vals) / h
    out = np.zeros(n + 1)

    if spec.is_difference:
        mu0, nu = _lag_moments(spec, h, n)
        lags = np.arange(n + 1, dtype=float)
        if p != 0.0:
            kappa = lags * h * mu0 - nu
            out += p * _convolve_branch(cells, slopes, mu0, kappa, n)
        if q != 0.0:
            kappa_b = nu - (lags - 1.0) * h * mu0
            kappa_b[0] = 0.0
            bwd = np.convolve(cells[::-1], mu0) + np.convolve(slopes[::-1], kappa_b)
            out += q * bwd[:n + 1][::-1]
        return f.with_values(out)

    # general (non-difference) kernels: per-node product integration
    for i in range(n + 1):
        acc = 0.0
        if p != 0.0 and i > 0:
            m0, m1 = _moments_forward_arrays(spec, t[i], t[:i], t[1:i + 1])
            acc += p * float(np.sum(cells[:i] * m0 + slopes[:i] * (m1 - t[:i] * m0)))
        if q != 0.0 and i < n:
            m0, m1 = _moments_backward_arrays(spec, t[i], t[i:n], t[i + 1:n + 1])
            acc += q * float(np.sum(cells[i:] * m0 + slopes[i:] * (m1 - t[i:n] * m0)))
        out[i] = acc
    return f.with_values(out)


def _extrapolate_singular_ends(out: np.ndarray, config: OperatorConfig) -> Tuple[bool, bool]:
    left = right = False
    if config.kernel.is_singular:
        if config.pset.p != 0.0:
            out[0] = 2.0 * out[1] - out[2]
            left = True
        if config.pset.q != 0.0:
            out[-1] = 2.0 * out[-2] - out[-3]
            right = True
    return left, right


def frac_deriv_rl(config: OperatorConfig, f: GridFunction) -> GridFunction:
    """Derivative-after-integral operator (Riemann-Liouville construction).

    The inner integral uses ``config.kernel`` (the complementary-order
    kernel); differentiation is second-order finite differences.  Endpoint
    values that are genuinely singular are replaced by linear extrapolation
    from the nearest interior nodes.
    """
    g = frac_integral(config, f)
    out = fd_derivative(g.values, f.h)
    left, right = _extrapolate_singular_ends(out, config)
    _smoothness_warning(g.values, f.h)
    res = f.with_values(out)
    res.endpoint_extrapolated = (left, right)
    return res


def frac_deriv_caputo(config: OperatorConfig, f: GridFunction) -> GridFunction:
    """Integral-after-derivative operator (Caputo construction).

    Uses analytic derivative samples when the grid function carries them,
    otherwise second-order finite differences.
    """
    fp = f.derivative_or_fd()
    return frac_integral(config, GridFunction(f.a, f.b, fp))


def _smoothness_warning(g: np.ndarray, h: float) -> None:
    # flags interior roughness only; endpoint singularities are expected and
    # handled by extrapolation
    if g.size < 16:
        return
    d2 = np.abs(np.diff(g, 2))
    med = float(np.median(d2)) + 1e-300
    peak = int(np.argmax(d2))
    inner = d2.size // 4 <= peak <= 3 * d2.size // 4
    if inner and float(np.max(d2)) > 1e3 * med \
            and float(np.max(d2)) > 1e-6 * (np.max(np.abs(g)) + 1.0):
        warnings.warn("integral output looks non-smooth; the grid derivative "
                      "may be unreliable", RuntimeWarning, stacklevel=3)


# ---------------------------------------------------------------------------
# Named specialisations (Riemann-Liouville / Caputo with the power kernel).
# The right-sided derivative conventions carry the extra minus sign.
# ---------------------------------------------------------------------------

def _rl_config(a: float, b: float, order: float, p: float, q: float,
               complement: bool) -> OperatorConfig:
    alpha = 1.0 - order if complement else order
    return OperatorConfig(ParamSet(a, b, p, q), order, KernelSpec.rl_power(alpha))


def left_rl_integral(f: GridFunction, order: float) -> GridFunction:
    return frac_integral(_rl_config(f.a, f.b, order, 1.0, 0.0, False), f)


def right_rl_integral(f: GridFunction, order: float) -> GridFunction:
    return frac_integral(_rl_config(f.a, f.b, order, 0.0, 1.0, False), f)


def left_rl_derivative(f: GridFunction, order: float) -> GridFunction:
    return frac_deriv_rl(_rl_config(f.a, f.b, order, 1.0, 0.0, True), f)


def right_rl_derivative(f: GridFunction, order: float) -> GridFunction:
    g = frac_deriv_rl(_rl_config(f.a, f.b, order, 0.0, 1.0, True), f)
    return f.with_values(-g.values)


def left_caputo_derivative(f: GridFunction, order: float) -> GridFunction:
    return frac_deriv_caputo(_rl_config(f.a, f.b, order, 1.0, 0.0, True), f)


def right_caputo_derivative(f: GridFunction, order: float) -> GridFunction:
    g = frac_deriv_caputo(_rl_config(f.a, f.b, order, 0.0, 1.0, True), f)
    return f.with_values(-g.values)


# ---------------------------------------------------------------------------
# Integration-by-parts defects.
# ---------------------------------------------------------------------------

def parts_defect_integral(config: OperatorConfig, f: GridFunction,
                          g: GridFunction) -> float:
    """|int g * K[f] - int f * K_dual[g]| with trapezoid outer integrals."""
    f.require_same_grid(g)
    kf = frac_integral(config, f)
    kg = frac_integral(config.with_(pset=config.pset.dual()), g)
    h = f.h
    return abs(trapezoid(g.values * kf.values, h) - trapezoid(f.values * kg.values, h))


def parts_defect_caputo(config: OperatorConfig, f: GridFunction,
                        g: GridFunction) -> float:
    """Defect of the derivative-operator integration by parts: the boundary
    term plus the dual derivative-after-integral term against f."""
    f.require_same_grid(g)
    bf = frac_deriv_caputo(config, f)
    dual = config.with_(pset=config.pset.dual())
    kg = frac_integral(dual, g)
    ag = frac_deriv_rl(dual, g)
    h = f.h
    lhs = trapezoid(g.values * bf.values, h)
    boundary = f.values[-1] * kg.values[-1] - f.values[0] * kg.values[0]
    rhs = boundary - trapezoid(f.values * ag.values, h)
    return abs(lhs - rhs)


def operator_norm_check(config: OperatorConfig, trials: int,
                        grid_n: int = 128, seed: int = 20240501,
                        ) -> Tuple[float, float]:
    """Sample random piecewise-linear inputs and compare the L1 operator
    ratio against the (|p| + |q|) * ||k||_1 bound.

    Returns (max empirical ratio, bound); raises ``NormBoundViolation`` if a
    trial exceeds the bound.
    """
    spec = config.kernel
    if not spec.is_difference:
        raise UnsupportedKernelError("norm check requires a difference kernel")
    ps = config.pset
    bound = (abs(ps.p) + abs(ps.q)) * kernel_l1_norm(spec, ps.b - ps.a)
    rng = np.random.default_rng(seed)
    h = (ps.b - ps.a) / grid_n
    worst = 0.0
    for _ in range(trials):
        vals = rng.uniform(-1.0, 1.0, grid_n + 1)
        f = GridFunction(ps.a, ps.b, vals)
        kf = frac_integral(config, f)
        denom = piecewise_linear_l1(vals, h)
        if denom == 0.0:
            continue
        ratio = piecewise_linear_l1(kf.values, h) / denom
        worst = max(worst, ratio)
    if worst > bound * (1.0 + 1e-12):
        raise NormBoundViolation(
            f"empirical ratio {worst:.6g} exceeds bound {bound:.6g}")
    return worst, bound


# ---------------------------------------------------------------------------
# First-kind Volterra equations with difference kernels.
# ---------------------------------------------------------------------------

def _difference_kernel_lag0(spec: KernelSpec) -> float:
    if spec.family == "identity":
        return 1.0
    if spec.family == "exponential":
        return 1.0
    if spec.family == "cosh-difference":
        return 1.0
    if spec.family == "tabulated":
        return spec.samples_k[0]
    raise UnsupportedKernelError(
        f"{spec.family} kernel has no finite value at zero lag")


def _difference_kernel_dlag(spec: KernelSpec, s: np.ndarray) -> np.ndarray:
    """d/ds of the lag profile k(s)."""
    s = np.asarray(s, dtype=float)
    if spec.family == "identity":
        return np.zeros_like(s)
    if spec.family == "exponential":
        return spec.alpha * np.exp(spec.alpha * s)
    if spec.family == "cosh-difference":
        return spec.beta * np.sinh(spec.beta * s)
    if spec.family == "tabulated":
        nodes = np.asarray(spec.samples_s)
        step = float(np.min(np.diff(nodes))) / 4.0
        up = np.interp(np.minimum(s + step, nodes[-1]), nodes, spec.samples_k)
        dn = np.interp(np.maximum(s - step, nodes[0]), nodes, spec.samples_k)
        return (up - dn) / (np.minimum(s + step, nodes[-1]) - np.maximum(s - step, nodes[0]))
    raise UnsupportedKernelError(spec.family)


def solve_volterra_first_kind(kernel: KernelSpec, rhs: GridFunction) -> GridFunction:
    """Solve int_a^t k(t - tau) y(tau) dtau = rhs(t) by differentiating to a
    second-kind equation and marching with the trapezoid rule.

    Requires a difference kernel with k(0) != 0 and rhs(a) = 0.
    """
    if not kernel.is_difference:
        raise UnsupportedKernelError("first-kind solver requires a difference kernel")
    k0 = _difference_kernel_lag0(kernel)
    if abs(k0) < 1e-12:
        raise UnsupportedKernelError("first-kind solver requires k(0) != 0")
    scale = float(np.max(np.abs(rhs.values))) + 1.0
    if abs(rhs.values[0]) > 1e-8 * scale:
        raise IncompatibleDataError(
            f"rhs(a) = {rhs.values[0]:g} violates the compatibility condition rhs(a) = 0")
    h = rhs.h
    n = rhs.n
    rhsp = rhs.derivative_or_fd()
    kp = _difference_kernel_dlag(kernel, h * np.arange(n + 1))
    y = np.empty(n + 1)
    y[0] = rhsp[0] / k0
    denom = k0 + 0.5 * h * kp[0]
    for i in range(1, n + 1):
        acc = 0.5 * kp[i] * y[0]
        if i > 1:
            acc += float(np.dot(kp[i - 1:0:-1], y[1:i]))
        y[i] = (rhsp[i] - h * acc) / denom
    return rhs.with_values(y)
