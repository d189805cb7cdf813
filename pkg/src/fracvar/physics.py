"""Dissipative dynamics induced by time-weighted action functionals.

The weight kernel k(b, t) enters the equations of motion only through its
logarithmic time derivative delta(t) = (d/dt k(b, t)) / k(b, t), the weak
dissipative rate.  This module provides delta itself, fixed-step integrators
for the two oscillator models, and the limit-behaviour report for the
power-type and hyperbolic weight families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import DomainError, SimulationBlowUpError, UsageError
from .grid import GridFunction
from .kernels import KernelSpec, eval_kernel, eval_kernel_dt


@dataclass(frozen=True)
class OscillatorParams:
    """Shared parameter block for the oscillator models."""

    omega: float                 # angular frequency
    b: float                     # time horizon
    alpha: float = 0.5           # weight-kernel order
    gamma_ck: float = 0.0        # exponential mass growth rate
    mass0: float = 1.0
    y0: float = 1.0
    v0: float = 0.0
    rho: Optional[float] = None  # power-family exponent, when applicable

    def __post_init__(self):
        if self.omega <= 0.0 or self.mass0 <= 0.0 or self.b <= 0.0:
            raise UsageError("omega, mass0 and b must be positive")
        # alpha = 0 is the classical (unweighted) limit of the ODE parameter
        if not 0.0 <= self.alpha < 1.0:
            raise UsageError("alpha must lie in [0, 1)")
        if self.gamma_ck < 0.0:
            raise UsageError("gamma_ck must be nonnegative")


def dissipation_rate(kernel: KernelSpec, b: float, t: float) -> float:
    """delta(t): logarithmic time derivative of the weight kernel at (b, t)."""
    den = eval_kernel(kernel, b, t)
    if abs(den) < 1e-300:
        raise DomainError(f"kernel vanishes at (b={b}, t={t}); delta undefined")
    return eval_kernel_dt(kernel, b, t) / den


def delta_katugampola(alpha: float, rho: float, b: float, t: float) -> float:
    """Closed form (1-alpha)(rho+1) t^rho / (b^(rho+1) - t^(rho+1))."""
    r1 = rho + 1.0
    return (1.0 - alpha) * r1 * t ** rho / (b ** r1 - t ** r1)


def delta_power_cosh(alpha: float, b: float, t: float) -> float:
    """Closed form (1-alpha) sinh t / (cosh b - cosh t).

    As a rational expression this remains meaningful past the horizon t = b,
    where it approaches alpha - 1; the kernel itself is only defined for
    t < b.
    """
    return (1.0 - alpha) * math.sinh(t) / (math.cosh(b) - math.cosh(t))


def _rk4(f, y0: float, v0: float, t0: float, t1: float, n: int):
    h = (t1 - t0) / n
    ys = np.empty(n + 1)
    vs = np.empty(n + 1)
    ys[0], vs[0] = y0, v0
    y, v = y0, v0
    for i in range(n):
        t = t0 + i * h
        k1y, k1v = f(t, y, v)
        k2y, k2v = f(t + 0.5 * h, y + 0.5 * h * k1y, v + 0.5 * h * k1v)
        k3y, k3v = f(t + 0.5 * h, y + 0.5 * h * k2y, v + 0.5 * h * k2v)
        k4y, k4v = f(t + h, y + h * k3y, v + h * k3v)
        y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        if not (math.isfinite(y) and math.isfinite(v)):
            raise SimulationBlowUpError(
                f"trajectory became non-finite at node {i + 1} (t={t + h:g})",
                node=i + 1)
        ys[i + 1], vs[i + 1] = y, v
    return ys, vs


def simulate_damped_oscillator(params: OscillatorParams,
                               potential_grad: Callable[[float], float],
                               grid_n: int) -> GridFunction:
    """Integrate y'' - alpha y' = -(1/m) V'(y) on [0, b].

    The velocity coefficient enters with the sign produced by the
    exponentially-weighted action, which anti-damps for alpha in (0, 1);
    the equation is integrated exactly as derived.
    """
    if grid_n < 16:
        raise UsageError("grid_n must be at least 16")
    al = params.alpha
    m = params.mass0

    def f(t, y, v):
        return v, al * v - potential_grad(y) / m

    ys, vs = _rk4(f, params.y0, params.v0, 0.0, params.b, grid_n)
    return GridFunction(0.0, params.b, ys, vs)


def simulate_caldirola_kanai(params: OscillatorParams, kernel: KernelSpec,
                             grid_n: int,
                             t_end: Optional[float] = None) -> GridFunction:
    """Integrate y'' + (delta(t) + gamma) y' + omega^2 y = 0 from (y0, v0).

    When the kernel is singular at t = b the integration horizon defaults to
    b - h/2 so no stage evaluation touches the singular point.
    """
    if grid_n < 16:
        raise UsageError("grid_n must be at least 16")
    if t_end is None:
        t_end = params.b - 0.5 * params.b / grid_n if kernel.is_singular else params.b
    if not 0.0 < t_end <= params.b:
        raise UsageError(f"t_end must lie in (0, b], got {t_end}")
    om2 = params.omega ** 2
    gam = params.gamma_ck
    b = params.b

    def f(t, y, v):
        delta = dissipation_rate(kernel, b, t) if t > 0.0 else \
            dissipation_rate(kernel, b, 1e-30 * b)
        return v, -(delta + gam) * v - om2 * y

    ys, vs = _rk4(f, params.y0, params.v0, 0.0, t_end, grid_n)
    return GridFunction(0.0, t_end, ys, vs)


def oscillator_energy(params: OscillatorParams, traj: GridFunction) -> np.ndarray:
    """0.5 m (v^2 + omega^2 y^2) along a trajectory."""
    v = traj.derivative_values
    if v is None:
        v = traj.fd_derivative()
    return 0.5 * params.mass0 * (v ** 2 + params.omega ** 2 * traj.values ** 2)


# ---------------------------------------------------------------------------
# Limit-behaviour report for the dissipative rate.
# ---------------------------------------------------------------------------

REPORT_KINDS = ("katugampola-rho-zero", "katugampola-rho-positive", "power-cosh")


@dataclass
class DeltaCheck:
    name: str
    value: float
    target: float
    tol: float

    @property
    def passed(self) -> bool:
        return abs(self.value - self.target) <= self.tol

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "target": self.target,
                "tol": self.tol, "passed": self.passed}


@dataclass
class DeltaLimitReport:
    kind: str
    alpha: float
    b: float
    rho: Optional[float]
    rows: List[Tuple[str, float, float]] = field(default_factory=list)
    checks: List[DeltaCheck] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind, "alpha": self.alpha, "b": self.b, "rho": self.rho,
            "rows": [{"regime": r, "t": t, "delta": d} for r, t, d in self.rows],
            "checks": [c.to_dict() for c in self.checks],
            "all_passed": self.all_passed,
        }


def delta_limit_report(kind: str, alpha: float, b: float,
                       rho: float = 2.0) -> DeltaLimitReport:
    """Tabulate delta(t) near its limit regimes and check the limit values.

    Regimes: the power-family rate vanishes at early time for rho > 0 and
    freezes at (1-alpha)/b for rho = 0; the hyperbolic-weight rate vanishes
    at early time, diverges toward the horizon, and its closed form settles
    at alpha - 1 in the late-time (beyond-horizon) regime, checked on the
    growing horizons 5, 10, 20.
    """
    if not 0.0 < alpha < 1.0:
        raise UsageError("alpha must lie in (0, 1)")
    if kind not in REPORT_KINDS:
        raise UsageError(f"unknown report kind {kind!r}; choose from {REPORT_KINDS}")
    report = DeltaLimitReport(kind=kind, alpha=alpha, b=b,
                              rho=None if kind == "power-cosh" else rho)

    if kind == "katugampola-rho-zero":
        kernel = KernelSpec.katugampola(alpha, 0.0)
        early = b * np.logspace(-6, -2, 9)
        for t in early:
            report.rows.append(("early", float(t), dissipation_rate(kernel, b, t)))
        sweep = np.linspace(0.05 * b, 0.95 * b, 10)
        worst = 0.0
        for t in sweep:
            d = dissipation_rate(kernel, b, t)
            closed = (1.0 - alpha) / (b - t)
            worst = max(worst, abs(d - closed))
            report.rows.append(("sweep", float(t), d))
        report.checks.append(DeltaCheck(
            "pointwise (1-alpha)/(b-t)", worst, 0.0, 1e-10))
        report.checks.append(DeltaCheck(
            "early-time value (1-alpha)/b",
            dissipation_rate(kernel, b, 1e-6 * b), (1.0 - alpha) / b, 1e-6))
        return report

    if kind == "katugampola-rho-positive":
        if rho <= 0.0:
            raise UsageError("this regime requires rho > 0")
        kernel = KernelSpec.katugampola(alpha, rho)
        early = b * np.logspace(-6, -2, 9)
        vals = [dissipation_rate(kernel, b, float(t)) for t in early]
        for t, d in zip(early, vals):
            report.rows.append(("early", float(t), d))
        report.checks.append(DeltaCheck(
            "early-time vanishing at t=1e-4", dissipation_rate(kernel, b, 1e-4),
            0.0, 1e-6))
        report.checks.append(DeltaCheck(
            "monotone decay toward t=0",
            float(np.max(np.abs(np.diff(np.sign(np.diff(vals)))))), 0.0, 0.0))
        return report

    # power-cosh
    early = b * np.logspace(-6, -2, 9)
    kernel = KernelSpec.power_cosh(alpha)
    for t in early:
        report.rows.append(("early", float(t), dissipation_rate(kernel, b, float(t))))
    # divergence toward the horizon is reported, not hidden
    for frac in (0.9, 0.99, 0.999):
        t = frac * b
        report.rows.append(("near-horizon", t, dissipation_rate(kernel, b, t)))
    errs = []
    for horizon in (5.0, 10.0, 20.0):
        t_late = 2.0 * horizon
        d = delta_power_cosh(alpha, horizon, t_late)
        report.rows.append(("late", t_late, d))
        errs.append(abs(d - (alpha - 1.0)))
    report.checks.append(DeltaCheck(
        "early-time vanishing", dissipation_rate(kernel, b, 1e-4 * b), 0.0, 1e-3))
    report.checks.append(DeltaCheck(
        "late-time value alpha-1 at largest horizon",
        delta_power_cosh(alpha, 20.0, 40.0), alpha - 1.0, 5e-2))
    report.checks.append(DeltaCheck(
        "late-time error shrinks with the horizon",
        float(errs[-1] - min(errs)), 0.0, 1e-12))
    return report
