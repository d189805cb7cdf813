"""Weighted variational problems: functional evaluation, optimality residuals,
multiplier estimation, and a direct discretised solver.

The functional is J(y) = int_a^b k(b, t) F(t, y, y', Dy, Ky) dt where Dy is a
Caputo-type fractional derivative and Ky a weighted fractional integral.  The
first-order optimality residual combines four terms: the pointwise dF/dy,
the time derivative of the weighted dF/du, and the two dual-weighted
fractional operators applied to the weighted dF/dv and dF/dw samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import (DegenerateConstraintError, DomainError,
                     LagrangianValidationError, UsageError)
from .grid import GridFunction, fd_derivative, trapezoid
from .kernels import KernelSpec, eval_kernel, _moments_forward_arrays
from .operators import (OperatorConfig, OperatorKind, frac_deriv_caputo,
                        frac_deriv_rl, frac_integral)

Map5 = Callable[..., np.ndarray]


@dataclass(frozen=True)
class LagrangianSpec:
    """F(t, y, u, v, w) with its four non-trivial partials.

    ``u`` is the classical derivative, ``v`` the fractional-derivative value,
    ``w`` the fractional-integral value.  All callables must broadcast over
    numpy arrays.  The ``uses_*`` flags let problems skip computing operator
    values the Lagrangian never reads.
    """

    F: Map5
    d_y: Map5
    d_u: Map5
    d_v: Map5
    d_w: Map5
    uses_frac_derivative: bool = True
    uses_frac_integral: bool = True
    name: str = "custom"

    def validate(self, seed: int = 7, samples: int = 24,
                 box: Tuple[float, float] = (-0.5, 0.5),
                 t_range: Tuple[float, float] = (0.0, 1.0)) -> None:
        """Check each partial against a central difference of F at random points."""
        rng = np.random.default_rng(seed)
        lo, hi = box
        step = 1e-6 * max(1.0, hi - lo)
        for _ in range(samples):
            t = rng.uniform(*t_range)
            args = rng.uniform(lo, hi, 4)
            for k, partial in enumerate((self.d_y, self.d_u, self.d_v, self.d_w)):
                up = args.copy()
                dn = args.copy()
                up[k] += step
                dn[k] -= step
                fd = (self.F(t, *up) - self.F(t, *dn)) / (2.0 * step)
                got = partial(t, *args)
                scale = max(1.0, abs(fd))
                if abs(got - fd) > 1e-6 * scale:
                    raise LagrangianValidationError(
                        f"partial #{k + 2} of {self.name!r} disagrees with finite "
                        f"differences: {got:.8g} vs {fd:.8g} at t={t:.4g}")

    def combined_with(self, other: "LagrangianSpec", lam: float) -> "LagrangianSpec":
        """The multiplier combination F - lam * G."""
        def mix(f, g):
            return lambda t, y, u, v, w: f(t, y, u, v, w) - lam * g(t, y, u, v, w)
        return LagrangianSpec(
            F=mix(self.F, other.F),
            d_y=mix(self.d_y, other.d_y),
            d_u=mix(self.d_u, other.d_u),
            d_v=mix(self.d_v, other.d_v),
            d_w=mix(self.d_w, other.d_w),
            uses_frac_derivative=self.uses_frac_derivative or other.uses_frac_derivative,
            uses_frac_integral=self.uses_frac_integral or other.uses_frac_integral,
            name=f"{self.name}-{lam:g}*{other.name}",
        )


@dataclass(frozen=True)
class Constraint:
    integrand: LagrangianSpec
    target: float

    def __post_init__(self):
        if not math.isfinite(self.target):
            raise UsageError("constraint target must be finite")


@dataclass(frozen=True)
class VariationalProblem:
    """Full problem datum: outer weight, the two inner operator configs,
    Lagrangian, boundary conditions, optional isoperimetric constraint.

    ``bc_left is None`` means the left endpoint is free; the right endpoint is
    always fixed.
    """

    a: float
    b: float
    outer_kernel: KernelSpec
    deriv_op: OperatorConfig      # Caputo-type operator entering as v
    integral_op: OperatorConfig   # integral operator entering as w
    lagrangian: LagrangianSpec
    bc_right: float
    bc_left: Optional[float] = None
    constraint: Optional[Constraint] = None

    def __post_init__(self):
        for cfg, label in ((self.deriv_op, "deriv_op"), (self.integral_op, "integral_op")):
            if abs(cfg.pset.a - self.a) > 1e-12 or abs(cfg.pset.b - self.b) > 1e-12:
                raise UsageError(f"{label} parameter set must live on [{self.a}, {self.b}]")

    @property
    def has_free_left(self) -> bool:
        return self.bc_left is None


@dataclass
class ResidualReport:
    """Pointwise optimality residual plus its norms over the included band."""

    grid: GridFunction
    sup_norm: float
    l2_norm: float
    excluded_per_end: int
    nbc_residual: Optional[float] = None

    def to_dict(self) -> dict:
        out = {
            "sup_norm": self.sup_norm,
            "l2_norm": self.l2_norm,
            "excluded_per_end": self.excluded_per_end,
        }
        if self.nbc_residual is not None:
            out["nbc_residual"] = self.nbc_residual
        return out


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iters: int = 5000
    penalty_init: float = 10.0
    penalty_growth: float = 4.0
    fd_step: float = 1.5e-8
    armijo: float = 1e-4
    max_backtracks: int = 40
    constraint_tol: float = 1e-8
    max_penalty_rounds: int = 12


@dataclass
class SolveResult:
    y: GridFunction
    converged: bool
    iterations: int
    grad_inf_norm: float
    objective: float
    constraint_violation: float = 0.0
    multiplier: Optional[float] = None


# ---------------------------------------------------------------------------
# Shared evaluation machinery.
# ---------------------------------------------------------------------------

def outer_weight_values(problem: VariationalProblem, t: np.ndarray) -> np.ndarray:
    """k(b, t_i) samples; a singular value at t = b is linearly extrapolated."""
    spec = problem.outer_kernel
    b = problem.b
    out = np.empty(t.size)
    for i, ti in enumerate(t):
        try:
            out[i] = eval_kernel(spec, b, ti)
        except DomainError:
            out[i] = np.nan
    bad = np.isnan(out)
    if bad.any():
        if bad[:-1].any():
            raise DomainError("outer kernel is singular away from t = b")
        out[-1] = 2.0 * out[-2] - out[-3]
    return out


def outer_quadrature_weights(problem: VariationalProblem, t: np.ndarray) -> np.ndarray:
    """Product-integration weights: int k(b,t) F(t) dt ~= dot(weights, F-samples)."""
    h = t[1] - t[0]
    m0, m1 = _moments_forward_arrays(problem.outer_kernel, problem.b, t[:-1], t[1:])
    kappa = (m1 - t[:-1] * m0) / h
    w = np.zeros(t.size)
    np.add.at(w, np.arange(t.size - 1), m0 - kappa)
    np.add.at(w, np.arange(1, t.size), kappa)
    return w


def _eval_map(fn: Map5, t, y, u, v, w) -> np.ndarray:
    vals = fn(t, y, u, v, w)
    vals = np.asarray(vals, dtype=float)
    if vals.shape != np.shape(t):
        vals = np.broadcast_to(vals, np.shape(t)).astype(float)
    return vals


def _argument_samples(problem: VariationalProblem, y: GridFunction,
                      needs_v: bool, needs_w: bool):
    t = y.nodes
    u = y.derivative_or_fd()
    v = frac_deriv_caputo(problem.deriv_op, y).values if needs_v else np.zeros(t.size)
    w = frac_integral(problem.integral_op, y).values if needs_w else np.zeros(t.size)
    return t, y.values, u, v, w


def _check_boundary(problem: VariationalProblem, y: GridFunction) -> None:
    if problem.bc_left is not None:
        tol = 1e-10 * max(1.0, abs(problem.bc_left))
        if abs(y.values[0] - problem.bc_left) > tol:
            raise UsageError(
                f"y(a) = {y.values[0]:.12g} violates the fixed left boundary "
                f"value {problem.bc_left:.12g}")
    tol = 1e-10 * max(1.0, abs(problem.bc_right))
    if abs(y.values[-1] - problem.bc_right) > tol:
        raise UsageError(
            f"y(b) = {y.values[-1]:.12g} violates the fixed right boundary "
            f"value {problem.bc_right:.12g}")


def evaluate_functional(problem: VariationalProblem, y: GridFunction,
                        integrand: Optional[LagrangianSpec] = None) -> float:
    """J(y): the weighted integral of F along y."""
    _check_boundary(problem, y)
    lag = integrand if integrand is not None else problem.lagrangian
    t, yv, u, v, w = _argument_samples(problem, y, lag.uses_frac_derivative,
                                       lag.uses_frac_integral)
    fvals = _eval_map(lag.F, t, yv, u, v, w)
    return float(np.dot(outer_quadrature_weights(problem, t), fvals))


def _residual_values(problem: VariationalProblem, y: GridFunction,
                     lag: LagrangianSpec) -> np.ndarray:
    t, yv, u, v, w = _argument_samples(problem, y, lag.uses_frac_derivative,
                                       lag.uses_frac_integral)
    h = y.h
    weight = outer_weight_values(problem, t)
    res = weight * _eval_map(lag.d_y, t, yv, u, v, w)
    res -= fd_derivative(_eval_map(lag.d_u, t, yv, u, v, w) * weight, h)
    if lag.uses_frac_derivative:
        weighted = GridFunction(y.a, y.b, weight * _eval_map(lag.d_v, t, yv, u, v, w))
        dual = problem.deriv_op.with_(pset=problem.deriv_op.pset.dual(),
                                      kind=OperatorKind.RL_DERIVATIVE)
        res -= frac_deriv_rl(dual, weighted).values
    if lag.uses_frac_integral:
        weighted = GridFunction(y.a, y.b, weight * _eval_map(lag.d_w, t, yv, u, v, w))
        dual = problem.integral_op.with_(pset=problem.integral_op.pset.dual(),
                                         kind=OperatorKind.INTEGRAL)
        res += frac_integral(dual, weighted).values
    return res


def included_band(problem: VariationalProblem, n: int) -> slice:
    """Interior nodes entering the residual norms.

    The optimality identity holds on the open interval; when the outer weight
    is singular at t = b the five nodes nearest each endpoint are dropped as
    well, since differentiating the weighted samples is unbounded there.
    """
    pad = 5 if problem.outer_kernel.is_singular else 1
    if 2 * pad >= n:
        raise UsageError(f"grid too coarse for residual norms (n={n})")
    return slice(pad, n + 1 - pad)


def _build_report(problem: VariationalProblem, y: GridFunction,
                  res: np.ndarray) -> ResidualReport:
    band = included_band(problem, y.n)
    inner = res[band]
    sup = float(np.max(np.abs(inner)))
    l2 = math.sqrt(max(trapezoid(inner * inner, y.h), 0.0))
    return ResidualReport(
        grid=y.with_values(res),
        sup_norm=sup,
        l2_norm=l2,
        excluded_per_end=band.start,
    )


def el_residual(problem: VariationalProblem, y: GridFunction) -> ResidualReport:
    """Pointwise first-order optimality residual of the unconstrained problem."""
    report = _build_report(problem, y, _residual_values(problem, y, problem.lagrangian))
    if problem.has_free_left:
        report.nbc_residual = natural_bc_residual(problem, y)
    return report


def natural_bc_residual(problem: VariationalProblem, y: GridFunction) -> float:
    """|weighted dF/du at t=a plus the dual integral of the weighted dF/dv at a|.

    Only meaningful when the left endpoint is free.
    """
    if not problem.has_free_left:
        raise UsageError("natural boundary residual requires a free left endpoint")
    lag = problem.lagrangian
    t, yv, u, v, w = _argument_samples(problem, y, lag.uses_frac_derivative,
                                       lag.uses_frac_integral)
    weight = outer_weight_values(problem, t)
    total = _eval_map(lag.d_u, t, yv, u, v, w)[0] * weight[0]
    if lag.uses_frac_derivative:
        weighted = GridFunction(y.a, y.b, weight * _eval_map(lag.d_v, t, yv, u, v, w))
        dual = problem.deriv_op.with_(pset=problem.deriv_op.pset.dual(),
                                      kind=OperatorKind.INTEGRAL)
        total += frac_integral(dual, weighted).values[0]
    return abs(float(total))


def constraint_value(problem: VariationalProblem, y: GridFunction) -> float:
    """Value of the constraint functional I(y)."""
    if problem.constraint is None:
        raise UsageError("problem carries no isoperimetric constraint")
    return evaluate_functional(problem, y, integrand=problem.constraint.integrand)


def isoperimetric_el_residual(problem: VariationalProblem, y: GridFunction,
                              lam: float) -> ResidualReport:
    """Optimality residual of the combined integrand F - lam * G."""
    if problem.constraint is None:
        raise UsageError("problem carries no isoperimetric constraint")
    combined = problem.lagrangian.combined_with(problem.constraint.integrand, lam)
    return _build_report(problem, y, _residual_values(problem, y, combined))


def estimate_multiplier(problem: VariationalProblem, y: GridFunction) -> float:
    """Least-squares multiplier: the residual of F - lam*G is affine in lam,
    so the minimiser is <R_F, R_G> / <R_G, R_G> over the included band."""
    if problem.constraint is None:
        raise UsageError("problem carries no isoperimetric constraint")
    rf = _residual_values(problem, y, problem.lagrangian)
    rg = _residual_values(problem, y, problem.constraint.integrand)
    band = included_band(problem, y.n)
    rg_band = rg[band]
    norm = math.sqrt(max(trapezoid(rg_band * rg_band, y.h), 0.0))
    if norm < 1e-12:
        raise DegenerateConstraintError(
            f"constraint residual norm {norm:.3g} is numerically zero: y appears "
            "to be an extremal of the constraint functional")
    return float(np.dot(rf[band], rg_band) / np.dot(rg_band, rg_band))


# ---------------------------------------------------------------------------
# Direct solver: finite-difference gradient descent with backtracking, and an
# augmented-Lagrangian outer loop for the isoperimetric constraint.
# ---------------------------------------------------------------------------

def _fast_objective(problem: VariationalProblem, t: np.ndarray):
    """Closure evaluating J(y-values) on the solver's cell-based (Ritz) rule.

    The iterate is treated as piecewise linear: each cell contributes its
    kernel mass times F at the midpoint arguments, with the exact cell slope
    as the derivative sample.  Node-centred stencils are avoided here because
    they leave the odd/even sublattices uncoupled and stall the minimisation.
    """
    lag = problem.lagrangian
    h = t[1] - t[0]
    m0, m1 = _moments_forward_arrays(problem.outer_kernel, problem.b, t[:-1], t[1:])
    t_mid = 0.5 * (t[:-1] + t[1:])
    needs_v = lag.uses_frac_derivative
    needs_w = lag.uses_frac_integral
    con = problem.constraint
    if con is not None:
        needs_v = needs_v or con.integrand.uses_frac_derivative
        needs_w = needs_w or con.integrand.uses_frac_integral

    def split(values: np.ndarray) -> Tuple[float, float]:
        slopes = np.diff(values) / h
        y_mid = 0.5 * (values[:-1] + values[1:])
        if needs_v or needs_w:
            u_nodes = fd_derivative(values, h)
            gf = GridFunction(problem.a, problem.b, values, u_nodes)
            v = frac_deriv_caputo(problem.deriv_op, gf).values if needs_v \
                else np.zeros(t.size)
            w = frac_integral(problem.integral_op, gf).values if needs_w \
                else np.zeros(t.size)
            v_mid = 0.5 * (v[:-1] + v[1:])
            w_mid = 0.5 * (w[:-1] + w[1:])
        else:
            v_mid = w_mid = np.zeros(t_mid.size)
        j = float(np.dot(m0, _eval_map(lag.F, t_mid, y_mid, slopes, v_mid, w_mid)))
        c = 0.0
        if con is not None:
            ival = float(np.dot(m0, _eval_map(con.integrand.F, t_mid, y_mid,
                                              slopes, v_mid, w_mid)))
            c = ival - con.target
        return j, c

    return split


def solve_direct(problem: VariationalProblem, init: GridFunction,
                 options: SolverOptions = SolverOptions()) -> SolveResult:
    """Minimise the discretised functional over the interior node values.

    Gradient descent on forward-difference gradients with a backtracking
    (Armijo) line search; the trial step is the Barzilai-Borwein length from
    the previous accepted step, so the objective never increases between
    accepted iterates.  Isoperimetric constraints are handled by an
    augmented-Lagrangian outer loop with geometric penalty growth.
    """
    _check_boundary(problem, init)
    t = init.nodes
    n = init.n
    start = 0 if problem.has_free_left else 1
    idx = np.arange(start, n)
    split = _fast_objective(problem, t)
    full = init.values.copy()

    lam_al = 0.0
    mu = options.penalty_init
    constrained = problem.constraint is not None

    def objective(z: np.ndarray) -> float:
        full[idx] = z
        j, c = split(full)
        if not constrained:
            return j
        return j + lam_al * c + 0.5 * mu * c * c

    def gradient(z: np.ndarray, f0: float) -> np.ndarray:
        g = np.empty(z.size)
        for k in range(z.size):
            zk = z[k]
            step = options.fd_step * max(1.0, abs(zk))
            z[k] = zk + step
            g[k] = (objective(z) - f0) / step
            z[k] = zk
        return g

    z = init.values[idx].copy()
    total_iters = 0
    converged = False
    grad_inf = math.inf
    rounds = options.max_penalty_rounds if constrained else 1

    for _ in range(rounds):
        f0 = objective(z)
        prev_z = None
        prev_g = None
        step = 1.0
        inner_converged = False
        inner_iters = 0
        while inner_iters < options.max_iters:
            g = gradient(z, f0)
            grad_inf = float(np.max(np.abs(g))) if g.size else 0.0
            if grad_inf < options.tol:
                inner_converged = True
                break
            if prev_z is not None:
                dz = z - prev_z
                dg = g - prev_g
                denom = float(np.dot(dz, dg))
                if denom > 1e-300:
                    step = float(np.dot(dz, dz)) / denom
                step = min(max(step, 1e-12), 1e6)
            gg = float(np.dot(g, g))
            accepted = False
            s = step
            for _bt in range(options.max_backtracks):
                trial = z - s * g
                ft = objective(trial)
                if ft <= f0 - options.armijo * s * gg:
                    prev_z, prev_g = z, g
                    z, f0 = trial, ft
                    accepted = True
                    break
                s *= 0.5
            inner_iters += 1
            total_iters += 1
            if not accepted:
                break  # line search stalled at gradient noise level
        if not constrained:
            converged = inner_converged
            break
        full[idx] = z
        _, c = split(full)
        if abs(c) <= options.constraint_tol * max(1.0, abs(problem.constraint.target)) \
                and inner_converged:
            converged = True
            break
        lam_al += mu * c
        mu = min(mu * options.penalty_growth, 1e10)

    full[idx] = z
    j_final, c_final = split(full)
    result_y = GridFunction(problem.a, problem.b, full.copy())
    return SolveResult(
        y=result_y,
        converged=converged,
        iterations=total_iters,
        grad_inf_norm=grad_inf,
        objective=j_final,
        constraint_violation=abs(c_final) if constrained else 0.0,
        # sign convention: optimality reads grad J = lam * grad I
        multiplier=(-lam_al if constrained else None),
    )
