"""Acceptance suite: one test (or test group) per criterion, at the pinned
tolerances.  The conftest terminal hook prints one PASS/FAIL line per
criterion at the end of the run.
"""

import math

import numpy as np
import pytest

from fracvar.grid import GridFunction
from fracvar.kernels import KernelSpec, ParamSet
from fracvar.operators import (OperatorConfig, OperatorKind, frac_deriv_caputo,
                               frac_integral, operator_norm_check,
                               parts_defect_caputo, parts_defect_integral,
                               solve_volterra_first_kind)
from fracvar.physics import (OscillatorParams, delta_limit_report,
                             dissipation_rate, oscillator_energy,
                             simulate_caldirola_kanai, simulate_damped_oscillator)
from fracvar.problems import lagrangian_from_dict
from fracvar.specfun import gamma_fn
from fracvar.variational import (Constraint, LagrangianSpec, SolverOptions,
                                 VariationalProblem, constraint_value,
                                 el_residual, estimate_multiplier,
                                 isoperimetric_el_residual, natural_bc_residual,
                                 solve_direct)

TWO_PI = 2.0 * math.pi


def integral_config(p, q, kernel, a=0.0, b=1.0, order=0.5):
    return OperatorConfig(ParamSet(a, b, p, q), order, kernel)


def caputo_config(order, a=0.0, b=1.0, p=1.0, q=0.0):
    return OperatorConfig(ParamSet(a, b, p, q), order,
                          KernelSpec.rl_power(1.0 - order),
                          OperatorKind.CAPUTO_DERIVATIVE)


# ===========================================================================
# Criterion 1: the integral operator with the power kernel reproduces the
# closed-form fractional integrals of monomials, at second order.
# ===========================================================================

@pytest.mark.acceptance(label="1 RL specialization accuracy")
@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
@pytest.mark.parametrize("mu", [0, 1, 2])
def test_criterion_1_rl_specialization(alpha, mu):
    errors = {}
    for n in (128, 256, 512, 1024):
        t = np.linspace(0.0, 1.0, n + 1)
        f = GridFunction(0.0, 1.0, t ** mu if mu else np.ones(n + 1))
        out = frac_integral(integral_config(1, 0, KernelSpec.rl_power(alpha)), f)
        exact = gamma_fn(mu + 1.0) / gamma_fn(mu + 1.0 + alpha) * t ** (mu + alpha)
        errors[n] = float(np.max(np.abs(out.values - exact)))
    assert errors[1024] <= 1e-4
    if errors[1024] > 1e-12:  # otherwise quadrature is exact to rounding
        orders = [math.log2(errors[n] / errors[2 * n]) for n in (128, 256, 512)]
        assert min(orders) >= 1.8


# ===========================================================================
# Criterion 2: integration-by-parts defects over the kernel/weight/pair
# matrix decay at first order and sit below 1e-3 on the finest grid; the
# symmetric-weights same-function case is exact.
# ===========================================================================

IBP_KERNELS = {
    "identity": KernelSpec.identity(),
    "rl-power": KernelSpec.rl_power(0.5),
    "cosh-difference": KernelSpec.cosh_difference(1.0),
}
# fixed polynomial pairs; every g vanishes at both endpoints so the dual
# derivative-side integrand stays bounded
IBP_PAIRS = [
    (np.polynomial.Polynomial([0.0, 1.0]),
     np.polynomial.Polynomial([0.0, 1.0, -1.0])),
    (np.polynomial.Polynomial([0.0, 0.0, 1.0]),
     np.polynomial.Polynomial([0.0, 0.0, 1.0, -1.0])),
    (np.polynomial.Polynomial([0.5, 1.0, 0.0, -1.0]),
     np.polynomial.Polynomial([0.0, 0.5, 0.5, -1.0])),
]


@pytest.mark.acceptance(label="2 integration-by-parts defects")
@pytest.mark.parametrize("kname", sorted(IBP_KERNELS))
@pytest.mark.parametrize("weights", [(1, 0), (0, 1), (1, 1)])
@pytest.mark.parametrize("pair_id", [0, 1, 2])
def test_criterion_2_defect_matrix(kname, weights, pair_id):
    kernel = IBP_KERNELS[kname]
    fp, gp = IBP_PAIRS[pair_id]
    dk, db = {}, {}
    for n in (256, 512, 1024):
        cfg = integral_config(*weights, kernel)
        f = GridFunction.from_callable(fp, 0, 1, n, derivative=fp.deriv())
        g = GridFunction.from_callable(gp, 0, 1, n, derivative=gp.deriv())
        dk[n] = parts_defect_integral(cfg, f, g)
        db[n] = parts_defect_caputo(cfg, f, g)
    assert dk[1024] <= 1e-3 and db[1024] <= 1e-3
    for d in (dk, db):
        if d[1024] > 1e-13:
            order = 0.5 * (math.log2(d[256] / d[512]) + math.log2(d[512] / d[1024]))
            assert order >= 1.0


@pytest.mark.acceptance(label="2 integration-by-parts defects")
@pytest.mark.parametrize("kname", sorted(IBP_KERNELS))
def test_criterion_2_symmetric_weights_same_function(kname):
    cfg = integral_config(1, 1, IBP_KERNELS[kname])
    f = GridFunction.from_callable(lambda t: 1.0 + t * (1 - t), 0, 1, 1024,
                                   derivative=lambda t: 1.0 - 2.0 * t)
    assert parts_defect_integral(cfg, f, f) <= 1e-12


# ===========================================================================
# Criterion 3: hyperbolic-kernel worked case - forward image, first-kind
# inversion, and the optimality residual of its functional.
# ===========================================================================

@pytest.mark.acceptance(label="3 cosh-kernel worked case")
def test_criterion_3i_forward_image(cosh_volterra_case):
    case = cosh_volterra_case
    y = GridFunction.from_callable(case["y"], 0, 1, 1024, derivative=case["dy"])
    out = frac_integral(integral_config(1, 0, case["kernel"]), y)
    assert np.max(np.abs(out.values - case["rhs"](y.nodes))) <= 5e-5


@pytest.mark.acceptance(label="3 cosh-kernel worked case")
def test_criterion_3ii_first_kind_inversion(cosh_volterra_case):
    case = cosh_volterra_case
    rhs = GridFunction.from_callable(case["rhs"], 0, 1, 1024,
                                     derivative=case["drhs"])
    y = solve_volterra_first_kind(case["kernel"], rhs)
    assert np.max(np.abs(y.values - case["y"](y.nodes))) <= 1e-3


@pytest.mark.acceptance(label="3 cosh-kernel worked case")
def test_criterion_3iii_el_residual(cosh_volterra_case):
    case = cosh_volterra_case
    y = GridFunction.from_callable(case["y"], 0, 1, 1024, derivative=case["dy"])
    problem = VariationalProblem(
        a=0.0, b=1.0, outer_kernel=KernelSpec.rl_power(0.5),
        deriv_op=caputo_config(0.5),
        integral_op=integral_config(1, 0, case["kernel"]),
        lagrangian=lagrangian_from_dict({"name": "tw-circle"}),
        bc_right=float(y.values[-1]), bc_left=float(y.values[0]))
    report = el_residual(problem, y)
    assert report.sup_norm <= 1e-2


# ===========================================================================
# Criterion 4: Mittag-Leffler isoperimetric extremal.  The constraint target
# is the closed-form value the extremal attains, c^2 / Gamma(alpha + 1).
# ===========================================================================

def _ml_problem(data):
    c = data["c"]
    xi_star = c * c / gamma_fn(1.5)
    return VariationalProblem(
        a=0.0, b=1.0, outer_kernel=KernelSpec.rl_power(0.5),
        deriv_op=caputo_config(data["beta"]),
        integral_op=integral_config(1, 0, KernelSpec.rl_power(0.5)),
        lagrangian=lagrangian_from_dict({"name": "rate-arclength"}),
        bc_right=float(data["y"].values[-1]), bc_left=0.0,
        constraint=Constraint(lagrangian_from_dict({"name": "rate-squared"}),
                              xi_star))


@pytest.mark.acceptance(label="4 Mittag-Leffler extremal")
def test_criterion_4i_constant_total_rate(ml_extremal):
    data = ml_extremal
    y = data["y"]
    v = frac_deriv_caputo(caputo_config(data["beta"]), y).values
    rate = y.derivative_values + v
    band = slice(5, data["n"] - 4)
    assert np.max(np.abs(rate[band] - 0.75)) <= 5e-3


@pytest.mark.acceptance(label="4 Mittag-Leffler extremal")
def test_criterion_4ii_constraint_value(ml_extremal):
    problem = _ml_problem(ml_extremal)
    got = constraint_value(problem, ml_extremal["y"])
    assert abs(got - problem.constraint.target) <= 5e-3


@pytest.mark.acceptance(label="4 Mittag-Leffler extremal")
def test_criterion_4iii_multiplier(ml_extremal):
    problem = _ml_problem(ml_extremal)
    lam = estimate_multiplier(problem, ml_extremal["y"])
    assert abs(lam - 0.4) / 0.4 <= 1e-2


@pytest.mark.acceptance(label="4 Mittag-Leffler extremal")
def test_criterion_4iv_combined_residual(ml_extremal):
    problem = _ml_problem(ml_extremal)
    report = isoperimetric_el_residual(problem, ml_extremal["y"], 0.4)
    assert report.sup_norm <= 1e-2


# ===========================================================================
# Criterion 5: classical-limit suite through the direct solver.
# ===========================================================================

CLASSICAL_OPTS = SolverOptions(tol=1e-5, max_iters=6000)


def _classical_problem(bc_left, bc_right, constraint=None):
    return VariationalProblem(
        a=0.0, b=1.0, outer_kernel=KernelSpec.identity(),
        deriv_op=caputo_config(0.5),
        integral_op=integral_config(1, 0, KernelSpec.rl_power(0.5)),
        lagrangian=lagrangian_from_dict({"name": "u-squared"}),
        bc_right=bc_right, bc_left=bc_left, constraint=constraint)


@pytest.mark.acceptance(label="5 classical-limit suite")
def test_criterion_5i_dirichlet_line():
    rng = np.random.default_rng(20240517)
    t = np.linspace(0.0, 1.0, 65)
    init = t + 0.3 * np.sin(np.pi * t) * rng.uniform(0.5, 1.0, t.size)
    init[0], init[-1] = 0.0, 1.0
    res = solve_direct(_classical_problem(0.0, 1.0),
                       GridFunction(0, 1, init), CLASSICAL_OPTS)
    assert res.converged
    assert np.max(np.abs(res.y.values - t)) <= 1e-4


@pytest.mark.acceptance(label="5 classical-limit suite")
def test_criterion_5ii_free_left():
    problem = _classical_problem(None, 1.0)
    t = np.linspace(0.0, 1.0, 65)
    res = solve_direct(problem, GridFunction(0, 1, 0.4 + 0.6 * t ** 2),
                       CLASSICAL_OPTS)
    assert res.converged
    assert np.max(np.abs(res.y.values - 1.0)) <= 1e-3
    assert natural_bc_residual(problem, res.y) <= 1e-3


@pytest.mark.acceptance(label="5 classical-limit suite")
def test_criterion_5iii_isoperimetric():
    xi = 0.1
    problem = _classical_problem(
        0.0, 0.0, Constraint(lagrangian_from_dict({"name": "y-linear"}), xi))
    t = np.linspace(0.0, 1.0, 65)
    init = 0.05 * np.sin(2.0 * np.pi * t)
    init[0] = init[-1] = 0.0
    res = solve_direct(problem, GridFunction(0, 1, init), CLASSICAL_OPTS)
    assert res.converged
    assert np.max(np.abs(res.y.values - 6 * xi * t * (1 - t))) <= 1e-3
    lam = estimate_multiplier(problem, res.y)
    # sign convention: combined integrand F - lam G gives lam = +24 xi
    assert abs(lam - 24 * xi) / (24 * xi) <= 1e-3


# ===========================================================================
# Criterion 6: dissipative-rate limits and the oscillator applications.
# ===========================================================================

@pytest.mark.acceptance(label="6 dissipative dynamics suite")
def test_criterion_6i_delta_limits():
    rep0 = delta_limit_report("katugampola-rho-zero", 0.4, 1.0)
    assert rep0.all_passed
    assert abs(dissipation_rate(KernelSpec.katugampola(0.4, 1e-9), 1.0, 1e-6)
               - 0.6) <= 1e-6
    rep_pos = delta_limit_report("katugampola-rho-positive", 0.4, 1.0, rho=2.0)
    assert rep_pos.all_passed
    assert dissipation_rate(KernelSpec.katugampola(0.4, 2.0), 1.0, 1e-4) <= 1e-6
    rep_pc = delta_limit_report("power-cosh", 0.3, 1.0)
    assert rep_pc.all_passed
    late = [c for c in rep_pc.checks if "alpha-1" in c.name][0]
    assert abs(late.value - (-0.7)) <= 5e-2


@pytest.mark.acceptance(label="6 dissipative dynamics suite")
def test_criterion_6ii_exponential_cancellation():
    al = 0.3
    p = OscillatorParams(omega=TWO_PI, b=1.0, alpha=al, gamma_ck=al)
    traj = simulate_caldirola_kanai(p, KernelSpec.exponential(al), 4096)
    energy = oscillator_energy(p, traj)
    assert np.max(np.abs(energy - energy[0])) / energy[0] <= 1e-6


@pytest.mark.acceptance(label="6 dissipative dynamics suite")
def test_criterion_6iii_characteristic_roots():
    al, om = 0.1, TWO_PI
    p = OscillatorParams(omega=om, b=1.0, alpha=al, y0=1.0, v0=0.0)
    traj = simulate_damped_oscillator(p, lambda y: om * om * y, 4096)
    om_d = math.sqrt(om * om - al * al / 4.0)
    t = traj.nodes
    closed = np.exp(al * t / 2.0) * (np.cos(om_d * t)
                                     - al / (2.0 * om_d) * np.sin(om_d * t))
    assert np.max(np.abs(traj.values - closed)) <= 1e-5


# ===========================================================================
# Criterion 7: the generic residual agrees with independently coded
# specialised formulas to 1e-10 on shared interior nodes.
# ===========================================================================

def _indep_fd(vals, h):
    out = np.empty_like(vals)
    for i in range(1, vals.size - 1):
        out[i] = (vals[i + 1] - vals[i - 1]) / (2.0 * h)
    out[0] = (4.0 * (vals[1] - vals[0]) - (vals[2] - vals[0])) / (2.0 * h)
    out[-1] = (4.0 * (vals[-1] - vals[-2]) - (vals[-1] - vals[-3])) / (2.0 * h)
    return out


def _indep_right_rl_integral(g, t, mu):
    n = t.size - 1
    h = t[1] - t[0]
    gfac = gamma_fn(mu)
    out = np.zeros(n + 1)
    for i in range(n + 1):
        acc = 0.0
        for j in range(i, n):
            lo, hi = t[j], t[j + 1]
            m0 = ((hi - t[i]) ** mu - (lo - t[i]) ** mu) / (mu * gfac)
            m1 = t[i] * m0 + ((hi - t[i]) ** (mu + 1) - (lo - t[i]) ** (mu + 1)) \
                / ((mu + 1) * gfac)
            acc += g[j] * m0 + (g[j + 1] - g[j]) / h * (m1 - lo * m0)
        out[i] = acc
    return out


def _indep_right_rl_derivative(g, t, order):
    integral = _indep_right_rl_integral(g, t, 1.0 - order)
    d = _indep_fd(integral, t[1] - t[0])
    d[-1] = 2.0 * d[-2] - d[-3]  # singular endpoint, extrapolated
    return -d


@pytest.mark.acceptance(label="7 cross-path residual consistency")
def test_criterion_7_weighted_caputo_configuration():
    # power-weight functional of F(t, y, u, v): four-term specialised formula
    n = 256
    alpha, beta = 0.5, 0.4
    t = np.linspace(0.0, 1.0, n + 1)
    h = t[1] - t[0]
    y = GridFunction(0, 1, t ** 2 * (1 - t) + 0.3 * t,
                     2 * t - 3 * t ** 2 + 0.3)
    lag = LagrangianSpec(
        F=lambda tt, yy, uu, vv, ww: tt * vv + yy * uu + vv * vv,
        d_y=lambda tt, yy, uu, vv, ww: np.asarray(uu, dtype=float) + 0.0 * tt,
        d_u=lambda tt, yy, uu, vv, ww: np.asarray(yy, dtype=float) + 0.0 * tt,
        d_v=lambda tt, yy, uu, vv, ww: tt + 2.0 * vv,
        d_w=lambda tt, yy, uu, vv, ww: np.zeros_like(np.asarray(tt, dtype=float)),
        uses_frac_derivative=True, uses_frac_integral=False, name="mixed")
    problem = VariationalProblem(
        a=0.0, b=1.0, outer_kernel=KernelSpec.rl_power(alpha),
        deriv_op=caputo_config(beta),
        integral_op=integral_config(1, 0, KernelSpec.rl_power(0.5)),
        lagrangian=lag, bc_right=float(y.values[-1]), bc_left=float(y.values[0]))
    generic = el_residual(problem, y).grid.values

    v = frac_deriv_caputo(caputo_config(beta), y).values
    u = y.derivative_values
    weight = np.empty(n + 1)
    weight[:-1] = (1.0 - t[:-1]) ** (alpha - 1.0) / gamma_fn(alpha)
    weight[-1] = 2.0 * weight[-2] - weight[-3]
    d2 = u
    d3 = y.values
    d4 = t + 2.0 * v
    specialised = d2 * weight - _indep_fd(d3 * weight, h) \
        + _indep_right_rl_derivative(weight * d4, t, beta)
    band = slice(5, n - 4)
    assert np.max(np.abs(specialised[band] - generic[band])) <= 1e-10


@pytest.mark.acceptance(label="7 cross-path residual consistency")
def test_criterion_7_plain_weight_full_configuration():
    # flat-weight functional of F(t, y, u, v, w): five-term specialised formula
    n = 256
    beta, gam = 0.4, 0.6
    t = np.linspace(0.0, 1.0, n + 1)
    h = t[1] - t[0]
    y = GridFunction(0, 1, t ** 2 * (1 - t) + 0.3 * t,
                     2 * t - 3 * t ** 2 + 0.3)
    lag = LagrangianSpec(
        F=lambda tt, yy, uu, vv, ww: yy * yy + tt * uu + uu * vv
        + 0.5 * ww * ww + tt * ww,
        d_y=lambda tt, yy, uu, vv, ww: 2.0 * np.asarray(yy, dtype=float) + 0.0 * tt,
        d_u=lambda tt, yy, uu, vv, ww: tt + vv,
        d_v=lambda tt, yy, uu, vv, ww: np.asarray(uu, dtype=float) + 0.0 * tt,
        d_w=lambda tt, yy, uu, vv, ww: np.asarray(ww, dtype=float) + tt,
        uses_frac_derivative=True, uses_frac_integral=True, name="full")
    problem = VariationalProblem(
        a=0.0, b=1.0, outer_kernel=KernelSpec.identity(),
        deriv_op=caputo_config(beta),
        integral_op=OperatorConfig(ParamSet(0, 1, 1, 0), gam,
                                   KernelSpec.rl_power(gam)),
        lagrangian=lag, bc_right=float(y.values[-1]), bc_left=float(y.values[0]))
    generic = el_residual(problem, y).grid.values

    v = frac_deriv_caputo(caputo_config(beta), y).values
    w = frac_integral(OperatorConfig(ParamSet(0, 1, 1, 0), gam,
                                     KernelSpec.rl_power(gam)), y).values
    u = y.derivative_values
    d2 = 2.0 * y.values
    d3 = t + v
    d4 = u.copy()
    d5 = w + t
    specialised = d2 - _indep_fd(d3, h) \
        + _indep_right_rl_derivative(d4, t, beta) \
        + _indep_right_rl_integral(d5, t, gam)
    band = slice(1, n)
    assert np.max(np.abs(specialised[band] - generic[band])) <= 1e-10


# ===========================================================================
# Criterion 8: empirical L1 operator ratios never exceed the
# (|p| + |q|) ||k||_1 bound, for every built-in difference kernel.
# ===========================================================================

NORM_KERNELS = {
    "identity": KernelSpec.identity(),
    "rl-power": KernelSpec.rl_power(0.5),
    "exponential": KernelSpec.exponential(1.0),
    "cosh-difference": KernelSpec.cosh_difference(1.0),
    "tabulated": KernelSpec.tabulated(np.linspace(0, 1, 33),
                                      np.cosh(np.linspace(0, 1, 33))),
}


@pytest.mark.acceptance(label="8 norm-bound property")
@pytest.mark.parametrize("kname", sorted(NORM_KERNELS))
@pytest.mark.parametrize("weights", [(1, 0), (0, 1), (1, 1)])
def test_criterion_8_norm_bound(kname, weights):
    ratio, bound = operator_norm_check(
        integral_config(*weights, NORM_KERNELS[kname]), trials=200)
    assert ratio <= bound
