import math

import numpy as np
import pytest

from fracvar.errors import DomainError, UsageError
from fracvar.kernels import (KernelSpec, ParamSet, eval_kernel, eval_kernel_dt,
                             kernel_l1_norm, kernel_moments)
from fracvar.specfun import gamma_fn

DIFFERENCE_SPECS = [
    KernelSpec.identity(),
    KernelSpec.rl_power(0.5),
    KernelSpec.exponential(0.8),
    KernelSpec.cosh_difference(1.3),
    KernelSpec.tabulated(np.linspace(0, 2, 41), np.exp(-np.linspace(0, 2, 41))),
]


def test_param_set_requires_order():
    with pytest.raises(UsageError):
        ParamSet(1.0, 0.0, 1.0, 0.0)


def test_param_set_dual_involution():
    ps = ParamSet(0.0, 2.0, 0.3, -0.7)
    dual = ps.dual()
    assert (dual.p, dual.q) == (ps.q, ps.p)
    assert dual.dual() == ps


def test_identity_kernel_everywhere_one():
    spec = KernelSpec.identity()
    for x, t in ((0.0, 0.0), (0.3, 0.9), (1.0, 0.2)):
        assert eval_kernel(spec, x, t) == 1.0
        assert eval_kernel_dt(spec, x, t) == 0.0


def test_rl_power_value():
    spec = KernelSpec.rl_power(0.5)
    assert eval_kernel(spec, 1.0, 0.0) == pytest.approx(1.0 / math.sqrt(math.pi),
                                                        rel=1e-13)


def test_cosh_difference_value_and_zero_lag():
    spec = KernelSpec.cosh_difference(1.0)
    assert eval_kernel(spec, 2.0, 1.0) == pytest.approx(math.cosh(1.0), rel=1e-14)
    assert eval_kernel(spec, 0.7, 0.7) == 1.0


def test_singular_point_rejected():
    for spec in (KernelSpec.rl_power(0.4), KernelSpec.power_cosh(0.4),
                 KernelSpec.katugampola(0.4, 1.0)):
        with pytest.raises(DomainError):
            eval_kernel(spec, 0.5, 0.5)
        with pytest.raises(DomainError):
            eval_kernel_dt(spec, 0.5, 0.5)


def test_difference_kernels_shift_invariant():
    for spec in DIFFERENCE_SPECS:
        base = eval_kernel(spec, 0.9, 0.2)
        for shift in (0.05, 0.31, 0.6):
            assert eval_kernel(spec, 0.9 + shift, 0.2 + shift) == \
                pytest.approx(base, rel=1e-12)


@pytest.mark.parametrize("spec, x, t", [
    (KernelSpec.exponential(0.8), 1.0, 0.4),
    (KernelSpec.cosh_difference(1.3), 1.0, 0.4),
    (KernelSpec.rl_power(0.5), 1.0, 0.4),
    (KernelSpec.power_cosh(0.6), 1.0, 0.4),
    (KernelSpec.katugampola(0.6, 1.5), 1.0, 0.4),
])
def test_dt_matches_central_difference(spec, x, t):
    exact = eval_kernel_dt(spec, x, t)
    errs = []
    for h in (1e-4, 5e-5):
        fd = (eval_kernel(spec, x, t + h) - eval_kernel(spec, x, t - h)) / (2 * h)
        errs.append(abs(fd - exact))
    assert errs[0] <= 1e-6 * max(1.0, abs(exact))
    # second-order stencil: quartering the error when halving the step
    assert errs[1] <= 0.3 * errs[0] + 1e-14


def test_exponential_dt_closed_form():
    # weight e^(alpha (x - t)) has d/dt = -alpha e^(alpha (x - t))
    spec = KernelSpec.exponential(0.7)
    for t in (0.1, 0.5, 0.9):
        expected = -0.7 * math.exp(0.7 * (1.0 - t))
        assert eval_kernel_dt(spec, 1.0, t) == pytest.approx(expected, rel=1e-14)


def test_katugampola_reduces_to_rl_power_for_small_rho():
    kat = KernelSpec.katugampola(0.4, 1e-12)
    rl = KernelSpec.rl_power(0.4)
    for t in (0.1, 0.45, 0.8):
        assert eval_kernel(kat, 0.9, t) == pytest.approx(eval_kernel(rl, 0.9, t),
                                                         rel=1e-9)


def test_moments_identity():
    m0, m1 = kernel_moments(KernelSpec.identity(), 0.7, 0.0, 1.0)
    assert m0 == pytest.approx(1.0, abs=1e-15)
    assert m1 == pytest.approx(0.5, abs=1e-15)


def test_moments_rl_power():
    m0, _ = kernel_moments(KernelSpec.rl_power(0.5), 1.0, 0.0, 1.0)
    assert m0 == pytest.approx(2.0 / math.sqrt(math.pi), rel=1e-13)


def test_moments_exponential():
    m0, _ = kernel_moments(KernelSpec.exponential(1.0), 1.0, 0.0, 1.0)
    assert m0 == pytest.approx(math.e - 1.0, rel=1e-13)


@pytest.mark.parametrize("spec", [
    KernelSpec.identity(),
    KernelSpec.rl_power(0.35),
    KernelSpec.exponential(-0.6),
    KernelSpec.cosh_difference(0.9),
])
def test_moment_additivity_closed_forms(spec):
    x, lo, mid, hi = 1.0, 0.1, 0.55, 1.0
    a0, a1 = kernel_moments(spec, x, lo, mid)
    b0, b1 = kernel_moments(spec, x, mid, hi)
    c0, c1 = kernel_moments(spec, x, lo, hi)
    assert a0 + b0 == pytest.approx(c0, rel=1e-12)
    assert a1 + b1 == pytest.approx(c1, rel=1e-12)


@pytest.mark.parametrize("spec, power", [
    (KernelSpec.power_cosh(0.5), 6),
    (KernelSpec.katugampola(0.6, 1.5), 5),
])
def test_singular_moments_match_substitution_oracle(spec, power):
    # oracle: leading-order closed form on the sliver next to the singular
    # point, then the substitution t = x - u^power (which turns the endpoint
    # singularity into the smooth factor u^2) integrated by Gauss-Legendre
    x, lo = 1.0, 0.3
    alpha = spec.alpha
    m0, m1 = kernel_moments(spec, x, lo, x)
    if spec.family == "power-cosh":
        front, lead = 1.0, math.sinh(x)
    else:
        r1 = spec.rho + 1.0
        front = r1 ** (1.0 - alpha) / gamma_fn(alpha)
        lead = r1 * x ** spec.rho
    s0 = 1e-10
    ref0 = front * lead ** (alpha - 1.0) * s0 ** alpha / alpha
    ref1 = x * ref0
    nodes, weights = np.polynomial.legendre.leggauss(60)
    edges = np.linspace(s0 ** (1.0 / power), (x - lo) ** (1.0 / power), 17)
    for a, b in zip(edges[:-1], edges[1:]):
        u = 0.5 * (a + b) + 0.5 * (b - a) * nodes
        t = x - u ** power
        vals = power * u ** (power - 1) * np.array(
            [eval_kernel(spec, x, tt) for tt in t])
        ref0 += 0.5 * (b - a) * float(np.dot(weights, vals))
        ref1 += 0.5 * (b - a) * float(np.dot(weights, vals * t))
    assert m0 == pytest.approx(ref0, rel=1e-9)
    assert m1 == pytest.approx(ref1, rel=1e-9)


def test_moments_reject_bad_range():
    with pytest.raises(UsageError):
        kernel_moments(KernelSpec.identity(), 0.5, 0.8, 0.2)
    with pytest.raises(DomainError):
        kernel_moments(KernelSpec.rl_power(0.5), 0.5, 0.0, 0.9)


def test_tabulated_matches_sampled_function():
    s = np.linspace(0, 1, 101)
    spec = KernelSpec.tabulated(s, np.cosh(s))
    dense = KernelSpec.cosh_difference(1.0)
    for t in (0.0, 0.25, 0.77):
        assert eval_kernel(spec, 1.0, 1.0 - t) == pytest.approx(math.cosh(t), abs=2e-5)
    m0_tab, m1_tab = kernel_moments(spec, 1.0, 0.2, 0.9)
    m0_ref, m1_ref = kernel_moments(dense, 1.0, 0.2, 0.9)
    assert m0_tab == pytest.approx(m0_ref, rel=1e-4)
    assert m1_tab == pytest.approx(m1_ref, rel=1e-4)


def test_tabulated_requires_zero_start():
    with pytest.raises(UsageError):
        KernelSpec.tabulated([0.5, 1.0], [1.0, 1.0])


def test_l1_norms():
    assert kernel_l1_norm(KernelSpec.identity(), 1.0) == 1.0
    assert kernel_l1_norm(KernelSpec.rl_power(0.5), 1.0) == \
        pytest.approx(1.0 / gamma_fn(1.5), rel=1e-13)
    assert kernel_l1_norm(KernelSpec.exponential(1.0), 1.0) == \
        pytest.approx(math.e - 1.0, rel=1e-13)
    assert kernel_l1_norm(KernelSpec.cosh_difference(2.0), 1.0) == \
        pytest.approx(math.sinh(2.0) / 2.0, rel=1e-13)


def test_family_validation():
    with pytest.raises(UsageError):
        KernelSpec.rl_power(1.2)
    with pytest.raises(UsageError):
        KernelSpec.katugampola(0.5, -1.5)
    with pytest.raises(UsageError):
        KernelSpec("no-such-family")


def test_backward_moments_diverge_at_origin_for_low_orders():
    from fracvar.kernels import _moments_backward_arrays
    for spec in (KernelSpec.katugampola(0.6, 1.5),   # profile t^-1
                 KernelSpec.katugampola(0.5, 2.0),   # profile t^-1.5
                 KernelSpec.power_cosh(0.4)):        # profile t^-1.2
        with pytest.raises(DomainError):
            _moments_backward_arrays(spec, 0.0, np.array([0.0]), np.array([0.5]))


def test_backward_moments_at_origin_katugampola_closed_form():
    # k(t, 0) is the pure power C t^((rho+1)(alpha-1))
    from fracvar.kernels import _moments_backward_arrays
    spec = KernelSpec.katugampola(0.8, 1.0)
    m0, m1 = _moments_backward_arrays(spec, 0.0, np.array([0.0]), np.array([1.0]))
    coef = 2.0 ** 0.2 / gamma_fn(0.8)
    assert m0[0] == pytest.approx(coef / 0.6, rel=1e-13)
    assert m1[0] == pytest.approx(coef / 1.6, rel=1e-13)


def test_backward_moments_at_origin_power_cosh_oracle():
    # oracle: substitute t = u^2, leaving the integrable factor u^(2c+1)
    from fracvar.kernels import _moments_backward_arrays, adaptive_quad
    spec = KernelSpec.power_cosh(0.8)
    m0, m1 = _moments_backward_arrays(spec, 0.0, np.array([0.0]), np.array([1.0]))

    def psi(t):
        # (cosh t - 1)/t^2 loses all precision below t ~ 1e-8; switch to the
        # two-term Taylor expansion well above that zone
        t = np.asarray(t, dtype=float)
        safe = np.where(t < 1e-4, 1.0, t)
        return np.where(t < 1e-4, (0.5 * (1.0 + t * t / 12.0)) ** -0.2,
                        ((np.cosh(safe) - 1.0) / safe ** 2) ** -0.2)

    ref0 = adaptive_quad(lambda u: 2.0 * psi(u * u) * u ** 0.2, 0.0, 1.0,
                         tol=1e-13, max_depth=40)
    ref1 = adaptive_quad(lambda u: 2.0 * psi(u * u) * u ** 2.2, 0.0, 1.0,
                         tol=1e-13, max_depth=40)
    assert m0[0] == pytest.approx(ref0, rel=1e-8)
    assert m1[0] == pytest.approx(ref1, rel=1e-9)


def test_katugampola_dt_guard_at_zero_for_negative_rho():
    spec = KernelSpec.katugampola(0.5, -0.5)
    with pytest.raises(DomainError):
        eval_kernel_dt(spec, 1.0, 0.0)
    # positive rho is fine: the derivative vanishes at t = 0
    assert eval_kernel_dt(KernelSpec.katugampola(0.5, 1.0), 1.0, 0.0) == 0.0
