"""Shared fixtures and the acceptance-criteria summary printer."""

import math

import numpy as np
import pytest

from fracvar.grid import GridFunction
from fracvar.kernels import KernelSpec
from fracvar.specfun import MLParams, mittag_leffler

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(label): marks a test as part of an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and rep.when == "call":
        label = marker.kwargs.get("label") or marker.args[0]
        _ACCEPTANCE[label] = _ACCEPTANCE.get(label, True) and rep.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE, key=lambda s: (len(s.split()[0]), s)):
        status = "PASS" if _ACCEPTANCE[label] else "FAIL"
        terminalreporter.write_line(f"{status}  criterion {label}")


# ---------------------------------------------------------------------------
# Shared problem data.
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def ml_extremal():
    """The isoperimetric extremal built from the Mittag-Leffler series:
    xi = 0.2, fractional order 1/2, constant total rate c = 0.75."""
    xi, beta = 0.2, 0.5
    c = math.sqrt(1.0 - 16.0 * xi * xi) / (4.0 * xi)
    mu = 1.0 - beta
    e1 = MLParams(mu, 1.0)
    e2 = MLParams(mu, 2.0)
    n = 1024
    t = np.linspace(0.0, 1.0, n + 1)
    vals = np.array([c * ti * mittag_leffler(e2, -(ti ** mu)) if ti > 0.0 else 0.0
                     for ti in t])
    dvals = np.array([c * mittag_leffler(e1, -(ti ** mu)) for ti in t])
    return {
        "xi": xi, "beta": beta, "c": c, "n": n,
        "y": GridFunction(0.0, 1.0, vals, dvals),
    }


@pytest.fixture(scope="session")
def cosh_volterra_case():
    """Closed-form data for the hyperbolic-kernel first-kind equation:
    the image of y under the kernel cosh(t - tau) is t / sqrt(1 + t^2)."""
    rate = 1.0

    def y_exact(t):
        return (1.0 + t ** 2) ** -1.5 + rate ** 2 * (1.0 - np.sqrt(1.0 + t ** 2))

    def dy_exact(t):
        return -3.0 * t * (1.0 + t ** 2) ** -2.5 - rate ** 2 * t / np.sqrt(1.0 + t ** 2)

    def rhs_exact(t):
        return t / np.sqrt(1.0 + t ** 2)

    def drhs_exact(t):
        return (1.0 + t ** 2) ** -1.5

    return {"rate": rate, "y": y_exact, "dy": dy_exact,
            "rhs": rhs_exact, "drhs": drhs_exact,
            "kernel": KernelSpec.cosh_difference(rate)}
