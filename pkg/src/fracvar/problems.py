"""Strict JSON problem files: kernels, Lagrangians, grids, full problems.

Unknown keys are rejected everywhere; a problem file either matches the
documented schema exactly or loading fails with ``SchemaError``.
"""

from __future__ import annotations

import json
import math
from typing import Optional, Tuple

import numpy as np

from .errors import SchemaError
from .grid import GridFunction
from .kernels import KernelSpec, ParamSet
from .operators import OperatorConfig, OperatorKind
from .variational import Constraint, LagrangianSpec, VariationalProblem


def _require_keys(obj: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise SchemaError(f"{where}: unrecognized field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise SchemaError(f"{where}: missing field(s) {sorted(missing)}")


def _number(obj: dict, key: str, where: str) -> float:
    val = obj[key]
    if not isinstance(val, (int, float)) or isinstance(val, bool) or not math.isfinite(val):
        raise SchemaError(f"{where}.{key}: expected a finite number, got {val!r}")
    return float(val)


# ---------------------------------------------------------------------------
# Kernels.
# ---------------------------------------------------------------------------

def kernel_from_dict(obj: dict, where: str = "kernel") -> KernelSpec:
    _require_keys(obj, {"family", "alpha", "beta", "rho", "s", "k"}, {"family"}, where)
    family = obj.get("family")
    try:
        if family == "identity":
            _require_keys(obj, {"family"}, {"family"}, where)
            return KernelSpec.identity()
        if family == "rl-power":
            _require_keys(obj, {"family", "alpha"}, {"family", "alpha"}, where)
            return KernelSpec.rl_power(_number(obj, "alpha", where))
        if family == "exponential":
            _require_keys(obj, {"family", "alpha"}, {"family", "alpha"}, where)
            return KernelSpec.exponential(_number(obj, "alpha", where))
        if family == "cosh-difference":
            _require_keys(obj, {"family", "beta"}, {"family", "beta"}, where)
            return KernelSpec.cosh_difference(_number(obj, "beta", where))
        if family == "power-cosh":
            _require_keys(obj, {"family", "alpha"}, {"family", "alpha"}, where)
            return KernelSpec.power_cosh(_number(obj, "alpha", where))
        if family == "katugampola":
            _require_keys(obj, {"family", "alpha", "rho"}, {"family", "alpha", "rho"}, where)
            return KernelSpec.katugampola(_number(obj, "alpha", where),
                                          _number(obj, "rho", where))
        if family == "tabulated":
            _require_keys(obj, {"family", "s", "k"}, {"family", "s", "k"}, where)
            return KernelSpec.tabulated(obj["s"], obj["k"])
    except SchemaError:
        raise
    except Exception as exc:
        raise SchemaError(f"{where}: {exc}") from exc
    raise SchemaError(f"{where}.family: unknown kernel family {family!r}")


# ---------------------------------------------------------------------------
# Lagrangians: named builtins plus an exact-polynomial form.
# ---------------------------------------------------------------------------

def _zero(t, y, u, v, w):
    return np.zeros_like(np.asarray(t, dtype=float))


def _one(t, y, u, v, w):
    return np.ones_like(np.asarray(t, dtype=float))


def _builtin_u_squared() -> LagrangianSpec:
    return LagrangianSpec(
        F=lambda t, y, u, v, w: u * u,
        d_y=_zero, d_u=lambda t, y, u, v, w: 2.0 * u, d_v=_zero, d_w=_zero,
        uses_frac_derivative=False, uses_frac_integral=False, name="u-squared")


def _builtin_y_linear() -> LagrangianSpec:
    return LagrangianSpec(
        F=lambda t, y, u, v, w: np.asarray(y, dtype=float) + np.zeros_like(np.asarray(t, dtype=float)),
        d_y=_one, d_u=_zero, d_v=_zero, d_w=_zero,
        uses_frac_derivative=False, uses_frac_integral=False, name="y-linear")


def _builtin_w_linear() -> LagrangianSpec:
    return LagrangianSpec(
        F=lambda t, y, u, v, w: np.asarray(w, dtype=float) + np.zeros_like(np.asarray(t, dtype=float)),
        d_y=_zero, d_u=_zero, d_v=_zero, d_w=_one,
        uses_frac_derivative=False, uses_frac_integral=True, name="w-linear")


def _builtin_tw_circle() -> LagrangianSpec:
    # t*w + sqrt(1 - w^2); stationary where w matches the field t/sqrt(1+t^2)
    return LagrangianSpec(
        F=lambda t, y, u, v, w: t * w + np.sqrt(1.0 - w * w),
        d_y=_zero, d_u=_zero, d_v=_zero,
        d_w=lambda t, y, u, v, w: t - w / np.sqrt(1.0 - w * w),
        uses_frac_derivative=False, uses_frac_integral=True, name="tw-circle")


def _builtin_rate_arclength() -> LagrangianSpec:
    def root(u, v):
        return np.sqrt(1.0 + (u + v) ** 2)
    return LagrangianSpec(
        F=lambda t, y, u, v, w: root(u, v),
        d_y=_zero,
        d_u=lambda t, y, u, v, w: (u + v) / root(u, v),
        d_v=lambda t, y, u, v, w: (u + v) / root(u, v),
        d_w=_zero,
        uses_frac_derivative=True, uses_frac_integral=False, name="rate-arclength")


def _builtin_rate_squared() -> LagrangianSpec:
    return LagrangianSpec(
        F=lambda t, y, u, v, w: (u + v) ** 2,
        d_y=_zero,
        d_u=lambda t, y, u, v, w: 2.0 * (u + v),
        d_v=lambda t, y, u, v, w: 2.0 * (u + v),
        d_w=_zero,
        uses_frac_derivative=True, uses_frac_integral=False, name="rate-squared")


def oscillator_action_lagrangian(omega: float, gamma: float = 0.0,
                                 mass0: float = 1.0) -> LagrangianSpec:
    """m0 e^(gamma t) (u^2/2 - omega^2 y^2/2): growing-mass oscillator action."""
    om2 = omega * omega

    def mass(t):
        return mass0 * np.exp(gamma * np.asarray(t, dtype=float))

    return LagrangianSpec(
        F=lambda t, y, u, v, w: mass(t) * (0.5 * u * u - 0.5 * om2 * y * y),
        d_y=lambda t, y, u, v, w: -mass(t) * om2 * y,
        d_u=lambda t, y, u, v, w: mass(t) * u,
        d_v=_zero, d_w=_zero,
        uses_frac_derivative=False, uses_frac_integral=False,
        name="oscillator-action")


_BUILTIN_LAGRANGIANS = {
    "u-squared": _builtin_u_squared,
    "y-linear": _builtin_y_linear,
    "w-linear": _builtin_w_linear,
    "tw-circle": _builtin_tw_circle,
    "rate-arclength": _builtin_rate_arclength,
    "rate-squared": _builtin_rate_squared,
}


def polynomial_lagrangian(terms) -> LagrangianSpec:
    """sum_i c_i t^a y^b u^c v^d w^e with exact partial derivatives."""
    parsed = []
    for i, term in enumerate(terms):
        _require_keys(term, {"coef", "powers"}, {"coef", "powers"},
                      f"lagrangian.polynomial[{i}]")
        powers = term["powers"]
        if (not isinstance(powers, list) or len(powers) != 5
                or any(not isinstance(p, int) or p < 0 for p in powers)):
            raise SchemaError(
                f"lagrangian.polynomial[{i}].powers: expected 5 nonnegative integers")
        parsed.append((float(term["coef"]), tuple(powers)))

    def monomial(args, powers):
        out = np.ones_like(np.asarray(args[0], dtype=float))
        for base, p in zip(args, powers):
            if p:
                out = out * np.asarray(base, dtype=float) ** p
        return out

    def F(t, y, u, v, w):
        args = (t, y, u, v, w)
        total = np.zeros_like(np.asarray(t, dtype=float))
        for c, powers in parsed:
            total = total + c * monomial(args, powers)
        return total

    def partial(k):
        def dF(t, y, u, v, w):
            args = (t, y, u, v, w)
            total = np.zeros_like(np.asarray(t, dtype=float))
            for c, powers in parsed:
                if powers[k] == 0:
                    continue
                dp = list(powers)
                dp[k] -= 1
                total = total + c * powers[k] * monomial(args, dp)
            return total
        return dF

    uses_v = any(p[3] for _, p in parsed)
    uses_w = any(p[4] for _, p in parsed)
    return LagrangianSpec(F=F, d_y=partial(1), d_u=partial(2), d_v=partial(3),
                          d_w=partial(4), uses_frac_derivative=uses_v,
                          uses_frac_integral=uses_w, name="polynomial")


def lagrangian_from_dict(obj: dict, where: str = "lagrangian") -> LagrangianSpec:
    _require_keys(obj, {"name", "polynomial", "omega", "gamma", "mass0"}, set(), where)
    if ("name" in obj) == ("polynomial" in obj):
        raise SchemaError(f"{where}: give exactly one of 'name' or 'polynomial'")
    if "polynomial" in obj:
        _require_keys(obj, {"polynomial"}, {"polynomial"}, where)
        return polynomial_lagrangian(obj["polynomial"])
    name = obj["name"]
    if name == "oscillator-action":
        _require_keys(obj, {"name", "omega", "gamma", "mass0"}, {"name", "omega"}, where)
        return oscillator_action_lagrangian(
            _number(obj, "omega", where),
            _number(obj, "gamma", where) if "gamma" in obj else 0.0,
            _number(obj, "mass0", where) if "mass0" in obj else 1.0)
    _require_keys(obj, {"name"}, {"name"}, where)
    if name not in _BUILTIN_LAGRANGIANS:
        raise SchemaError(
            f"{where}.name: unknown Lagrangian {name!r}; builtins: "
            f"{sorted(_BUILTIN_LAGRANGIANS) + ['oscillator-action']}")
    return _BUILTIN_LAGRANGIANS[name]()


# ---------------------------------------------------------------------------
# Named grid functions.
# ---------------------------------------------------------------------------

_NAMED_FUNCTIONS = {
    "one": (lambda t: np.ones_like(t), lambda t: np.zeros_like(t)),
    "t": (lambda t: t, lambda t: np.ones_like(t)),
    "t-squared": (lambda t: t * t, lambda t: 2.0 * t),
    "t-cubed": (lambda t: t ** 3, lambda t: 3.0 * t * t),
    "sin-pi": (lambda t: np.sin(np.pi * t), lambda t: np.pi * np.cos(np.pi * t)),
    "cos-pi": (lambda t: np.cos(np.pi * t), lambda t: -np.pi * np.sin(np.pi * t)),
}


def grid_function_from_dict(obj: dict, a: float, b: float, n: int,
                            where: str = "f") -> GridFunction:
    _require_keys(obj, {"name", "poly", "csv", "values", "derivative_values"},
                  set(), where)
    sources = [k for k in ("name", "poly", "csv", "values") if k in obj]
    if len(sources) != 1:
        raise SchemaError(
            f"{where}: give exactly one of 'name', 'poly', 'csv', 'values'")
    if "name" in obj:
        _require_keys(obj, {"name"}, {"name"}, where)
        if obj["name"] not in _NAMED_FUNCTIONS:
            raise SchemaError(f"{where}.name: unknown function {obj['name']!r}; "
                              f"choose from {sorted(_NAMED_FUNCTIONS)}")
        fn, dfn = _NAMED_FUNCTIONS[obj["name"]]
        return GridFunction.from_callable(fn, a, b, n, derivative=dfn)
    if "poly" in obj:
        _require_keys(obj, {"poly"}, {"poly"}, where)
        coefs = obj["poly"]
        if not isinstance(coefs, list) or not coefs or \
                any(not isinstance(c, (int, float)) or isinstance(c, bool) for c in coefs):
            raise SchemaError(f"{where}.poly: expected a nonempty list of numbers")
        poly = np.polynomial.Polynomial([float(c) for c in coefs])
        return GridFunction.from_callable(poly, a, b, n, derivative=poly.deriv())
    if "csv" in obj:
        _require_keys(obj, {"csv"}, {"csv"}, where)
        gf = GridFunction.from_csv(obj["csv"])
        if abs(gf.a - a) > 1e-12 or abs(gf.b - b) > 1e-12 or gf.n != n:
            raise SchemaError(
                f"{where}.csv: grid [{gf.a}, {gf.b}] n={gf.n} does not match the "
                f"problem grid [{a}, {b}] n={n}")
        return gf
    vals = obj["values"]
    if not isinstance(vals, list) or len(vals) != n + 1:
        raise SchemaError(f"{where}.values: expected {n + 1} numbers")
    dv = obj.get("derivative_values")
    if dv is not None and (not isinstance(dv, list) or len(dv) != n + 1):
        raise SchemaError(f"{where}.derivative_values: expected {n + 1} numbers")
    return GridFunction(a, b, np.asarray(vals, dtype=float),
                        None if dv is None else np.asarray(dv, dtype=float))


# ---------------------------------------------------------------------------
# Full variational problems.
# ---------------------------------------------------------------------------

def _interval(obj: dict, where: str) -> Tuple[float, float]:
    iv = obj["interval"]
    if (not isinstance(iv, list) or len(iv) != 2
            or any(not isinstance(x, (int, float)) or isinstance(x, bool) for x in iv)
            or not iv[0] < iv[1]):
        raise SchemaError(f"{where}.interval: expected [a, b] with a < b")
    return float(iv[0]), float(iv[1])


def _grid_n(obj: dict, where: str) -> int:
    gn = obj["grid_n"]
    if not isinstance(gn, int) or isinstance(gn, bool) or gn < 2:
        raise SchemaError(f"{where}.grid_n: expected an integer >= 2")
    return gn


def _operator_from_dict(obj: dict, a: float, b: float, order_key: str,
                        kind: OperatorKind, where: str) -> OperatorConfig:
    _require_keys(obj, {order_key, "kernel", "p", "q"},
                  {order_key, "kernel", "p", "q"}, where)
    return OperatorConfig(
        pset=ParamSet(a, b, _number(obj, "p", where), _number(obj, "q", where)),
        order=_number(obj, order_key, where),
        kernel=kernel_from_dict(obj["kernel"], f"{where}.kernel"),
        kind=kind)


def problem_from_dict(doc: dict, validate: bool = True
                      ) -> Tuple[VariationalProblem, int]:
    """Build a variational problem and its grid size from a problem document."""
    where = "problem"
    _require_keys(doc, {"interval", "grid_n", "outer", "opB", "opK",
                        "lagrangian", "bc", "constraint"},
                  {"interval", "grid_n", "outer", "opB", "opK", "lagrangian", "bc"},
                  where)
    a, b = _interval(doc, where)
    n = _grid_n(doc, where)

    outer = doc["outer"]
    _require_keys(outer, {"alpha", "kernel"}, {"alpha", "kernel"}, "outer")
    outer_alpha = _number(outer, "alpha", "outer")
    outer_kernel = kernel_from_dict(outer["kernel"], "outer.kernel")
    if outer_kernel.alpha is not None and outer_kernel.family != "exponential" \
            and abs(outer_kernel.alpha - outer_alpha) > 1e-12:
        raise SchemaError("outer.alpha disagrees with outer.kernel.alpha")

    deriv_op = _operator_from_dict(doc["opB"], a, b, "beta",
                                   OperatorKind.CAPUTO_DERIVATIVE, "opB")
    integral_op = _operator_from_dict(doc["opK"], a, b, "gamma",
                                      OperatorKind.INTEGRAL, "opK")

    lag = lagrangian_from_dict(doc["lagrangian"])
    if validate:
        lag.validate(t_range=(a, b))

    bc = doc["bc"]
    _require_keys(bc, {"left", "right"}, {"left", "right"}, "bc")
    left = bc["left"]
    if left == "free":
        bc_left: Optional[float] = None
    elif isinstance(left, (int, float)) and not isinstance(left, bool):
        bc_left = float(left)
    else:
        raise SchemaError("bc.left: expected a number or \"free\"")
    bc_right = _number(bc, "right", "bc")

    constraint = None
    if "constraint" in doc:
        cobj = doc["constraint"]
        _require_keys(cobj, {"g", "xi"}, {"g", "xi"}, "constraint")
        g = lagrangian_from_dict(cobj["g"], "constraint.g")
        if validate:
            g.validate(t_range=(a, b))
        constraint = Constraint(g, _number(cobj, "xi", "constraint"))

    problem = VariationalProblem(
        a=a, b=b, outer_kernel=outer_kernel, deriv_op=deriv_op,
        integral_op=integral_op, lagrangian=lag, bc_right=bc_right,
        bc_left=bc_left, constraint=constraint)
    return problem, n


def load_json(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"input file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
