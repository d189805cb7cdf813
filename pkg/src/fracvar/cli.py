"""Command-line front end.

Exit codes: 0 success, 1 numerical failure (non-convergence, blow-up, check
violation under --check), 2 usage or parse error.  Diagnostics go to stderr
as single-line JSON records; numeric artifacts are CSV/JSON with 17
significant digits.  Passing --plot additionally renders a figure next to
the delimited output.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import plotting
from .errors import FracvarError, SchemaError, UsageError
from .grid import FLOAT_FORMAT, GridFunction
from .kernels import ParamSet
from .operators import (OperatorConfig, OperatorKind, frac_deriv_caputo,
                        frac_deriv_rl, frac_integral, parts_defect_caputo,
                        parts_defect_integral, solve_volterra_first_kind)
from .physics import (OscillatorParams, delta_limit_report,
                      dissipation_rate, simulate_caldirola_kanai,
                      simulate_damped_oscillator)
from .problems import (_grid_n, _interval, _number, _require_keys,
                       grid_function_from_dict, kernel_from_dict, load_json,
                       problem_from_dict)
from .runtime import thread_cap
from .specfun import MLParams, mittag_leffler
from .variational import (SolverOptions, constraint_value, el_residual,
                          estimate_multiplier, evaluate_functional,
                          isoperimetric_el_residual, natural_bc_residual,
                          solve_direct)

def _diag(kind: str, **fields) -> None:
    record = {"kind": kind}
    record.update(fields)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _fmt(x: float) -> float:
    return float(FLOAT_FORMAT % x)


def _write_json(path: str, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: str, header: str, columns) -> None:
    np.savetxt(path, np.column_stack(columns), delimiter=",", header=header,
               comments="", fmt=FLOAT_FORMAT)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # JSON diagnostics even for argparse failures
        _diag("usage-error", message=message)
        raise SystemExit(2)


def _build_parser() -> _Parser:
    parser = _Parser(prog="fracvar",
                     description="Weighted fractional variational toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, needs_output: bool = True, check: bool = False):
        p = sub.add_parser(name)
        p.add_argument("input", help="JSON input file")
        p.add_argument("-o", "--output", required=needs_output,
                       help="output artifact path")
        p.add_argument("--plot", help="also render a figure to this path")
        p.add_argument("--grid-n", type=int, dest="grid_n")
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--xi", type=float)
        if check:
            p.add_argument("--check", action="store_true",
                           help="exit 1 when a tolerance is violated")
            p.add_argument("--tol", type=float, default=1e-3)
        return p

    add("op-eval")
    add("verify-ibp", check=True)
    p = add("el-residual", check=True)
    p.add_argument("--grid-output", help="write the residual grid CSV here")
    add("nbc-residual", check=True)
    p = add("iso-residual", check=True)
    p.add_argument("--grid-output", help="write the residual grid CSV here")
    p = add("solve")
    p.add_argument("--report", help="write solver diagnostics JSON here")
    add("volterra")
    add("falva-delta", check=True)
    add("falva-sim")
    add("ml-eval")
    return parser


# ---------------------------------------------------------------------------
# Override plumbing: flag values shadow file values.
# ---------------------------------------------------------------------------

def _override_problem(doc: dict, args) -> None:
    if args.grid_n is not None:
        doc["grid_n"] = args.grid_n
    if args.alpha is not None and "outer" in doc:
        doc["outer"]["alpha"] = args.alpha
        if doc["outer"].get("kernel", {}).get("family") in ("rl-power", "power-cosh",
                                                            "katugampola"):
            doc["outer"]["kernel"]["alpha"] = args.alpha
    if args.beta is not None and "opB" in doc:
        doc["opB"]["beta"] = args.beta
        if doc["opB"].get("kernel", {}).get("family") == "rl-power":
            doc["opB"]["kernel"]["alpha"] = 1.0 - args.beta
    if args.gamma is not None and "opK" in doc:
        doc["opK"]["gamma"] = args.gamma
        if doc["opK"].get("kernel", {}).get("family") == "rl-power":
            doc["opK"]["kernel"]["alpha"] = args.gamma
    if args.xi is not None and "constraint" in doc:
        doc["constraint"]["xi"] = args.xi


def _override_flat(doc: dict, args, order_is_complement: bool = False) -> None:
    if args.grid_n is not None and "grid_n" in doc:
        doc["grid_n"] = args.grid_n
    if args.alpha is not None:
        if "order" in doc:
            doc["order"] = args.alpha
        if doc.get("kernel", {}).get("family") == "rl-power":
            doc["kernel"]["alpha"] = (1.0 - args.alpha) if order_is_complement \
                else args.alpha
        if "alpha" in doc:
            doc["alpha"] = args.alpha
    if args.beta is not None and "beta" in doc:
        doc["beta"] = args.beta


# ---------------------------------------------------------------------------
# Subcommand implementations.  Each returns the process exit code.
# ---------------------------------------------------------------------------

def _cmd_op_eval(args) -> int:
    doc = load_json(args.input)
    kinds = {"integral": OperatorKind.INTEGRAL,
             "rl-derivative": OperatorKind.RL_DERIVATIVE,
             "caputo-derivative": OperatorKind.CAPUTO_DERIVATIVE}
    _require_keys(doc, {"op", "interval", "grid_n", "order", "p", "q",
                        "kernel", "f"},
                  {"op", "interval", "grid_n", "order", "p", "q", "kernel", "f"},
                  "op-eval")
    if doc["op"] not in kinds:
        raise SchemaError(f"op-eval.op: expected one of {sorted(kinds)}")
    _override_flat(doc, args, order_is_complement=(doc["op"] != "integral"))
    a, b = _interval(doc, "op-eval")
    n = args.grid_n if args.grid_n is not None else _grid_n(doc, "op-eval")
    kind = kinds[doc["op"]]
    config = OperatorConfig(
        pset=ParamSet(a, b, _number(doc, "p", "op-eval"), _number(doc, "q", "op-eval")),
        order=_number(doc, "order", "op-eval"),
        kernel=kernel_from_dict(doc["kernel"], "op-eval.kernel"),
        kind=kind)
    f = grid_function_from_dict(doc["f"], a, b, n, "op-eval.f")
    apply = {OperatorKind.INTEGRAL: frac_integral,
             OperatorKind.RL_DERIVATIVE: frac_deriv_rl,
             OperatorKind.CAPUTO_DERIVATIVE: frac_deriv_caputo}[kind]
    out = apply(config, f)
    out.to_csv(args.output)
    if args.plot:
        plotting.plot_grid_function(out, args.plot, ylabel=doc["op"])
    return 0


def _cmd_verify_ibp(args) -> int:
    doc = load_json(args.input)
    _require_keys(doc, {"interval", "grid_n", "order", "p", "q", "kernel",
                        "f", "g", "which"},
                  {"interval", "grid_n", "order", "p", "q", "kernel", "f", "g"},
                  "verify-ibp")
    _override_flat(doc, args)
    a, b = _interval(doc, "verify-ibp")
    n = args.grid_n if args.grid_n is not None else _grid_n(doc, "verify-ibp")
    which = doc.get("which", "both")
    if which not in ("integral", "caputo", "both"):
        raise SchemaError("verify-ibp.which: expected integral, caputo or both")
    config = OperatorConfig(
        pset=ParamSet(a, b, _number(doc, "p", "verify-ibp"),
                      _number(doc, "q", "verify-ibp")),
        order=_number(doc, "order", "verify-ibp"),
        kernel=kernel_from_dict(doc["kernel"], "verify-ibp.kernel"))
    f = grid_function_from_dict(doc["f"], a, b, n, "verify-ibp.f")
    g = grid_function_from_dict(doc["g"], a, b, n, "verify-ibp.g")
    report = {"grid_n": n}
    if which in ("integral", "both"):
        report["defect_integral"] = _fmt(parts_defect_integral(config, f, g))
    if which in ("caputo", "both"):
        report["defect_caputo"] = _fmt(parts_defect_caputo(config, f, g))
    _write_json(args.output, report)
    defects = [v for k, v in report.items() if k.startswith("defect")]
    if args.plot:
        plotting.plot_series(list(range(len(defects))),
                             {"defect": defects}, args.plot,
                             xlabel="case", ylabel="defect")
    if args.check and any(d > args.tol for d in defects):
        _diag("check-failed", defects=defects, tol=args.tol)
        return 1
    return 0


def _load_problem_and_y(args, key: str = "y"):
    doc = load_json(args.input)
    _require_keys(doc, {"problem", key, "lambda"}, {"problem", key}, args.subcommand)
    _override_problem(doc["problem"], args)
    problem, n = problem_from_dict(doc["problem"])
    y = grid_function_from_dict(doc[key], problem.a, problem.b, n,
                                f"{args.subcommand}.{key}")
    return doc, problem, y


def _cmd_el_residual(args) -> int:
    _, problem, y = _load_problem_and_y(args)
    report = el_residual(problem, y)
    payload = {k: _fmt(v) if isinstance(v, float) else v
               for k, v in report.to_dict().items()}
    payload["functional"] = _fmt(evaluate_functional(problem, y))
    _write_json(args.output, payload)
    if getattr(args, "grid_output", None):
        report.grid.to_csv(args.grid_output)
    if args.plot:
        plotting.plot_residual(report.grid.nodes, report.grid.values,
                               report.excluded_per_end, args.plot)
    if args.check and report.sup_norm > args.tol:
        _diag("check-failed", sup_norm=report.sup_norm, tol=args.tol)
        return 1
    return 0


def _cmd_nbc_residual(args) -> int:
    _, problem, y = _load_problem_and_y(args)
    value = natural_bc_residual(problem, y)
    _write_json(args.output, {"nbc_residual": _fmt(value)})
    if args.check and value > args.tol:
        _diag("check-failed", nbc_residual=value, tol=args.tol)
        return 1
    return 0


def _cmd_iso_residual(args) -> int:
    doc, problem, y = _load_problem_and_y(args)
    lam_spec = doc.get("lambda", "estimate")
    estimate = None
    if lam_spec == "estimate":
        estimate = estimate_multiplier(problem, y)
        lam = estimate
    elif isinstance(lam_spec, (int, float)) and not isinstance(lam_spec, bool):
        lam = float(lam_spec)
    else:
        raise SchemaError("iso-residual.lambda: expected a number or \"estimate\"")
    report = isoperimetric_el_residual(problem, y, lam)
    payload = report.to_dict()
    payload["lambda_used"] = lam
    if estimate is None:
        payload["lambda_estimate"] = estimate_multiplier(problem, y)
    else:
        payload["lambda_estimate"] = estimate
    payload["constraint_value"] = constraint_value(problem, y)
    payload = {k: _fmt(v) if isinstance(v, float) else v for k, v in payload.items()}
    _write_json(args.output, payload)
    if getattr(args, "grid_output", None):
        report.grid.to_csv(args.grid_output)
    if args.plot:
        plotting.plot_residual(report.grid.nodes, report.grid.values,
                               report.excluded_per_end, args.plot)
    if args.check and report.sup_norm > args.tol:
        _diag("check-failed", sup_norm=report.sup_norm, tol=args.tol)
        return 1
    return 0


def _cmd_solve(args) -> int:
    doc = load_json(args.input)
    _require_keys(doc, {"problem", "init", "solver"}, {"problem"}, "solve")
    _override_problem(doc["problem"], args)
    problem, n = problem_from_dict(doc["problem"])
    if "init" in doc:
        init = grid_function_from_dict(doc["init"], problem.a, problem.b, n,
                                       "solve.init")
    else:
        t = np.linspace(problem.a, problem.b, n + 1)
        left = problem.bc_left if problem.bc_left is not None else problem.bc_right
        vals = left + (problem.bc_right - left) * (t - problem.a) / (problem.b - problem.a)
        init = GridFunction(problem.a, problem.b, vals)
    opts = SolverOptions()
    if "solver" in doc:
        allowed = {"tol", "max_iters", "penalty_init", "penalty_growth"}
        _require_keys(doc["solver"], allowed, set(), "solve.solver")
        kw = {}
        for key in allowed:
            if key in doc["solver"]:
                kw[key] = doc["solver"][key]
        opts = SolverOptions(**kw)
    result = solve_direct(problem, init, opts)
    result.y.to_csv(args.output)
    report = {
        "converged": result.converged,
        "iterations": result.iterations,
        "grad_inf_norm": _fmt(result.grad_inf_norm),
        "objective": _fmt(result.objective),
        "constraint_violation": _fmt(result.constraint_violation),
    }
    if result.multiplier is not None:
        report["multiplier"] = _fmt(result.multiplier)
    if args.report:
        _write_json(args.report, report)
    if args.plot:
        plotting.plot_grid_function(result.y, args.plot, ylabel="y",
                                    title="direct solution")
    if not result.converged:
        _diag("non-convergence", **report)
        return 1
    return 0


def _cmd_volterra(args) -> int:
    doc = load_json(args.input)
    _require_keys(doc, {"interval", "grid_n", "kernel", "rhs"},
                  {"interval", "grid_n", "kernel", "rhs"}, "volterra")
    a, b = _interval(doc, "volterra")
    n = args.grid_n if args.grid_n is not None else _grid_n(doc, "volterra")
    kernel = kernel_from_dict(doc["kernel"], "volterra.kernel")
    rhs = grid_function_from_dict(doc["rhs"], a, b, n, "volterra.rhs")
    y = solve_volterra_first_kind(kernel, rhs)
    y.to_csv(args.output)
    if args.plot:
        plotting.plot_grid_function(y, args.plot, ylabel="y",
                                    title="first-kind solution")
    return 0


def _cmd_falva_delta(args) -> int:
    doc = load_json(args.input)
    _require_keys(doc, {"kernel", "b", "grid", "limit_report"}, set(), "falva-delta")
    if "limit_report" in doc:
        _require_keys(doc, {"limit_report"}, {"limit_report"}, "falva-delta")
        spec = doc["limit_report"]
        _require_keys(spec, {"kind", "alpha", "b", "rho"}, {"kind", "alpha", "b"},
                      "falva-delta.limit_report")
        if args.alpha is not None:
            spec["alpha"] = args.alpha
        report = delta_limit_report(
            spec["kind"], _number(spec, "alpha", "limit_report"),
            _number(spec, "b", "limit_report"),
            _number(spec, "rho", "limit_report") if "rho" in spec else 2.0)
        _write_json(args.output, report.to_dict())
        if args.plot:
            rows = [(t, d) for _, t, d in report.rows]
            plotting.plot_series([t for t, _ in rows],
                                 {"delta": [d for _, d in rows]}, args.plot,
                                 ylabel="delta", logx=True)
        if args.check and not report.all_passed:
            _diag("check-failed", report=report.to_dict())
            return 1
        return 0
    _require_keys(doc, {"kernel", "b", "grid"}, {"kernel", "b"}, "falva-delta")
    if args.alpha is not None and doc["kernel"].get("family") in (
            "rl-power", "power-cosh", "katugampola", "exponential"):
        doc["kernel"]["alpha"] = args.alpha
    kernel = kernel_from_dict(doc["kernel"], "falva-delta.kernel")
    b = _number(doc, "b", "falva-delta")
    grid = doc.get("grid", {})
    _require_keys(grid, {"t_min", "t_max", "points", "spacing"}, set(),
                  "falva-delta.grid")
    t_min = float(grid.get("t_min", 1e-6 * b))
    t_max = float(grid.get("t_max", b * (1.0 - 2.0 ** -10)))
    points = int(grid.get("points", 64))
    spacing = grid.get("spacing", "log")
    if spacing == "log":
        ts = np.geomspace(t_min, t_max, points)
    elif spacing == "linear":
        ts = np.linspace(t_min, t_max, points)
    else:
        raise SchemaError("falva-delta.grid.spacing: expected log or linear")
    deltas = np.array([dissipation_rate(kernel, b, float(t)) for t in ts])
    _write_csv(args.output, "t,delta", [ts, deltas])
    if args.plot:
        plotting.plot_series(ts, {"delta": deltas}, args.plot, ylabel="delta",
                             logx=(spacing == "log"))
    return 0


def _cmd_falva_sim(args) -> int:
    doc = load_json(args.input)
    _require_keys(doc, {"model", "params", "kernel", "grid_n", "t_end", "sweep"},
                  {"model", "params", "grid_n"}, "falva-sim")
    model = doc["model"]
    if model not in ("weak-dissipation", "caldirola-kanai"):
        raise SchemaError("falva-sim.model: expected weak-dissipation or "
                          "caldirola-kanai")
    n = args.grid_n if args.grid_n is not None else _grid_n(doc, "falva-sim")
    pobj = dict(doc["params"])
    _require_keys(pobj, {"omega", "b", "alpha", "gamma", "mass0", "y0", "v0", "rho"},
                  {"omega", "b"}, "falva-sim.params")
    if args.alpha is not None:
        pobj["alpha"] = args.alpha
    if args.gamma is not None:
        pobj["gamma"] = args.gamma

    def build_params(overrides: dict) -> OscillatorParams:
        merged = dict(pobj)
        merged.update(overrides)
        return OscillatorParams(
            omega=float(merged["omega"]), b=float(merged["b"]),
            alpha=float(merged.get("alpha", 0.5)),
            gamma_ck=float(merged.get("gamma", 0.0)),
            mass0=float(merged.get("mass0", 1.0)),
            y0=float(merged.get("y0", 1.0)), v0=float(merged.get("v0", 0.0)),
            rho=merged.get("rho"))

    sweep = doc.get("sweep")
    if sweep is not None:
        _require_keys(sweep, {"param", "values"}, {"param", "values"},
                      "falva-sim.sweep")
        sweep_key = sweep["param"]
        if sweep_key not in ("omega", "b", "alpha", "gamma", "mass0",
                             "y0", "v0", "rho"):
            raise SchemaError(f"falva-sim.sweep.param: unknown parameter "
                              f"{sweep_key!r}")
        sweep_vals = [float(v) for v in sweep["values"]]
    else:
        sweep_key, sweep_vals = None, [float("nan")]

    cols_param, cols_t, cols_y, cols_v, cols_delta = [], [], [], [], []
    for val in sweep_vals:
        overrides = {sweep_key: val} if sweep_key else {}
        params = build_params(overrides)
        if model == "weak-dissipation":
            om2 = params.omega ** 2
            m = params.mass0
            traj = simulate_damped_oscillator(
                params, lambda y: m * om2 * y, n)
            deltas = np.full(traj.values.size, -params.alpha)
        else:
            kobj = doc.get("kernel")
            if kobj is None:
                raise SchemaError("falva-sim: caldirola-kanai requires a kernel")
            kernel = kernel_from_dict(dict(kobj), "falva-sim.kernel")
            t_end = doc.get("t_end")
            traj = simulate_caldirola_kanai(params, kernel, n,
                                            None if t_end is None else float(t_end))
            nodes = traj.nodes
            deltas = np.array([
                dissipation_rate(kernel, params.b, float(t)) if t > 0.0
                else dissipation_rate(kernel, params.b, 1e-30 * params.b)
                for t in nodes])
        label = val if sweep_key else 0.0
        cols_param.append(np.full(traj.values.size, label))
        cols_t.append(traj.nodes)
        cols_y.append(traj.values)
        cols_v.append(traj.derivative_values)
        cols_delta.append(deltas)
    _write_csv(args.output, "param,t,y,v,delta",
               [np.concatenate(c) for c in
                (cols_param, cols_t, cols_y, cols_v, cols_delta)])
    if args.plot:
        plotting.plot_series(cols_t[-1], {"y": cols_y[-1], "v": cols_v[-1]},
                             args.plot, title=model)
    return 0


def _cmd_ml_eval(args) -> int:
    doc = load_json(args.input)
    _require_keys(doc, {"alpha", "beta", "z"}, {"alpha", "beta", "z"}, "ml-eval")
    alpha = args.alpha if args.alpha is not None else _number(doc, "alpha", "ml-eval")
    beta = args.beta if args.beta is not None else _number(doc, "beta", "ml-eval")
    z = doc["z"]
    if isinstance(z, list):
        zs = np.asarray([float(v) for v in z])
    elif isinstance(z, dict):
        _require_keys(z, {"min", "max", "points"}, {"min", "max", "points"},
                      "ml-eval.z")
        zs = np.linspace(float(z["min"]), float(z["max"]), int(z["points"]))
    else:
        raise SchemaError("ml-eval.z: expected a list or {min,max,points}")
    params = MLParams(alpha, beta)
    vals = np.array([mittag_leffler(params, float(v)) for v in zs])
    _write_csv(args.output, "z,value", [zs, vals])
    if args.plot:
        plotting.plot_series(zs, {"E(z)": vals}, args.plot, xlabel="z",
                             ylabel="E(z)")
    return 0


_DISPATCH = {
    "op-eval": _cmd_op_eval,
    "verify-ibp": _cmd_verify_ibp,
    "el-residual": _cmd_el_residual,
    "nbc-residual": _cmd_nbc_residual,
    "iso-residual": _cmd_iso_residual,
    "solve": _cmd_solve,
    "volterra": _cmd_volterra,
    "falva-delta": _cmd_falva_delta,
    "falva-sim": _cmd_falva_sim,
    "ml-eval": _cmd_ml_eval,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # validates FRACVAR_THREADS; evaluation is sequential, within any cap
    thread_cap()
    try:
        return _DISPATCH[args.subcommand](args)
    except (SchemaError, UsageError) as exc:
        _diag("usage-error", subcommand=args.subcommand, message=str(exc))
        return 2
    except (ValueError, TypeError) as exc:
        _diag("usage-error", subcommand=args.subcommand, message=str(exc))
        return 2
    except FracvarError as exc:
        _diag("numerical-error", subcommand=args.subcommand,
              error=type(exc).__name__, message=str(exc))
        return 1
    except Exception as exc:  # diagnostics must stay machine-readable
        _diag("internal-error", subcommand=args.subcommand,
              error=type(exc).__name__, message=str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
