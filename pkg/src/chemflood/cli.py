"""Command-line front end.

Subcommands map one-to-one onto the library surface: ``validate`` checks the
structural assumptions of a model file, ``saddle``/``locus``/``curves`` expose
the characteristic geometry, ``phase`` the travelling-wave plane, ``solve``
and ``layout`` the Riemann machinery, and ``verify-lagrange`` /
``verify-viscous`` the cross-validation reports.

Results are machine readable: JSON documents on stdout, CSV series in the
output directory.  Floating point is printed with 17 significant digits so
round-trips are exact; identical invocations produce identical bytes.  Exit
codes: 0 success, 1 usage error, 2 validation failure, 3 numerical or
structural failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .errors import ChemfloodError, DomainError
from .model import Model, State, validate_assumptions
from .characteristics import coincidence_point, find_saddle, lambda_c
from .rarefaction import integrate_curve, separatrices
from .shock import connect_undercompressive, row_roots, tw_field
from .riemann import RiemannSolver
from . import lagrange as lagrange_mod
from .viscous import ViscousParams, compare, convergence_ladder, simulate

USAGE_ERROR = 1
VALIDATION_FAILURE = 2
NUMERICAL_ERROR = 3


def _fmt(x):
    return format(float(x), ".17g")


def thread_budget():
    """Worker cap from CHEMFLOOD_THREADS (0 or unset means automatic)."""
    raw = os.environ.get("CHEMFLOOD_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        return os.cpu_count() or 1
    return n


def _emit_json(doc, stream=None):
    (stream or sys.stdout).write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _error_json(kind, message):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message)}) + "\n")


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, (int, float, np.floating)) else str(v)
                              for v in row) + "\n")


def _load_model(path, n_grid=64):
    with open(path) as fh:
        cfg = json.load(fh)
    model = Model.from_config(cfg)
    report = validate_assumptions(model, n_grid)
    return model, report


def _state(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise DomainError(f"state must be 's,c', got {text!r}")
    return State(float(parts[0]), float(parts[1]))


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------


def cmd_validate(args):
    model, report = _load_model(args.model, args.grid)
    doc = {
        "passed": report.passed,
        "c_star": report.c_star,
        "f3prime_ok": report.f3prime_ok,
        "s_convex": report.s_convex,
        "n_grid": report.n_grid,
        "violations": [
            {"condition": v.condition, "point": list(v.point), "detail": v.detail}
            for v in report.violations
        ],
    }
    _emit_json(doc)
    return 0 if report.passed else VALIDATION_FAILURE


def cmd_saddle(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    sp = find_saddle(model)
    _emit_json({
        "s": sp.s, "c": sp.c,
        "mu_plus": sp.mu_plus, "mu_minus": sp.mu_minus,
        "dir_plus": list(sp.dir_plus), "dir_minus": list(sp.dir_minus),
    })
    return 0


def cmd_locus(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    cs = np.linspace(args.c_min, args.c_max, args.count)
    rows = [(c, coincidence_point(model, float(c))) for c in cs]
    path = os.path.join(args.output_dir, "locus.csv")
    _write_csv(path, "c,s", rows)
    _emit_json({"written": path, "points": len(rows)})
    return 0


def cmd_curves(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    os.makedirs(args.output_dir, exist_ok=True)
    written = []
    if args.separatrices:
        sp = find_saddle(model)
        seps = separatrices(model, sp)
        names = ["gamma1_lower_left", "gamma2_lower_right",
                 "gamma3_upper_left", "gamma4_upper_right"]
        for name, curve in zip(names, seps.as_tuple()):
            path = os.path.join(args.output_dir, f"curve_{name}.csv")
            rows = [(c, s, lambda_c(model, float(np.clip(s, 0, 1)), float(c)), curve.side)
                    for c, s in zip(curve.c_knots, curve.s_knots)]
            _write_csv(path, "c,s,lambda_c,side", rows)
            written.append(path)
    for k, text in enumerate(args.through or []):
        u0 = _state(text)
        curve = integrate_curve(model, u0)
        path = os.path.join(args.output_dir, f"curve_{k}.csv")
        rows = [(c, s, lambda_c(model, float(np.clip(s, 0, 1)), float(c)), curve.side)
                for c, s in zip(curve.c_knots, curve.s_knots)]
        _write_csv(path, "c,s,lambda_c,side", rows)
        written.append(path)
    _emit_json({"written": written})
    return 0


def cmd_phase(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    os.makedirs(args.output_dir, exist_ok=True)
    shock = connect_undercompressive(model, args.c_left, args.c_right, args.kappa)
    field = tw_field(model, shock.v, shock.d1, shock.d2, args.kappa)

    # nullclines: saturation roots per row, and the concentration rows
    rows = []
    for c in np.linspace(args.c_right, args.c_left, 101):
        for root in row_roots(model, float(c), shock.v, shock.d1):
            rows.append((c, root))
    _write_csv(os.path.join(args.output_dir, "nullcline_s.csv"), "c,s", rows)

    # the connecting trajectory, traced in the reduced equation
    from .shock import _manifold_slope, _trace_reduced

    delta = 1e-4
    slope_m, _, _ = _manifold_slope(model, shock.u_minus.s, args.c_left,
                                    shock.v, shock.d1, args.kappa)
    cs = np.linspace(args.c_left - delta, args.c_right + delta, 401)
    from scipy.integrate import solve_ivp

    def rhs(c, y):
        out = field(float(np.clip(y[0], 0.0, 1.0)), c)
        return (out[0] / out[1],)

    sol = solve_ivp(rhs, (cs[0], cs[-1]), (shock.u_minus.s - slope_m * delta,),
                    t_eval=cs, rtol=1e-10, atol=1e-12)
    traj = [(c, s) for c, s in zip(sol.t, sol.y[0])]
    _write_csv(os.path.join(args.output_dir, "trajectory.csv"), "c,s", traj)
    _emit_json({
        "s_minus": shock.u_minus.s, "s_plus": shock.u_plus.s, "v": shock.v,
        "classification": shock.classification,
        "written": [os.path.join(args.output_dir, "nullcline_s.csv"),
                    os.path.join(args.output_dir, "trajectory.csv")],
    })
    return 0


def cmd_solve(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    solver = RiemannSolver(model)
    u_L = _state(args.left)
    u_R = _state(args.right)
    sol = solver.solve(u_L, u_R, kappa=args.kappa)
    doc = {
        "structure": sol.structure,
        "waves": [
            {
                "kind": w.kind,
                "left": [w.left_state.s, w.left_state.c],
                "right": [w.right_state.s, w.right_state.c],
                "speed_lo": w.speed_lo,
                "speed_hi": w.speed_hi,
            }
            for w in sol.waves
        ],
        "states": [[st.s, st.c] for st in sol.intermediate_states],
    }
    _emit_json(doc)
    if args.profile:
        os.makedirs(args.output_dir, exist_ok=True)
        speeds = [x for w in sol.waves for x in (w.speed_lo, w.speed_hi)] or [0.0, 1.0]
        lo = min(speeds) - 0.15 * (1 + abs(min(speeds)))
        hi = max(speeds) + 0.15 * (1 + abs(max(speeds)))
        xis = np.linspace(lo, hi, args.resolution)
        rows = []
        for xi in xis:
            u = sol.evaluate(float(xi))
            rows.append((xi, u.s, u.c))
        path = os.path.join(args.output_dir, "profile.csv")
        _write_csv(path, "xi,s,c", rows)
    return 0


def cmd_layout(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    solver = RiemannSolver(model)
    lay = solver.region_layout(args.c_left, args.c_right, kappa=args.kappa, n=args.grid)
    os.makedirs(args.output_dir, exist_ok=True)
    rows = []
    for i, sl in enumerate(lay.s_L):
        for j, sr in enumerate(lay.s_R):
            rows.append((sl, sr, lay.labels[i, j]))
    path = os.path.join(args.output_dir, "layout.csv")
    _write_csv(path, "s_L,s_R,label", rows)
    written = [path]
    for name, poly in lay.boundaries.items():
        bpath = os.path.join(args.output_dir, f"boundary_{name}.csv")
        _write_csv(bpath, "s_L,s_R", [tuple(pt) for pt in np.atleast_2d(poly)])
        written.append(bpath)
    _emit_json({"counts": lay.label_counts(), "written": written})
    return 0


def cmd_verify_lagrange(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    solver = RiemannSolver(model)
    sol = solver.solve(_state(args.left), _state(args.right), kappa=args.kappa)
    rows = lagrange_mod.verify_solution(model, sol)
    t_probe = 1.0
    x_probe = 0.4
    p1 = lagrange_mod.potential(model, sol, x_probe, t_probe)
    p2 = lagrange_mod.potential_via_x_first(model, sol, x_probe, t_probe)
    loop = lagrange_mod.loop_integral(model, sol, -0.2, 0.9, 0.5, 1.5)
    _emit_json({
        "structure": sol.structure,
        "shocks": rows,
        "path_independence": abs(p1 - p2),
        "loop_integral": abs(loop),
    })
    return 0


def cmd_verify_viscous(args):
    model, report = _load_model(args.model)
    if not report.passed:
        _error_json("validation", "model failed assumption validation")
        return VALIDATION_FAILURE
    solver = RiemannSolver(model)
    u_L = _state(args.left)
    u_R = _state(args.right)
    sol = solver.solve(u_L, u_R, kappa=args.kappa)
    eps_list = [float(tok) for tok in args.eps_ladder.split(",")]
    rows = convergence_ladder(model, u_L, u_R, sol, eps_list, kappa=args.kappa,
                              cells=args.cells, final_time=args.time)
    doc = {"structure": sol.structure, "ladder": rows}
    _emit_json(doc)
    if args.snapshots:
        os.makedirs(args.output_dir, exist_ok=True)
        for eps in eps_list:
            params = ViscousParams(eps_c=eps, eps_d=args.kappa * eps,
                                   cells=args.cells, final_time=args.time)
            grid = simulate(model, u_L, u_R, params)
            path = os.path.join(args.output_dir, f"snapshot_{eps:g}.csv")
            _write_csv(path, "x,s,c", list(zip(grid.x, grid.s, grid.c)))
    return 0


# ---------------------------------------------------------------------------
# argument plumbing
# ---------------------------------------------------------------------------


def build_parser():
    top = argparse.ArgumentParser(
        prog="chemflood",
        description="Exact Riemann solver and admissibility laboratory for the "
                    "two-equation chemical flood system",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--model", required=True, help="model configuration JSON")
        p.add_argument("--output-dir", default=".", help="directory for CSV artifacts")
        p.add_argument("--seed", type=int, default=0, help="seed for sampled diagnostics")

    p = sub.add_parser("validate", help="check structural assumptions")
    common(p)
    p.add_argument("--grid", type=int, default=64)
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("saddle", help="fixed point of the chemical rarefaction field")
    common(p)
    p.set_defaults(fn=cmd_saddle)

    p = sub.add_parser("locus", help="coincidence locus samples")
    common(p)
    p.add_argument("--c-min", type=float, default=0.0)
    p.add_argument("--c-max", type=float, default=1.0)
    p.add_argument("--count", type=int, default=101)
    p.set_defaults(fn=cmd_locus)

    p = sub.add_parser("curves", help="chemical rarefaction curves as CSV")
    common(p)
    p.add_argument("--separatrices", action="store_true")
    p.add_argument("--through", action="append", metavar="s,c")
    p.set_defaults(fn=cmd_curves)

    p = sub.add_parser("phase", help="travelling-wave plane for a concentration pair")
    common(p)
    p.add_argument("--c-left", type=float, required=True)
    p.add_argument("--c-right", type=float, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.set_defaults(fn=cmd_phase)

    p = sub.add_parser("solve", help="solve a Riemann problem")
    common(p)
    p.add_argument("--left", required=True, metavar="s,c")
    p.add_argument("--right", required=True, metavar="s,c")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--profile", action="store_true", help="emit profile CSV")
    p.add_argument("--resolution", type=int, default=2001)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("layout", help="region layout over the data square")
    common(p)
    p.add_argument("--c-left", type=float, required=True)
    p.add_argument("--c-right", type=float, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=64)
    p.set_defaults(fn=cmd_layout)

    p = sub.add_parser("verify-lagrange", help="Lagrange-coordinate residual report")
    common(p)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.set_defaults(fn=cmd_verify_lagrange)

    p = sub.add_parser("verify-viscous", help="dissipative convergence ladder")
    common(p)
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--eps-ladder", default="1e-3,5e-4,2.5e-4")
    p.add_argument("--cells", type=int, default=1024)
    p.add_argument("--time", type=float, default=0.25)
    p.add_argument("--snapshots", action="store_true")
    p.set_defaults(fn=cmd_verify_viscous)

    return top


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_ERROR if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except FileNotFoundError as exc:
        _error_json("usage", exc)
        return USAGE_ERROR
    except DomainError as exc:
        _error_json("domain", exc)
        return NUMERICAL_ERROR
    except ChemfloodError as exc:
        _error_json(type(exc).__name__, exc)
        return NUMERICAL_ERROR
    except json.JSONDecodeError as exc:
        _error_json("usage", f"model file is not valid JSON: {exc}")
        return USAGE_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
