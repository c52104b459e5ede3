"""Finite-volume validation runs: conservation, convergence, kernel parity."""

import numpy as np
import pytest

from chemflood.model import State
from chemflood.viscous import (
    ViscousParams,
    _simulate_numpy,
    compare,
    convergence_ladder,
    simulate,
)


def test_constant_state_preserved(model):
    params = ViscousParams(eps_c=1e-3, eps_d=1e-3, cells=256, final_time=0.05)
    grid = simulate(model, State(0.6, 0.4), State(0.6, 0.4), params)
    assert np.max(np.abs(grid.s - 0.6)) < 1e-13
    assert np.max(np.abs(grid.c - 0.4)) < 1e-12


def test_conservation_and_bounds(model):
    params = ViscousParams(eps_c=1e-3, eps_d=2e-3, cells=512, final_time=0.1)
    grid = simulate(model, State(0.9, 0.8), State(0.1, 0.2), params)
    assert abs(grid.mass_drift[0]) < 1e-8
    assert abs(grid.mass_drift[1]) < 1e-8
    assert np.all(grid.s >= -1e-12) and np.all(grid.s <= 1.0 + 1e-12)
    assert np.all(grid.c >= -1e-12) and np.all(grid.c <= 1.0 + 1e-12)


def test_fast_kernel_matches_numpy(model):
    params = ViscousParams(eps_c=2e-3, eps_d=1e-3, cells=256, final_time=0.04)
    a = simulate(model, State(1.0, 0.8), State(0.1, 0.2), params)
    b = _simulate_numpy(model, State(1.0, 0.8), State(0.1, 0.2), params)
    assert a.steps == b.steps
    assert np.max(np.abs(a.s - b.s)) < 1e-12
    assert np.max(np.abs(a.c - b.c)) < 1e-12


def test_bl_convergence(model, solver):
    u_L, u_R = State(0.85, 0.5), State(0.15, 0.5)
    sol = solver.solve(u_L, u_R)
    rows = convergence_ladder(model, u_L, u_R, sol, [2e-3, 1e-3], cells=1024,
                              final_time=0.2)
    assert rows[0]["err_s"] / rows[1]["err_s"] >= 1.3
    assert rows[1]["err_s"] < 0.03


def test_compare_of_exact_profile_is_small(model, solver):
    """Feeding the exact profile through compare returns quadrature-level error."""
    sol = solver.solve(State(0.85, 0.5), State(0.15, 0.5))
    params = ViscousParams(eps_c=1e-3, eps_d=1e-3, cells=512, final_time=0.2)
    x = np.linspace(-0.5, 0.5, 512)
    t = 0.2
    states = [sol.evaluate(float(v / t)) for v in x]

    class FakeGrid:
        pass

    g = FakeGrid()
    g.x = x
    g.s = np.array([u.s for u in states])
    g.c = np.array([u.c for u in states])
    g.time = t
    err_s, err_c = compare(g, sol, align=False)
    assert err_s < 5e-4 and err_c < 5e-4


def test_travelling_wave_extraction(model, solver):
    """Mid-transition of a matched run tracks the phase-plane trajectory."""
    from chemflood.shock import _manifold_slope, _trace_reduced

    u_L, u_R = State(1.0, 0.8), State(0.0, 0.2)
    kappa = 1.0
    sol = solver.solve(u_L, u_R, kappa=kappa)
    cw = next(w for w in sol.waves if w.kind == "CShock")
    sh = cw.payload
    params = ViscousParams(eps_c=1e-3, eps_d=kappa * 1e-3, cells=2048, final_time=0.25)
    grid = simulate(model, u_L, u_R, params)

    # grid (s, c) samples strictly inside the concentration transition
    mask = (grid.c > 0.25) & (grid.c < 0.75)
    cs = grid.c[mask]
    ss = grid.s[mask]

    delta = 1e-4
    slope_m, _, _ = _manifold_slope(model, sh.u_minus.s, 0.8, sh.v, sh.d1, kappa)
    worst = 0.0
    for c_val, s_val in zip(cs, ss):
        s_ref, status = _trace_reduced(model, sh.v, sh.d1, sh.d2, kappa,
                                       sh.u_minus.s - slope_m * delta,
                                       0.8 - delta, float(c_val))
        if status == "ok":
            worst = max(worst, abs(s_ref - s_val))
    assert worst < 2e-2
