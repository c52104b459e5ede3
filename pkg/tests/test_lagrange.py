"""Lagrange-coordinate mapping, jump conditions, entropy and the potential."""

import numpy as np
import pytest

from chemflood.errors import DomainError
from chemflood.model import State
from chemflood import lagrange as lg
from chemflood.shock import connect_undercompressive, make_shock, row_roots


def test_to_lagrange_examples(model):
    ls = lg.to_lagrange(model, State(1.0, 0.3))
    assert ls.U == 1.0 and ls.F == -1.0
    ls = lg.to_lagrange(model, State(0.5, 0.5))
    assert ls.U == pytest.approx(2.5, abs=1e-14)
    assert ls.F == pytest.approx(-1.25, abs=1e-14)
    with pytest.raises(DomainError):
        lg.to_lagrange(model, State(0.0, 0.5))


def test_lagrange_flux_properties(model):
    for zeta in (0.1, 0.6, 0.95):
        assert lg.lagrange_flux(model, 1.0, zeta) == pytest.approx(-1.0, abs=1e-12)
    # F decreases without bound along a geometric ladder in U
    ladder = [lg.lagrange_flux(model, U, 0.5) for U in (10.0, 100.0, 1000.0, 10000.0)]
    assert all(a > b for a, b in zip(ladder[:-1], ladder[1:]))
    assert ladder[-1] < -30.0
    # dF/dU flattens toward zero at large U
    slopes = [abs(lg.lagrange_flux_dU(model, U, 0.5)) for U in (100.0, 1000.0, 100000.0)]
    assert slopes[0] > slopes[1] > slopes[2]
    assert slopes[2] < 1e-2
    with pytest.raises(DomainError):
        lg.lagrange_flux(model, 0.5, 0.5)


def test_inverse_of_reciprocal(model):
    for s, c in [(0.3, 0.2), (0.8, 0.9), (0.999, 0.5)]:
        U = 1.0 / model.f(s, c)
        back = lg.saturation_from_reciprocal(model, U, c)
        assert back == pytest.approx(s, abs=1e-12)


def test_map_shock_round_trip_and_speed(model):
    sh = connect_undercompressive(model, 0.8, 0.2, 1.0)
    lsh = lg.map_shock(model, sh)
    # side swap
    assert lsh.minus.zeta == sh.u_plus.c and lsh.plus.zeta == sh.u_minus.c
    # speed equals [a]/[zeta] > 0
    assert lsh.v_star == pytest.approx(sh.h, abs=1e-14)
    assert lsh.v_star > 0.0
    um, up = lg.inverse_map_shock(model, lsh)
    assert um.s == pytest.approx(sh.u_minus.s, abs=1e-12)
    assert up.s == pytest.approx(sh.u_plus.s, abs=1e-12)


def test_map_saturation_shock(model):
    sh = make_shock(model, State(0.85, 0.4), State(0.55, 0.4))
    lsh = lg.map_shock(model, sh)
    assert lsh.minus.zeta == lsh.plus.zeta == 0.4
    dF = lsh.plus.F - lsh.minus.F
    dU = lsh.plus.U - lsh.minus.U
    assert lsh.v_star == pytest.approx(dF / dU, abs=1e-12)


def test_rh_equivalence_between_coordinate_systems(model):
    """A pair violating the original jump conditions has no Lagrange image
    satisfying them either: the map reports the inconsistency."""
    from chemflood.errors import StructureError

    bad_minus = State(0.7, 0.8)
    bad_plus = State(0.3, 0.2)

    class FakeShock:
        u_minus, u_plus = bad_minus, bad_plus
        family = "CShock"
        v = 0.5

    with pytest.raises(StructureError):
        lg.map_shock(model, FakeShock())


def test_zeta_entropy_same_shock(model):
    sh = connect_undercompressive(model, 0.8, 0.2, 1.0)
    rep = lg.check_zeta_entropy(model, sh, sh)
    assert rep.residual == 0.0 and rep.holds and not rep.excluded


def test_zeta_entropy_lax_pairs(model):
    c_L, c_R = 0.8, 0.2
    h = (model.a(c_R) - model.a(c_L)) / (c_R - c_L)
    v2 = model.f(0.95, c_R) / (0.95 + h)
    u_M = [r for r in row_roots(model, c_L, v2, h) if model.f_s(r, c_L) < v2][-1]
    lax2 = make_shock(model, State(u_M, c_L), State(0.95, c_R))
    v1 = model.f(0.3, c_L) / (0.3 + h)
    u_M1 = [r for r in row_roots(model, c_R, v1, h) if model.f_s(r, c_R) > v1][0]
    lax1 = make_shock(model, State(0.3, c_L), State(u_M1, c_R))
    uc = connect_undercompressive(model, c_L, c_R, 1.0)
    for a, b in [(lax1, lax2), (lax1, uc), (lax2, uc)]:
        rep = lg.check_zeta_entropy(model, a, b)
        assert not rep.excluded
        assert rep.holds and rep.residual <= 1e-9


def test_zeta_entropy_kappa_pair_is_excluded_configuration(model):
    """Two crossing shocks at different dissipation ratios realize exactly the
    nested-and-slower configuration the exclusion lemma forbids for a common
    ratio; the inequality genuinely fails there and the pair is flagged."""
    a = connect_undercompressive(model, 0.8, 0.2, 0.5)
    b = connect_undercompressive(model, 0.8, 0.2, 2.0)
    rep = lg.check_zeta_entropy(model, a, b)
    assert rep.excluded
    assert rep.residual > 0.0  # the sign documents why the exclusion is needed


def test_potential_constant_solution(model, solver):
    sol = solver.solve(State(0.7, 0.3), State(0.7, 0.3))
    for x, t in [(0.5, 2.0), (-0.3, 1.0), (0.0, 0.7)]:
        exact = model.f(0.7, 0.3) * t - 0.7 * x
        assert lg.potential(model, sol, x, t) == pytest.approx(exact, abs=1e-12)


def test_potential_path_independence(model, solver):
    sol = solver.solve(State(1.0, 0.8), State(0.0, 0.2), kappa=1.0)
    for x in (-0.4, 0.15, 0.5, 1.1):
        p1 = lg.potential(model, sol, x, 1.0)
        p2 = lg.potential_via_x_first(model, sol, x, 1.0)
        assert abs(p1 - p2) < 1e-8


def test_loop_exactness_across_one_shock(model, solver):
    sol = solver.solve(State(1.0, 0.8), State(0.0, 0.2), kappa=1.0)
    cw = next(w for w in sol.waves if w.kind == "CShock")
    v = cw.speed_lo
    # rectangle straddling only the crossing shock
    loop = lg.loop_integral(model, sol, v * 0.9, v * 1.1, 0.8, 1.2)
    assert abs(loop) < 1e-8


def test_verify_solution_report(model, solver):
    sol = solver.solve(State(1.0, 0.8), State(0.2, 0.2), kappa=1.0)
    rows = lg.verify_solution(model, sol)
    assert rows
    for row in rows:
        if "skipped" in row:
            continue
        assert row["round_trip"] < 1e-10
        if row["family"] == "CShock":
            assert row["zeta_speed_positive"]
