"""Eigenstructure: speeds, eigenvector identity, coincidence locus, saddle."""

import numpy as np
import pytest
from scipy.optimize import brentq

from chemflood.model import State
from chemflood.characteristics import (
    OMEGA_L,
    OMEGA_R,
    char_data,
    coincidence_point,
    find_saddle,
    lambda_c,
    lambda_s,
    rarefaction_field,
    speed_gap,
)


def test_char_data_at_unit_saturation(model):
    for c in (0.1, 0.5, 0.9):
        data = char_data(model, State(1.0, c))
        assert data.lambda_s == 0.0
        assert data.lambda_c == pytest.approx(1.0 / (1.0 + model.a_c(c)), abs=1e-14)
        assert data.region == OMEGA_R


def test_speeds_vanish_toward_zero_saturation(model):
    for s in (1e-4, 1e-6):
        d = char_data(model, State(s, 0.4))
        assert abs(d.lambda_s) < 1e-3
        assert abs(d.lambda_c) < 1e-3


def test_eigenvector_identity(model):
    """The characteristic matrix applied to r_c equals lambda_c r_c."""
    rng = np.random.default_rng(3)
    worst = 0.0
    for s, c in rng.uniform(0.02, 0.98, size=(1000, 2)):
        p = model.flux.partials(s, c)
        a_c = model.a_c(c)
        lam_c = p.f / (s + a_c)
        r = np.array([-p.f_c, p.f_s - lam_c])
        A = np.array([[p.f_s, p.f_c], [0.0, lam_c]])
        worst = max(worst, float(np.max(np.abs(A @ r - lam_c * r))))
    assert worst < 1e-8


def test_coincidence_point_against_scan_oracle(model):
    for c in (0.05, 0.3, 0.5, 0.77, 0.95):
        root = coincidence_point(model, c)
        # independent oracle: dense scan plus bisection on the raw gap
        grid = np.linspace(1e-3, 1.0, 4097)
        gaps = np.array([speed_gap(model, float(s), c) for s in grid])
        k = np.where(np.sign(gaps[:-1]) * np.sign(gaps[1:]) < 0)[0]
        assert k.size == 1
        oracle = brentq(lambda s: speed_gap(model, s, c), grid[k[0]], grid[k[0] + 1],
                        xtol=1e-15)
        assert root == pytest.approx(oracle, abs=1e-12)
        assert abs(speed_gap(model, root, c)) < 1e-12


def test_region_flips_across_locus(model):
    c = 0.37
    root = coincidence_point(model, c)
    assert char_data(model, State(root - 1e-3, c)).region == OMEGA_L
    assert char_data(model, State(root + 1e-3, c)).region == OMEGA_R


def test_saddle_residuals_and_type(model, saddle):
    s, c = saddle.s, saddle.c
    p = model.flux.partials(s, c)
    assert abs(p.f_c) < 1e-10
    assert abs(lambda_s(model, s, c) - lambda_c(model, s, c)) < 1e-10
    assert saddle.mu_plus > 0.0 > saddle.mu_minus
    det = saddle.mu_plus * saddle.mu_minus
    assert det == pytest.approx(p.f_ss * p.f_cc, abs=1e-8)
    assert det < 0.0
    trace = p.f * model.a_cc(c) / (s + model.a_c(c)) ** 2
    assert saddle.mu_plus + saddle.mu_minus == pytest.approx(trace, abs=1e-8)


def test_saddle_c_matches_c_star(model, saddle):
    # the mobility profile peaks at 1/2, so f_c vanishes on that whole row
    assert saddle.c == pytest.approx(0.5, abs=1e-12)
    oracle = coincidence_point(model, 0.5)
    assert saddle.s == pytest.approx(oracle, abs=1e-8)


def test_saddle_linearization_against_numeric_jacobian(model, saddle):
    """Central-difference Jacobian of the rarefaction field at the fixed point."""
    s, c = saddle.s, saddle.c
    h = 1e-6
    J = np.zeros((2, 2))
    for j, (ds, dc) in enumerate([(h, 0.0), (0.0, h)]):
        plus = rarefaction_field(model, s + ds, c + dc)
        minus = rarefaction_field(model, s - ds, c - dc)
        J[:, j] = (plus - minus) / (2 * h)
    eig = np.sort(np.linalg.eigvals(J).real)
    assert eig[0] == pytest.approx(saddle.mu_minus, abs=1e-5)
    assert eig[1] == pytest.approx(saddle.mu_plus, abs=1e-5)


def test_eigendirections_unit_and_oriented(model, saddle):
    for direction in (saddle.dir_plus, saddle.dir_minus):
        assert np.hypot(*direction) == pytest.approx(1.0, abs=1e-12)
        assert direction[1] > 0.0
