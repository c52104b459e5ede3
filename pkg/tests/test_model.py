"""Model families: analytic derivatives against independent oracles, and the
structural-assumption validator on the reference model and designed
counterexamples."""

import numpy as np
import pytest
import sympy as sp

from chemflood.errors import DomainError
from chemflood.model import (
    Model,
    State,
    eval_adsorption,
    eval_flux,
    reference_model,
    validate_assumptions,
)

FD_H = 1e-5


@pytest.fixture(scope="module")
def sym_oracle():
    """All six flux partials of the reference model via symbolic differentiation."""
    s, c = sp.symbols("s c", real=True)
    m = 1 + 2 * c * (1 - c)
    f = s**2 / (s**2 + m * (1 - s) ** 2)
    funcs = {}
    for name, expr in [
        ("f", f),
        ("f_s", sp.diff(f, s)),
        ("f_c", sp.diff(f, c)),
        ("f_ss", sp.diff(f, s, 2)),
        ("f_sc", sp.diff(f, s, c)),
        ("f_cc", sp.diff(f, c, 2)),
    ]:
        funcs[name] = sp.lambdify((s, c), sp.simplify(expr), "numpy")
    return funcs


def test_reference_closed_forms(model):
    assert eval_flux(model, State(1.0, 0.3)).f == pytest.approx(1.0, abs=1e-15)
    p0 = eval_flux(model, State(0.0, 0.7))
    assert p0.f == 0.0 and p0.f_s == 0.0
    # 0.5^2 / (0.5^2 + 1.5*0.5^2) = 0.4
    assert eval_flux(model, State(0.5, 0.5)).f == pytest.approx(0.4, abs=1e-15)


def test_flux_partials_against_sympy(model, sym_oracle):
    rng = np.random.default_rng(7)
    pts = rng.uniform(0.02, 0.98, size=(200, 2))
    for s, c in pts:
        p = model.flux.partials(s, c)
        for name in ("f", "f_s", "f_c", "f_ss", "f_sc", "f_cc"):
            assert getattr(p, name) == pytest.approx(
                float(sym_oracle[name](s, c)), rel=1e-10, abs=1e-12
            ), name


def test_flux_partials_against_finite_differences(model):
    rng = np.random.default_rng(11)
    f = model.flux.value
    for s, c in rng.uniform(0.05, 0.95, size=(50, 2)):
        p = model.flux.partials(s, c)
        fd_s = (f(s + FD_H, c) - f(s - FD_H, c)) / (2 * FD_H)
        fd_c = (f(s, c + FD_H) - f(s, c - FD_H)) / (2 * FD_H)
        fd_ss = (f(s + FD_H, c) - 2 * f(s, c) + f(s - FD_H, c)) / FD_H**2
        fd_cc = (f(s, c + FD_H) - 2 * f(s, c) + f(s, c - FD_H)) / FD_H**2
        fd_sc = (
            f(s + FD_H, c + FD_H) - f(s + FD_H, c - FD_H)
            - f(s - FD_H, c + FD_H) + f(s - FD_H, c - FD_H)
        ) / (4 * FD_H**2)
        assert p.f_s == pytest.approx(fd_s, abs=1e-6)
        assert p.f_c == pytest.approx(fd_c, abs=1e-6)
        assert p.f_ss == pytest.approx(fd_ss, abs=5e-5)
        assert p.f_cc == pytest.approx(fd_cc, abs=5e-5)
        assert p.f_sc == pytest.approx(fd_sc, abs=5e-5)


def test_adsorption_values(model):
    a, a_c, a_cc = eval_adsorption(model, 0.0)
    assert a == 0.0
    a, a_c, a_cc = eval_adsorption(model, 1.0)
    assert a == pytest.approx(0.5, abs=1e-15)
    assert a_c == pytest.approx(0.25, abs=1e-15)
    for c in np.linspace(0.01, 0.99, 25):
        _, ac, acc = eval_adsorption(model, float(c))
        fd = (model.a(c + FD_H) - model.a(c - FD_H)) / (2 * FD_H)
        assert ac == pytest.approx(fd, abs=1e-8)
        assert acc < 0.0


def test_domain_errors(model):
    with pytest.raises(DomainError):
        State(1.2, 0.5)
    with pytest.raises(DomainError):
        eval_adsorption(model, 1.5)


def test_validation_reference_passes(model):
    report = validate_assumptions(model, 64)
    assert report.passed
    assert report.c_star == pytest.approx(0.5, abs=1e-10)
    assert report.f3prime_ok
    assert model.validated


def test_validation_counterexample_linear_adsorption():
    cfg = {
        "flux": {"family": "corey", "m": {"family": "quad", "base": 1.0, "amp": 2.0}},
        "adsorption": {"family": "linear", "k": 0.5},
    }
    model = Model.from_config(cfg)
    report = validate_assumptions(model, 64)
    assert not report.passed
    conditions = {v.condition for v in report.violations}
    assert conditions == {"a_cc<0"}


def test_validation_counterexample_monotone_mobility():
    cfg = {
        "flux": {"family": "corey", "m": {"family": "linear", "base": 1.0, "slope": 1.0}},
        "adsorption": {"family": "langmuir", "b": 1.0},
    }
    model = Model.from_config(cfg)
    report = validate_assumptions(model, 64)
    assert not report.passed
    assert any("f_c" in v.condition for v in report.violations)
    assert report.c_star is None


def test_validation_grid_properties(model):
    """Sign-pattern invariants on a sampled grid."""
    n = 48
    s = np.linspace(0.0, 1.0, n + 2)[1:-1]
    c = np.linspace(0.0, 1.0, n + 2)[1:-1]
    S, C = np.meshgrid(s, c, indexing="ij")
    p = model.flux.partials(S, C)
    assert np.all(p.f_s > 1e-12)
    # one + to - change of f_ss per column
    for j in range(n):
        col = p.f_ss[:, j]
        signs = np.sign(col[np.abs(col) > 1e-12])
        flips = np.count_nonzero(np.diff(signs))
        assert flips == 1 and signs[0] > 0 and signs[-1] < 0
    # one - to + change of f_c per row, same cell across rows
    cells = []
    for i in range(n):
        row = p.f_c[i, :]
        signs = np.sign(row[np.abs(row) > 1e-12])
        assert np.count_nonzero(np.diff(signs)) == 1
        cells.append(int(np.argmax(np.diff(signs) != 0)))
    assert max(cells) - min(cells) <= 1


def test_config_round_trip(model):
    again = Model.from_config(model.config())
    assert again.f(0.37, 0.21) == pytest.approx(model.f(0.37, 0.21), abs=1e-16)


def test_adsorption_scale():
    small = reference_model(adsorption_scale=0.25)
    full = reference_model()
    assert small.a(0.8) == pytest.approx(0.25 * full.a(0.8), abs=1e-15)
    assert small.validated
