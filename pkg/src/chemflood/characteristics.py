"""Eigenstructure of the chemical flood system.

The characteristic matrix is upper triangular, so the two wave speeds come for
free:

    lambda_s = f_s(s, c)                  (saturation family)
    lambda_c = f(s, c) / (s + a_c(c))     (chemical family)

They coincide on the boundary s = 0 and on an interior curve, the coincidence
locus, which splits the unit square into a left region (lambda_s > lambda_c)
and a right region (lambda_s < lambda_c).  The chemical rarefaction field has
a single interior fixed point, a saddle, at the intersection of the locus with
the line f_c = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError, StructureError
from .model import State

# |lambda_s - lambda_c| below this (relative) threshold counts as "on the locus"
LOCUS_RTOL = 1e-10

OMEGA_L = "OmegaL"
OMEGA_R = "OmegaR"
LOCUS = "Locus"


def lambda_s(model, s, c):
    return model.flux.partials(s, c).f_s


def lambda_c(model, s, c):
    return model.flux.value(s, c) / (s + model.adsorption.a_c(c))


def speed_gap(model, s, c):
    """lambda_s - lambda_c; positive in the left region."""
    p = model.flux.partials(s, c)
    return p.f_s - p.f / (s + model.adsorption.a_c(c))


@dataclass(frozen=True)
class CharData:
    lambda_s: float
    lambda_c: float
    r_c: tuple  # chemical-family right eigenvector (-f_c, lambda_s - lambda_c)
    region: str


def region_of(model, s, c):
    """Region tag of an interior point; s = 0 is excluded from the locus."""
    ls = lambda_s(model, s, c)
    lc = lambda_c(model, s, c)
    gap = ls - lc
    if abs(gap) <= LOCUS_RTOL * max(1.0, abs(ls)) and s > 0.0:
        return LOCUS
    return OMEGA_L if gap > 0.0 else OMEGA_R


def char_data(model, u):
    """Characteristic speeds, chemical eigenvector and region tag at a state."""
    if not isinstance(u, State):
        u = State(*u)
    p = model.flux.partials(u.s, u.c)
    ls = p.f_s
    lc = p.f / (u.s + model.adsorption.a_c(u.c))
    gap = ls - lc
    if abs(gap) <= LOCUS_RTOL * max(1.0, abs(ls)) and u.s > 0.0:
        region = LOCUS
    else:
        region = OMEGA_L if gap > 0.0 else OMEGA_R
    return CharData(lambda_s=ls, lambda_c=lc, r_c=(-p.f_c, gap), region=region)


def coincidence_point(model, c, n_scan=256):
    """The interior root s of lambda_s(s,c) = lambda_c(s,c), bracketed away from 0.

    A sign scan over (0, 1) must find exactly one interior crossing; anything
    else means the model geometry is outside the supported class.
    """
    grid = np.linspace(0.0, 1.0, n_scan + 1)[1:]  # skip s = 0 (trivial equality)
    gap = np.array([speed_gap(model, s, c) for s in grid])
    sign = np.sign(gap)
    crossings = np.where(sign[:-1] * sign[1:] < 0)[0]
    if crossings.size != 1:
        raise StructureError(
            f"expected one coincidence root at c={c}, sign scan found {crossings.size}"
        )
    k = crossings[0]
    root = brentq(lambda s: speed_gap(model, s, c), grid[k], grid[k + 1], xtol=1e-15, rtol=8.9e-16)
    return float(root)


@dataclass(frozen=True)
class SaddlePoint:
    """Fixed point of the chemical rarefaction field with its linearization.

    The field is (s, c)' = (-f_c, lambda_s - lambda_c); at the fixed point the
    linearization matrix is

        [ 0      -f_cc                      ]
        [ f_ss    f a_cc / (s + a_c)^2      ]

    whose eigenvalues mu_+ > 0 > mu_- certify the saddle type.  dir_plus and
    dir_minus are unit tangents of the separatrices, oriented toward
    increasing c.
    """

    u_star: State
    mu_plus: float
    mu_minus: float
    dir_plus: tuple
    dir_minus: tuple

    @property
    def s(self):
        return self.u_star.s

    @property
    def c(self):
        return self.u_star.c


def _saddle_residual(model, s, c):
    p = model.flux.partials(s, c)
    a_c = model.adsorption.a_c(c)
    # second component in product form to avoid dividing by s + a_c
    return np.array([p.f_c, p.f_s * (s + a_c) - p.f])


def _saddle_jacobian(model, s, c):
    p = model.flux.partials(s, c)
    a_c = model.adsorption.a_c(c)
    a_cc = model.adsorption.a_cc(c)
    j00 = p.f_sc
    j01 = p.f_cc
    j10 = p.f_ss * (s + a_c)  # + f_s - f_s
    j11 = p.f_sc * (s + a_c) + p.f_s * a_cc - p.f_c
    return np.array([[j00, j01], [j10, j11]])


def find_saddle(model, max_iter=100):
    """Solve f_c = 0, lambda_s = lambda_c by damped Newton and linearize there.

    Seeded at the coincidence point on the row c = c*.  Raises NumericalError
    with the last iterate on non-convergence, StructureError if the curvature
    at the fixed point has the wrong signs for a saddle.
    """
    if model.c_star is None:
        raise StructureError("model must be validated (c_star unknown) before find_saddle")
    c = float(model.c_star)
    s = coincidence_point(model, c)
    x = np.array([s, c])
    for _ in range(max_iter):
        r = _saddle_residual(model, x[0], x[1])
        if np.max(np.abs(r)) < 1e-14:
            break
        J = _saddle_jacobian(model, x[0], x[1])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise NumericalError("singular Jacobian in saddle Newton", tuple(x)) from exc
        lam = 1.0
        norm0 = np.max(np.abs(r))
        while lam > 1e-6:
            xn = x + lam * step
            if 0.0 < xn[0] < 1.0 and 0.0 < xn[1] < 1.0:
                if np.max(np.abs(_saddle_residual(model, xn[0], xn[1]))) < norm0:
                    break
            lam *= 0.5
        x = x + lam * step
    else:
        raise NumericalError("saddle Newton did not converge", tuple(x))

    s, c = float(x[0]), float(x[1])
    p = model.flux.partials(s, c)
    a_c = model.adsorption.a_c(c)
    a_cc = model.adsorption.a_cc(c)
    if abs(p.f_c) > 1e-10 or abs(p.f_s - p.f / (s + a_c)) > 1e-10:
        raise NumericalError("saddle residuals above tolerance", (s, c))
    if p.f_cc <= 0.0:
        raise StructureError(f"f_cc(u*) = {p.f_cc} <= 0: not the supported geometry")
    if p.f_ss >= 0.0:
        raise StructureError(f"f_ss(u*) = {p.f_ss} >= 0: fixed point not on the concave side")

    trace = p.f * a_cc / (s + a_c) ** 2
    disc = trace * trace - 4.0 * p.f_ss * p.f_cc
    root = float(np.sqrt(disc))
    mu_plus = 0.5 * (trace + root)
    mu_minus = 0.5 * (trace - root)

    def unit_toward_increasing_c(mu):
        v = np.array([-p.f_cc, mu])
        v /= np.linalg.norm(v)
        return tuple(v if v[1] > 0 else -v)

    return SaddlePoint(
        u_star=State(s, c),
        mu_plus=mu_plus,
        mu_minus=mu_minus,
        dir_plus=unit_toward_increasing_c(mu_plus),
        dir_minus=unit_toward_increasing_c(mu_minus),
    )


def rarefaction_field(model, s, c):
    """Right-hand side (-f_c, lambda_s - lambda_c) of the chemical rarefaction flow."""
    p = model.flux.partials(s, c)
    return np.array([-p.f_c, p.f_s - p.f / (s + model.adsorption.a_c(c))])
