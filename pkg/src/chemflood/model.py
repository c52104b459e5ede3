"""Flux and adsorption function families for the two-phase chemical flood system.

The conserved quantities are the water saturation s and the chemical
concentration c, both living in the unit square.  A model bundles a fractional
flow function f(s, c) with an adsorption isotherm a(c), together with all the
partial derivatives the wave analysis needs.  Derivatives are analytic per
family; finite differences are used only as test oracles.

The structural requirements on (f, a) are:

  f(0,c) = 0 and f(1,c) = 1;                             (endpoint identities)
  f_s > 0 inside, f_s(0,c) = f_s(1,c) = 0;               (monotone in s)
  per c, a single inflection s_I(c): convex below it,
  concave above it (S-shape);
  f_c changes sign exactly once, from - to +, at an
  interior concentration c*;
  a(0) = 0, a_c > 0, a_cc < 0 inside.                    (Langmuir-like)

``validate_assumptions`` checks all of these on a sampling grid and records
every violation rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# Slack used when deciding whether a point is inside the unit square.
_EDGE = 1e-12
# Strict-inequality tolerance at interior sample points.
_STRICT = 1e-12
# Tolerance for boundary identities.
_BOUNDARY = 1e-9


@dataclass(frozen=True)
class State:
    """A point (s, c) in the unit square."""

    s: float
    c: float

    def __post_init__(self):
        if not (-_EDGE <= self.s <= 1.0 + _EDGE) or not (-_EDGE <= self.c <= 1.0 + _EDGE):
            raise DomainError(f"state ({self.s}, {self.c}) outside the unit square")

    def as_tuple(self):
        return (self.s, self.c)

    def is_close(self, other, tol=1e-12):
        return abs(self.s - other.s) <= tol and abs(self.c - other.c) <= tol


@dataclass(frozen=True)
class FluxValues:
    """f and its first and second partials at one point."""

    f: float
    f_s: float
    f_c: float
    f_ss: float
    f_sc: float
    f_cc: float


# ---------------------------------------------------------------------------
# mobility-ratio profiles m(c) entering the Corey flux
# ---------------------------------------------------------------------------


class QuadMobility:
    """m(c) = base + amp * c * (1 - c).

    With amp > 0 the profile peaks at c = 1/2, which makes f_c change sign
    there (f_c = -m'(c) * s^2 (1-s)^2 / D^2).
    """

    family = "quad"

    def __init__(self, base=1.0, amp=2.0):
        if base <= 0.0:
            raise DomainError("mobility base must be positive")
        self.base = float(base)
        self.amp = float(amp)

    def m(self, c):
        return self.base + self.amp * c * (1.0 - c)

    def m_c(self, c):
        return self.amp * (1.0 - 2.0 * np.asarray(c, dtype=float)) if np.ndim(c) else self.amp * (1.0 - 2.0 * c)

    def m_cc(self, c):
        return np.full_like(np.asarray(c, dtype=float), -2.0 * self.amp) if np.ndim(c) else -2.0 * self.amp

    def config(self):
        return {"family": self.family, "base": self.base, "amp": self.amp}


class LinearMobility:
    """m(c) = base + slope * c.  Monotone in c, so f never changes sign in c.

    Useful as a designed counterexample: it violates the single-sign-change
    requirement on f_c.
    """

    family = "linear"

    def __init__(self, base=1.0, slope=1.0):
        if base <= 0.0 or base + min(0.0, slope) <= 0.0:
            raise DomainError("mobility must stay positive on [0,1]")
        self.base = float(base)
        self.slope = float(slope)

    def m(self, c):
        return self.base + self.slope * c

    def m_c(self, c):
        return np.full_like(np.asarray(c, dtype=float), self.slope) if np.ndim(c) else self.slope

    def m_cc(self, c):
        return np.zeros_like(np.asarray(c, dtype=float)) if np.ndim(c) else 0.0

    def config(self):
        return {"family": self.family, "base": self.base, "slope": self.slope}


_MOBILITY_FAMILIES = {"quad": QuadMobility, "linear": LinearMobility}


# ---------------------------------------------------------------------------
# flux families
# ---------------------------------------------------------------------------


class CoreyFlux:
    """Quadratic Corey fractional flow f(s,c) = s^2 / (s^2 + m(c) (1-s)^2)."""

    family = "corey"

    def __init__(self, mobility):
        self.mobility = mobility

    def value(self, s, c):
        s = np.asarray(s, dtype=float) if np.ndim(s) else s
        m = self.mobility.m(c)
        den = s * s + m * (1.0 - s) ** 2
        return s * s / den

    def partials(self, s, c):
        """All six values (f, f_s, f_c, f_ss, f_sc, f_cc); array friendly."""
        m = self.mobility.m(c)
        mp = self.mobility.m_c(c)
        mpp = self.mobility.m_cc(c)
        w = 1.0 - s
        D = s * s + m * w * w
        D2 = D * D
        D3 = D2 * D
        f = s * s / D
        f_s = 2.0 * m * s * w / D2
        f_c = -mp * s * s * w * w / D2
        f_ss = 2.0 * m * ((1.0 - 2.0 * s) * D - 4.0 * s * w * (s - m * w)) / D3
        f_sc = 2.0 * mp * s * w * (s * s - m * w * w) / D3
        f_cc = -mpp * s * s * w * w / D2 + 2.0 * mp * mp * s * s * w ** 4 / D3
        return FluxValues(f=f, f_s=f_s, f_c=f_c, f_ss=f_ss, f_sc=f_sc, f_cc=f_cc)

    def config(self):
        return {"family": self.family, "m": self.mobility.config()}


_FLUX_FAMILIES = {"corey": CoreyFlux}


# ---------------------------------------------------------------------------
# adsorption families
# ---------------------------------------------------------------------------


class LangmuirAdsorption:
    """a(c) = scale * c / (1 + b c); concave, increasing, a(0) = 0.

    ``scale`` exists for vanishing-adsorption studies (scaling the isotherm
    toward zero shrinks the extra Riemann regions toward the zero-adsorption
    layout).
    """

    family = "langmuir"

    def __init__(self, b=1.0, scale=1.0):
        if b <= 0.0 or scale <= 0.0:
            raise DomainError("Langmuir parameters must be positive")
        self.b = float(b)
        self.scale = float(scale)

    def a(self, c):
        return self.scale * c / (1.0 + self.b * c)

    def a_c(self, c):
        return self.scale / (1.0 + self.b * c) ** 2

    def a_cc(self, c):
        return -2.0 * self.b * self.scale / (1.0 + self.b * c) ** 3

    def config(self):
        return {"family": self.family, "b": self.b, "scale": self.scale}


class LinearAdsorption:
    """a(c) = k c.  Violates strict concavity (a_cc = 0); counterexample family."""

    family = "linear"

    def __init__(self, k=0.5):
        if k <= 0.0:
            raise DomainError("linear adsorption slope must be positive")
        self.k = float(k)

    def a(self, c):
        return self.k * (np.asarray(c, dtype=float) if np.ndim(c) else c)

    def a_c(self, c):
        return np.full_like(np.asarray(c, dtype=float), self.k) if np.ndim(c) else self.k

    def a_cc(self, c):
        return np.zeros_like(np.asarray(c, dtype=float)) if np.ndim(c) else 0.0

    def config(self):
        return {"family": self.family, "k": self.k}


_ADSORPTION_FAMILIES = {"langmuir": LangmuirAdsorption, "linear": LinearAdsorption}


# ---------------------------------------------------------------------------
# the model itself
# ---------------------------------------------------------------------------


@dataclass
class Model:
    """Immutable-after-validation bundle of flux and adsorption evaluators.

    All evaluators are pure and safe for concurrent shared use.
    """

    flux: object
    adsorption: object
    c_star: float | None = None
    validated: bool = False
    _c1_norm: float | None = field(default=None, repr=False)

    # -- raw array-friendly accessors ------------------------------------
    def f(self, s, c):
        return self.flux.value(s, c)

    def f_s(self, s, c):
        return self.flux.partials(s, c).f_s

    def f_c(self, s, c):
        return self.flux.partials(s, c).f_c

    def a(self, c):
        return self.adsorption.a(c)

    def a_c(self, c):
        return self.adsorption.a_c(c)

    def a_cc(self, c):
        return self.adsorption.a_cc(c)

    def c1_norm(self):
        """max over a sampling grid of |f|, |f_s|, |f_c|; bounds admissible speeds."""
        if self._c1_norm is None:
            s = np.linspace(0.0, 1.0, 257)
            c = np.linspace(0.0, 1.0, 65)
            S, C = np.meshgrid(s, c, indexing="ij")
            p = self.flux.partials(S, C)
            self._c1_norm = float(
                max(np.max(np.abs(p.f)), np.max(np.abs(p.f_s)), np.max(np.abs(p.f_c)))
            )
        return self._c1_norm

    def config(self):
        return {"flux": self.flux.config(), "adsorption": self.adsorption.config()}

    def standard_params(self):
        """Scalar coefficients for compiled kernels, or None for nonstandard
        families.  Mobility is m(c) = m0 + m1 c (1 - c) + m2 c; adsorption is
        a(c) = scale c / (1 + b c)."""
        if type(self.flux).__name__ != "CoreyFlux":
            return None
        if type(self.adsorption).__name__ != "LangmuirAdsorption":
            return None
        mob = self.flux.mobility
        if type(mob).__name__ == "QuadMobility":
            m0, m1, m2 = mob.base, mob.amp, 0.0
        elif type(mob).__name__ == "LinearMobility":
            m0, m1, m2 = mob.base, 0.0, mob.slope
        else:
            return None
        return (float(m0), float(m1), float(m2),
                float(self.adsorption.b), float(self.adsorption.scale))

    @staticmethod
    def from_config(cfg):
        """Build a model from the JSON-style configuration document.

        Schema: {"flux": {"family": "corey", "m": {...}},
                 "adsorption": {"family": "langmuir", ...}}
        """
        try:
            fcfg = dict(cfg["flux"])
            acfg = dict(cfg["adsorption"])
        except (KeyError, TypeError) as exc:
            raise DomainError(f"model config missing section: {exc}") from exc

        ffam = fcfg.pop("family", "corey")
        if ffam not in _FLUX_FAMILIES:
            raise DomainError(f"unknown flux family {ffam!r}")
        mcfg = dict(fcfg.pop("m", {"family": "quad"}))
        mfam = mcfg.pop("family", "quad")
        if mfam not in _MOBILITY_FAMILIES:
            raise DomainError(f"unknown mobility family {mfam!r}")
        mobility = _MOBILITY_FAMILIES[mfam](**mcfg)
        flux = _FLUX_FAMILIES[ffam](mobility, **fcfg)

        afam = acfg.pop("family", "langmuir")
        if afam not in _ADSORPTION_FAMILIES:
            raise DomainError(f"unknown adsorption family {afam!r}")
        adsorption = _ADSORPTION_FAMILIES[afam](**acfg)
        return Model(flux=flux, adsorption=adsorption)


REFERENCE_CONFIG = {
    "flux": {"family": "corey", "m": {"family": "quad", "base": 1.0, "amp": 2.0}},
    "adsorption": {"family": "langmuir", "b": 1.0, "scale": 1.0},
}


def reference_model(validate=True, n_grid=64, adsorption_scale=1.0):
    """The Corey/Langmuir model used throughout the tests and demos."""
    cfg = {
        "flux": {"family": "corey", "m": {"family": "quad", "base": 1.0, "amp": 2.0}},
        "adsorption": {"family": "langmuir", "b": 1.0, "scale": adsorption_scale},
    }
    model = Model.from_config(cfg)
    if validate:
        report = validate_assumptions(model, n_grid)
        if not report.passed:
            raise DomainError(f"reference model failed validation: {report.violations}")
    return model


# ---------------------------------------------------------------------------
# point evaluation with domain checks
# ---------------------------------------------------------------------------


def eval_flux(model, u):
    """Evaluate f and all partials at a state, rejecting points off the unit square."""
    if not isinstance(u, State):
        u = State(*u)
    return model.flux.partials(u.s, u.c)


def eval_adsorption(model, c):
    """Evaluate (a, a_c, a_cc) at a concentration in [0, 1]."""
    if not (-_EDGE <= c <= 1.0 + _EDGE):
        raise DomainError(f"concentration {c} outside [0, 1]")
    return (model.adsorption.a(c), model.adsorption.a_c(c), model.adsorption.a_cc(c))


# ---------------------------------------------------------------------------
# assumption validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    condition: str
    point: tuple
    detail: str


@dataclass
class ValidationReport:
    passed: bool
    violations: list
    c_star: float | None
    inflection: np.ndarray  # rows (c, s_I(c)); empty when the S-shape check failed
    f3prime_ok: bool
    s_convex: float | None  # largest s below which f is convex for every sampled c
    n_grid: int

    def summary(self):
        lines = [f"validation: {'PASS' if self.passed else 'FAIL'} (grid {self.n_grid})"]
        if self.c_star is not None:
            lines.append(f"  c* = {self.c_star:.12g}")
        for v in self.violations:
            lines.append(f"  violated {v.condition} at {v.point}: {v.detail}")
        return "\n".join(lines)


def _sign_pattern(values, tol):
    """Collapse a 1-d array to its sequence of strict signs, dropping near-zeros."""
    signs = []
    for v in values:
        if v > tol:
            s = 1
        elif v < -tol:
            s = -1
        else:
            continue
        if not signs or signs[-1] != s:
            signs.append(s)
    return signs


def validate_assumptions(model, n_grid=64):
    """Check the structural assumptions on an n_grid x n_grid sample.

    Violations are report entries, not exceptions.  On success the model is
    marked validated and its c* is stored.
    """
    if n_grid < 32:
        raise DomainError("n_grid must be at least 32")

    violations = []
    s_int = np.linspace(0.0, 1.0, n_grid + 2)[1:-1]
    c_int = np.linspace(0.0, 1.0, n_grid + 2)[1:-1]
    c_all = np.concatenate(([0.0], c_int, [1.0]))

    # endpoint identities and boundary slopes
    for c in c_all:
        p0 = model.flux.partials(0.0, c)
        p1 = model.flux.partials(1.0, c)
        if abs(p0.f) > _BOUNDARY:
            violations.append(Violation("f(0,c)=0", (0.0, float(c)), f"f={p0.f!r}"))
        if abs(p1.f - 1.0) > _BOUNDARY:
            violations.append(Violation("f(1,c)=1", (1.0, float(c)), f"f={p1.f!r}"))
        if abs(p0.f_s) > _BOUNDARY:
            violations.append(Violation("f_s(0,c)=0", (0.0, float(c)), f"f_s={p0.f_s!r}"))
        if abs(p1.f_s) > _BOUNDARY:
            violations.append(Violation("f_s(1,c)=0", (1.0, float(c)), f"f_s={p1.f_s!r}"))

    S, C = np.meshgrid(s_int, c_all, indexing="ij")
    p = model.flux.partials(S, C)

    # strict monotonicity in s at interior samples
    bad = np.argwhere(p.f_s <= _STRICT)
    if bad.size:
        i, j = bad[0]
        violations.append(
            Violation("f_s>0", (float(s_int[i]), float(c_all[j])), f"f_s={p.f_s[i, j]!r}")
        )

    # S-shape: per c, sign of f_ss changes exactly once, + then -
    inflection = []
    s_shape_ok = True
    for j, c in enumerate(c_all):
        col = p.f_ss[:, j]
        pattern = _sign_pattern(col, _STRICT)
        if pattern != [1, -1]:
            s_shape_ok = False
            violations.append(
                Violation("single inflection in s", (None, float(c)), f"sign pattern {pattern}")
            )
            continue
        pos = np.where(col > _STRICT)[0][-1]
        neg = np.where(col < -_STRICT)[0]
        neg = neg[neg > pos]
        hi = s_int[neg[0]] if neg.size else 1.0
        inflection.append((float(c), float(0.5 * (s_int[pos] + hi))))
    inflection = np.asarray(inflection) if inflection else np.empty((0, 2))

    # (F3')-style convexity near s = 0, reported separately
    s_convex = None
    f3prime_ok = False
    if inflection.size:
        s_convex = float(np.min(inflection[:, 1]))
        f3prime_ok = s_convex > _STRICT
    else:
        first_convex = []
        for j in range(c_all.size):
            col = p.f_ss[:, j]
            k = np.argmax(col <= _STRICT)  # first non-convex sample
            if col[0] > _STRICT and k > 0:
                first_convex.append(s_int[k - 1])
            else:
                first_convex.append(0.0)
        s_convex = float(np.min(first_convex))
        f3prime_ok = s_convex > _STRICT

    # single sign change of f_c in c, same cell for every s row
    c_star = None
    Si, Ci = np.meshgrid(s_int, c_int, indexing="ij")
    fc = model.flux.partials(Si, Ci).f_c
    change_cells = []
    fc_ok = True
    for i, s in enumerate(s_int):
        row = fc[i, :]
        pattern = _sign_pattern(row, _STRICT)
        if pattern != [-1, 1]:
            fc_ok = False
            violations.append(
                Violation("f_c sign change - to +", (float(s), None), f"sign pattern {pattern}")
            )
            break
        last_neg = np.where(row < -_STRICT)[0][-1]
        change_cells.append(last_neg)
    if fc_ok:
        cells = np.asarray(change_cells)
        if cells.max() - cells.min() > 1:
            violations.append(
                Violation(
                    "common c* across s rows",
                    (None, None),
                    f"sign-change cell varies over {cells.min()}..{cells.max()}",
                )
            )
        else:
            k = int(np.bincount(cells).argmax())
            lo, hi = c_int[k], c_int[min(k + 1, c_int.size - 1)]
            c_star = _refine_c_star(model, lo, hi)

    # adsorption
    a0 = model.adsorption.a(0.0)
    if abs(a0) > _BOUNDARY:
        violations.append(Violation("a(0)=0", (0.0,), f"a={a0!r}"))
    ac = model.adsorption.a_c(c_int)
    acc = model.adsorption.a_cc(c_int)
    bad = np.where(ac <= _STRICT)[0]
    if bad.size:
        violations.append(Violation("a_c>0", (float(c_int[bad[0]]),), f"a_c={ac[bad[0]]!r}"))
    bad = np.where(acc >= -_STRICT)[0]
    if bad.size:
        violations.append(Violation("a_cc<0", (float(c_int[bad[0]]),), f"a_cc={acc[bad[0]]!r}"))

    passed = not violations
    report = ValidationReport(
        passed=passed,
        violations=violations,
        c_star=c_star,
        inflection=inflection,
        f3prime_ok=f3prime_ok,
        s_convex=s_convex,
        n_grid=n_grid,
    )
    model.validated = passed
    model.c_star = c_star
    return report


def _refine_c_star(model, lo, hi, s_probe=0.5):
    """Bisect the sign change of f_c(s_probe, .) to locate c*."""
    from scipy.optimize import brentq

    g = lambda c: model.flux.partials(s_probe, c).f_c
    glo, ghi = g(lo), g(hi)
    # widen a little if the bracketing cell was off by roundoff
    step = (hi - lo) if hi > lo else 1e-3
    tries = 0
    while glo * ghi > 0 and tries < 8:
        lo = max(0.0 + 1e-9, lo - step)
        hi = min(1.0 - 1e-9, hi + step)
        glo, ghi = g(lo), g(hi)
        tries += 1
    if glo * ghi > 0:
        return None
    return float(brentq(g, lo, hi, xtol=1e-14))
