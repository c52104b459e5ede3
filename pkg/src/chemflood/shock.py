"""Rankine-Hugoniot algebra and travelling-wave admissibility of shocks.

A discontinuity between u- and u+ moving at speed v must satisfy

    v [s] = [f],        v [c s + a(c)] = [c f],

and for c jumps this pins the speed to v = f(u+)/(s+ + h) with h = [a]/[c];
the three points (-h, 0), (s+, f+), (s-, f-) are then collinear.

Admissibility follows the vanishing-viscosity rule: the jump must be the limit
of travelling waves of the dissipative system.  After integrating the profile
equations once, the wave solves

    s_xi = (f(s,c) - v (s + d1)) / A(s,c),
    c_xi = (v / kappa) (d1 c - d2 - a(c)),          kappa = eps_d / eps_c,

whose critical points sit on the two rows c = c-, c = c+ at the intersections
of f(., c) with the chord line v (s + d1).  Between the rows c_xi < 0 (the
chord of a concave isotherm lies below it), so orbits are graphs s(c) and the
connection question reduces to a scalar shooting problem in c.  Saddle-saddle
connections exist only at one speed per kappa; that undercompressive (crossing)
jump is found here by bisection on v.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import (
    ConnectionNotFoundError,
    DegenerateStateError,
    RankineHugoniotError,
    StructureError,
)
from .model import State
from .characteristics import lambda_c, lambda_s
from .rarefaction import _chord_roots

S_SHOCK = "SShock"
C_SHOCK = "CShock"

LAX1 = "Lax1"
LAX2 = "Lax2"
OVERCOMPRESSIVE = "Overcompressive"
CROSSING = "Crossing"
DEGENERATE = "Degenerate"
# characteristic patterns outside the four standard ones (never admissible)
EXPANSIVE = "Expansive"

RH_TOL = 1e-10
# |f_s - v| below this marks a tangency (saddle-node) critical point
TANGENT_TOL = 1e-10


@dataclass(frozen=True)
class Shock:
    """An RH-consistent discontinuity with its travelling-wave bookkeeping."""

    u_minus: State
    u_plus: State
    v: float
    family: str
    classification: str
    h: float | None  # [a]/[c], None for saturation shocks
    d1: float
    d2: float

    def states(self):
        return self.u_minus, self.u_plus


def rh_speed(model, u_minus, u_plus, tol=RH_TOL):
    """Shock speed from the jump conditions, with an over-determination check.

    For c jumps the pair (v[s]=[f], v[cs+a]=[cf]) is equivalent to the
    collinearity of (-h,0), (s+,f+), (s-,f-); the residual of the first jump
    condition is re-checked and inconsistent pairs are rejected.
    """
    if not isinstance(u_minus, State):
        u_minus = State(*u_minus)
    if not isinstance(u_plus, State):
        u_plus = State(*u_plus)
    if u_minus.is_close(u_plus):
        raise DegenerateStateError(f"identical states {u_minus}")
    fm = model.flux.value(u_minus.s, u_minus.c)
    fp = model.flux.value(u_plus.s, u_plus.c)
    if abs(u_plus.c - u_minus.c) > 0.0:
        h = (model.a(u_plus.c) - model.a(u_minus.c)) / (u_plus.c - u_minus.c)
        v = fp / (u_plus.s + h)
        if abs(v * (u_plus.s - u_minus.s) - (fp - fm)) > tol:
            raise RankineHugoniotError(
                f"states {u_minus} -> {u_plus} violate the jump conditions"
            )
        return v
    if u_plus.s == u_minus.s:
        raise DegenerateStateError("zero jump in both components")
    return (fp - fm) / (u_plus.s - u_minus.s)


def _d_constants(model, u_minus, u_plus, v):
    """Integration constants of the travelling-wave system."""
    if abs(u_plus.c - u_minus.c) > 0.0:
        cm, cp = u_minus.c, u_plus.c
        am, ap = model.a(cm), model.a(cp)
        d1 = (am - ap) / (cm - cp)
        d2 = (cp * am - cm * ap) / (cm - cp)
    else:
        c = u_minus.c
        fm = model.flux.value(u_minus.s, c)
        d1 = fm / v - u_minus.s
        d2 = d1 * c - model.a(c)
    return d1, d2


def make_shock(model, u_minus, u_plus):
    """Build the Shock record (speed, constants, classification) for a pair."""
    if not isinstance(u_minus, State):
        u_minus = State(*u_minus)
    if not isinstance(u_plus, State):
        u_plus = State(*u_plus)
    v = rh_speed(model, u_minus, u_plus)
    family = C_SHOCK if abs(u_plus.c - u_minus.c) > 0.0 else S_SHOCK
    h = None
    if family == C_SHOCK:
        h = (model.a(u_plus.c) - model.a(u_minus.c)) / (u_plus.c - u_minus.c)
    d1, d2 = _d_constants(model, u_minus, u_plus, v)
    cls = _classify(model, u_minus, u_plus, v)
    return Shock(u_minus=u_minus, u_plus=u_plus, v=v, family=family,
                 classification=cls, h=h, d1=d1, d2=d2)


def _classify(model, u_minus, u_plus, v, tol=1e-10):
    lm = sorted((lambda_s(model, u_minus.s, u_minus.c), lambda_c(model, u_minus.s, u_minus.c)))
    lp = sorted((lambda_s(model, u_plus.s, u_plus.c), lambda_c(model, u_plus.s, u_plus.c)))
    eps = tol * max(1.0, abs(v))
    if any(abs(lam - v) <= eps for lam in lm + lp):
        return DEGENERATE
    l1m, l2m = lm
    l1p, l2p = lp
    if l1m > v > l1p and v < l2m and v < l2p:
        return LAX1
    if l2m > v > l2p and v > l1m and v > l1p:
        return LAX2
    if l1m > v > l1p and l2m > v > l2p:
        return OVERCOMPRESSIVE
    if l2m > v > l1m and l1p < v < l2p:
        return CROSSING
    return EXPANSIVE


def classify_shock(model, shock):
    """Characteristic-path configuration of an RH-consistent shock."""
    return _classify(model, shock.u_minus, shock.u_plus, shock.v)


def critical_shock_value(model, u, h):
    """Second intersection of f(., c) with the chord line through (-h, 0) and u.

    Returns None when the line clears the graph elsewhere; a tangency at u
    (double root) degenerates to u.s itself.
    """
    if not isinstance(u, State):
        u = State(*u)
    if h <= 0.0:
        raise StructureError("chord offset h must be positive")
    v = model.flux.value(u.s, u.c) / (u.s + h)
    p = model.flux.partials(u.s, u.c)
    if abs(p.f_s - v) <= TANGENT_TOL:
        return u.s
    roots = _chord_roots(model, u.c, v, h, skip=u.s)
    if not roots:
        return None
    if len(roots) > 1:
        raise StructureError(f"multiple chord intersections at {u}: {roots}")
    return roots[0]


def tw_field(model, v, d1, d2, kappa, A=1.0):
    """Vector-field evaluator (s, c) -> (s_xi, c_xi) of the travelling-wave flow."""
    if kappa <= 0.0:
        raise StructureError("kappa must be positive")

    def field(s, c):
        s_xi = (model.flux.value(s, c) - v * (s + d1)) / A
        c_xi = (v / kappa) * (d1 * c - d2 - model.a(c))
        return np.array([s_xi, c_xi])

    return field


def row_roots(model, c, v, d1):
    """Critical saturations on a row: roots of g(s) = f(s, c) - v (s + d1) in (0, 1].

    g' = f_s - v has at most two zeros (f_s is unimodal for an S-shaped flux),
    so bracketing g between its extrema finds every root even when a pair is
    about to merge at a tangency.
    """

    def g(s):
        return model.flux.value(s, c) - v * (s + d1)

    def gp(s):
        return model.flux.partials(s, c).f_s - v

    # extrema of g: f_s rises to its max at the inflection, then falls
    peak = _inflection(model, c)
    nodes = [0.0]
    if gp(peak) > 0.0:
        if gp(1e-9) < 0.0:
            nodes.append(float(brentq(gp, 1e-9, peak, xtol=1e-15)))
        if gp(1.0 - 1e-12) < 0.0:
            nodes.append(float(brentq(gp, peak, 1.0 - 1e-12, xtol=1e-15)))
    nodes.append(1.0)
    nodes = sorted(nodes)

    out = []
    for a, b in zip(nodes[:-1], nodes[1:]):
        ga, gb = g(a), g(b)
        if ga == 0.0 and a > 0.0:
            out.append(float(a))
        if ga * gb < 0.0:
            out.append(float(brentq(g, a, b, xtol=1e-15)))
    if g(1.0) == 0.0:
        out.append(1.0)
    return sorted(set(out))


_INFLECTION_CACHE = {}


def _inflection(model, c):
    """The saturation where f(., c) turns concave."""
    key = (id(model), round(float(c), 14))
    hit = _INFLECTION_CACHE.get(key)
    if hit is not None:
        return hit
    g = lambda s: model.flux.partials(s, c).f_ss
    lo, hi = 1e-6, 1.0 - 1e-6
    if g(lo) <= 0.0:
        out = lo
    elif g(hi) >= 0.0:
        out = hi
    else:
        out = float(brentq(g, lo, hi, xtol=1e-14))
    _INFLECTION_CACHE[key] = out
    return out


def tangent_speed(model, c, h):
    """Largest chord slope from (-h, 0) to the graph of f(., c), and its abscissa.

    This is the unique maximum of f/(s+h); at the maximizer the chord is
    tangent to the graph.
    """

    def g(s):
        p = model.flux.partials(s, c)
        return p.f_s * (s + h) - p.f

    lo, hi = 1e-9, 1.0 - 1e-12
    glo, ghi = g(lo), g(hi)
    if glo <= 0 or ghi >= 0:
        raise StructureError(f"tangent bracketing failed at c={c}")
    s_tan = float(brentq(g, lo, hi, xtol=1e-14))
    return model.flux.value(s_tan, c) / (s_tan + h), s_tan


# ---------------------------------------------------------------------------
# reduced shooting machinery
# ---------------------------------------------------------------------------

# manifold launch/landing offset in c
_DELTA = 1e-4
# landing tolerance for trajectories converging onto a node (power-law rate)
_NODE_TOL = 1e-3


def _manifold_slope(model, s0, c0, v, d1, kappa, A=1.0):
    """ds/dc of the invariant manifold through a row critical point.

    Eigen-data of the triangular Jacobian: mu_s = (f_s - v)/A in the s
    direction, mu_c = (v/kappa)(d1 - a_c) transverse to the row; the non-row
    eigenvector is (f_c/A, mu_c - mu_s).
    """
    p = model.flux.partials(s0, c0)
    mu_s = (p.f_s - v) / A
    mu_c = (v / kappa) * (d1 - model.a_c(c0))
    return (p.f_c / A) / (mu_c - mu_s), mu_s, mu_c


_TRACE_KERNEL = None


def _build_trace_kernel():
    """Adaptive Cash-Karp integrator for the reduced ds/dc flow, compiled for
    the standard Corey/Langmuir families."""
    global _TRACE_KERNEL
    if _TRACE_KERNEL is not None:
        return _TRACE_KERNEL
    from numba import njit

    @njit(cache=True)
    def kernel(s0, c0, c1, v, d1, d2, kappa, A, m0, m1, m2, ab, ascale, rtol, atol):
        def rhs(c, s):
            ss = min(max(s, 0.0), 1.0)
            mm = m0 + m1 * c * (1.0 - c) + m2 * c
            w = 1.0 - ss
            D = ss * ss + mm * w * w
            f = ss * ss / D
            num = (f - v * (ss + d1)) / A
            den = (v / kappa) * (d1 * c - d2 - ascale * c / (1.0 + ab * c))
            return num / den

        c = c0
        s = s0
        direction = 1.0 if c1 > c0 else -1.0
        h = direction * max(abs(c1 - c0) / 64.0, 1e-12)
        span_left = abs(c1 - c0)
        while span_left > 1e-14:
            if abs(h) > span_left:
                h = direction * span_left
            k1 = rhs(c, s)
            k2 = rhs(c + 0.2 * h, s + h * 0.2 * k1)
            k3 = rhs(c + 0.3 * h, s + h * (0.075 * k1 + 0.225 * k2))
            k4 = rhs(c + 0.6 * h, s + h * (0.3 * k1 - 0.9 * k2 + 1.2 * k3))
            k5 = rhs(c + h, s + h * (-11.0 / 54.0 * k1 + 2.5 * k2
                                     - 70.0 / 27.0 * k3 + 35.0 / 27.0 * k4))
            k6 = rhs(c + 0.875 * h, s + h * (
                1631.0 / 55296.0 * k1 + 175.0 / 512.0 * k2 + 575.0 / 13824.0 * k3
                + 44275.0 / 110592.0 * k4 + 253.0 / 4096.0 * k5))
            s5 = s + h * (37.0 / 378.0 * k1 + 250.0 / 621.0 * k3
                          + 125.0 / 594.0 * k4 + 512.0 / 1771.0 * k6)
            s4 = s + h * (2825.0 / 27648.0 * k1 + 18575.0 / 48384.0 * k3
                          + 13525.0 / 55296.0 * k4 + 277.0 / 14336.0 * k5 + 0.25 * k6)
            err = abs(s5 - s4)
            tol = atol + rtol * abs(s5)
            if err <= tol:
                s = s5
                c += h
                span_left = abs(c1 - c)
                if s < -1e-9:
                    return 0.0, 1
                if s > 1.0 + 1e-9:
                    return 1.0, 2
            if err > 0.0:
                fac = 0.9 * (tol / err) ** 0.2
                if fac < 0.2:
                    fac = 0.2
                elif fac > 5.0:
                    fac = 5.0
                h *= fac
            else:
                h *= 5.0
            if abs(h) < 1e-15:
                return s, 0
        return s, 0

    _TRACE_KERNEL = kernel
    return kernel


def _trace_reduced(model, v, d1, d2, kappa, s_from, c_from, c_to, A=1.0,
                   rtol=1e-10, atol=1e-12):
    """Integrate ds/dc of the reduced travelling-wave flow between two rows.

    Returns (s_end, status) with status "ok", "exit_low" or "exit_high".
    Standard model families run through a compiled scalar integrator.
    """
    params = model.standard_params()
    if params is not None:
        try:
            kernel = _build_trace_kernel()
        except Exception:
            kernel = None
        if kernel is not None:
            m0, m1, m2, ab, ascale = params
            s_end, code = kernel(s_from, c_from, c_to, v, d1, d2, kappa, A,
                                 m0, m1, m2, ab, ascale, rtol, atol)
            return float(s_end), ("ok", "exit_low", "exit_high")[code]

    def rhs(c, y):
        s = min(max(y[0], 0.0), 1.0)
        num = (model.flux.value(s, c) - v * (s + d1)) / A
        den = (v / kappa) * (d1 * c - d2 - model.a(c))
        return (num / den,)

    def ev_low(c, y):
        return y[0] + 1e-9

    ev_low.terminal = True

    def ev_high(c, y):
        return y[0] - 1.0 - 1e-9

    ev_high.terminal = True

    sol = solve_ivp(rhs, (c_from, c_to), (s_from,), method="RK45",
                    rtol=rtol, atol=atol, events=(ev_low, ev_high))
    if sol.status == 1:
        return (0.0, "exit_low") if sol.t_events[0].size else (1.0, "exit_high")
    if not sol.success:
        raise ConnectionNotFoundError(f"trajectory integration failed: {sol.message}")
    return float(sol.y[0][-1]), "ok"


def _saddle_roots_for_rows(model, c_minus, c_plus, v, d1):
    """Saddle saturations on the two rows of a c-shock with speed v.

    On the c- row the transverse eigenvalue is positive, so the saddle is the
    root with f_s < v (upper of two); on the c+ row it is negative and the
    saddle has f_s > v (lower).  Returns (s_minus, s_plus) or None when a row
    lacks the required root.
    """
    rm = row_roots(model, c_minus, v, d1)
    rp = row_roots(model, c_plus, v, d1)
    s_minus = None
    for r in rm:
        if model.flux.partials(r, c_minus).f_s < v:
            s_minus = r  # keep the last (upper) qualifying root
    s_plus = None
    for r in rp:
        if model.flux.partials(r, c_plus).f_s > v:
            s_plus = r
            break
    if s_minus is None or s_plus is None:
        return None
    return s_minus, s_plus


_SECTION_CACHE = {}


def _matching_section(model, c_minus, c_plus, h):
    """The row between c+ and c- where the tangent chord speed is smallest.

    Both halves of the saddle-saddle shooting ride attracting nullcline
    branches up to their fold and fall ballistically; matching on this row
    keeps the expanding stretch of the orbit out of both integrations.  The
    section is clamped away from the end rows: integrating a matching leg into
    the power-law neighbourhood of a row amplifies the launch offset without
    bound.  The returned speed is the true minimum (bracket floor).
    """
    key = (id(model), round(c_minus, 14), round(c_plus, 14), round(h, 14))
    hit = _SECTION_CACHE.get(key)
    if hit is not None:
        return hit
    from scipy.optimize import minimize_scalar

    res = minimize_scalar(lambda c: tangent_speed(model, c, h)[0],
                          bounds=(c_plus, c_minus), method="bounded",
                          options={"xatol": 1e-10})
    width = c_minus - c_plus
    c_sec = float(np.clip(res.x, c_plus + 0.08 * width, c_minus - 0.08 * width))
    out = (c_sec, float(res.fun))
    _SECTION_CACHE[key] = out
    return out


def _crossing_miss(model, c_minus, c_plus, v, d1, d2, kappa, A=1.0, delta=_DELTA,
                   c_section=None):
    """Signed miss distance of the saddle-saddle connection at speed v.

    Two-sided: the unstable manifold of the c- saddle is integrated down and
    the stable manifold of the c+ saddle is integrated up, both to the
    matching section; the miss is the s gap there.
    """
    pair = _saddle_roots_for_rows(model, c_minus, c_plus, v, d1)
    if pair is None:
        return None
    if c_section is None:
        c_section = _matching_section(model, c_minus, c_plus, d1)[0]
    s_m, s_p = pair
    slope_m, _, _ = _manifold_slope(model, s_m, c_minus, v, d1, kappa, A)
    slope_p, _, _ = _manifold_slope(model, s_p, c_plus, v, d1, kappa, A)
    # keep the launch offset well inside the gap to the neighbouring root
    d_m = _offset_for(model, c_minus, v, d1, s_m, slope_m, delta)
    d_p = _offset_for(model, c_plus, v, d1, s_p, slope_p, delta)
    s_f, status_f = _trace_reduced(model, v, d1, d2, kappa, s_m - slope_m * d_m,
                                   c_minus - d_m, c_section, A)
    if status_f != "ok":
        return -2.0 if status_f == "exit_low" else 2.0
    s_b, status_b = _trace_reduced(model, v, d1, d2, kappa, s_p + slope_p * d_p,
                                   c_plus + d_p, c_section, A)
    if status_b != "ok":
        return 2.0 if status_b == "exit_low" else -2.0
    return s_f - s_b


def _offset_for(model, c, v, d1, s0, slope, base=_DELTA):
    sep = min((abs(r - s0) for r in row_roots(model, c, v, d1) if abs(r - s0) > 1e-13),
              default=1.0)
    if abs(slope) * base <= 0.25 * sep:
        return base
    return max(0.25 * sep / abs(slope), 1e-9)


def connect_undercompressive(model, c_L, c_R, kappa, A=1.0):
    """The unique crossing c-shock between rows c_L > c* > c_R at the given kappa.

    Shooting: bisection on the speed v of the signed miss distance of the
    trajectory launched along the unstable manifold of the c_L-row saddle,
    measured against the stable manifold of the c_R-row saddle.  The speed
    bracket is (1/(1+h), min of the two tangent speeds); the miss distance is
    scanned on a refining grid until it changes sign.
    """
    if not c_L > c_R:
        raise StructureError("undercompressive connection requires c_L > c_R")
    if kappa <= 0.0:
        raise StructureError("kappa must be positive")
    a_L, a_R = model.a(c_L), model.a(c_R)
    h = (a_R - a_L) / (c_R - c_L)
    d1 = h
    d2 = (c_R * a_L - c_L * a_R) / (c_L - c_R)
    v1 = 1.0 / (1.0 + h)
    v_tan_L, _ = tangent_speed(model, c_L, h)
    v_tan_R, _ = tangent_speed(model, c_R, h)
    c_section, v_tan_min = _matching_section(model, c_L, c_R, h)
    v_lo = max(v1, v_tan_min) * (1.0 + 1e-12)
    v_hi = min(v_tan_L, v_tan_R) * (1.0 - 1e-9)
    if v_hi <= v_lo:
        raise ConnectionNotFoundError(f"empty speed bracket for ({c_L}, {c_R})")

    miss = lambda v: _crossing_miss(model, c_L, c_R, v, d1, d2, kappa, A,
                                    c_section=c_section)

    def find_bracket(grids):
        for vs in grids:
            vals = []
            for v in vs:
                mval = miss(v)
                vals.append(np.nan if mval is None else mval)
            vals = np.asarray(vals)
            ok = ~np.isnan(vals)
            idx = np.where(ok[:-1] & ok[1:] & (np.sign(vals[:-1]) * np.sign(vals[1:]) < 0))[0]
            if idx.size:
                k = idx[0]
                return (vs[k], vs[k + 1])
        return None

    uniform = [np.linspace(v_lo, v_hi, n) for n in (17, 65, 257)]
    # connections pinch toward the tangent bound for small kappa; refine there
    geo = v_hi - (v_hi - v_lo) * 0.5 ** np.arange(1, 45)
    pinch = [np.concatenate((geo[::-1], [v_hi]))]
    bracket = find_bracket(uniform) or find_bracket(pinch)
    if bracket is None:
        raise ConnectionNotFoundError(
            f"no sign change of the miss distance on [{v_lo}, {v_hi}] "
            f"for (c_L, c_R, kappa) = ({c_L}, {c_R}, {kappa})"
        )

    v_star = float(brentq(miss, bracket[0], bracket[1], xtol=1e-13))
    residual = miss(v_star)
    if residual is None or abs(residual) > 1e-8:
        raise ConnectionNotFoundError(f"shooting residual {residual} above tolerance")

    s_m, s_p = _saddle_roots_for_rows(model, c_L, c_R, v_star, d1)
    u_minus = State(s_m, c_L)
    u_plus = State(s_p, c_R)
    # Rankine-Hugoniot re-verification
    fm = model.flux.value(s_m, c_L)
    fp = model.flux.value(s_p, c_R)
    r1 = v_star * (s_p - s_m) - (fp - fm)
    r2 = v_star * ((c_R * s_p + a_R) - (c_L * s_m + a_L)) - (c_R * fp - c_L * fm)
    if max(abs(r1), abs(r2)) > RH_TOL:
        raise ConnectionNotFoundError(f"RH residual {max(abs(r1), abs(r2))} above tolerance")
    cls = _classify(model, u_minus, u_plus, v_star)
    return Shock(u_minus=u_minus, u_plus=u_plus, v=v_star, family=C_SHOCK,
                 classification=cls, h=h, d1=d1, d2=d2)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------


def oleinik_condition(model, c, s_minus, s_plus, n=512, tol=1e-9):
    """Chord condition for a saturation shock: every intermediate chord from
    s- must be at least as steep as the shock, (f(sigma)-f(s-))/(sigma-s-) >= v."""
    v = (model.flux.value(s_plus, c) - model.flux.value(s_minus, c)) / (s_plus - s_minus)
    sigmas = np.linspace(s_minus, s_plus, n + 2)[1:-1]
    chords = (model.flux.value(sigmas, c) - model.flux.value(s_minus, c)) / (sigmas - s_minus)
    worst = np.min(chords) - v
    if worst > tol:
        return True
    if worst < -tol:
        return False
    # local refinement around the contact point
    k = int(np.argmin(chords))
    lo = sigmas[max(k - 1, 0)]
    hi = sigmas[min(k + 1, len(sigmas) - 1)]
    from scipy.optimize import minimize_scalar

    g = lambda sig: (model.flux.value(sig, c) - model.flux.value(s_minus, c)) / (sig - s_minus) - v
    res = minimize_scalar(g, bounds=(lo, hi), method="bounded")
    return bool(res.fun >= -tol)


def is_admissible(model, shock, kappa=1.0, A=1.0):
    """Vanishing-viscosity admissibility verdict with a reason string.

    Fast rejections first (speed bounds, s- = 0, rising c, vacuum with a c
    jump); saturation shocks then face the chord condition and c jumps the
    travelling-wave connection test between the corresponding critical points
    of the profile flow at the given kappa.
    """
    um, up = shock.u_minus, shock.u_plus
    v = shock.v
    if not (0.0 < v < model.c1_norm()):
        return False, "speed outside (0, C1 norm of f)"
    if um.s == 0.0:
        return False, "left saturation is zero"
    if up.c > um.c:
        return False, "concentration rises across the shock"
    if up.s == 0.0 and up.c != um.c:
        return False, "vacuum right state with a concentration jump"

    if shock.family == S_SHOCK:
        ok = oleinik_condition(model, um.c, um.s, up.s)
        return (ok, "chord condition" + ("" if ok else " violated"))

    return _c_shock_connection(model, shock, kappa, A)


def _c_shock_connection(model, shock, kappa, A=1.0, delta=_DELTA):
    """Existence of a profile orbit between the two endpoint critical points."""
    um, up = shock.u_minus, shock.u_plus
    v, d1, d2 = shock.v, shock.d1, shock.d2
    pm = model.flux.partials(um.s, um.c)
    pp = model.flux.partials(up.s, up.c)
    # endpoint residuals: both states must be critical points of the profile flow
    if abs(pm.f - v * (um.s + d1)) > 1e-8 or abs(pp.f - v * (up.s + d1)) > 1e-8:
        return False, "endpoints are not critical points of the profile flow"
    gm = pm.f_s - v
    gp = pp.f_s - v

    if abs(gm) <= TANGENT_TOL and abs(gp) <= TANGENT_TOL:
        return True, "doubly tangent configuration"

    if gm < -TANGENT_TOL and gp > TANGENT_TOL:
        # saddle -> saddle: knife-edge connection, re-shoot at this v
        m = _crossing_miss(model, um.c, up.c, v, d1, d2, kappa, A, delta)
        ok = m is not None and abs(m) < 1e-6
        return (ok, "saddle-saddle connection" + ("" if ok else " misses"))

    if gm < -TANGENT_TOL or abs(gm) <= TANGENT_TOL:
        # upper-row saddle (or saddle-node) -> sink: follow the unstable manifold down
        slope_m, _, _ = _manifold_slope(model, um.s, um.c, v, d1, kappa, A)
        launch = um.s - slope_m * delta
        s_end, status = _trace_reduced(model, v, d1, d2, kappa, launch,
                                       um.c - delta, up.c + delta, A)
        if status != "ok":
            return False, f"orbit exits the strip ({status})"
        slope_p, _, _ = _manifold_slope(model, up.s, up.c, v, d1, kappa, A)
        target = up.s + slope_p * delta
        ok = abs(s_end - target) < _NODE_TOL
        return (ok, "saddle-to-node orbit" + ("" if ok else " lands elsewhere"))

    # gm > 0: source on the upper row
    if gp > TANGENT_TOL or abs(gp) <= TANGENT_TOL:
        # source -> saddle: trace the lower-row saddle manifold backward up
        slope_p, _, _ = _manifold_slope(model, up.s, up.c, v, d1, kappa, A)
        start = up.s + slope_p * delta
        s_end, status = _trace_reduced(model, v, d1, d2, kappa, start,
                                       up.c + delta, um.c - delta, A)
        if status != "ok":
            return False, f"backward orbit exits the strip ({status})"
        slope_m, _, _ = _manifold_slope(model, um.s, um.c, v, d1, kappa, A)
        target = um.s - slope_m * delta
        ok = abs(s_end - target) < _NODE_TOL
        return (ok, "node-to-saddle orbit" + ("" if ok else " lands elsewhere"))

    # source -> sink (overcompressive): blocked only when the lower-row saddle
    # separatrix passes above the source
    rp = row_roots(model, up.c, v, d1)
    saddles = [r for r in rp if model.flux.partials(r, up.c).f_s > v + TANGENT_TOL]
    if not saddles:
        return True, "source-to-sink with no separating saddle"
    s_sep = saddles[0]
    slope_sep, _, _ = _manifold_slope(model, s_sep, up.c, v, d1, kappa, A)
    start = s_sep + slope_sep * delta
    s_end, status = _trace_reduced(model, v, d1, d2, kappa, start,
                                   up.c + delta, um.c - delta, A)
    if status == "exit_low":
        return True, "separatrix leaves below the source"
    if status == "exit_high":
        return False, "separatrix blocks from above"
    ok = s_end <= um.s + _NODE_TOL
    return (ok, "source-to-sink orbit" + ("" if ok else " blocked by separatrix"))


# ---------------------------------------------------------------------------
# the small-saturation Lax threshold
# ---------------------------------------------------------------------------


def lax_small_s_threshold(model, n_c=33):
    """A saturation s_* below which every admissible shock is left-supersonic
    in the saturation family (f_s(s-, c-) > v).

    Built from the uniform convexity of f near s = 0: with s_f the smallest
    inflection over c and delta_f = min_c f(s_f, c) / (1 + C1 norm of a),
    chord lines with slope at most delta_f meet the graph only on the convex
    part, and tangent chords cannot touch below the secant-tangency point.
    """
    cs = np.linspace(0.0, 1.0, n_c)

    def inflection(c):
        g = lambda s: model.flux.partials(s, c).f_ss
        lo, hi = 1e-6, 1.0 - 1e-6
        if g(lo) <= 0:
            return lo
        return float(brentq(g, lo, hi, xtol=1e-12))

    s_f = min(inflection(c) for c in cs)
    f_min = min(model.flux.value(s_f, c) for c in cs)
    a_norm = max(float(np.max(np.abs(model.a(cs)))), float(np.max(np.abs(model.a_c(cs)))))
    delta_f = f_min / (1.0 + a_norm)

    def chord_root(c):
        # unique intersection of f(s,c) = delta_f * s on the convex part
        g = lambda s: model.flux.value(s, c) - delta_f * s
        lo = 1e-9
        hi = s_f
        if g(hi) <= 0:
            return hi
        return float(brentq(g, lo, hi, xtol=1e-12)) if g(lo) * g(hi) < 0 else hi

    s_star_c = min(chord_root(c) for c in cs)

    def secant_tangency(c):
        # tangency of f(., c) with the line through (1, f_min)
        g = lambda s: model.flux.partials(s, c).f_s * (s - 1.0) - (model.flux.value(s, c) - f_min)
        lo, hi = 1e-9, s_f
        if g(lo) * g(hi) > 0:
            return s_f
        return float(brentq(g, lo, hi, xtol=1e-12))

    s_star_s = min(secant_tangency(c) for c in cs)
    return min(s_star_c, s_star_s)
