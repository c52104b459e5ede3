"""Chemical rarefaction curves, separatrices and critical values.

Off the coincidence locus a chemical rarefaction curve is a graph s(c)
satisfying

    (lambda_c - lambda_s) * ds/dc = f_c,

and the chemical speed lambda_c is strictly increasing in c along every such
graph (d lambda_c / dc = -a_cc f / (s + a_c)^2 > 0).  Curves are integrated
adaptively in c with event detection for locus approach and for the square's
edges; a locus terminus is projected back onto the locus and recorded
separately, because the graph has a vertical tangent there.  Four separatrix
curves meet at the saddle; the pairs tangent to a common eigendirection glue
into single integral curves passing through it.

The critical rarefaction value of a state u = (s, c) is the second abscissa
(if any) at which the graph of f(., c) meets the line through (-a_c(c), 0) and
(s, f(u)); it carries one side of an equal-speed saturation jump that splits a
chemical fan.

Integral curves store the right-hand side at every knot, so dense output is a
cubic Hermite interpolant with exact slopes; sampled curves without slope data
(critical curves) fall back to monotone cubics.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline, PchipInterpolator
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import NumericalError, StructureError
from .model import State
from .characteristics import (
    LOCUS,
    OMEGA_L,
    OMEGA_R,
    coincidence_point,
    lambda_c,
    region_of,
    speed_gap,
)

# event threshold for |lambda_s - lambda_c| when a curve runs into the locus
EPS_EVENT = 1e-8
# offset used to launch separatrices off the saddle
SEP_DELTA = 1e-6

REACHED_C0 = "ReachedC0"
REACHED_C1 = "ReachedC1"
HIT_LOCUS = "HitLocus"
HIT_BOUNDARY = "HitBoundary"


@dataclass(frozen=True)
class Terminus:
    kind: str
    point: State


class SampledCurve:
    """A curve s(c) stored as knots with cubic dense output."""

    def __init__(self, c_knots, s_knots, d_knots=None, side=None,
                 terminus_lo=None, terminus_hi=None):
        c_knots = np.asarray(c_knots, dtype=float)
        s_knots = np.asarray(s_knots, dtype=float)
        order = np.argsort(c_knots)
        c_knots = c_knots[order]
        s_knots = s_knots[order]
        if d_knots is not None:
            d_knots = np.asarray(d_knots, dtype=float)[order]
        keep = np.concatenate(([True], np.diff(c_knots) > 1e-14))
        self.c_knots = c_knots[keep]
        self.s_knots = s_knots[keep]
        self.d_knots = d_knots[keep] if d_knots is not None else None
        if self.c_knots.size < 2:
            self._interp = None
        elif self.d_knots is not None:
            self._interp = CubicHermiteSpline(self.c_knots, self.s_knots, self.d_knots,
                                              extrapolate=False)
        else:
            self._interp = PchipInterpolator(self.c_knots, self.s_knots, extrapolate=False)
        self.c_lo = float(self.c_knots[0])
        self.c_hi = float(self.c_knots[-1])
        self.side = side
        self.terminus_lo = terminus_lo
        self.terminus_hi = terminus_hi

    def s_at(self, c):
        if self._interp is None:
            out = self.s_knots[0] * np.ones_like(np.asarray(c, dtype=float))
            return float(out) if np.ndim(c) == 0 else out
        out = self._interp(np.clip(c, self.c_lo, self.c_hi))
        return float(out) if np.ndim(c) == 0 else out

    def slope_at(self, c):
        if self._interp is None:
            return 0.0
        out = self._interp.derivative()(np.clip(c, self.c_lo, self.c_hi))
        return float(out) if np.ndim(c) == 0 else out

    def state_at(self, c):
        return State(float(np.clip(self.s_at(c), 0.0, 1.0)), float(c))

    def covers(self, c, tol=1e-12):
        return self.c_lo - tol <= c <= self.c_hi + tol

    def _restricted_knots(self, c_a, c_b):
        lo, hi = (c_a, c_b) if c_a <= c_b else (c_b, c_a)
        lo = max(lo, self.c_lo)
        hi = min(hi, self.c_hi)
        mask = (self.c_knots > lo + 1e-14) & (self.c_knots < hi - 1e-14)
        cs = np.concatenate(([lo], self.c_knots[mask], [hi]))
        ss = np.concatenate(([self.s_at(lo)], self.s_knots[mask], [self.s_at(hi)]))
        if self.d_knots is not None:
            ds = np.concatenate(([self.slope_at(lo)], self.d_knots[mask], [self.slope_at(hi)]))
        else:
            ds = None
        return cs, ss, ds

    def restrict(self, c_a, c_b):
        cs, ss, ds = self._restricted_knots(c_a, c_b)
        return SampledCurve(cs, ss, ds, side=self.side)


class RarefactionCurve(SampledCurve):
    """Integral curve of the chemical rarefaction field, with speed lookups."""

    def __init__(self, model, c_knots, s_knots, d_knots=None, side=None,
                 terminus_lo=None, terminus_hi=None):
        super().__init__(c_knots, s_knots, d_knots, side, terminus_lo, terminus_hi)
        self.model = model
        self.lambda_c_knots = np.array(
            [lambda_c(model, float(np.clip(s, 0.0, 1.0)), float(c))
             for s, c in zip(self.s_knots, self.c_knots)]
        )

    def lambda_c_at(self, c):
        return lambda_c(self.model, float(np.clip(self.s_at(c), 0.0, 1.0)), float(c))

    def invert_speed(self, xi):
        """The c with lambda_c(s(c), c) = xi; speeds increase strictly with c."""
        lo, hi = self.c_lo, self.c_hi
        g = lambda c: self.lambda_c_at(c) - xi
        if g(lo) >= 0.0:
            return lo
        if g(hi) <= 0.0:
            return hi
        return float(brentq(g, lo, hi, xtol=1e-14))

    def restrict(self, c_a, c_b):
        cs, ss, ds = self._restricted_knots(c_a, c_b)
        return RarefactionCurve(self.model, cs, ss, ds, side=self.side)


def _constant_curve(model, s_const, side):
    c = np.linspace(0.0, 1.0, 129)
    s = np.full_like(c, s_const)
    return RarefactionCurve(
        model, c, s, np.zeros_like(c), side=side,
        terminus_lo=Terminus(REACHED_C0, State(s_const, 0.0)),
        terminus_hi=Terminus(REACHED_C1, State(s_const, 1.0)),
    )


def _graph_slope(model, s, c):
    p = model.flux.partials(s, c)
    gap = p.f / (s + model.adsorption.a_c(c)) - p.f_s  # lambda_c - lambda_s
    return p.f_c / gap


def _integrate_one_way(model, s0, c0, c_target, max_step=0.004):
    """March the graph ODE from (s0, c0) toward c_target with event detection.

    Returns (c_knots, s_knots, d_knots, terminus) ordered in integration
    direction; the terminus is not part of the knot set.
    """

    def rhs(c, y):
        return (_graph_slope(model, float(np.clip(y[0], 0.0, 1.0)), c),)

    # The curve cannot cross the locus; track the launch-side signed gap so the
    # event still fires if a step lands past the turning point.
    side_sign = np.sign(speed_gap(model, s0, c0)) or 1.0

    def ev_locus(c, y):
        return side_sign * speed_gap(model, float(np.clip(y[0], 0.0, 1.0)), c) - EPS_EVENT

    ev_locus.terminal = True
    ev_locus.direction = -1

    def ev_s_low(c, y):
        return y[0]

    ev_s_low.terminal = True

    def ev_s_high(c, y):
        return y[0] - 1.0

    ev_s_high.terminal = True

    sol = solve_ivp(
        rhs,
        (c0, c_target),
        (s0,),
        method="RK45",
        rtol=1e-10,
        atol=1e-12,
        max_step=max_step,
        events=(ev_locus, ev_s_low, ev_s_high),
    )
    if not sol.success and sol.status != 1:
        # step-size underflow happens when the graph turns at the locus before
        # the proximity event fires; the last accepted point is the terminus
        if "step size" in sol.message.lower() and sol.t.size >= 2:
            cs = list(sol.t)
            ss = [float(np.clip(v, 0.0, 1.0)) for v in sol.y[0]]
            c_end, s_end = float(cs[-1]), float(ss[-1])
            try:
                s_loc = float(np.clip(coincidence_point(model, c_end), 0.0, 1.0))
            except StructureError:
                s_loc = s_end
            term = Terminus(HIT_LOCUS, State(s_loc, c_end))
            ds = [_graph_slope(model, s, c) for s, c in zip(ss[:-1], cs[:-1])]
            ds.append(ds[-1])
            return np.asarray(cs), np.asarray(ss), np.asarray(ds), term
        raise NumericalError(f"curve integration failed: {sol.message}", (s0, c0))

    cs = list(sol.t)
    ss = [float(np.clip(v, 0.0, 1.0)) for v in sol.y[0]]
    if sol.status == 1:
        if sol.t_events[0].size:
            c_end = float(sol.t_events[0][0])
            s_end = float(np.clip(sol.y_events[0][0][0], 0.0, 1.0))
            cs.append(c_end)
            ss.append(s_end)
            try:
                s_loc = float(np.clip(coincidence_point(model, c_end), 0.0, 1.0))
            except StructureError:
                s_loc = s_end
            term = Terminus(HIT_LOCUS, State(s_loc, c_end))
        else:
            idx = 1 if sol.t_events[1].size else 2
            edge = 0.0 if idx == 1 else 1.0
            c_end = float(sol.t_events[idx][0])
            cs.append(c_end)
            ss.append(edge)
            term = Terminus(HIT_BOUNDARY, State(edge, c_end))
    else:
        kind = REACHED_C0 if c_target <= 0.0 else REACHED_C1
        term = Terminus(kind, State(ss[-1], float(cs[-1])))
    ds = [_graph_slope(model, s, c) for s, c in zip(ss, cs)]
    return np.asarray(cs), np.asarray(ss), np.asarray(ds), term


def _side_of_knots(model, cs, ss):
    gaps = [speed_gap(model, float(np.clip(s, 1e-12, 1.0)), float(c)) for c, s in zip(cs, ss)]
    near = 10.0 * EPS_EVENT  # knots at a locus terminus do not get a vote
    pos = sum(1 for g in gaps if g > near)
    neg = sum(1 for g in gaps if g < -near)
    if pos and neg and min(pos, neg) > 1:
        raise StructureError("curve crosses the coincidence locus away from the saddle")
    return OMEGA_L if pos >= neg else OMEGA_R


def integrate_curve(model, u0, direction="both", max_step=0.004):
    """Chemical rarefaction curve through u0.

    direction is "down" (toward c = 0), "up" (toward c = 1) or "both".  The
    constant curves s = 0 and s = 1 are returned directly.  A curve stopped by
    the locus carries a HitLocus terminus projected onto the locus.
    """
    if not isinstance(u0, State):
        u0 = State(*u0)
    if u0.s <= 0.0:
        return _constant_curve(model, 0.0, OMEGA_L)
    if u0.s >= 1.0:
        return _constant_curve(model, 1.0, OMEGA_R)
    if region_of(model, u0.s, u0.c) == LOCUS:
        raise StructureError("curves through locus points are launched only as separatrices")

    pieces = []
    term_lo = term_hi = None
    if direction in ("down", "both"):
        cs, ss, ds, term_lo = _integrate_one_way(model, u0.s, u0.c, 0.0, max_step)
        pieces.append((cs[::-1], ss[::-1], ds[::-1]))
    if direction in ("up", "both"):
        cs, ss, ds, term_hi = _integrate_one_way(model, u0.s, u0.c, 1.0, max_step)
        pieces.append((cs, ss, ds))

    cs = np.concatenate([p[0] for p in pieces])
    ss = np.concatenate([p[1] for p in pieces])
    ds = np.concatenate([p[2] for p in pieces])
    side = _side_of_knots(model, cs, ss)
    return RarefactionCurve(model, cs, ss, ds, side=side,
                            terminus_lo=term_lo, terminus_hi=term_hi)


@dataclass
class Separatrices:
    """The four curves meeting at the saddle.

    lower/upper refers to c below/above the saddle concentration, left/right
    to the region side (lambda_s > lambda_c on the left).
    """

    lower_left: RarefactionCurve
    lower_right: RarefactionCurve
    upper_left: RarefactionCurve
    upper_right: RarefactionCurve

    def as_tuple(self):
        return (self.lower_left, self.lower_right, self.upper_left, self.upper_right)


def separatrices(model, saddle):
    """Launch the four separatrix branches from the saddle and label them.

    Each branch is launched a distance SEP_DELTA from the fixed point along an
    eigendirection and integrated away in c; the saddle itself is appended as
    the matching end knot with the eigendirection slope, so all four curves
    pass through it.
    """
    s_star, c_star = saddle.s, saddle.c
    branches = []
    for direction in (saddle.dir_plus, saddle.dir_minus):
        slope_star = direction[0] / direction[1]
        for sign in (+1.0, -1.0):
            ds_, dc_ = sign * direction[0], sign * direction[1]
            s1 = s_star + SEP_DELTA * ds_
            c1 = c_star + SEP_DELTA * dc_
            target = 1.0 if dc_ > 0 else 0.0
            cs, ss, dd, term = _integrate_one_way(model, s1, c1, target)
            side = _side_of_knots(model, cs[1:], ss[1:])
            cs = np.append(cs, c_star)
            ss = np.append(ss, s_star)
            dd = np.append(dd, slope_star)
            lo_term = term if dc_ < 0 else None
            hi_term = term if dc_ > 0 else None
            curve = RarefactionCurve(model, cs, ss, dd, side=side,
                                     terminus_lo=lo_term, terminus_hi=hi_term)
            branches.append((dc_ > 0, side, curve))

    def pick(upper, side):
        for b_upper, b_side, curve in branches:
            if b_upper == upper and b_side == side:
                return curve
        raise StructureError(f"missing separatrix branch (upper={upper}, side={side})")

    return Separatrices(
        lower_left=pick(False, OMEGA_L),
        lower_right=pick(False, OMEGA_R),
        upper_left=pick(True, OMEGA_L),
        upper_right=pick(True, OMEGA_R),
    )


def glue_through_saddle(model, lower, upper):
    """Join a lower (c <= c*) and an upper (c >= c*) branch into one curve."""
    cs = np.concatenate((lower.c_knots, upper.c_knots))
    ss = np.concatenate((lower.s_knots, upper.s_knots))
    dd = np.concatenate((lower.d_knots, upper.d_knots))
    return RarefactionCurve(model, cs, ss, dd, side="Mixed",
                            terminus_lo=lower.terminus_lo, terminus_hi=upper.terminus_hi)


# ---------------------------------------------------------------------------
# critical rarefaction values
# ---------------------------------------------------------------------------


def critical_rarefaction_value(model, u, n_scan=1024):
    """The second saturation sharing the chemical speed of u on its c-row.

    Geometrically: the other intersection of the graph of f(., c) with the
    line through (-a_c(c), 0) and (s, f(u)).  Returns None when the line
    clears the graph.  On the locus the tangency point itself is returned.
    """
    if not isinstance(u, State):
        u = State(*u)
    if u.s <= 0.0:
        return None
    if region_of(model, u.s, u.c) == LOCUS:
        return u.s
    c = u.c
    a_c = model.adsorption.a_c(c)
    lam = lambda_c(model, u.s, c)
    roots = _chord_roots(model, c, lam, a_c, skip=u.s, n_scan=n_scan)
    if not roots:
        return None
    if len(roots) > 1:
        raise StructureError(f"multiple critical values at {u}: {roots}")
    return roots[0]


def _chord_roots(model, c, slope, offset, skip=None, n_scan=1024):
    """Roots in (0, 1] of g(s) = f(s,c) - slope*(s + offset), one root deflated.

    With ``skip`` the simple root of g at that abscissa is divided out, so a
    second root arbitrarily close to the known one (tangency limit) is still
    found.  Absence requires the deflated scan to clear zero with a margin; a
    non-crossing near-touch is polished and accepted only when g closes to
    machine level there.
    """

    def g(s):
        return model.flux.value(s, c) - slope * (s + offset)

    if skip is None:
        G = g
    else:

        def G(s):
            d = s - skip
            if np.ndim(d):
                safe = np.where(np.abs(d) < 1e-14, 1.0, d)
                return np.where(np.abs(d) < 1e-14,
                                model.flux.partials(s, c).f_s - slope,
                                g(s) / safe)
            if abs(d) < 1e-14:
                return model.flux.partials(s, c).f_s - slope
            return g(s) / d

    grid = np.linspace(0.0, 1.0, n_scan + 1)
    vals = G(grid)
    sign = np.sign(vals)
    roots = []
    for k in np.where(sign[:-1] * sign[1:] < 0)[0]:
        roots.append(float(brentq(G, grid[k], grid[k + 1], xtol=1e-13)))
    for k in np.where(vals == 0.0)[0]:
        if grid[k] > 0.0:
            roots.append(float(grid[k]))

    cleaned = []
    for r in sorted(roots):
        if r <= 0.0:
            continue
        if cleaned and abs(r - cleaned[-1]) <= 1e-9:
            continue
        cleaned.append(r)
    if cleaned:
        return cleaned

    # near-touch: the chord may graze the graph without a sign change
    mask = grid > 0.0
    if np.min(np.abs(vals[mask])) < 1e-10:
        from scipy.optimize import minimize_scalar

        idx = np.where(mask)[0][np.argmin(np.abs(vals[mask]))]
        lo, hi = grid[max(idx - 2, 0)], grid[min(idx + 2, n_scan)]
        res = minimize_scalar(lambda s: abs(g(s)), bounds=(lo, hi), method="bounded")
        if abs(g(res.x)) < 1e-12:
            return [float(res.x)]
    return []


def critical_curve(model, curve, max_spacing=1.0 / 512.0):
    """Pointwise critical values along a rarefaction curve, truncated where absent.

    The input curve is resampled down to ``max_spacing`` in c so the cubic
    through the critical knots stays accurate; the previous knot's root seeds
    a local bracket, with a full scan as fallback.
    """
    if curve.c_hi - curve.c_lo < 2e-6:
        return None
    n = max(int(np.ceil((curve.c_hi - curve.c_lo) / max_spacing)), 8)
    c_grid = np.linspace(curve.c_lo, curve.c_hi, n + 1)
    cs, ss = [], []
    prev = None
    for c in c_grid:
        s = float(np.clip(curve.s_at(c), 0.0, 1.0))
        if s <= 0.0:
            prev = None
            continue
        u = State(s, float(c))
        sk = _critical_value_continued(model, u, prev)
        if sk is None:
            if cs:
                break  # truncate at first absence after the curve started
            prev = None
            continue
        cs.append(float(c))
        ss.append(sk)
        prev = sk
    if len(cs) < 2:
        return None
    return SampledCurve(np.asarray(cs), np.asarray(ss))


def _critical_value_continued(model, u, prev):
    if prev is None:
        return critical_rarefaction_value(model, u)
    if region_of(model, u.s, u.c) == LOCUS:
        return u.s
    c = u.c
    a_c = model.adsorption.a_c(c)
    lam = lambda_c(model, u.s, c)

    def G(s):
        d = s - u.s
        if abs(d) < 1e-14:
            return model.flux.partials(s, c).f_s - lam
        return (model.flux.value(s, c) - lam * (s + a_c)) / d

    for width in (0.01, 0.05, 0.2):
        lo = max(prev - width, 1e-12)
        hi = min(prev + width, 1.0)
        if hi <= lo:
            continue
        if G(lo) * G(hi) < 0:
            return float(brentq(G, lo, hi, xtol=1e-13))
    return critical_rarefaction_value(model, u)


def intersect_curves(curve_a, curve_b, n_scan=512):
    """First transversal intersection (c, s) of two curves over their common c-range."""
    lo = max(curve_a.c_lo, curve_b.c_lo)
    hi = min(curve_a.c_hi, curve_b.c_hi)
    if hi <= lo:
        return None
    cs = np.linspace(lo, hi, n_scan)
    d = np.array([curve_a.s_at(c) - curve_b.s_at(c) for c in cs])
    sign = np.sign(d)
    hits = np.where(sign[:-1] * sign[1:] < 0)[0]
    if hits.size == 0:
        k = int(np.argmin(np.abs(d)))
        if abs(d[k]) < 1e-9:
            return float(cs[k]), float(0.5 * (curve_a.s_at(cs[k]) + curve_b.s_at(cs[k])))
        return None
    k = hits[0]
    fn = lambda c: curve_a.s_at(c) - curve_b.s_at(c)
    c_hit = float(brentq(fn, cs[k], cs[k + 1], xtol=1e-12))
    s_hit = float(0.5 * (curve_a.s_at(c_hit) + curve_b.s_at(c_hit)))
    return c_hit, s_hit


# ---------------------------------------------------------------------------
# the named saturation values of a (c_L, c_R) pair straddling c*
# ---------------------------------------------------------------------------


@dataclass
class KeyPoints:
    """Separatrix and critical saturations pinning the rarefaction-case regions.

    s_1K can be absent (None) when the chord from the lower-left separatrix
    point clears the flux graph; the classification rectangles do not need it,
    so absence only removes one link of the ordering chain.  That corner of
    the construction is the least exercised one and is considered
    experimental.
    """

    s_1L: float
    s_2L: float
    s_3R: float
    s_4R: float
    s_2K: float
    s_3K: float
    s_0L: float
    s_0R: float
    s_0K: float
    s_1K: float | None = None


def key_points(model, c_L, c_R, seps, saddle):
    """Evaluate the named points for c_L < c* < c_R."""
    c_star = saddle.c
    if not (c_L < c_star < c_R):
        raise StructureError("key points require c_L < c* < c_R")
    s_1L = float(seps.lower_left.s_at(c_L))
    s_2L = float(seps.lower_right.s_at(c_L))
    s_3R = float(seps.upper_left.s_at(c_R))
    s_4R = float(seps.upper_right.s_at(c_R))
    s_1K = critical_rarefaction_value(model, State(s_1L, c_L))
    s_2K = critical_rarefaction_value(model, State(s_2L, c_L))
    s_3K = critical_rarefaction_value(model, State(s_3R, c_R))
    s_0L = critical_rarefaction_value(model, State(1.0, c_L))
    s_0R = critical_rarefaction_value(model, State(1.0, c_R))
    if s_2K is None or s_3K is None or s_0L is None or s_0R is None:
        raise StructureError("a required critical value is absent")
    back = integrate_curve(model, State(s_0R, c_R), direction="down")
    if not back.covers(c_L):
        raise StructureError("curve through (s_0R, c_R) does not reach c_L")
    s_0K = float(back.s_at(c_L))
    return KeyPoints(
        s_1L=s_1L,
        s_2L=s_2L,
        s_3R=s_3R,
        s_4R=s_4R,
        s_2K=s_2K,
        s_3K=s_3K,
        s_0L=s_0L,
        s_0R=s_0R,
        s_0K=s_0K,
        s_1K=s_1K,
    )
