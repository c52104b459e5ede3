"""Riemann problem classification and wave-sequence assembly.

For two-constant-state data the solution is self-similar in xi = x/t: a
speed-ordered sequence of saturation waves (within one c row) and chemical
waves, separated by constant states.  Concentration is monotone along the
profile: a falling c admits exactly one c shock, a rising c only c
rarefactions.

With c_L above and c_R below the sign-change concentration c*, the structural
pivot is the kappa-dependent crossing shock; the (s_L, s_R) square splits into
three regions (cs / sc / scs) bounded by the pivot's chord intersections and
the equal-speed overcompressive curve.  With c_L < c* < c_R the square splits
into seven regions whose five-wave extreme threads three distinct chemical
fans; the inserted saturation jumps ride between a fan state and its critical
value at equal speeds.  Concentration pairs on one side of c* reduce to the
classical single-Lax constructions and are tagged monotone_JnW.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import CompatibilityError, StructureError, UnsupportedCaseError
from .model import State
from .characteristics import (
    LOCUS,
    OMEGA_L,
    OMEGA_R,
    coincidence_point,
    find_saddle,
    lambda_c,
    lambda_s,
    region_of,
    speed_gap,
)
from .rarefaction import (
    KeyPoints,
    RarefactionCurve,
    _integrate_one_way,
    critical_curve,
    critical_rarefaction_value,
    glue_through_saddle,
    integrate_curve,
    intersect_curves,
    key_points,
    separatrices,
)
from . import shock as shock_mod
from .shock import (
    C_SHOCK,
    S_SHOCK,
    Shock,
    connect_undercompressive,
    critical_shock_value,
    make_shock,
    row_roots,
    tangent_speed,
)

S_RARE = "SRarefaction"
C_RARE = "CRarefaction"

# tolerance for region-boundary ties; ties resolve toward the construction
# that degenerates gracefully
BOUNDARY_TOL = 1e-9
# speed-monotonicity slack in assembled sequences
SPEED_TOL = 1e-8


@dataclass(frozen=True)
class Wave:
    kind: str  # SShock | SRarefaction | CShock | CRarefaction
    left_state: State
    right_state: State
    speed_lo: float
    speed_hi: float
    payload: object = None

    @property
    def is_shock(self):
        return self.kind in (S_SHOCK, C_SHOCK)

    def width(self):
        return self.speed_hi - self.speed_lo


def _s_shock_wave(model, u_l, u_r):
    sh = make_shock(model, u_l, u_r)
    return Wave(S_SHOCK, u_l, u_r, sh.v, sh.v, payload=sh)


def _c_shock_wave(shock):
    return Wave(C_SHOCK, shock.u_minus, shock.u_plus, shock.v, shock.v, payload=shock)


def _s_rare_wave(model, c, s_l, s_r):
    lo = lambda_s(model, s_l, c)
    hi = lambda_s(model, s_r, c)
    return Wave(S_RARE, State(s_l, c), State(s_r, c), lo, hi, payload=(float(c), s_l, s_r))


def _c_rare_wave(model, curve, c_a, c_b, left=None, right=None):
    """Chemical fan along a stored curve from row c_a (left) to c_b (right).

    Explicit end states override the curve lookup where the fan closes on a
    locus touch the stored knots stop just short of.
    """
    u_a = left if left is not None else curve.state_at(c_a)
    u_b = right if right is not None else curve.state_at(c_b)
    return Wave(C_RARE, u_a, u_b,
                lambda_c(model, u_a.s, u_a.c), lambda_c(model, u_b.s, u_b.c),
                payload=curve.restrict(c_a, c_b))


@dataclass
class RegionLabel:
    case: str      # U_cs, U_sc, U_scs, overcomp_boundary, U_csc, U_cscs, U_scsc,
    #                U_cscsc, BL, monotone_JnW
    flavor: str    # "shock", "rarefaction", "" (BL / monotone)


@dataclass
class RiemannSolution:
    model: object
    u_L: State
    u_R: State
    kappa: float
    waves: list
    structure: str
    intermediate_states: list = field(default_factory=list)

    def wave_speeds(self):
        return [(w.speed_lo, w.speed_hi) for w in self.waves]

    def evaluate(self, xi):
        """Self-similar profile value; right-continuous at shock speeds."""
        if not self.waves:
            return self.u_R
        state = self.u_L
        for w in self.waves:
            if xi < w.speed_lo:
                return state
            if xi <= w.speed_hi:
                # inside this wave; equal-speed stacks defer to the last wave
                later = [v for v in self.waves if v.speed_lo <= xi <= v.speed_hi]
                w = later[-1]
                return _eval_inside(self.model, w, xi)
            state = w.right_state
        return self.u_R

    def evaluate_many(self, xis):
        return [self.evaluate(float(x)) for x in np.atleast_1d(xis)]


def _eval_inside(model, w, xi):
    if w.is_shock:
        return w.right_state
    if w.kind == S_RARE:
        c, s_l, s_r = w.payload
        lo, hi = (s_l, s_r) if s_l <= s_r else (s_r, s_l)
        g = lambda s: lambda_s(model, s, c) - xi
        glo, ghi = g(lo), g(hi)
        if glo * ghi > 0:
            return w.right_state if abs(ghi) < abs(glo) else w.left_state
        s = brentq(g, lo, hi, xtol=1e-14)
        return State(float(s), c)
    curve = w.payload
    c = curve.invert_speed(xi)
    return curve.state_at(c)


def evaluate_profile(solution, xi):
    """State of an assembled solution at similarity speed xi."""
    return solution.evaluate(xi)


# ---------------------------------------------------------------------------
# saturation wave groups (classical scalar theory on one c row)
# ---------------------------------------------------------------------------


def s_wave_group(model, c, s_from, s_to, entry_speed=-np.inf, n_samples=2048):
    """Monotone-speed saturation waves realizing the flux envelope between
    s_from (left) and s_to (right).

    Rising data takes the lower convex envelope of f(., c), falling data the
    upper concave one; envelope chords become shocks (they satisfy the chord
    admissibility condition by construction) and graph runs become fans.  The
    first wave must not be slower than entry_speed.
    """
    if abs(s_from - s_to) < 1e-14:
        return []
    lo, hi = (s_from, s_to) if s_from < s_to else (s_to, s_from)
    ss = np.linspace(lo, hi, n_samples + 1)
    fs = model.flux.value(ss, c)
    upper = s_from > s_to  # falling data rides the concave side
    hull = _hull_indices(ss, fs, upper=upper)

    # split the hull walk into graph runs and chords
    segs = []
    for a, b in zip(hull[:-1], hull[1:]):
        if b == a + 1:
            if segs and segs[-1][0] == "graph":
                segs[-1] = ("graph", segs[-1][1], ss[b])
            else:
                segs.append(("graph", ss[a], ss[b]))
        else:
            segs.append(("chord", ss[a], ss[b]))

    segs = _refine_tangencies(model, c, segs, lo, hi)

    if upper:  # traverse from high s to low s
        segs = [(kind, b, a) for kind, a, b in reversed(segs)]

    waves = []
    for kind, a, b in segs:
        if abs(b - a) < 1e-12:
            continue
        if kind == "chord":
            waves.append(_s_shock_wave(model, State(a, c), State(b, c)))
        else:
            waves.append(_s_rare_wave(model, c, a, b))
    for w in waves:
        if w.speed_hi < w.speed_lo - SPEED_TOL:
            raise CompatibilityError(f"saturation wave with decreasing speeds: {w}")
    if waves and waves[0].speed_lo < entry_speed - SPEED_TOL:
        raise CompatibilityError(
            f"saturation group enters at {waves[0].speed_lo} < required {entry_speed}"
        )
    return waves


def _hull_indices(ss, fs, upper):
    """Monotone-chain indices of the lower (or upper) convex envelope."""
    sign = -1.0 if upper else 1.0
    out = []
    for i in range(len(ss)):
        while len(out) >= 2:
            j, k = out[-2], out[-1]
            cross = (ss[k] - ss[j]) * (fs[i] - fs[j]) - (fs[k] - fs[j]) * (ss[i] - ss[j])
            if sign * cross <= 0.0:
                out.pop()
            else:
                break
        out.append(i)
    return out


def _refine_tangencies(model, c, segs, lo, hi, rounds=3):
    """Polish chord endpoints that touch the graph tangentially.

    A chord endpoint interior to [lo, hi] is a tangency: the chord slope there
    equals f_s.  Each such endpoint is re-solved against the other (possibly
    updated) endpoint; neighbouring graph runs are snapped to the refined
    values.
    """

    def tangency(other, guess):
        g = lambda sig: (model.flux.partials(sig, c).f_s
                         - (model.flux.value(sig, c) - model.flux.value(other, c))
                         / (sig - other))
        span = (hi - lo) / 64.0
        # keep the bracket clear of the removable zero at ``other``: closer in,
        # roundoff in the chord slope swamps the O(sigma - other) signal
        gap = 1e-6
        for width in (span, 4 * span, 16 * span, hi - lo):
            a = max(lo, guess - width)
            b = min(hi, guess + width)
            if guess > other:
                a = max(a, other + gap)
            else:
                b = min(b, other - gap)
            if b <= a:
                continue
            if g(a) * g(b) < 0:
                return float(brentq(g, a, b, xtol=1e-14))
        return guess

    segs = [list(s) for s in segs]
    for _ in range(rounds):
        for k, seg in enumerate(segs):
            if seg[0] != "chord":
                continue
            if abs(seg[1] - lo) > 1e-12:
                seg[1] = tangency(seg[2], seg[1])
            if abs(seg[2] - hi) > 1e-12:
                seg[2] = tangency(seg[1], seg[2])
    for k, seg in enumerate(segs):
        if seg[0] == "graph":
            if k > 0:
                seg[1] = segs[k - 1][2]
            if k + 1 < len(segs):
                seg[2] = segs[k + 1][1]
    return [tuple(s) for s in segs]


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------


class RiemannSolver:
    """Classification and construction engine bound to one validated model.

    Heavy per-(c_L, c_R, kappa) objects (the pivot shock, separatrices, key
    points) are cached; solve and classify_pair stay pure functions of their
    arguments.
    """

    def __init__(self, model):
        if not model.validated or model.c_star is None:
            raise StructureError("model must pass validate_assumptions first")
        self.model = model
        self._saddle = None
        self._seps = None
        self._unstable_composite = None
        self._pivots = {}
        self._keypoints = {}
        self._g3k = {}
        self._arcs = {}
        self._curves = {}

    def _curve_through(self, u, direction):
        """Memoized chemical curve through a state (classify + solve reuse)."""
        key = (round(u.s, 15), round(u.c, 15), direction)
        if key not in self._curves:
            if len(self._curves) > 512:
                self._curves.clear()
            self._curves[key] = integrate_curve(self.model, u, direction=direction)
        return self._curves[key]

    # -- cached geometry --------------------------------------------------
    @property
    def saddle(self):
        if self._saddle is None:
            self._saddle = find_saddle(self.model)
        return self._saddle

    @property
    def seps(self):
        if self._seps is None:
            self._seps = separatrices(self.model, self.saddle)
        return self._seps

    @property
    def unstable_composite(self):
        """The single integral curve gluing the lower-right and upper-left branches."""
        if self._unstable_composite is None:
            self._unstable_composite = glue_through_saddle(
                self.model, self.seps.lower_right, self.seps.upper_left
            )
        return self._unstable_composite

    def pivot_shock(self, c_L, c_R, kappa):
        """The structural c-shock for a falling concentration pair.

        Straddling c* this is the kappa-dependent crossing shock; on one side
        of c* it is the kappa-independent tangent shock (chord through (-h, 0)
        tangent to the lower of the two flux rows).
        """
        key = (c_L, c_R, kappa if self._straddles(c_L, c_R) else None)
        if key not in self._pivots:
            try:
                if self._straddles(c_L, c_R):
                    self._pivots[key] = connect_undercompressive(self.model, c_L, c_R, kappa)
                else:
                    self._pivots[key] = self._tangent_pivot(c_L, c_R)
            except Exception as exc:  # cache failures too; retrying is expensive
                self._pivots[key] = exc
        hit = self._pivots[key]
        if isinstance(hit, Exception):
            raise hit
        return hit

    def _straddles(self, c_L, c_R):
        c_star = self.model.c_star
        return (c_L - c_star) * (c_R - c_star) < 0.0

    def _tangent_pivot(self, c_L, c_R):
        model = self.model
        h = (model.a(c_R) - model.a(c_L)) / (c_R - c_L)
        f_mid_L = model.f(0.5, c_L)
        f_mid_R = model.f(0.5, c_R)
        if f_mid_L <= f_mid_R:
            v, s_tan = tangent_speed(model, c_L, h)
            candidates = [r for r in row_roots(model, c_R, v, h)
                          if model.f_s(r, c_R) > v]
            if not candidates:
                raise StructureError(f"tangent pivot: no landing root at c={c_R}")
            u_minus, u_plus = State(s_tan, c_L), State(candidates[0], c_R)
        else:
            v, s_tan = tangent_speed(model, c_R, h)
            candidates = [r for r in row_roots(model, c_L, v, h)
                          if model.f_s(r, c_L) < v]
            if not candidates:
                raise StructureError(f"tangent pivot: no departure root at c={c_L}")
            u_minus, u_plus = State(candidates[-1], c_L), State(s_tan, c_R)
        return make_shock(model, u_minus, u_plus)

    def keypoints(self, c_L, c_R):
        key = (c_L, c_R)
        if key not in self._keypoints:
            self._keypoints[key] = key_points(self.model, c_L, c_R, self.seps, self.saddle)
        return self._keypoints[key]

    def gamma3_critical(self, c_R):
        """Critical curve of the upper-left separatrix, up to row c_R."""
        key = round(c_R, 14)
        if key not in self._g3k:
            g3 = self.seps.upper_left.restrict(self.saddle.c, c_R)
            self._g3k[key] = critical_curve(self.model, g3)
        return self._g3k[key]

    # -- helpers ----------------------------------------------------------
    def _curve_up_from_left(self, u_L, kp=None):
        """Chemical curve from u_L toward rising c; the lower-left separatrix
        point continues through the saddle along the composite."""
        if kp is not None and abs(u_L.s - kp.s_1L) <= BOUNDARY_TOL:
            return glue_through_saddle(self.model, self.seps.lower_left.restrict(u_L.c, self.saddle.c),
                                       self.seps.upper_left)
        return self._curve_through(u_L, "up")

    def _curve_down_from_right(self, u_R, kp=None):
        if kp is not None and abs(u_R.s - kp.s_4R) <= BOUNDARY_TOL:
            return glue_through_saddle(self.model, self.seps.lower_right,
                                       self.seps.upper_right.restrict(self.saddle.c, u_R.c))
        return self._curve_through(u_R, "down")

    # -- classification ---------------------------------------------------
    def classify_pair(self, u_L, u_R, kappa=1.0):
        u_L, u_R = _states(u_L, u_R)
        if u_L.s == 0.0 and abs(u_L.c - u_R.c) > 0.0:
            raise UnsupportedCaseError("s_L = 0 with a concentration jump is excluded")
        if abs(u_L.c - u_R.c) == 0.0:
            return RegionLabel("BL", "")
        if not self._straddles(u_L.c, u_R.c):
            return RegionLabel("monotone_JnW", "")
        if u_L.c > u_R.c:
            return self._classify_shock_case(u_L, u_R, kappa)
        return self._classify_rare_case(u_L, u_R)

    def _classify_shock_case(self, u_L, u_R, kappa):
        pivot = self.pivot_shock(u_L.c, u_R.c, kappa)
        sKm = critical_shock_value(self.model, pivot.u_minus, pivot.h)
        sKp = critical_shock_value(self.model, pivot.u_plus, pivot.h)
        if sKm is None or sKp is None:
            raise StructureError("pivot chord has no second intersection")
        s_L, s_R = u_L.s, u_R.s
        if s_L >= sKm - BOUNDARY_TOL and s_R <= sKp + BOUNDARY_TOL:
            return RegionLabel("U_scs", "shock")
        if s_R > sKp:
            s_hat = self._overcompressive_s_L(u_L.c, u_R.c, s_R, pivot)
            if abs(s_L - s_hat) <= BOUNDARY_TOL:
                return RegionLabel("overcomp_boundary", "shock")
            if s_L > s_hat:
                return RegionLabel("U_sc", "shock")
        return RegionLabel("U_cs", "shock")

    def _overcompressive_s_L(self, c_L, c_R, s_R, pivot):
        """The equal-speed boundary abscissa paired with s_R >= s^K(u+)."""
        v_hat = self.model.f(s_R, c_R) / (s_R + pivot.h)
        roots = [r for r in row_roots(self.model, c_L, v_hat, pivot.h)
                 if self.model.f_s(r, c_L) > v_hat]
        if not roots:
            # the chord through (1, 1) leaves a tangent-degenerate row
            return 1.0 if s_R >= 1.0 - 1e-12 else np.nan
        return roots[0]

    def _classify_rare_case(self, u_L, u_R):
        kp = self.keypoints(u_L.c, u_R.c)
        s_L, s_R = u_L.s, u_R.s
        if s_L >= kp.s_1L - BOUNDARY_TOL:
            right_col = s_L >= kp.s_2K - BOUNDARY_TOL
            if s_R <= kp.s_3K + BOUNDARY_TOL:
                return RegionLabel("U_scs" if right_col else "U_cscs", "rarefaction")
            if s_R <= kp.s_4R + BOUNDARY_TOL:
                return RegionLabel("U_scsc" if right_col else "U_cscsc", "rarefaction")
            # s_R above the upper-right separatrix row: sc against csc
            b_sc = self._b_sc(u_L.c, u_R.c, s_R, kp)
            if s_L >= b_sc - BOUNDARY_TOL:
                return RegionLabel("U_sc", "rarefaction")
            return RegionLabel("U_csc", "rarefaction")
        # left column: cs against csc across the critical-value boundary
        b_cs = self._b_cs(u_L, u_R.c, kp)
        if b_cs is None or s_R <= b_cs + BOUNDARY_TOL:
            return RegionLabel("U_cs", "rarefaction")
        return RegionLabel("U_csc", "rarefaction")

    def _b_cs(self, u_L, c_R, kp):
        """s_R bound of the cs region for this u_L (None when unbounded)."""
        curve = self._curve_up_from_left(u_L, kp)
        if not curve.covers(c_R):
            raise StructureError(f"curve from {u_L} should reach c = {c_R}")
        u_M = curve.state_at(c_R)
        return critical_rarefaction_value(self.model, u_M)

    def _b_sc(self, c_L, c_R, s_R, kp):
        """s_L bound of the sc region for this s_R (>= s_4R)."""
        curve = self._curve_down_from_right(State(s_R, c_R), kp)
        if not curve.covers(c_L):
            raise StructureError(f"curve from ({s_R}, {c_R}) should reach c = {c_L}")
        u_N = curve.state_at(c_L)
        sk = critical_rarefaction_value(self.model, u_N)
        if sk is None:
            raise StructureError(f"no critical value at {u_N}")
        return sk

    # -- solving ----------------------------------------------------------
    def solve(self, u_L, u_R, kappa=1.0, region=None):
        u_L, u_R = _states(u_L, u_R)
        if u_L.is_close(u_R):
            return self._finish([], u_L, u_R, kappa)
        label = region or self.classify_pair(u_L, u_R, kappa)
        if label.case == "BL":
            waves = s_wave_group(self.model, u_L.c, u_L.s, u_R.s)
            return self._finish(waves, u_L, u_R, kappa)
        if label.case == "monotone_JnW":
            if u_L.c > u_R.c:
                waves = self._solve_shock_side(u_L, u_R, kappa)
            else:
                waves = self._solve_monotone_rare(u_L, u_R)
            return self._finish(waves, u_L, u_R, kappa)
        if label.flavor == "shock" or label.case in ("U_scs", "U_sc", "U_cs",
                                                     "overcomp_boundary"):
            if u_L.c > u_R.c:
                waves = self._solve_shock_side(u_L, u_R, kappa, label.case)
                return self._finish(waves, u_L, u_R, kappa)
        waves = self._solve_rare_side(u_L, u_R, label.case)
        return self._finish(waves, u_L, u_R, kappa)

    # ..... falling concentration ..........................................
    def _solve_shock_side(self, u_L, u_R, kappa, case=None):
        model = self.model
        if case is None or case in ("monotone_JnW",):
            case = self._shock_subcase(u_L, u_R, kappa)
        pivot = self.pivot_shock(u_L.c, u_R.c, kappa)
        if case == "U_scs":
            lead = s_wave_group(model, u_L.c, u_L.s, pivot.u_minus.s)
            tail = s_wave_group(model, u_R.c, pivot.u_plus.s, u_R.s, entry_speed=pivot.v)
            if lead and lead[-1].speed_hi > pivot.v + SPEED_TOL:
                raise CompatibilityError("leading saturation group too fast for the pivot")
            return lead + [_c_shock_wave(pivot)] + tail
        if case == "U_sc":
            v_hat = model.f(u_R.s, u_R.c) / (u_R.s + pivot.h)
            u_M = self._upper_root(u_L.c, v_hat, pivot.h)
            cw = make_shock(model, u_M, u_R)
            lead = s_wave_group(model, u_L.c, u_L.s, u_M.s)
            if lead and lead[-1].speed_hi > cw.v + SPEED_TOL:
                raise CompatibilityError("leading saturation group too fast for the c shock")
            return lead + [_c_shock_wave(cw)]
        # U_cs and the overcompressive boundary
        v_hat = model.f(u_L.s, u_L.c) / (u_L.s + pivot.h)
        u_M = self._lower_root(u_R.c, v_hat, pivot.h)
        cw = make_shock(model, u_L, u_M)
        tail = s_wave_group(model, u_R.c, u_M.s, u_R.s, entry_speed=cw.v)
        return [_c_shock_wave(cw)] + tail

    def _shock_subcase(self, u_L, u_R, kappa):
        pivot = self.pivot_shock(u_L.c, u_R.c, kappa)
        sKm = critical_shock_value(self.model, pivot.u_minus, pivot.h)
        sKp = critical_shock_value(self.model, pivot.u_plus, pivot.h)
        if u_L.s >= sKm - BOUNDARY_TOL and u_R.s <= sKp + BOUNDARY_TOL:
            return "U_scs"
        if u_R.s > sKp:
            s_hat = self._overcompressive_s_L(u_L.c, u_R.c, u_R.s, pivot)
            if u_L.s >= s_hat - BOUNDARY_TOL:
                return "U_sc"
        return "U_cs"

    def _upper_root(self, c, v, h):
        roots = [r for r in row_roots(self.model, c, v, h) if self.model.f_s(r, c) < v]
        if not roots:
            if abs(self.model.f(1.0, c) - v * (1.0 + h)) < 1e-9:
                return State(1.0, c)
            raise StructureError(f"no subsonic chord root on row c={c}")
        return State(roots[-1], c)

    def _lower_root(self, c, v, h):
        roots = [r for r in row_roots(self.model, c, v, h) if self.model.f_s(r, c) > v]
        if not roots:
            raise StructureError(f"no supersonic chord root on row c={c}")
        return State(roots[0], c)

    # ..... rising concentration ...........................................
    def _solve_rare_side(self, u_L, u_R, case):
        model = self.model
        kp = self.keypoints(u_L.c, u_R.c)
        c_L, c_R = u_L.c, u_R.c

        if case == "U_cs":
            curve = self._curve_up_from_left(u_L, kp)
            u_M = curve.state_at(c_R)
            fan = _c_rare_wave(model, curve, c_L, c_R)
            tail = s_wave_group(model, c_R, u_M.s, u_R.s, entry_speed=fan.speed_hi)
            return [fan] + tail

        if case == "U_sc":
            curve = self._curve_down_from_right(u_R, kp)
            u_N = curve.state_at(c_L)
            fan = _c_rare_wave(model, curve, c_L, c_R)
            lead = s_wave_group(model, c_L, u_L.s, u_N.s)
            if lead and lead[-1].speed_hi > fan.speed_lo + SPEED_TOL:
                raise CompatibilityError("leading saturation group too fast for the fan")
            return lead + [fan]

        if case == "U_scs":
            comp = self.unstable_composite
            lead = s_wave_group(model, c_L, u_L.s, kp.s_2L)
            fan = _c_rare_wave(model, comp, c_L, c_R)
            if lead and lead[-1].speed_hi > fan.speed_lo + SPEED_TOL:
                raise CompatibilityError("leading saturation group too fast for the fan")
            tail = s_wave_group(model, c_R, kp.s_3R, u_R.s, entry_speed=fan.speed_hi)
            return lead + [fan] + tail

        if case == "U_csc":
            curve_l = self._curve_up_from_left(u_L, kp)
            curve_r = self._curve_down_from_right(u_R, kp)
            return self._critical_splice(curve_l, curve_r, c_L, c_R)

        if case == "U_cscs":
            curve_l = self._curve_up_from_left(u_L, kp)
            head = self._critical_splice(curve_l, self.seps.lower_right, c_L, None)
            c_mid = head[-1].right_state.c
            fan2 = _c_rare_wave(model, self.unstable_composite, c_mid, c_R)
            tail = s_wave_group(model, c_R, kp.s_3R, u_R.s, entry_speed=fan2.speed_hi)
            return head + [fan2] + tail

        if case == "U_scsc":
            curve_r = self._curve_down_from_right(u_R, kp)
            lead = s_wave_group(model, c_L, u_L.s, kp.s_2L)
            g3k = self.gamma3_critical(c_R)
            hit = intersect_curves(g3k, curve_r)
            if hit is None:
                raise StructureError("no crossing of the separatrix critical curve")
            c_plus, s_plus = hit
            u_plus = State(s_plus, c_plus)
            u_minus = self.unstable_composite.state_at(c_plus)
            fan1 = _c_rare_wave(model, self.unstable_composite, c_L, c_plus)
            if lead and lead[-1].speed_hi > fan1.speed_lo + SPEED_TOL:
                raise CompatibilityError("leading saturation group too fast for the fan")
            jump = _s_shock_wave(model, u_minus, u_plus)
            fan2 = _c_rare_wave(model, curve_r, c_plus, c_R)
            return lead + [fan1, jump, fan2]

        if case == "U_cscsc":
            curve_l = self._curve_up_from_left(u_L, kp)
            head = self._critical_splice(curve_l, self.seps.lower_right, c_L, None)
            c_mid = head[-1].right_state.c
            curve_r = self._curve_down_from_right(u_R, kp)
            g3k = self.gamma3_critical(c_R)
            hit = intersect_curves(g3k, curve_r)
            if hit is None:
                raise StructureError("no crossing of the separatrix critical curve")
            c_plus, s_plus = hit
            u_plus = State(s_plus, c_plus)
            u_minus = self.unstable_composite.state_at(c_plus)
            fan2 = _c_rare_wave(model, self.unstable_composite, c_mid, c_plus)
            jump2 = _s_shock_wave(model, u_minus, u_plus)
            fan3 = _c_rare_wave(model, curve_r, c_plus, c_R)
            return head + [fan2, jump2, fan3]

        raise StructureError(f"unknown rarefaction-side case {case!r}")

    def _critical_splice(self, curve_l, curve_r, c_L, c_R):
        """Fan along curve_l, equal-speed saturation jump across the critical
        value, landing on curve_r.  The jump row is the crossing of curve_l's
        critical curve with curve_r."""
        model = self.model
        ck = critical_curve(model, curve_l)
        if ck is None:
            raise StructureError("critical curve of the left fan is empty")
        hit = intersect_curves(ck, curve_r)
        if hit is None:
            raise StructureError("critical curve misses the landing fan")
        c_plus, s_plus = hit
        u_plus = State(s_plus, c_plus)
        u_minus = curve_l.state_at(c_plus)
        waves = []
        if c_plus > c_L + 1e-12:
            waves.append(_c_rare_wave(model, curve_l, c_L, c_plus))
        if abs(u_plus.s - u_minus.s) > 1e-12:
            waves.append(_s_shock_wave(model, u_minus, u_plus))
        if c_R is not None and c_R > c_plus + 1e-12:
            waves.append(_c_rare_wave(model, curve_r, c_plus, c_R))
        return waves

    def _locus_arc(self, c_row, side):
        """The chemical curve whose locus touch sits exactly on the given row.

        On the falling-f side of c* the touch is a c-maximum (the arc hangs
        below it); on the rising side a c-minimum.  The branch is launched a
        small saturation offset from the touch with the quadratic c-offset of
        the local turn.  Returns (curve, touch saturation).
        """
        key = (round(c_row, 14), side)
        if key in self._arcs:
            return self._arcs[key]
        model = self.model
        s_t = coincidence_point(model, c_row)
        p = model.flux.partials(s_t, c_row)
        h = 1e-6
        G = -(speed_gap(model, s_t + h, c_row) - speed_gap(model, s_t - h, c_row)) / (2 * h)
        if abs(p.f_c) < 1e-10:
            raise StructureError("locus arc undefined where f_c vanishes")
        ds = 1e-5 if side == OMEGA_R else -1e-5
        c0 = c_row + G * ds * ds / (2.0 * p.f_c)
        target = 0.0 if p.f_c < 0.0 else 1.0
        cs, ss, dd, term = _integrate_one_way(model, s_t + ds, c0, target)
        curve = RarefactionCurve(model, cs, ss, dd, side=side, terminus_lo=term)
        self._arcs[key] = (curve, s_t)
        return curve, s_t

    def _solve_monotone_rare(self, u_L, u_R):
        """Rising concentration with both rows on one side of c*.

        Candidate structures, tried simplest first: cs, sc, scs through a
        fan closing on (or opening from) the coincidence locus, csc through an
        equal-speed critical jump, and the four-wave splice+arc combinations.
        """
        model = self.model
        c_L, c_R = u_L.c, u_R.c
        falling = model.f_c(0.5, 0.5 * (c_L + c_R)) < 0.0  # which side of c*

        curve_l = self._curve_through(u_L, "up")
        if curve_l.covers(c_R):
            u_M = curve_l.state_at(c_R)
            tag = region_of(model, max(u_M.s, 1e-12), u_M.c)
            sk = critical_rarefaction_value(model, u_M) if u_M.s > 0 else None
            if tag in (OMEGA_L, LOCUS) or u_M.s <= 0.0:
                if sk is None or u_R.s <= sk + BOUNDARY_TOL:
                    fan = _c_rare_wave(model, curve_l, c_L, c_R)
                    tail = s_wave_group(model, c_R, u_M.s, u_R.s, entry_speed=fan.speed_hi)
                    return [fan] + tail
            if abs(u_R.s - u_M.s) <= BOUNDARY_TOL:
                return [_c_rare_wave(model, curve_l, c_L, c_R)]

        curve_r = self._curve_through(u_R, "down") if u_R.s > 0 else None
        if curve_r is not None and curve_r.covers(c_L):
            u_N = curve_r.state_at(c_L)
            tag = region_of(model, max(u_N.s, 1e-12), u_N.c)
            if tag in (OMEGA_R, LOCUS):
                sk = critical_rarefaction_value(model, u_N)
                if sk is not None and u_L.s >= sk - BOUNDARY_TOL:
                    fan = _c_rare_wave(model, curve_r, c_L, c_R)
                    lead = s_wave_group(model, c_L, u_L.s, u_N.s)
                    if not lead or lead[-1].speed_hi <= fan.speed_lo + SPEED_TOL:
                        return lead + [fan]

        waves = self._monotone_locus_scs(u_L, u_R, falling)
        if waves is not None:
            return waves
        if curve_r is None:
            raise StructureError("vacuum right state with rising concentration")
        try:
            return self._critical_splice(curve_l, curve_r, c_L, c_R)
        except StructureError:
            pass
        waves = self._monotone_arc_four_wave(u_L, u_R, curve_l, curve_r, falling)
        if waves is not None:
            return waves
        raise StructureError(f"no compatible monotone structure for {u_L} -> {u_R}")

    def _monotone_locus_scs(self, u_L, u_R, falling):
        """scs with the chemical fan closing on (falling f) or opening from
        (rising f) the coincidence locus."""
        model = self.model
        c_L, c_R = u_L.c, u_R.c
        if falling:
            arc, s_t = self._locus_arc(c_R, OMEGA_R)
            if not arc.covers(c_L):
                return None
            u_N = arc.state_at(c_L)
            touch = State(s_t, c_R)
            sk = critical_rarefaction_value(model, u_N)
            if sk is None or u_L.s < sk - BOUNDARY_TOL or u_R.s > s_t + BOUNDARY_TOL:
                return None
            lead = s_wave_group(model, c_L, u_L.s, u_N.s)
            fan = _c_rare_wave(model, arc, c_L, arc.c_hi, left=u_N, right=touch)
            if lead and lead[-1].speed_hi > fan.speed_lo + SPEED_TOL:
                return None
            tail = s_wave_group(model, c_R, s_t, u_R.s, entry_speed=fan.speed_hi)
            return lead + [fan] + tail
        arc, s_t = self._locus_arc(c_L, OMEGA_L)
        if not arc.covers(c_R):
            return None
        touch = State(s_t, c_L)
        u_exit = arc.state_at(c_R)
        sk_exit = critical_rarefaction_value(model, u_exit)
        if u_L.s < s_t - BOUNDARY_TOL:
            return None
        if sk_exit is not None and u_R.s > sk_exit + BOUNDARY_TOL:
            return None
        lead = s_wave_group(model, c_L, u_L.s, s_t)
        fan = _c_rare_wave(model, arc, arc.c_lo, c_R, left=touch, right=u_exit)
        if lead and lead[-1].speed_hi > fan.speed_lo + SPEED_TOL:
            return None
        tail = s_wave_group(model, c_R, u_exit.s, u_R.s, entry_speed=fan.speed_hi)
        return lead + [fan] + tail

    def _monotone_arc_four_wave(self, u_L, u_R, curve_l, curve_r, falling):
        """cscs (falling f) or scsc (rising f): an equal-speed critical jump
        feeding a fan that closes on / opens from the locus."""
        model = self.model
        c_L, c_R = u_L.c, u_R.c
        if falling:
            arc, s_t = self._locus_arc(c_R, OMEGA_R)
            ck = critical_curve(model, curve_l)
            if ck is None:
                return None
            hit = intersect_curves(ck, arc)
            if hit is None:
                return None
            c_plus, s_plus = hit
            u_plus = State(s_plus, c_plus)
            u_minus = curve_l.state_at(c_plus)
            touch = State(s_t, c_R)
            waves = []
            if c_plus > c_L + 1e-12:
                waves.append(_c_rare_wave(model, curve_l, c_L, c_plus))
            waves.append(_s_shock_wave(model, u_minus, u_plus))
            waves.append(_c_rare_wave(model, arc, c_plus, arc.c_hi, left=u_plus, right=touch))
            waves.extend(s_wave_group(model, c_R, s_t, u_R.s, entry_speed=waves[-1].speed_hi))
            return waves
        arc, s_t = self._locus_arc(c_L, OMEGA_L)
        ck = critical_curve(model, arc)
        if ck is None or curve_r is None:
            return None
        hit = intersect_curves(ck, curve_r)
        if hit is None:
            return None
        c_plus, s_plus = hit
        u_plus = State(s_plus, c_plus)
        u_minus = arc.state_at(c_plus)
        touch = State(s_t, c_L)
        lead = s_wave_group(model, c_L, u_L.s, s_t)
        fan1 = _c_rare_wave(model, arc, arc.c_lo, c_plus, left=touch, right=u_minus)
        if lead and lead[-1].speed_hi > fan1.speed_lo + SPEED_TOL:
            return None
        waves = lead + [fan1, _s_shock_wave(model, u_minus, u_plus),
                        _c_rare_wave(model, curve_r, c_plus, c_R)]
        return waves

    # -- assembly ----------------------------------------------------------
    def _finish(self, waves, u_L, u_R, kappa):
        waves = [w for w in waves if not w.left_state.is_close(w.right_state, 1e-13)]
        for prev, nxt in zip(waves[:-1], waves[1:]):
            if nxt.speed_lo < prev.speed_hi - SPEED_TOL:
                raise CompatibilityError(
                    f"wave speeds decrease: {prev.speed_hi} -> {nxt.speed_lo}"
                )
            if not prev.right_state.is_close(nxt.left_state, 1e-7):
                raise CompatibilityError(
                    f"states disagree between waves: {prev.right_state} vs {nxt.left_state}"
                )
        if waves:
            if not waves[0].left_state.is_close(u_L, 1e-7):
                raise CompatibilityError("first wave does not start at u_L")
            if not waves[-1].right_state.is_close(u_R, 1e-7):
                raise CompatibilityError("last wave does not end at u_R")
        interm = [w.right_state for w in waves[:-1]]
        return RiemannSolution(
            model=self.model, u_L=u_L, u_R=u_R, kappa=kappa, waves=waves,
            structure=_structure_tag(waves), intermediate_states=interm,
        )

    # -- layouts -----------------------------------------------------------
    def region_layout(self, c_L, c_R, kappa=1.0, n=64):
        """Labels on an n x n grid over (s_L, s_R) in (0, 1] x [0, 1], plus
        boundary polylines."""
        if abs(c_L - c_R) == 0.0:
            raise StructureError("region layout needs a concentration jump")
        s_L_grid = np.linspace(1.0 / n, 1.0, n)
        s_R_grid = np.linspace(0.0, 1.0, n)
        labels = np.empty((n, n), dtype=object)
        boundaries = {}
        if self._straddles(c_L, c_R) and c_L > c_R:
            self._layout_shock(c_L, c_R, kappa, s_L_grid, s_R_grid, labels, boundaries)
        elif self._straddles(c_L, c_R):
            self._layout_rare(c_L, c_R, s_L_grid, s_R_grid, labels, boundaries)
        else:
            for i, sl in enumerate(s_L_grid):
                for j, sr in enumerate(s_R_grid):
                    labels[i, j] = "monotone_JnW"
        return LayoutResult(s_L_grid, s_R_grid, labels, boundaries, c_L, c_R, kappa)

    def _layout_shock(self, c_L, c_R, kappa, s_L_grid, s_R_grid, labels, boundaries):
        pivot = self.pivot_shock(c_L, c_R, kappa)
        sKm = critical_shock_value(self.model, pivot.u_minus, pivot.h)
        sKp = critical_shock_value(self.model, pivot.u_plus, pivot.h)
        hats = {}
        for j, sr in enumerate(s_R_grid):
            if sr > sKp:
                hats[j] = self._overcompressive_s_L(c_L, c_R, sr, pivot)
        for i, sl in enumerate(s_L_grid):
            for j, sr in enumerate(s_R_grid):
                if sl >= sKm - BOUNDARY_TOL and sr <= sKp + BOUNDARY_TOL:
                    labels[i, j] = "U_scs"
                elif sr > sKp and sl >= hats[j]:
                    labels[i, j] = "U_sc"
                else:
                    labels[i, j] = "U_cs"
        srs = np.asarray([sr for j, sr in enumerate(s_R_grid) if j in hats])
        sls = np.asarray([hats[j] for j, sr in enumerate(s_R_grid) if j in hats])
        boundaries["overcompressive"] = np.column_stack((sls, srs))
        boundaries["scs_corner"] = np.array([[sKm, sKp]])

    def _layout_rare(self, c_L, c_R, s_L_grid, s_R_grid, labels, boundaries):
        kp = self.keypoints(c_L, c_R)
        b_cs = {}
        for i, sl in enumerate(s_L_grid):
            if sl < kp.s_1L - BOUNDARY_TOL:
                b_cs[i] = self._b_cs(State(sl, c_L), c_R, kp)
        b_sc = {}
        for j, sr in enumerate(s_R_grid):
            if sr > kp.s_4R + BOUNDARY_TOL:
                b_sc[j] = self._b_sc(c_L, c_R, sr, kp)
        for i, sl in enumerate(s_L_grid):
            for j, sr in enumerate(s_R_grid):
                if sl >= kp.s_1L - BOUNDARY_TOL:
                    right_col = sl >= kp.s_2K - BOUNDARY_TOL
                    if sr <= kp.s_3K + BOUNDARY_TOL:
                        labels[i, j] = "U_scs" if right_col else "U_cscs"
                    elif sr <= kp.s_4R + BOUNDARY_TOL:
                        labels[i, j] = "U_scsc" if right_col else "U_cscsc"
                    else:
                        labels[i, j] = "U_sc" if sl >= b_sc[j] - BOUNDARY_TOL else "U_csc"
                else:
                    bound = b_cs[i]
                    if bound is None or sr <= bound + BOUNDARY_TOL:
                        labels[i, j] = "U_cs"
                    else:
                        labels[i, j] = "U_csc"
        pts = [(sl, b_cs[i]) for i, sl in enumerate(s_L_grid)
               if i in b_cs and b_cs[i] is not None]
        boundaries["b_cs"] = np.asarray(pts) if pts else np.empty((0, 2))
        pts = [(b_sc[j], sr) for j, sr in enumerate(s_R_grid) if j in b_sc]
        boundaries["b_sc"] = np.asarray(pts) if pts else np.empty((0, 2))
        boundaries["rectangles"] = np.array(
            [[kp.s_1L, kp.s_2K, kp.s_3K, kp.s_4R]]
        )


@dataclass
class LayoutResult:
    s_L: np.ndarray
    s_R: np.ndarray
    labels: np.ndarray  # labels[i, j] for (s_L[i], s_R[j])
    boundaries: dict
    c_L: float
    c_R: float
    kappa: float

    def label_counts(self):
        out = {}
        for lab in self.labels.ravel():
            out[lab] = out.get(lab, 0) + 1
        return out

    def areas(self):
        cell = (self.s_L[1] - self.s_L[0]) * (self.s_R[1] - self.s_R[0])
        return {k: v * cell for k, v in self.label_counts().items()}


def _structure_tag(waves):
    if not waves:
        return "constant"
    seq = []
    for w in waves:
        fam = "s" if w.kind in (S_SHOCK, S_RARE) else "c"
        if seq and seq[-1] == fam == "s":
            continue
        seq.append(fam)
    tag = "".join(seq)
    if tag == "s":
        return "single_s"
    if tag == "c":
        return "single_c"
    if tag == "cs" and len(waves) == 2 and all(w.is_shock for w in waves) \
            and abs(waves[0].speed_lo - waves[1].speed_lo) < 1e-7:
        return "sc_overcomp"
    return tag


def _states(u_L, u_R):
    if not isinstance(u_L, State):
        u_L = State(*u_L)
    if not isinstance(u_R, State):
        u_R = State(*u_R)
    return u_L, u_R


# ---------------------------------------------------------------------------
# module-level convenience API
# ---------------------------------------------------------------------------

_SOLVERS = {}


def _solver_for(model):
    key = id(model)
    if key not in _SOLVERS:
        _SOLVERS[key] = RiemannSolver(model)
    return _SOLVERS[key]


def classify_pair(model, u_L, u_R, kappa=1.0):
    return _solver_for(model).classify_pair(u_L, u_R, kappa)


def solve(model, u_L, u_R, kappa=1.0, region=None):
    return _solver_for(model).solve(u_L, u_R, kappa, region=region)


def region_layout(model, c_L, c_R, kappa=1.0, n=64):
    return _solver_for(model).region_layout(c_L, c_R, kappa, n)


def profile_l1_distance(sol_a, sol_b, xi_lo=None, xi_hi=None, n=2001):
    """Trapezoidal L1(xi) distance between two self-similar profiles (s and c)."""
    speeds = [0.0]
    for sol in (sol_a, sol_b):
        for w in sol.waves:
            speeds.extend((w.speed_lo, w.speed_hi))
    if xi_lo is None:
        xi_lo = min(speeds) - 0.1
    if xi_hi is None:
        xi_hi = max(speeds) + 0.1
    xis = np.linspace(xi_lo, xi_hi, n)
    sa = np.array([sol_a.evaluate(x).as_tuple() for x in xis])
    sb = np.array([sol_b.evaluate(x).as_tuple() for x in xis])
    ds = np.trapezoid(np.abs(sa[:, 0] - sb[:, 0]), xis)
    dc = np.trapezoid(np.abs(sa[:, 1] - sb[:, 1]), xis)
    return float(ds), float(dc)
