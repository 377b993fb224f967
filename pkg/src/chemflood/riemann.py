"""Riemann solvers in original and Lagrange coordinates.

Orientation: Lagrange data are ordered by the potential phi, which grows with t
at fixed x. The Lagrange left state is therefore the original state *ahead*
(x -> +inf, possibly DRY) and the Lagrange right state is the injected one.
A Lagrange wave of speed eta through a state (s, c) moves with original speed
f / (s + eta), so the original fan is the Lagrange fan read backwards.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from . import _roots
from .errors import DomainError, InconsistencyError, StructuralError
from .grid import GridField
from .lagrange import LagrangeState, U_inflection, U_max, eval_F, s_of_U, to_lagrange
from .model import DEFAULT_MODEL, ModelConfig, inflection_s, water_front_s
from .shock import (
    DC_TOL,
    LagrangeShockData,
    ShockData,
    admissible,
    classify_nullclines,
    d_coeffs,
    lax_lagrange,
    unmap_shock,
)

N_ENVELOPE = 2**12
SPEED_TOL = 1e-9
N_PROFILE = 129
DRY_S = 1e-6  # U = 1/f ~ 1/s^2 loses F to roundoff from about s = 1e-7 down
WET_U = 1e-12  # U - 1 below this is s = 1 to about 1e-6, beyond what U resolves


class WaveKind(str, enum.Enum):
    SHOCK = "shock"
    RAREFACTION = "rarefaction"
    ZETA_SHOCK = "zeta-shock"
    ZETA_RAREFACTION = "zeta-rarefaction"


@dataclass
class Wave:
    """One wave of a fan. States are (s, c) originally or (U, zeta) in Lagrange
    coordinates, with U = None for DRY. ``inverse`` maps speeds inside a
    rarefaction to an array of states."""

    kind: WaveKind
    left: tuple
    right: tuple
    speed_lo: float
    speed_hi: float
    inverse: Optional[Callable] = field(default=None, repr=False, compare=False)

    @property
    def is_shock(self) -> bool:
        return self.kind in (WaveKind.SHOCK, WaveKind.ZETA_SHOCK)

    def to_dict(self):
        def st(x):
            return [None if v is None else float(v) for v in x]
        return {"kind": self.kind.value, "left": st(self.left), "right": st(self.right),
                "speed_lo": float(self.speed_lo), "speed_hi": float(self.speed_hi)}


@dataclass
class ZeroFlowRegion:
    """Region ahead of the water front, {t < x / front_speed}, where s = 0 and c keeps its initial value."""

    front_speed: float
    c: float

    def t0(self, x):
        return np.asarray(x, dtype=float) / self.front_speed

    def to_dict(self):
        return {"front_speed": float(self.front_speed), "c": float(self.c)}


@dataclass
class WaveFan:
    coords: str  # "original" | "lagrange" | "zeta"
    left: tuple
    right: tuple
    waves: list = field(default_factory=list)
    zero_flow: Optional[ZeroFlowRegion] = None

    def speeds(self) -> list:
        return [(w.speed_lo, w.speed_hi) for w in self.waves]

    def check(self, tol: float = SPEED_TOL):
        """Adjacency and speed ordering; raises InconsistencyError on violation."""
        prev_hi = -np.inf
        state = self.left
        for w in self.waves:
            if not _same_state(w.left, state):
                raise InconsistencyError(f"wave {w.kind.value} does not start at the previous state")
            if w.speed_lo > w.speed_hi + tol or w.speed_lo < prev_hi - tol:
                raise InconsistencyError("fan speeds are not ordered")
            prev_hi, state = w.speed_hi, w.right
        if not _same_state(state, self.right):
            raise InconsistencyError("fan does not end at the right state")
        return self

    def state_at(self, xi):
        """States at similarity coordinates xi (array), shape (len(xi), 2)."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty((len(xi), 2))
        out[:] = _num(self.left)
        for w in self.waves:
            if w.is_shock:
                out[xi > w.speed_lo] = _num(w.right)
            else:
                inside = (xi > w.speed_lo) & (xi < w.speed_hi)
                out[xi >= w.speed_hi] = _num(w.right)
                if np.any(inside):
                    out[inside] = w.inverse(xi[inside])
        return out

    def profile(self, n: int = N_PROFILE, margin: float = 0.25):
        """(xi, states) with n equi-spaced speeds over the fan plus both sides of every shock."""
        finite = [v for w in self.waves for v in (w.speed_lo, w.speed_hi) if np.isfinite(v)]
        if not finite:
            finite = [0.0]
        lo, hi = min(finite), max(finite)
        span = max(hi - lo, 1.0)
        xi = np.linspace(lo - margin * span, hi + margin * span, n)
        extra = []
        for w in self.waves:
            if w.is_shock:
                extra += [w.speed_lo - 1e-12 * span, w.speed_lo + 1e-12 * span]
        xi = np.unique(np.concatenate([xi, extra]))
        return xi, self.state_at(xi)

    def to_dict(self):
        def st(x):
            return [None if v is None else float(v) for v in x]
        d = {"coords": self.coords, "left": st(self.left), "right": st(self.right),
             "waves": [w.to_dict() for w in self.waves]}
        if self.zero_flow is not None:
            d["zero_flow"] = self.zero_flow.to_dict()
        return d


def _num(st):
    return [np.inf if v is None else v for v in st]


def _same_state(a, b, tol=1e-9):
    for x, y in zip(a, b):
        if (x is None) != (y is None):
            return False
        if x is not None and abs(x - y) > tol * max(1.0, abs(x)):
            return False
    return True


# ---------------------------------------------------------------- envelopes

@dataclass(frozen=True)
class Segment:
    kind: str  # "curve" | "chord"
    a: float
    b: float


HULL_RTOL = 64 * np.finfo(float).eps


def _hull(x, y, upper):
    # a vertex is dropped only when it is off the hull beyond roundoff, so
    # nearly collinear runs stay curve rather than turning into spurious chords
    sgn = -1.0 if upper else 1.0
    idx = []
    for i in range(len(x)):
        while len(idx) >= 2:
            o, a = idx[-2], idx[-1]
            p1 = (x[a] - x[o]) * (y[i] - y[o])
            p2 = (y[a] - y[o]) * (x[i] - x[o])
            if sgn * (p1 - p2) < -HULL_RTOL * (abs(p1) + abs(p2)):
                idx.pop()
            else:
                break
        idx.append(i)
    return idx


def _refine_tangent(fun, dfun, x, i, e):
    """Tangency point near grid node i of a chord whose other end is e."""
    phi = lambda z: float(dfun(z) * (z - e) - (fun(z) - fun(e)))
    n = len(x)
    for w in (1, 2, 4, 8):
        a, b = x[max(i - w, 0)], x[min(i + w, n - 1)]
        fa, fb = phi(a), phi(b)
        if fa == 0.0:
            return float(a)
        if fb == 0.0:
            return float(b)
        if fa * fb < 0:
            return float(brentq(phi, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return float(x[i])


def envelope(fun, dfun, lo: float, hi: float, upper: bool, n: int = N_ENVELOPE) -> list:
    """Convex (lower) or concave (upper) envelope of fun on [lo, hi] as curve/chord segments.

    Hull vertices come from a uniform grid of n + 1 points; interior chord ends
    are then refined to the exact tangency points.
    """
    if not lo < hi:
        raise DomainError("envelope needs lo < hi")
    x = np.linspace(lo, hi, n + 1)
    y = np.asarray(fun(x), dtype=float)
    idx = _hull(x, y, upper)
    segs = []
    for i, j in zip(idx[:-1], idx[1:]):
        kind = "curve" if j == i + 1 else "chord"
        if segs and segs[-1][0] == kind == "curve":
            segs[-1][2] = j
        else:
            segs.append([kind, i, j])
    out = []
    pts = {}
    for kind, i, j in segs:
        if kind == "chord":
            if i != 0 and j == n:
                pts[i] = _refine_tangent(fun, dfun, x, i, hi)
            elif j != n and i == 0:
                pts[j] = _refine_tangent(fun, dfun, x, j, lo)
    for kind, i, j in segs:
        out.append(Segment(kind, pts.get(i, float(x[i])), pts.get(j, float(x[j]))))
    return out


def _finite(v):
    return float(np.clip(v, -1e300, 1e300))


def inflection_envelope(fun, dfun, lo: float, hi: float, upper: bool, x_inf: float, convex_below: bool) -> list:
    """Envelope of a function with a single inflection x_inf, convex below it if convex_below.

    On each side the envelope is the graph or one chord, joined at a tangency
    point found by root bracketing, so no grid is involved and intervals that
    straddle the inflection by less than the curvature resolution are exact.
    """
    if not lo < hi:
        raise DomainError("envelope needs lo < hi")
    sgn = -1.0 if upper else 1.0  # the upper envelope of fun is the lower one of -fun
    g = lambda x: sgn * fun(x)
    dg = lambda x: sgn * dfun(x)
    cb = convex_below != upper
    tol = 4 * np.finfo(float).eps * max(abs(lo), abs(hi), 1.0)
    if x_inf <= lo + tol or x_inf >= hi - tol:
        convex = cb == (x_inf >= hi - tol)
        return [Segment("curve" if convex else "chord", float(lo), float(hi))]
    if cb:
        # convex then concave: graph from lo up to the tangent from hi
        phi = lambda z: _finite(dg(z) * (hi - z) - (g(hi) - g(z)))
        if phi(lo) >= 0.0:
            return [Segment("chord", float(lo), float(hi))]
        tp = float(brentq(phi, lo, x_inf, xtol=1e-15, rtol=4 * np.finfo(float).eps)) if phi(x_inf) > 0 else float(x_inf)
        return [Segment("curve", float(lo), tp), Segment("chord", tp, float(hi))]
    # concave then convex: chord from lo to the tangent point, then graph
    psi = lambda z: _finite(dg(z) * (z - lo) - (g(z) - g(lo)))
    if psi(hi) <= 0.0:
        return [Segment("chord", float(lo), float(hi))]
    tp = float(brentq(psi, x_inf, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)) if psi(x_inf) < 0 else float(x_inf)
    return [Segment("chord", float(lo), tp), Segment("curve", tp, float(hi))]


def convex_envelope(c: float, s_lo: float, s_hi: float, m: ModelConfig = DEFAULT_MODEL, upper: bool = False,
                    n: int = N_ENVELOPE) -> list:
    """Lower convex (or, with upper=True, upper concave) envelope of f(., c) on [s_lo, s_hi].

    f(., c) is convex below its single inflection and concave above, so the
    construction is exact; n is kept for parity with the grid-based envelope.
    """
    if not 0.0 <= s_lo < s_hi <= 1.0:
        raise DomainError("need 0 <= s_lo < s_hi <= 1")
    return inflection_envelope(lambda s: m.f(s, c), lambda s: m.f_s(s, c), s_lo, s_hi, upper,
                               inflection_s(float(c), m), True)


def _pieces(fun, dfun, uL, uR, n, inflection=None):
    """Envelope pieces traversed from uL to uR: (kind, u_start, u_end, speed_start, speed_end).

    ``inflection`` = (x_inf, convex_below) selects the exact single-inflection
    construction instead of the grid hull.
    """
    if abs(uL - uR) <= DC_TOL:  # below this the jump carries no resolvable flux difference
        return []
    lo, hi = min(uL, uR), max(uL, uR)
    if inflection is None:
        segs = envelope(fun, dfun, lo, hi, upper=uL > uR, n=n)
    else:
        segs = inflection_envelope(fun, dfun, lo, hi, uL > uR, *inflection)
    if uL > uR:
        segs = [Segment(sg.kind, sg.b, sg.a) for sg in reversed(segs)]
    out = []
    for sg in segs:
        if sg.kind == "chord":
            v = float((fun(sg.b) - fun(sg.a)) / (sg.b - sg.a))
            out.append(("shock", sg.a, sg.b, v, v))
        else:
            out.append(("rarefaction", sg.a, sg.b, float(dfun(sg.a)), float(dfun(sg.b))))
    return out


# ---------------------------------------------------------------- scalar problems

def _bl_inverse(c, a, b, m):
    lo, hi = min(a, b), max(a, b)
    inc = m.f_s(hi, c) > m.f_s(lo, c)

    def inv(xi):
        s = _roots.bisect_monotone(lambda z: m.f_s(z, c), xi, lo, hi, increasing=inc)
        return np.column_stack([s, np.full_like(s, c)])
    return inv


def solve_bl(s_left: float, s_right: float, c: float, m: ModelConfig = DEFAULT_MODEL, n: int = N_ENVELOPE) -> WaveFan:
    """Buckley-Leverett Riemann problem at fixed c."""
    waves = []
    for kind, a, b, va, vb in _pieces(lambda s: m.f(s, c), lambda s: m.f_s(s, c), s_left, s_right, n,
                                      inflection=(inflection_s(float(c), m), True)):
        if kind == "shock":
            waves.append(Wave(WaveKind.SHOCK, (a, c), (b, c), va, vb))
        else:
            waves.append(Wave(WaveKind.RAREFACTION, (a, c), (b, c), va, vb, _bl_inverse(c, a, b, m)))
    return WaveFan("original", (float(s_left), float(c)), (float(s_right), float(c)), waves).check()


def solve_zeta(zeta_left: float, zeta_right: float, m: ModelConfig = DEFAULT_MODEL) -> WaveFan:
    """Scalar concave problem zeta_x + a(zeta)_phi = 0."""
    for z in (zeta_left, zeta_right):
        if not 0.0 <= z <= 1.0:
            raise DomainError("zeta must lie in [0, 1]")
    fan = WaveFan("zeta", (float(zeta_left),), (float(zeta_right),))
    if abs(zeta_left - zeta_right) <= DC_TOL:
        return fan
    if zeta_left < zeta_right:
        v = float((m.a(zeta_right) - m.a(zeta_left)) / (zeta_right - zeta_left))
        fan.waves.append(Wave(WaveKind.ZETA_SHOCK, (zeta_left,), (zeta_right,), v, v))
    else:
        def inv(eta, zl=zeta_left, zr=zeta_right):
            z = _roots.bisect_monotone(m.a_c, eta, zr, zl, increasing=False)
            return np.column_stack([np.full_like(z, np.nan), z])
        fan.waves.append(Wave(WaveKind.ZETA_RAREFACTION, (zeta_left,), (zeta_right,),
                              float(m.a_c(zeta_left)), float(m.a_c(zeta_right)), inv))
    return fan


def _FU_of_s(s, z, m):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = m.f(s, z) / m.f_s(s, z) - s
    return out if out.ndim else float(out)


def _U_inverse(z, Ua, Ub, m):
    s1, s2 = s_of_U(Ua, z, m), s_of_U(Ub, z, m)
    lo, hi = min(s1, s2), max(s1, s2)
    inc = _FU_of_s(hi, z, m) > _FU_of_s(lo, z, m)

    def inv(eta):
        s = _roots.bisect_monotone(lambda q: _FU_of_s(q, z, m), eta, lo, hi, increasing=inc)
        return np.column_stack([1.0 / m.f(s, z), np.full_like(s, z)])
    return inv


def _F(z, m):
    return lambda U: eval_F(U, z, m)[0]


def _FU(z, m):
    return lambda U: eval_F(U, z, m)[1]


def solve_U_scalar(left: LagrangeState, right: LagrangeState, m: ModelConfig = DEFAULT_MODEL,
                   n: int = N_ENVELOPE) -> WaveFan:
    """U_x + F(U, zeta)_phi = 0 at fixed zeta; a DRY left state is allowed."""
    if abs(left.zeta - right.zeta) > DC_TOL:
        raise DomainError("solve_U_scalar needs equal zeta on both sides")
    if right.is_dry:
        raise DomainError("DRY right state (no injected flow) is not supported")
    z = right.zeta
    fan = WaveFan("lagrange", (left.U, z), (right.U, z))
    start = left.U
    if left.is_dry:
        start = max(right.U, U_max(z, m))
        fan.waves.append(Wave(WaveKind.SHOCK, (None, z), (start, z), 0.0, 0.0))
    # F(., zeta) is concave on [1, U^I] and convex beyond
    for kind, a, b, va, vb in _pieces(_F(z, m), _FU(z, m), start, right.U, n, inflection=(U_inflection(z, m), False)):
        if kind == "shock":
            fan.waves.append(Wave(WaveKind.SHOCK, (a, z), (b, z), va, vb))
        else:
            fan.waves.append(Wave(WaveKind.RAREFACTION, (a, z), (b, z), va, vb, _U_inverse(z, a, b, m)))
    return fan.check()


# ---------------------------------------------------------------- split system

def tangent_s(speed: float, z: float, m: ModelConfig = DEFAULT_MODEL) -> float:
    """s in (s^wf, 1) where F_U = speed > 0, i.e. the line through (-speed, 0) touches f(., z)."""
    swf = water_front_s(z, m)
    return float(brentq(lambda s: _FU_of_s(s, z, m) - speed, swf, 1.0 - 1e-15, xtol=1e-15))


def _rh_partners(K, sigma, z, m):
    """All s with -(s + sigma)/f(s, z) = K, on both monotone branches."""
    st = tangent_s(sigma, z, m)
    h = lambda s: -(s + sigma) / m.f(s, z) - K
    out = []
    hs = h(st)
    if abs(hs) <= 1e-13:
        return [st]
    if hs < 0:
        return []
    # h -> -inf as s -> 0: find a finite point with h < 0
    a = st
    while h(a) > 0 and a > 1e-12:
        a *= 0.5
    if h(a) < 0:
        out.append(brentq(h, a, st, xtol=1e-15))
    h1 = h(1.0)
    if abs(h1) <= 1e-13:
        out.append(1.0)
    elif h1 < 0:
        out.append(brentq(h, st, 1.0, xtol=1e-15))
    return out


def _sweep(K, sigma, z, m, n=17):
    s = np.linspace(0.05, 1.0, n)
    h = -(s + sigma) / m.f(s, z) - K
    return "".join("+" if v > 0 else "-" for v in h)


def _fan_ok(fan, lo=None, hi=None):
    for w in fan.waves:
        if hi is not None and w.speed_hi > hi + SPEED_TOL:
            return False
        if lo is not None and w.speed_lo < lo - SPEED_TOL:
            return False
    return True


def _dedupe(cands, key):
    out = []
    for c in cands:
        if not any(all(abs(a - b) <= 1e-9 for a, b in zip(key(c), key(d))) for d in out):
            out.append(c)
    return out


def _resolve_zeta_shock(left: LagrangeState, right: LagrangeState, m, n):
    zl, zr = left.zeta, right.zeta
    sigma = float((m.a(zr) - m.a(zl)) / (zr - zl))
    candidates = []
    diag = []

    def consider(Um, Up):
        lf = solve_U_scalar(left, LagrangeState(Um, zl), m, n)
        rf = solve_U_scalar(LagrangeState(Up, zr), right, m, n)
        if not (_fan_ok(lf, hi=sigma) and _fan_ok(rf, lo=sigma)):
            return
        sh = unmap_shock(LagrangeShockData(Um, Up, zl, zr, sigma), m)
        try:
            ok = admissible(sh, m).admissible
        except DomainError as exc:
            # U within roundoff of 1: the (s, c) image no longer satisfies RH
            diag.append(f"U-={Um:.10g}, U+={Up:.10g} dropped: {exc}")
            return
        if ok:
            candidates.append((Um, Up, lf, rf))

    known_left = ([] if left.is_dry else [left.U]) + [1.0 / m.f(tangent_s(sigma, zl, m), zl)]
    for Um in known_left:
        K = eval_F(Um, zl, m)[0] - sigma * Um
        parts = _rh_partners(K, sigma, zr, m)
        diag.append(f"U-={Um:.10g}: sweep on zeta={zr:g} [{_sweep(K, sigma, zr, m)}]")
        for sp in parts:
            consider(Um, float(1.0 / m.f(sp, zr)))
    for Up in [right.U, 1.0 / m.f(tangent_s(sigma, zr, m), zr)]:
        K = eval_F(Up, zr, m)[0] - sigma * Up
        parts = _rh_partners(K, sigma, zl, m)
        diag.append(f"U+={Up:.10g}: sweep on zeta={zl:g} [{_sweep(K, sigma, zl, m)}]")
        for sp in parts:
            consider(float(1.0 / m.f(sp, zl)), Up)
    candidates = _dedupe(candidates, key=lambda c: (c[0], c[1]))
    if len(candidates) != 1:
        msg = f"{len(candidates)} admissible resolutions across the zeta-shock"
        if not candidates and not left.is_dry and left.U - 1.0 <= WET_U:
            msg += (" (the state ahead is within roundoff of s = 1, where the only limit is a c-jump with"
                    " s+ = s- = 1, which is never admissible)")
        raise StructuralError(msg + "; " + "; ".join(diag))
    Um, Up, lf, rf = candidates[0]
    mid = Wave(WaveKind.ZETA_SHOCK, (Um, zl), (Up, zr), sigma, sigma)
    return lf.waves + [mid] + rf.waves


RESONANCE_TOL = 1e-9
SNAP_TOL = 1e-9


def _resonance(s, z, m):
    """F_U - a_c at (s, z), with the limits F_U -> 0 at s = 0 and +inf at s = 1."""
    fs = m.f_s(s, z)
    if fs == 0.0:
        return 1.0 if s >= 1.0 else -float(m.a_c(z))
    return float(m.f(s, z) / fs - s - m.a_c(z))


def _zeta_path(s0, z_from, z_to, m, branch=0, partial=False):
    """s along a zeta-rarefaction from z_from to z_to, as a callable of z.

    The path solves (F_U - a_c) dU = -F_zeta dzeta.  It is integrated as an
    autonomous curve in (z, s) so that a start on the resonance F_U = a_c,
    where s(z) has a square-root branch point, is regular.  ``branch`` picks the
    side of the resonance (+1 fast, -1 slow) and is only needed for such starts.
    Integral curves reach their largest z on the resonance, so a path turns
    back there.  Then None is returned, or with ``partial`` the piece up to
    the turn, whose end is stored as ``path.z_reach``.
    """
    d = 1.0 if z_to > z_from else -1.0
    if s0 >= 1.0 or s0 <= 0.0:
        def const(z):
            return np.full_like(np.asarray(z, dtype=float), 1.0 if s0 >= 1.0 else 0.0)
        const.z_reach = z_to
        return const
    g0 = _resonance(s0, z_from, m)
    if abs(g0) <= RESONANCE_TOL:
        if branch == 0 or d > 0:
            return None
        side = float(branch)
    else:
        side = 1.0 if g0 > 0 else -1.0
    sig = -d * side

    def rhs(tau, y):
        z, s = y[0], min(max(y[1], 0.0), 1.0)
        fs = m.f_s(s, z)
        ratio = 0.0 if fs == 0.0 else m.f_c(s, z) / fs
        return [-sig * _resonance(s, z, m), -sig * ratio * (s + m.a_c(z))]

    def arrive(tau, y):
        return y[0] - z_to
    arrive.terminal = True

    def turn(tau, y):
        return side * _resonance(min(max(y[1], 0.0), 1.0), y[0], m)
    turn.terminal = True
    turn.direction = -1

    sol = solve_ivp(rhs, (0.0, 1e6), [z_from, s0], method="RK45", rtol=1e-11, atol=1e-13, dense_output=True,
                    events=[arrive, turn])
    if len(sol.t_events[0]):
        t_end = float(sol.t_events[0][0])
    elif partial and len(sol.t_events[1]):
        t_end = float(sol.t_events[1][0])
    else:
        return None

    def path(z):
        z = np.asarray(z, dtype=float)
        tau = _roots.bisect_monotone(lambda u: sol.sol(u)[0], z, 0.0, t_end, increasing=d > 0)
        return np.clip(sol.sol(tau.ravel())[1].reshape(tau.shape), 0.0, 1.0)
    path.z_reach = float(sol.sol(t_end)[0])
    return path


class _Resonant(Exception):
    pass


def _zeta_rarefaction_wave(Ua, za, Ub, zb, path, m):
    """Lagrange zeta-rarefaction from (Ua, za) down to (Ub, zb) along path."""

    def inv(eta):
        z = _roots.bisect_monotone(m.a_c, eta, zb, za, increasing=False)
        s = path(z)
        return np.column_stack([1.0 / m.f(s, z), z])
    w = Wave(WaveKind.ZETA_RAREFACTION, (Ua, za), (Ub, zb), float(m.a_c(za)), float(m.a_c(zb)), inv)
    w.path = path
    return w


def _resolve_zeta_rarefaction(left: LagrangeState, right: LagrangeState, m, n):
    """U-waves around a zeta-rarefaction.

    Lax U-shocks cannot sit next to the fan on a side where the fan neighbours
    a slow state, which leaves four structures: an empty left fan, an empty
    right fan, a left fan ending in a rarefaction at the resonance, or a U-shock
    embedded in the fan at speed a_c(zeta*) joining a fast path from the left
    to a slow path from the right state.
    """
    zl, zr = left.zeta, right.zeta
    eta_l, eta_r = float(m.a_c(zl)), float(m.a_c(zr))
    candidates = []

    def U(s, z):
        return float(1.0 / m.f(s, z))

    def snap(Um, Up):
        # shots that land on a data state leave no roundoff wave behind
        if not left.is_dry and abs(Um - left.U) <= SNAP_TOL * left.U:
            Um = left.U
        if abs(Up - right.U) <= SNAP_TOL * right.U:
            Up = right.U
        return Um, Up

    def accept(Um, Up, mid):
        lf = solve_U_scalar(left, LagrangeState(Um, zl), m, n)
        rf = solve_U_scalar(LagrangeState(Up, zr), right, m, n)
        if _fan_ok(lf, hi=eta_l) and _fan_ok(rf, lo=eta_r):
            candidates.append((Um, Up, lf, rf, mid))

    def consider(s_minus, branch=0):
        path = _zeta_path(s_minus, zl, zr, m, branch)
        if path is None:
            return
        Um, Up = snap(U(s_minus, zl), U(float(path(zr)), zr))
        accept(Um, Up, [_zeta_rarefaction_wave(Um, zl, Up, zr, path, m)])

    s_res = tangent_s(eta_l, zl, m)
    s_left = None if left.is_dry else float(s_of_U(left.U, zl, m))
    s_right = float(s_of_U(right.U, zr, m))
    consider(s_res, +1)
    consider(s_res, -1)
    if s_left is not None:
        consider(s_left)

    # empty right fan: shoot on s- over a grid whose nodes include the resonant start
    grid = np.unique(np.concatenate([np.linspace(1e-3, 1.0, 65), [s_res]]))

    def end_s(x):
        p = None if abs(x - s_res) <= 1e-12 else _zeta_path(x, zl, zr, m)
        if p is None:
            raise _Resonant
        return float(p(zr)) - s_right
    gaps = []
    for x in grid:
        try:
            gaps.append(end_s(x))
        except _Resonant:
            gaps.append(None)
    for k in range(len(grid) - 1):
        g0, g1 = gaps[k], gaps[k + 1]
        if g0 is None or g1 is None:
            continue
        if g0 == 0.0:
            consider(grid[k])
        elif g0 * g1 < 0:
            try:
                consider(float(brentq(end_s, grid[k], grid[k + 1], xtol=1e-14)))
            except _Resonant:
                continue

    # U-shock embedded in the fan
    if _resonance(s_right, zr, m) < 0:
        back = _zeta_path(s_right, zr, zl, m, partial=True)
        fronts = [(s_res, +1)]
        if s_left is not None and _resonance(s_left, zl, m) > 0:
            fronts.append((s_left, 0))
        for s0, branch in fronts if back is not None else []:
            fwd = _zeta_path(s0, zl, zr, m, branch)
            if fwd is None:
                continue

            def rh(z):
                sa, sb = float(fwd(z)), float(back(z))
                ua, ub = U(sa, z), U(sb, z)
                return sa * ua - sb * ub - float(m.a_c(z)) * (ub - ua)
            top = min(zl, back.z_reach)
            zs = np.linspace(zr, top, 33)
            rs = [rh(z) for z in zs]
            for k in range(len(zs) - 1):
                if rs[k] * rs[k + 1] < 0:
                    zs_ = float(brentq(rh, zs[k], zs[k + 1], xtol=1e-14))
                    sa, sb = float(fwd(zs_)), float(back(zs_))
                    Um, Up = snap(U(s0, zl), right.U)
                    Ua, Ub = U(sa, zs_), U(sb, zs_)
                    sigma = float(m.a_c(zs_))
                    mid = [Wave(WaveKind.SHOCK, (Ua, zs_), (Ub, zs_), sigma, sigma)]
                    if zl - zs_ > DC_TOL:
                        mid.insert(0, _zeta_rarefaction_wave(Um, zl, Ua, zs_, fwd, m))
                    if zs_ - zr > DC_TOL:
                        mid.append(_zeta_rarefaction_wave(Ub, zs_, Up, zr, back, m))
                    accept(Um, Up, mid)

    candidates = _dedupe(candidates, key=lambda c: (c[0], c[1], len(c[4])))
    if len(candidates) != 1:
        raise StructuralError(f"{len(candidates)} resolutions across the zeta-rarefaction")
    Um, Up, lf, rf, mid = candidates[0]
    return lf.waves + mid + rf.waves


def solve_system_lagrange(left: LagrangeState, right: LagrangeState, m: ModelConfig = DEFAULT_MODEL,
                          n: int = N_ENVELOPE) -> WaveFan:
    """Riemann problem for the split system; left may be DRY, right must be wet."""
    if right.is_dry:
        raise DomainError("DRY right state (no injected flow) is not supported")
    if abs(left.zeta - right.zeta) <= DC_TOL:
        return solve_U_scalar(left, LagrangeState(right.U, left.zeta), m, n)
    if left.zeta < right.zeta:
        waves = _resolve_zeta_shock(left, right, m, n)
    else:
        waves = _resolve_zeta_rarefaction(left, right, m, n)
    fan = WaveFan("lagrange", (left.U, left.zeta), (right.U, right.zeta), waves).check()
    for w in fan.waves:
        if w.kind == WaveKind.SHOCK:
            lsh = LagrangeShockData(w.left[0], w.right[0], w.left[1], w.right[1], w.speed_lo)
            if not lax_lagrange(lsh, m).holds:
                raise InconsistencyError(f"U-shock {w.left} -> {w.right} fails the Lax condition")
    return fan


# ---------------------------------------------------------------- back to (x, t)

def _orig(state, m):
    U, z = state
    if U is None:
        return (0.0, float(z))
    return (float(s_of_U(U, z, m)), float(z))


def to_original(fan: WaveFan, m: ModelConfig = DEFAULT_MODEL) -> WaveFan:
    """Map a Lagrange fan to the self-similar (s, c)(x/t) fan; a DRY Lagrange
    left state becomes the zero-flow region ahead of the water front."""
    if fan.coords != "lagrange":
        raise DomainError("to_original expects a Lagrange fan")
    if fan.right[0] is None:
        raise DomainError("DRY injected state is not supported")
    waves = []
    for w in reversed(fan.waves):
        sl, sr = _orig(w.right, m), _orig(w.left, m)
        if w.is_shock:
            lsh = LagrangeShockData(w.left[0], w.right[0], w.left[1], w.right[1], w.speed_lo)
            sh = unmap_shock(lsh, m)
            kind = WaveKind.SHOCK if w.kind == WaveKind.SHOCK else WaveKind.ZETA_SHOCK
            waves.append(Wave(kind, (sh.s_minus, sh.c_minus), (sh.s_plus, sh.c_plus), sh.v, sh.v))
        elif w.kind == WaveKind.RAREFACTION:
            c = sl[1]
            va, vb = float(m.f_s(sl[0], c)), float(m.f_s(sr[0], c))
            waves.append(Wave(WaveKind.RAREFACTION, sl, sr, va, vb, _bl_inverse(c, sl[0], sr[0], m)))
        else:
            waves.append(_map_zeta_rarefaction(w, sl, sr, m))
    out = WaveFan("original", _orig(fan.right, m), _orig(fan.left, m), waves)
    if fan.left[0] is None:
        out.zero_flow = ZeroFlowRegion(waves[-1].speed_hi, float(fan.left[1]))
    out.check()
    for w in out.waves:
        if w.is_shock and w.speed_lo <= 0.0:
            raise InconsistencyError("original shock speed must be positive")
    return out


def _map_zeta_rarefaction(w, sl, sr, m):
    path = w.path
    zl, zr = w.left[1], w.right[1]  # Lagrange order: zl > zr

    def speed(z):
        s = path(z)
        return m.f(s, z) / (s + m.a_c(z))
    vz_a, vz_b = float(speed(zr)), float(speed(zl))
    inc = vz_b > vz_a

    def inv(v):
        z = _roots.bisect_monotone(speed, v, zr, zl, increasing=inc)
        return np.column_stack([path(z), z])
    return Wave(WaveKind.ZETA_RAREFACTION, sl, sr, min(vz_a, vz_b), max(vz_a, vz_b), inv)


def lagrange_data(left, right, m: ModelConfig = DEFAULT_MODEL):
    """Lagrange Riemann data (phi-ordered) for original states left=(s, c) behind, right ahead.

    An ahead saturation below DRY_S is taken as dry: U = 1/f ~ 1/s^2 is then far
    beyond the range where F can be evaluated, and the fan differs from the dry
    one by O(s).
    """
    s, c = right
    ahead = to_lagrange(0.0 if s < DRY_S else s, c, m)
    return ahead, to_lagrange(*left, m)


def solve_riemann(left, right, m: ModelConfig = DEFAULT_MODEL, coords: str = "orig") -> WaveFan:
    """Original data (s, c) injected at the left, (s, c) ahead; solved through Lagrange coordinates."""
    lL, lR = lagrange_data(left, right, m)
    fan = solve_system_lagrange(lL, lR, m)
    if coords in ("lagr", "lagrange"):
        return fan
    out = to_original(fan, m)
    # the data survive the s -> U -> s round trip only to roundoff; hand back the exact states
    left, right = (float(left[0]), float(left[1])), (float(right[0]), float(right[1]))
    out.left, out.right = left, right
    if 0.0 < right[0] < DRY_S and out.waves:
        # the front was built against s = 0; redo the trailing fixed-c waves against the true state ahead
        k = len(out.waves)
        while k > 0 and out.waves[k - 1].kind in (WaveKind.SHOCK, WaveKind.RAREFACTION) \
                and abs(out.waves[k - 1].left[1] - right[1]) <= DC_TOL:
            k -= 1
        if k < len(out.waves):
            tail = solve_bl(out.waves[k].left[0], right[0], right[1], m)
            out.waves[k:] = tail.waves
            if out.zero_flow is not None and out.waves:
                out.zero_flow.front_speed = out.waves[-1].speed_hi
    if out.waves:
        out.waves[0].left, out.waves[-1].right = left, right
    return out.check()


# ---------------------------------------------------------------- direct original-coordinate route

def _tangent_orig(c, d1, m):
    """s on the concave part where the line through (-d1, 0) touches f(., c)."""
    return float(brentq(lambda s: m.f_s(s, c) * (s + d1) - m.f(s, c), inflection_s(float(c), m), 1.0, xtol=1e-15))


def solve_system_original(left, right, m: ModelConfig = DEFAULT_MODEL, n: int = N_ENVELOPE) -> WaveFan:
    """Direct construction in (x, t) for c_left >= c_right (c-shock or pure Buckley-Leverett)."""
    (sL, cL), (sR, cR) = left, right
    if sL <= 0.0:
        raise DomainError("injected saturation must be positive")
    if abs(cL - cR) <= DC_TOL:
        fan = solve_bl(sL, sR, cL, m, n)
    elif cL < cR:
        raise StructuralError("direct construction covers c_left >= c_right only; use the Lagrange route")
    else:
        d1, _ = d_coeffs(cL, cR, m)
        cands = []

        def consider(sm, sp, v):
            if sp <= 0.0:
                return
            lf = solve_bl(sL, sm, cL, m, n)
            rf = solve_bl(sp, sR, cR, m, n)
            if not (_fan_ok(lf, hi=v) and _fan_ok(rf, lo=v)):
                return
            if admissible(ShockData(sm, sp, cL, cR, v), m).admissible:
                cands.append((sm, sp, v, lf, rf))

        for sm in (sL, _tangent_orig(cL, d1, m)):
            v = float(m.f(sm, cL) / (sm + d1))
            for sp in classify_nullclines(cL, cR, v, m).roots_plus:
                consider(sm, sp, v)
        for sp in ([sR] if sR > 0 else []) + [_tangent_orig(cR, d1, m)]:
            v = float(m.f(sp, cR) / (sp + d1))
            for sm in classify_nullclines(cL, cR, v, m).roots_minus:
                consider(sm, sp, v)
        cands = _dedupe(cands, key=lambda c: (c[0], c[1]))
        if len(cands) != 1:
            raise StructuralError(f"{len(cands)} admissible c-shock resolutions")
        sm, sp, v, lf, rf = cands[0]
        mid = Wave(WaveKind.ZETA_SHOCK, (sm, cL), (sp, cR), v, v)
        fan = WaveFan("original", (sL, cL), (sR, cR), lf.waves + [mid] + rf.waves).check()
    if sR == 0.0:
        fan.zero_flow = ZeroFlowRegion(fan.waves[-1].speed_hi, float(cR))
    return fan


# ---------------------------------------------------------------- fields and potential

def sample_fan(fan: WaveFan, x, t) -> GridField:
    """Evaluate an original fan on a tensor grid (t > 0 rows use x/t; t = 0 uses the data)."""
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    S = np.empty((len(t), len(x)))
    C = np.empty_like(S)
    for j, tj in enumerate(t):
        if tj <= 0:
            st = np.where(x[:, None] < 0, np.array(fan.left), np.array(fan.right))
        else:
            st = fan.state_at(x / tj)
        S[j], C[j] = st[:, 0], st[:, 1]
    return GridField(x, t, S, C)


@dataclass
class PotentialField:
    x: np.ndarray
    t: np.ndarray
    phi: np.ndarray  # phi[j, i]
    phi0: np.ndarray  # phi on the t = t[0] edge


def _cumtrapz(y, dx, axis):
    from scipy.integrate import cumulative_trapezoid
    return cumulative_trapezoid(y, dx=dx, axis=axis, initial=0.0)


def potential(field: GridField, m: ModelConfig = DEFAULT_MODEL, path: str = "x-then-t") -> PotentialField:
    """phi = integral of f dt - s dx from the grid origin along grid edges.

    ``path="x-then-t"`` runs along the bottom edge then up each column;
    ``"t-then-x"`` runs up the first column then along each row.
    """
    x, t = field.x, field.t
    F = m.f(field.s, field.c)
    if path == "x-then-t":
        phi0 = -_cumtrapz(field.s[0], x[1] - x[0] if len(x) > 1 else 1.0, 0)
        phi = phi0[None, :] + (_cumtrapz(F, t[1] - t[0], 0) if len(t) > 1 else 0.0)
    elif path == "t-then-x":
        col = _cumtrapz(F[:, 0], t[1] - t[0], 0) if len(t) > 1 else np.zeros(1)
        phi = col[:, None] - (_cumtrapz(field.s, x[1] - x[0], 1) if len(x) > 1 else 0.0)
        phi0 = phi[0]
    else:
        raise DomainError(f"unknown path {path!r}")
    return PotentialField(x, t, np.asarray(phi), np.asarray(phi0))
