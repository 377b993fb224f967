"""Rankine-Hugoniot relations, shock admissibility and the shock map.

A shock joins (s-, c-) behind to (s+, c+) ahead and moves with speed v:

    v [s] = [f],   v [c s + a(c)] = [c f],   [q] = q+ - q-.

s-shocks (c+ = c-) are judged by the Oleinik E-condition; c-shocks by the
nullcline configuration of the travelling-wave system.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, WrongShockKindError
from .lagrange import LagrangeState, U_max, eval_F, s_of_U
from .model import DEFAULT_MODEL, ModelConfig, inflection_s

RH_TOL = 1e-9
DC_TOL = 1e-12
TANGENT_TOL = 1e-12
TYPE0I_TOL = 1e-9
N_OLEINIK = 513


@dataclass(frozen=True)
class ShockData:
    s_minus: float
    s_plus: float
    c_minus: float
    c_plus: float
    v: float

    @property
    def is_c_shock(self) -> bool:
        return abs(self.c_plus - self.c_minus) > DC_TOL

    def rh_residuals(self, m: ModelConfig = DEFAULT_MODEL):
        fm, fp = m.f(self.s_minus, self.c_minus), m.f(self.s_plus, self.c_plus)
        qm = self.c_minus * self.s_minus + m.a(self.c_minus)
        qp = self.c_plus * self.s_plus + m.a(self.c_plus)
        r1 = self.v * (self.s_plus - self.s_minus) - (fp - fm)
        r2 = self.v * (qp - qm) - (self.c_plus * fp - self.c_minus * fm)
        return float(r1), float(r2)

    def to_dict(self):
        return {k: float(getattr(self, k)) for k in ("s_minus", "s_plus", "c_minus", "c_plus", "v")}


@dataclass(frozen=True)
class LagrangeShockData:
    """Jump between U- (at phi < phi_shock) and U+; ``None`` marks DRY."""

    U_minus: Optional[float]
    U_plus: float
    zeta_minus: float
    zeta_plus: float
    v_star: float

    @property
    def is_zeta_shock(self) -> bool:
        return abs(self.zeta_plus - self.zeta_minus) > DC_TOL

    @property
    def minus(self) -> LagrangeState:
        return LagrangeState(self.U_minus, self.zeta_minus)

    @property
    def plus(self) -> LagrangeState:
        return LagrangeState(self.U_plus, self.zeta_plus)

    def rh_residuals(self, m: ModelConfig = DEFAULT_MODEL):
        r2 = self.v_star * (self.zeta_plus - self.zeta_minus) - (m.a(self.zeta_plus) - m.a(self.zeta_minus))
        if self.U_minus is None:
            return abs(self.v_star), float(r2)
        Fp = eval_F(self.U_plus, self.zeta_plus, m)[0]
        Fm = eval_F(self.U_minus, self.zeta_minus, m)[0]
        return float(self.v_star * (self.U_plus - self.U_minus) - (Fp - Fm)), float(r2)


class NullclineKind(str, enum.Enum):
    TYPE0 = "Type0"
    TYPE0_I = "Type0I"
    TYPE_I = "TypeI"
    TYPE_I_II = "TypeI_II"
    TYPE_II = "TypeII"
    NONE = "NoCriticalPoints"


@dataclass(frozen=True)
class NullclineType:
    kind: NullclineKind
    roots_minus: tuple = ()
    roots_plus: tuple = ()
    tangent_minus: bool = False
    tangent_plus: bool = False
    distance: float = np.inf  # distance in v to the nearest intermediate type


@dataclass
class Verdict:
    admissible: bool
    reason: str
    kind: str = "s"
    nullclines: Optional[NullclineType] = None
    flags: list = field(default_factory=list)

    def to_dict(self):
        d = {"verdict": "admissible" if self.admissible else "inadmissible", "reason": self.reason, "kind": self.kind,
             "flags": list(self.flags)}
        if self.nullclines is not None:
            nc = self.nullclines
            d["nullclines"] = {"type": nc.kind.value, "roots_minus": list(nc.roots_minus),
                               "roots_plus": list(nc.roots_plus), "distance_to_intermediate": nc.distance}
        return d


# ---------------------------------------------------------------- RH helpers

def d_coeffs(c_minus: float, c_plus: float, m: ModelConfig = DEFAULT_MODEL):
    """Chord coefficients (d1, d2) of the adsorption isotherm between c+ and c-."""
    dc = c_minus - c_plus
    if abs(dc) <= DC_TOL:
        raise DomainError("d_coeffs: c- = c+ leaves the chord undefined (treat as an s-shock)")
    am, ap = m.a(c_minus), m.a(c_plus)
    return float((am - ap) / dc), float((c_plus * am - c_minus * ap) / dc)


def solve_s_shock_velocity(s_minus: float, s_plus: float, c: float, m: ModelConfig = DEFAULT_MODEL) -> float:
    if s_minus == s_plus:
        raise DomainError("s-shock with s+ = s- has no defined velocity")
    return float((m.f(s_plus, c) - m.f(s_minus, c)) / (s_plus - s_minus))


def shock_velocity(s_minus, s_plus, c_minus, c_plus, m: ModelConfig = DEFAULT_MODEL) -> float:
    """Velocity implied by the states: [f]/[s] for s-shocks, f-/(s- + d1) for c-shocks."""
    if abs(c_plus - c_minus) <= DC_TOL:
        return solve_s_shock_velocity(s_minus, s_plus, c_minus, m)
    d1, _ = d_coeffs(c_minus, c_plus, m)
    return float(m.f(s_minus, c_minus) / (s_minus + d1))


def make_shock(s_minus, s_plus, c_minus, c_plus, v=None, m: ModelConfig = DEFAULT_MODEL) -> ShockData:
    if v is None:
        v = shock_velocity(s_minus, s_plus, c_minus, c_plus, m)
    return ShockData(float(s_minus), float(s_plus), float(c_minus), float(c_plus), float(v))


def check_rh(sh: ShockData, m: ModelConfig = DEFAULT_MODEL, tol: float = RH_TOL):
    for x in (sh.s_minus, sh.s_plus, sh.c_minus, sh.c_plus):
        if not 0.0 <= x <= 1.0:
            raise DomainError(f"shock state component {x} outside [0, 1]")
    r1, r2 = sh.rh_residuals(m)
    if abs(r1) > tol or abs(r2) > tol:
        raise DomainError(f"Rankine-Hugoniot residuals ({r1:.3g}, {r2:.3g}) exceed {tol:g}")


@lru_cache(maxsize=64)
def flux_c1_norm(m: ModelConfig = DEFAULT_MODEL) -> float:
    """Grid max of |f_s| + |f_c| on a 256 x 256 grid of the unit square."""
    g = np.linspace(0.0, 1.0, 256)
    S, C = np.meshgrid(g, g, indexing="ij")
    return float(np.max(np.abs(m.f_s(S, C)) + np.abs(m.f_c(S, C))))


def restrictions_check(sh: ShockData, m: ModelConfig = DEFAULT_MODEL) -> list:
    """Return the list of violated necessary conditions (empty when the shock passes)."""
    flags = []
    if sh.v <= 0.0 or sh.v >= flux_c1_norm(m):
        flags.append("velocity outside (0, |f|_C1)")
    if sh.s_minus == 0.0:
        flags.append("s- = 0")
    if sh.s_plus == sh.s_minus:
        flags.append("s+ = s-")
    if sh.c_plus > sh.c_minus + DC_TOL:
        flags.append("c+ > c-")
    if sh.s_plus == 0.0 and sh.is_c_shock:
        flags.append("s+ = 0 with c+ != c-")
    return flags


# ---------------------------------------------------------------- s-shocks

def _sign_certificate(psi, a, b, direction, tol):
    """psi * direction >= -tol on samples of [a, b], refining near near-zeros."""
    x = np.linspace(a, b, N_OLEINIK + 2)[1:-1]
    y = psi(x) * direction
    if np.any(y < -tol):
        return False
    h = x[1] - x[0] if len(x) > 1 else abs(b - a)
    for xi in x[np.abs(y) < 1e-10]:
        xx = np.linspace(max(min(a, b), xi - h), min(max(a, b), xi + h), 129)
        if np.any(psi(xx) * direction < -tol):
            return False
    return True


def oleinik_s_shock(s_minus: float, s_plus: float, c: float, m: ModelConfig = DEFAULT_MODEL, tol: float = RH_TOL) -> bool:
    """Oleinik E-condition: Psi(s) (s+ - s-) >= 0 between the states, with end-point slopes."""
    v = solve_s_shock_velocity(s_minus, s_plus, c, m)
    fm = m.f(s_minus, c)
    direction = 1.0 if s_plus > s_minus else -1.0

    def psi(s):
        return m.f(s, c) - fm - v * (s - s_minus)

    if not (m.f_s(s_plus, c) <= v + tol and v <= m.f_s(s_minus, c) + tol):
        return False
    return _sign_certificate(psi, s_minus, s_plus, direction, tol)


# ---------------------------------------------------------------- Lagrange side

@dataclass
class LaxVerdict:
    holds: bool
    lower_residual: float  # v* - F_U(U+)
    upper_residual: float  # F_U(U-) - v*
    both_equal: bool = False


def _F_U(st: LagrangeState, m):
    if st.is_dry:
        return 0.0
    return eval_F(st.U, st.zeta, m)[1]


def lax_lagrange(lsh: LagrangeShockData, m: ModelConfig = DEFAULT_MODEL, tol: float = RH_TOL) -> LaxVerdict:
    """Lax condition F_U(U+) <= v* <= F_U(U-) for a U-shock."""
    if lsh.is_zeta_shock:
        raise WrongShockKindError("lax_lagrange expects a U-shock (zeta- = zeta+)")
    lo = lsh.v_star - _F_U(lsh.plus, m)
    hi = _F_U(lsh.minus, m) - lsh.v_star
    both = abs(lo) <= tol and abs(hi) <= tol
    holds = lo >= -tol and hi >= -tol and (not both or lsh.U_minus is None)
    return LaxVerdict(bool(holds), float(lo), float(hi), bool(both))


def lagrange_e_condition(lsh: LagrangeShockData, m: ModelConfig = DEFAULT_MODEL, tol: float = RH_TOL) -> bool:
    """E-condition on Psi*(U) = F(U) - F(U-) - v*(U - U-), together with the Lax slopes."""
    if lsh.is_zeta_shock:
        raise WrongShockKindError("lagrange_e_condition expects a U-shock")
    if not lax_lagrange(lsh, m, tol).holds:
        return False
    z = lsh.zeta_plus
    if lsh.U_minus is None:
        # U- at infinity with v* = 0: F must not exceed F(U+) anywhere beyond U+
        Fp = eval_F(lsh.U_plus, z, m)[0]
        U = lsh.U_plus * np.geomspace(1.0, 1e6 / lsh.U_plus if lsh.U_plus < 1e6 else 10.0, N_OLEINIK)[1:]
        return bool(np.all(eval_F(U, z, m)[0] - Fp <= tol))
    Fm = eval_F(lsh.U_minus, z, m)[0]
    direction = 1.0 if lsh.U_plus > lsh.U_minus else -1.0

    def psi(U):
        return eval_F(U, z, m)[0] - Fm - lsh.v_star * (U - lsh.U_minus)

    return _sign_certificate(psi, lsh.U_minus, lsh.U_plus, direction, tol)


def map_shock(sh: ShockData, m: ModelConfig = DEFAULT_MODEL) -> LagrangeShockData:
    """Image of a shock under the Lagrange transform; behind/ahead swap roles."""
    if sh.s_minus == 0.0:
        raise DomainError("shock with s- = 0 has no Lagrange image")
    if sh.s_plus == 0.0 and sh.is_c_shock:
        raise DomainError("shock into zero flow must keep c constant")
    fm = m.f(sh.s_minus, sh.c_minus)
    U_plus = float(1.0 / fm)
    F_plus = -sh.s_minus / fm
    fp = m.f(sh.s_plus, sh.c_plus)
    if sh.s_plus == 0.0 or 1.0 / max(fp, 1e-320) == np.inf:
        # an underflowing flux ahead is numerically dry
        if sh.is_c_shock:
            raise DomainError("shock into a numerically dry state must keep c constant")
        return LagrangeShockData(None, U_plus, sh.c_plus, sh.c_minus, 0.0)
    U_minus = float(1.0 / fp)
    if sh.is_c_shock:
        v_star = d_coeffs(sh.c_minus, sh.c_plus, m)[0]
    else:
        v_star = float((F_plus - (-sh.s_plus / fp)) / (U_plus - U_minus))
    return LagrangeShockData(U_minus, U_plus, sh.c_plus, sh.c_minus, v_star)


def unmap_shock(lsh: LagrangeShockData, m: ModelConfig = DEFAULT_MODEL) -> ShockData:
    """Inverse of :func:`map_shock`."""
    s_minus = float(s_of_U(lsh.U_plus, lsh.zeta_plus, m))
    c_minus, c_plus = lsh.zeta_plus, lsh.zeta_minus
    s_plus = 0.0 if lsh.U_minus is None else float(s_of_U(lsh.U_minus, lsh.zeta_minus, m))
    v = (1.0 / lsh.U_plus) / (s_minus + lsh.v_star)
    return ShockData(s_minus, s_plus, c_minus, c_plus, float(v))


# ---------------------------------------------------------------- s* construction

def s_star(m: ModelConfig = DEFAULT_MODEL, n_c: int = 33):
    """Return (s*^c, s*^s, s*) bounding saturations behind admissible shocks from below."""
    h, _ = d_coeffs(1.0, 0.0, m)
    cs = np.linspace(0.0, 1.0, n_c)
    sc = np.inf
    for c in cs:
        g = lambda s: (s + h) / (1.0 + h) - m.f(s, c)
        sc = min(sc, brentq(g, 0.0, 1.0 - 1e-9, xtol=1e-13))
    ss = np.inf
    for c in cs:
        # tangent from (1, 1) to the convex part of f(., c)
        t = lambda s: m.f_s(s, c) * (1.0 - s) - (1.0 - m.f(s, c))
        ss = min(ss, brentq(t, 1e-12, inflection_s(float(c), m), xtol=1e-13))
    return float(sc), float(ss), float(min(sc, ss))


# ---------------------------------------------------------------- nullclines

def _side_roots(c: float, v: float, d1: float, m: ModelConfig):
    """Roots of g(s) = f(s, c) - v (s + d1) on (0, 1]; returns (roots, tangent, v_tangent)."""
    g = lambda s: m.f(s, c) - v * (s + d1)
    sI = inflection_s(float(c), m)
    # tangent point of the line through (-d1, 0): f_s (s + d1) = f on (s^I, 1)
    tan = lambda s: m.f_s(s, c) * (s + d1) - m.f(s, c)
    st = brentq(tan, sI, 1.0, xtol=1e-15)
    v_tan = float(m.f(st, c) / (st + d1))
    g1 = 1.0 - v * (1.0 + d1)
    if abs(g1) <= TYPE0I_TOL:
        # s = 1 is a root; the other one sits below the maximum of g
        smax = brentq(lambda s: m.f_s(s, c) - v, sI, 1.0 - 1e-15, xtol=1e-15)
        return (brentq(g, 0.0, smax, xtol=1e-15), 1.0), False, v_tan
    if g1 > 0:
        return (brentq(g, 0.0, 1.0, xtol=1e-15),), False, v_tan
    if m.f_s(sI, c) <= v:
        return (), False, v_tan
    smax = brentq(lambda s: m.f_s(s, c) - v, sI, 1.0, xtol=1e-15)
    gmax = g(smax)
    if abs(gmax) <= TANGENT_TOL:
        return (float(smax),), True, v_tan
    if gmax < 0:
        return (), False, v_tan
    return (brentq(g, 0.0, smax, xtol=1e-15), brentq(g, smax, 1.0, xtol=1e-15)), False, v_tan


def classify_nullclines(c_minus: float, c_plus: float, v: float, m: ModelConfig = DEFAULT_MODEL) -> NullclineType:
    """Type of the nullcline configuration of the travelling-wave system."""
    d1, _ = d_coeffs(c_minus, c_plus, m)
    rm, tm, vtm = _side_roots(c_minus, v, d1, m)
    rp, tp, vtp = _side_roots(c_plus, v, d1, m)
    v0I = 1.0 / (1.0 + d1)
    dist = float(min(abs(v - v0I), abs(v - vtm), abs(v - vtp)))
    rm, rp = tuple(map(float, rm)), tuple(map(float, rp))
    kw = dict(roots_minus=rm, roots_plus=rp, tangent_minus=tm, tangent_plus=tp, distance=dist)
    if abs(1.0 - v * (1.0 + d1)) <= TYPE0I_TOL:
        kind = NullclineKind.TYPE0_I
    elif len(rm) == 1 and len(rp) == 1 and not (tm or tp):
        kind = NullclineKind.TYPE0
    elif len(rm) == 2 and len(rp) == 2:
        kind = NullclineKind.TYPE_I
    elif (tm and len(rp) == 2) or (tp and len(rm) == 2):
        kind = NullclineKind.TYPE_I_II
    elif (not rm and rp) or (not rp and rm):
        kind = NullclineKind.TYPE_II
    else:
        kind = NullclineKind.NONE
    return NullclineType(kind, **kw)


def _nearest(roots, s):
    i = int(np.argmin([abs(r - s) for r in roots]))
    return i, abs(roots[i] - s)


def admissible(sh: ShockData, m: ModelConfig = DEFAULT_MODEL) -> Verdict:
    """Full admissibility pipeline for an RH-consistent shock."""
    check_rh(sh, m)
    flags = restrictions_check(sh, m)
    kind = "c" if sh.is_c_shock else "s"
    if flags:
        return Verdict(False, "; ".join(flags), kind, flags=flags)
    if kind == "s":
        ok = oleinik_s_shock(sh.s_minus, sh.s_plus, sh.c_minus, m)
        return Verdict(ok, "E-condition holds" if ok else "E-condition violated", kind)
    nc = classify_nullclines(sh.c_minus, sh.c_plus, sh.v, m)
    if not nc.roots_minus or not nc.roots_plus:
        raise DomainError("shock states are not critical points of the travelling-wave system")
    im, _ = _nearest(nc.roots_minus, sh.s_minus)
    ip, _ = _nearest(nc.roots_plus, sh.s_plus)
    forbidden = nc.kind in (NullclineKind.TYPE_I, NullclineKind.TYPE0_I) and im == 1 and ip == 0
    if forbidden:
        return Verdict(False, f"u2- -> u1+ saddle-saddle connection in {nc.kind.value}", kind, nc)
    return Verdict(True, f"u{im + 1}- -> u{ip + 1}+ in {nc.kind.value}", kind, nc)


# ---------------------------------------------------------------- random shock generators

def random_s_shocks(rng: np.random.Generator, n: int, m: ModelConfig = DEFAULT_MODEL, p_dry: float = 0.1):
    out = []
    while len(out) < n:
        sm, sp, c = rng.random(3)
        if rng.random() < p_dry:
            sp = 0.0
        if sm <= 1e-3 or abs(sm - sp) < 1e-6:
            continue
        out.append(make_shock(sm, sp, c, c, m=m))
    return out


def random_c_shocks(rng: np.random.Generator, n: int, m: ModelConfig = DEFAULT_MODEL, p_reversed: float = 0.1):
    """RH-consistent c-shocks from random (c-, c+, v) and a random pairing of critical points."""
    out = []
    while len(out) < n:
        c1, c2 = (float(x) for x in np.sort(rng.random(2))[::-1])
        if c1 - c2 < 0.05:
            continue
        cm, cp = (c2, c1) if rng.random() < p_reversed else (c1, c2)
        d1, _ = d_coeffs(cm, cp, m)
        vt = min(_side_roots(cm, 0.5, d1, m)[2], _side_roots(cp, 0.5, d1, m)[2])
        v0I = 1.0 / (1.0 + d1)
        if v0I < vt and rng.random() < 0.7:
            v = float(rng.uniform(v0I, vt))
        else:
            v = float(rng.uniform(0.05, min(v0I, vt)))
        nc = classify_nullclines(cm, cp, v, m)
        if not nc.roots_minus or not nc.roots_plus:
            continue
        sm = nc.roots_minus[rng.integers(len(nc.roots_minus))]
        sp = nc.roots_plus[rng.integers(len(nc.roots_plus))]
        out.append(ShockData(sm, sp, cm, cp, float(v)))
    return out
