"""Travelling-wave dynamic system and a shooting oracle for c-shock admissibility.

    s' = f(s, c) - v (s + d1),   c' = v (d1 c - d2 - a(c))

The states of an RH-consistent shock are critical points; a c-shock is a
vanishing-viscosity limit exactly when an orbit connects them.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError
from .model import DEFAULT_MODEL, ModelConfig
from .shock import ShockData, check_rh, classify_nullclines, d_coeffs

SEED_OFFSET = 1e-6
BALL = 1e-4
MARGINAL_BALL = 1e-2
XI_CAP = 1e4
ATOL = 1e-10
RTOL = 1e-9
STALL = 1e-12
EDGE = 1e-9


@dataclass(frozen=True)
class TWParams:
    v: float
    d1: float
    d2: float
    model: ModelConfig = DEFAULT_MODEL

    @classmethod
    def from_shock(cls, sh: ShockData, m: ModelConfig = DEFAULT_MODEL):
        d1, d2 = d_coeffs(sh.c_minus, sh.c_plus, m)
        return cls(sh.v, d1, d2, m)


class Termination(str, enum.Enum):
    CONVERGED = "converged-to-target"
    LEFT_DOMAIN = "left-domain"
    STALLED = "stalled"
    MAX_STEPS = "max-steps"


@dataclass
class Trajectory:
    xi: np.ndarray
    s: np.ndarray
    c: np.ndarray
    termination: Termination
    min_distance: float = np.inf


@dataclass
class ConnectionResult:
    status: str  # "yes" | "no" | "marginal"
    min_distance: float
    detail: str = ""
    shots: list = field(default_factory=list)


def vector_field(s, c, p: TWParams):
    m = p.model
    ds = m.f(s, c) - p.v * (s + p.d1)
    dc = p.v * (p.d1 * c - p.d2 - m.a(c))
    return ds, dc


def jacobian(s, c, p: TWParams):
    m = p.model
    return np.array([[m.f_s(s, c) - p.v, m.f_c(s, c)], [0.0, p.v * (p.d1 - m.a_c(c))]])


def integrate(p: TWParams, start, target, direction=1.0, xi_cap=XI_CAP, ball=BALL, others=()) -> Trajectory:
    """Integrate from `start` (forward if direction > 0) until the target ball, an edge, or a stall.

    Entering the `ball` around any point of `others` (further critical points)
    also counts as a stall.
    """
    tx, ty = target

    def rhs(_, y):
        ds, dc = vector_field(min(max(y[0], 0.0), 1.0), min(max(y[1], 0.0), 1.0), p)
        return [direction * ds, direction * dc]

    def hit(_, y):
        return np.hypot(y[0] - tx, y[1] - ty) - ball

    def stall(_, y):
        ds, dc = vector_field(min(max(y[0], 0.0), 1.0), min(max(y[1], 0.0), 1.0), p)
        return np.hypot(ds, dc) - STALL

    edges = [lambda _, y: y[0] + EDGE, lambda _, y: 1.0 + EDGE - y[0], lambda _, y: y[1] + EDGE,
             lambda _, y: 1.0 + EDGE - y[1]]
    near = [lambda _, y, q=q: np.hypot(y[0] - q[0], y[1] - q[1]) - ball for q in others]
    events = [hit, stall] + near + edges
    for e in events:
        e.terminal = True
        e.direction = -1.0
    sol = solve_ivp(rhs, (0.0, xi_cap), list(start), method="RK45", atol=ATOL, rtol=RTOL, events=events)
    s = np.clip(sol.y[0], 0.0, 1.0)
    c = np.clip(sol.y[1], 0.0, 1.0)
    d = float(np.min(np.hypot(s - tx, c - ty)))
    if sol.status == 1:
        fired = [i for i, te in enumerate(sol.t_events) if len(te)]
        if fired[0] == 0:
            term = Termination.CONVERGED
        elif fired[0] < 2 + len(others):
            term = Termination.STALLED
        else:
            term = Termination.LEFT_DOMAIN
    else:
        term = Termination.MAX_STEPS
    xi = direction * sol.t
    if direction < 0:
        # store samples in increasing xi; the seed is then the last sample
        xi, s, c = xi[::-1], s[::-1], c[::-1]
    return Trajectory(xi, s, c, term, d)


def _directions(J, unstable: bool):
    """Seed directions spanning the unstable (or stable) manifold.

    A 1-D manifold gives its two eigenvector senses; a 2-D one (node) also
    gets the four diagonal combinations, since orbits leaving a node between
    the eigen-directions are otherwise never sampled.
    """
    w, V = np.linalg.eig(J)
    vecs = []
    for lam, vec in zip(w.real, V.T.real):
        if (lam > 1e-12) if unstable else (lam < -1e-12):
            vecs.append(vec / np.linalg.norm(vec))
    out = [sg * v for v in vecs for sg in (1.0, -1.0)]
    if len(vecs) == 2:
        for a in (1.0, -1.0):
            for b in (1.0, -1.0):
                d = a * vecs[0] + b * vecs[1]
                out.append(d / np.linalg.norm(d))
    return out


def connection_exists(sh: ShockData, m: ModelConfig = DEFAULT_MODEL) -> ConnectionResult:
    """Two-sided shooting between the critical points of a c-shock."""
    if not sh.is_c_shock:
        raise DomainError("connection_exists handles c-shocks; use oleinik_s_shock for s-shocks")
    check_rh(sh, m)
    p = TWParams.from_shock(sh, m)
    src = (sh.s_minus, sh.c_minus)
    dst = (sh.s_plus, sh.c_plus)
    up = _directions(jacobian(*src, p), unstable=True)
    if not up:
        return ConnectionResult("no", np.inf, "no unstable direction at the left state")
    nc = classify_nullclines(sh.c_minus, sh.c_plus, sh.v, m)
    crit = [(r, sh.c_minus) for r in nc.roots_minus] + [(r, sh.c_plus) for r in nc.roots_plus]
    away = [q for q in crit if np.hypot(q[0] - src[0], q[1] - src[1]) > BALL and np.hypot(q[0] - dst[0], q[1] - dst[1]) > BALL]
    # only points that absorb the shot end it early: sinks going forward, sources going backward
    eig = {q: np.linalg.eigvals(jacobian(*q, p)).real for q in away}
    sinks = [q for q in away if np.all(eig[q] < 0)]
    sources = [q for q in away if np.all(eig[q] > 0)]
    # orbits are invariant under rescaling of xi, so the span cap follows the slowest endpoint rate
    rates = np.abs(np.concatenate([np.linalg.eigvals(jacobian(*q, p)).real for q in (src, dst)]))
    cap = max(XI_CAP, 60.0 / max(rates.min(), 1e-8))
    seeds = [(src, e, dst, 1.0, sinks) for e in up]
    seeds += [(dst, e, src, -1.0, sources) for e in _directions(jacobian(*dst, p), unstable=False)]
    shots = []
    for base, e, goal, direction, stop in seeds:
        start = (base[0] + SEED_OFFSET * e[0], base[1] + SEED_OFFSET * e[1])
        shots.append(integrate(p, start, goal, direction, xi_cap=cap, others=stop))
        if shots[-1].termination == Termination.CONVERGED:
            break
    dmin = min(t.min_distance for t in shots)
    if any(t.termination == Termination.CONVERGED for t in shots):
        return ConnectionResult("yes", dmin, "orbit enters the target ball", shots)
    if dmin < MARGINAL_BALL and any(t.termination == Termination.STALLED for t in shots):
        return ConnectionResult("marginal", dmin, "near miss stalled at another critical point", shots)
    return ConnectionResult("no", dmin, "no shot reaches the target", shots)


@dataclass
class PhasePortrait:
    nullclines: list  # arrays of shape (k, 2) with columns (s, c)
    critical_points: list
    trajectories: list


def phase_portrait(c_minus, c_plus, v, m: ModelConfig = DEFAULT_MODEL, n: int = 201) -> PhasePortrait:
    """Nullclines of s' on an n x n grid of the strip between c+ and c-, critical points, sample orbits."""
    from skimage.measure import find_contours

    d1, d2 = d_coeffs(c_minus, c_plus, m)
    p = TWParams(float(v), d1, d2, m)
    clo, chi = sorted((c_minus, c_plus))
    S = np.linspace(0.0, 1.0, n)
    C = np.linspace(clo, chi, n)
    G = m.f(S[:, None], C[None, :]) - v * (S[:, None] + d1)
    lines = []
    for cont in find_contours(G, 0.0):
        s = np.interp(cont[:, 0], np.arange(n), S)
        c = np.interp(cont[:, 1], np.arange(n), C)
        lines.append(np.column_stack([s, c]))
    nc = classify_nullclines(c_minus, c_plus, v, m)
    crit = [(r, c_minus) for r in nc.roots_minus] + [(r, c_plus) for r in nc.roots_plus]
    trajs = []
    for i in range(12):
        s0 = (i % 4 + 0.5) / 4
        c0 = clo + (chi - clo) * (i // 4 + 0.5) / 3
        trajs.append(integrate(p, (s0, c0), (np.nan, np.nan), 1.0, xi_cap=200.0))
    return PhasePortrait(lines, crit, trajs)
