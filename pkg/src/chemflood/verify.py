"""Discrete checks of structural properties on sampled solutions.

Covers circulation of the two closed forms around rectangles, the zero-flow
boundary t0(x) of gridded runs and the freezing of c inside the zero-flow region.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import DomainError, MeasurementError
from .grid import GridField
from .model import DEFAULT_MODEL, ModelConfig

DRY_THRESHOLD = 1e-6
JUMP_FACTOR = 5.0
BUFFER_FRAMES = 5
CONTOUR_NS = (128, 256, 512, 1024)

Sampler = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    t0: float
    t1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.t1 > self.t0):
            raise DomainError(f"degenerate rectangle {self}")

    def padded(self, pad: float) -> "Rect":
        return Rect(self.x0 + pad, self.x1 - pad, self.t0 + pad, self.t1 - pad)


def fan_sampler(fan) -> Sampler:
    """Pointwise sampler of an original-coordinate wave fan (t > 0)."""

    def sample(x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        st = fan.state_at(x / t)
        return st[:, 0], st[:, 1]

    return sample


def constant_sampler(s: float, c: float) -> Sampler:
    def sample(x, t):
        n = np.broadcast(x, t).size
        return np.full(n, float(s)), np.full(n, float(c))

    return sample


def grid_sampler(g: GridField) -> Sampler:
    """Bilinear interpolation of a gridded field."""
    fs = RegularGridInterpolator((g.t, g.x), g.s)
    fc = RegularGridInterpolator((g.t, g.x), g.c)

    def sample(x, t):
        pts = np.column_stack(np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float)))
        return fs(pts), fc(pts)

    return sample


def _edges(rect: Rect, n: int):
    """Midpoints and increments of the counterclockwise boundary, n cells per edge."""
    u = (np.arange(n) + 0.5) / n
    hx = (rect.x1 - rect.x0) / n
    ht = (rect.t1 - rect.t0) / n
    xs = [rect.x0 + u * (rect.x1 - rect.x0), np.full(n, rect.x1),
          rect.x1 - u * (rect.x1 - rect.x0), np.full(n, rect.x0)]
    ts = [np.full(n, rect.t0), rect.t0 + u * (rect.t1 - rect.t0),
          np.full(n, rect.t1), rect.t1 - u * (rect.t1 - rect.t0)]
    dxs = [hx, 0.0, -hx, 0.0]
    dts = [0.0, ht, 0.0, -ht]
    x = np.concatenate(xs)
    t = np.concatenate(ts)
    dx = np.concatenate([np.full(n, d) for d in dxs])
    dt = np.concatenate([np.full(n, d) for d in dts])
    return x, t, dx, dt


def contour_residual(sampler: Sampler, rect: Rect, n: int, m: ModelConfig = DEFAULT_MODEL):
    """Midpoint-rule circulation of f dt - s dx and c (s dx - f dt) + a(c) dx.

    Both forms are closed on weak solutions, so the returned absolute values
    measure the discrete defect.
    """
    if n < 1:
        raise DomainError("n must be positive")
    x, t, dx, dt = _edges(rect, n)
    s, c = sampler(x, t)
    f = m.f(s, c)
    a = m.a(c)
    r1 = np.sum(f * dt - s * dx)
    r2 = np.sum(c * (s * dx - f * dt) + a * dx)
    return abs(float(r1)), abs(float(r2))


@dataclass
class RefinementStudy:
    ns: tuple
    r1: np.ndarray
    r2: np.ndarray
    order1: float
    order2: float

    def to_dict(self):
        return {"n": list(self.ns), "r1": self.r1.tolist(), "r2": self.r2.tolist(),
                "order1": self.order1, "order2": self.order2}


def _observed_order(ns, r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        return float("inf")
    slope = np.polyfit(np.log(ns), np.log(r), 1)[0]
    return float(-slope)


def refinement_study(sampler: Sampler, rects, ns=CONTOUR_NS, m: ModelConfig = DEFAULT_MODEL) -> RefinementStudy:
    """Summed residuals over a family of rectangles for each n, plus fitted order.

    Summing over rectangles averages out the sub-cell position of each jump,
    which otherwise makes single-rectangle midpoint errors erratic.
    """
    r1 = np.zeros(len(ns))
    r2 = np.zeros(len(ns))
    for k, n in enumerate(ns):
        for rect in rects:
            a, b = contour_residual(sampler, rect, n, m)
            r1[k] += a
            r2[k] += b
    return RefinementStudy(tuple(ns), r1, r2, _observed_order(ns, r1), _observed_order(ns, r2))


def random_rects(rng, count: int, x_hi: float, t_lo: float, t_hi: float, pad: float = 0.0):
    out = []
    while len(out) < count:
        xa, xb = np.sort(rng.uniform(0.0, x_hi, 2))
        ta, tb = np.sort(rng.uniform(t_lo, t_hi, 2))
        if xb - xa < 4 * pad + 0.05 or tb - ta < 4 * pad + 0.05:
            continue
        out.append(Rect(xa, xb, ta, tb).padded(pad))
    return out


def shock_aligned_rects(fan, t_lo: float = 0.9, t_hi: float = 1.0) -> list:
    """One rectangle per shock of a fan, crossed at 1/3 of the bottom and 2/3 of the top edge.

    At those fractions the midpoint defect of each crossing has the same size
    for every n not divisible by 3 and flips sign under doubling, which makes
    the refinement order free of sub-cell noise.
    Rectangles that would meet another shock are skipped.
    """
    speeds = [w.speed_lo for w in fan.waves if w.is_shock]
    out = []
    for sig in speeds:
        if sig <= 0:
            continue
        w = 3.0 * sig * (t_hi - t_lo)
        x0 = sig * t_lo - w / 3.0
        r = Rect(x0, x0 + w, t_lo, t_hi)
        if x0 <= 0:
            continue
        hit = [o for o in speeds if o != sig and o * t_lo < r.x1 and o * t_hi > r.x0]
        if not hit:
            out.append(r)
    return out


@dataclass
class T0Polyline:
    x: np.ndarray
    t0: np.ndarray  # nan where never wet
    never_wet: np.ndarray
    max_jump: float
    jump_bound: float
    flags: list = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return not bool(np.any(self.never_wet))

    @property
    def continuous(self) -> bool:
        return self.max_jump < self.jump_bound

    @property
    def empty(self) -> bool:
        return len(self.x) == 0

    def to_dict(self):
        return {"n_columns": int(len(self.x)), "finite": self.finite, "continuous": self.continuous,
                "never_wet": int(self.never_wet.sum()), "max_jump": self.max_jump,
                "jump_bound": self.jump_bound, "flags": list(self.flags)}


def _max_speed(g: GridField, m: ModelConfig) -> float:
    s = np.clip(g.s, 0.0, 1.0)
    c = np.clip(g.c, 0.0, None)
    return float(np.max(m.f_s(s, c)))


def t0_extract(g: GridField, x0: float = 0.0, threshold: float = DRY_THRESHOLD,
               m: ModelConfig = DEFAULT_MODEL, interpolate: bool = False) -> T0Polyline:
    """Last frame time with s below threshold, per column x > x0.

    Columns never dry are omitted.  Columns still dry at the final frame are
    flagged as never wet.  With interpolate=True the crossing between the last
    dry frame and the next one is located by linear interpolation of log s.
    """
    sel = g.x > x0
    x = g.x[sel]
    S = g.s[:, sel]
    dry = S < threshold
    has = dry.any(axis=0)
    x = x[has]
    S = S[:, has]
    dry = dry[:, has]
    nt = len(g.t)
    last = nt - 1 - np.argmax(dry[::-1], axis=0)
    never = last == nt - 1
    t0 = g.t[last].astype(float)
    if interpolate:
        j = np.minimum(last, nt - 2)
        cols = np.arange(len(x))
        a = np.log(np.maximum(S[j, cols], 1e-300))
        b = np.log(np.maximum(S[j + 1, cols], 1e-300))
        w = np.clip((np.log(threshold) - a) / np.where(b > a, b - a, np.inf), 0.0, 1.0)
        t0 = np.where(never, t0, g.t[j] + w * (g.t[j + 1] - g.t[j]))
    t0 = np.where(never, np.nan, t0)
    flags = []
    if never.any():
        flags.append(f"finite-time violation: {int(never.sum())} columns never wet")
    finite = t0[np.isfinite(t0)]
    max_jump = float(np.max(np.abs(np.diff(finite)))) if len(finite) > 1 else 0.0
    vmax = max(_max_speed(g, m), 1e-12)
    # neighbouring columns are Δx apart, so a front moving at most vmax shifts t0 by >= Δx/vmax
    jump_bound = JUMP_FACTOR * g.dx / vmax
    if max_jump >= jump_bound:
        flags.append(f"jump {max_jump:.3g} in t0 exceeds {jump_bound:.3g}")
    return T0Polyline(x, t0, never, max_jump, jump_bound, flags)


@dataclass
class FrontComparison:
    offset: float  # median of x - v t0(x)
    spread: float  # max |x - v t0(x) - offset|
    raw: float  # max |x - v t0(x)|

    def to_dict(self):
        return {"offset": self.offset, "spread": self.spread, "raw": self.raw}


def compare_front(poly: T0Polyline, speed: float, x_lo: float = 0.0, x_hi: float = np.inf) -> FrontComparison:
    """Distance between the extracted t0 line and the line x = speed * t."""
    sel = np.isfinite(poly.t0) & (poly.x >= x_lo) & (poly.x <= x_hi)
    if not sel.any():
        raise MeasurementError("no finite t0 samples in window")
    d = poly.x[sel] - speed * poly.t0[sel]
    off = float(np.median(d))
    return FrontComparison(off, float(np.max(np.abs(d - off))), float(np.max(np.abs(d))))


def omega0_concentration_check(g: GridField, poly: T0Polyline, buffer_frames: int = BUFFER_FRAMES) -> float:
    """Max |c(x,t) - c(x,0)| over zero-flow columns, for t below t0(x) minus a buffer."""
    if poly.empty:
        raise MeasurementError("zero-flow region is empty")
    idx = np.searchsorted(g.x, poly.x)
    dtf = g.t[1] - g.t[0] if len(g.t) > 1 else 0.0
    drift = 0.0
    for k, i in enumerate(idx):
        t0 = poly.t0[k]
        lim = g.t[-1] if not np.isfinite(t0) else t0 - buffer_frames * dtf
        rows = g.t < lim
        if rows.any():
            drift = max(drift, float(np.max(np.abs(g.c[rows, i] - g.c[0, i]))))
    return drift


def fan_zero_flow_drift(fan, x, t) -> float:
    """Concentration drift of an analytic fan inside its zero-flow region."""
    if fan.zero_flow is None:
        raise MeasurementError("fan has no zero-flow region")
    x = np.asarray(x, dtype=float)
    drift = 0.0
    for tj in np.asarray(t, dtype=float):
        inside = x > fan.zero_flow.front_speed * tj
        if tj > 0 and inside.any():
            c = fan.state_at(x[inside] / tj)[:, 1]
            drift = max(drift, float(np.max(np.abs(c - fan.zero_flow.c))))
    return drift
