"""Explicit conservative solver for the dissipative system

    s_t + f(s, c)_x = eps s_xx
    (c s + a(c))_t + (c f(s, c))_x = eps (c s_x)_x + eps c_xx

on [0, L] with the injected state held at x = 0 and outflow at x = L. This is
corroboration for the analytic fans, not the definition of admissibility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import ConfigError, MeasurementError, SolverError
from .grid import GridField
from .model import DEFAULT_MODEL, AdsorptionParams, FluxParams, ModelConfig

CLIP_TOL = 1e-12


@dataclass(frozen=True)
class ViscousConfig:
    epsilon: float
    T: float
    left: tuple = (1.0, 0.0)
    right: tuple = (0.0, 0.0)
    L: float = 1.0
    N: int = 4096
    cfl: float = 0.4
    n_frames: int = 41

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if self.N < 256:
            raise ConfigError("N must be at least 256")
        if not 0 < self.cfl <= 0.4:
            raise ConfigError("CFL number must lie in (0, 0.4]")
        if not (self.T > 0 and self.L > 0):
            raise ConfigError("T and L must be positive")
        if self.n_frames < 2:
            raise ConfigError("need at least 2 frames")
        for st in (self.left, self.right):
            if len(st) != 2 or not all(0.0 <= v <= 1.0 for v in st):
                raise ConfigError(f"state {st} outside the unit square")

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        for k in ("left", "right"):
            if k in d:
                d[k] = tuple(d[k])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(f"viscous block: {exc}") from None


@numba.njit(cache=True, error_model="numpy")
def _flux(s, c, M0, kc, A, B):
    M = M0 * (1.0 + kc * c)
    D = s * s + M * (1.0 - s) ** 2
    f = s * s / D
    fs = 2.0 * M * s * (1.0 - s) / (D * D)
    ac = A / (1.0 + B * c) ** 2
    lam = max(fs, f / (s + ac))
    return f, lam


@numba.njit(cache=True, error_model="numpy")
def _advance(s, mm, c, t, t_end, dx, eps, cfl, sL, cL, M0, kc, A, B, stats):
    """Step (s, m = c s + a(c)) from t to t_end in place.

    stats: [steps, boundary s-flux, boundary m-flux, max per-step conservation
    error, clip events, last dt].
    """
    N = s.shape[0]
    F1 = np.empty(N + 1)
    F2 = np.empty(N + 1)
    # cell arrays with one ghost on each side: 0 is the injection state, N + 1 copies cell N
    fe = np.empty(N + 2)
    le = np.empty(N + 2)
    se = np.empty(N + 2)
    ce = np.empty(N + 2)
    me = np.empty(N + 2)
    mL = cL * sL + A * cL / (1.0 + B * cL)
    se[0], ce[0], me[0] = sL, cL, mL
    fe[0], le[0] = _flux(sL, cL, M0, kc, A, B)
    inv_dx = 1.0 / dx
    while t < t_end:
        lam_max = le[0]
        kappa = 1.0
        for i in range(N):
            si, ci = s[i], c[i]
            f, lam = _flux(si, ci, M0, kc, A, B)
            se[i + 1], ce[i + 1], me[i + 1] = si, ci, mm[i]
            fe[i + 1], le[i + 1] = f, lam
            lam_max = max(lam_max, lam)
            kappa = min(kappa, si + A / (1.0 + B * ci) ** 2)
        se[N + 1], ce[N + 1], me[N + 1] = se[N], ce[N], me[N]
        fe[N + 1], le[N + 1] = fe[N], le[N]
        # Courant and (effective) diffusion numbers <= cfl, combined coefficient < 1 for monotonicity
        dt = min(cfl * dx / lam_max, cfl * kappa * dx * dx / eps, 0.95 / (lam_max * inv_dx + 2.0 * eps / (kappa * dx * dx)))
        if t + dt > t_end:
            dt = t_end - t
        for k in range(N + 1):
            al = max(le[k], le[k + 1])
            dsk = se[k + 1] - se[k]
            F1[k] = 0.5 * (fe[k] + fe[k + 1]) - 0.5 * al * dsk - eps * dsk * inv_dx
            F2[k] = (0.5 * (ce[k] * fe[k] + ce[k + 1] * fe[k + 1]) - 0.5 * al * (me[k + 1] - me[k])
                     - eps * (0.5 * (ce[k] + ce[k + 1]) * dsk + (ce[k + 1] - ce[k])) * inv_dx)
        r = dt * inv_dx
        d1 = 0.0
        d2 = 0.0
        for i in range(N):
            ds = -r * (F1[i + 1] - F1[i])
            dm = -r * (F2[i + 1] - F2[i])
            s[i] += ds
            mm[i] += dm
            d1 += ds
            d2 += dm
        b1 = dt * (F1[0] - F1[N])
        b2 = dt * (F2[0] - F2[N])
        err = max(abs(d1 * dx - b1), abs(d2 * dx - b2))
        stats[3] = max(stats[3], err)
        stats[1] += b1
        stats[2] += b2
        for i in range(N):
            si = s[i]
            if si < 0.0 or si > 1.0:
                if si < -CLIP_TOL or si > 1.0 + CLIP_TOL:
                    stats[4] += 1
                si = min(max(si, 0.0), 1.0)
                s[i] = si
            m = mm[i]
            b = si + A - m * B
            disc = b * b + 4.0 * si * B * m
            den = b + np.sqrt(max(disc, 0.0))
            if den <= 0.0:
                if m <= 0.0:
                    ci = 0.0
                else:
                    stats[5] = -1.0
                    return t
            else:
                ci = 2.0 * m / den
            if ci < 0.0 or ci > 1.0:
                if ci < -CLIP_TOL or ci > 1.0 + CLIP_TOL:
                    stats[4] += 1
                ci = min(max(ci, 0.0), 1.0)
            c[i] = ci
        t += dt
        stats[0] += 1
        stats[5] = dt
    return t


def _kernel_params(m: ModelConfig):
    if not isinstance(m.flux, FluxParams) or not isinstance(m.adsorption, AdsorptionParams):
        raise ConfigError("the viscous kernel supports the Corey/Langmuir family only")
    return m.flux.M0, m.flux.kc, m.adsorption.A, m.adsorption.B


def run(cfg: ViscousConfig, m: ModelConfig = DEFAULT_MODEL) -> GridField:
    """Integrate to cfg.T, storing cfg.n_frames equally spaced frames (t = 0 included)."""
    M0, kc, A, B = _kernel_params(m)
    dx = cfg.L / cfg.N
    x = (np.arange(cfg.N) + 0.5) * dx
    s = np.full(cfg.N, float(cfg.right[0]))
    c = np.full(cfg.N, float(cfg.right[1]))
    mm = c * s + m.a(c)
    times = np.linspace(0.0, cfg.T, cfg.n_frames)
    S = np.empty((cfg.n_frames, cfg.N))
    C = np.empty_like(S)
    mass = np.empty((cfg.n_frames, 2))
    flux = np.empty((cfg.n_frames, 2))
    stats = np.zeros(6)
    t = 0.0
    sL, cL = map(float, cfg.left)
    for j, tj in enumerate(times):
        if tj > t:
            t = _advance(s, mm, c, t, tj, dx, cfg.epsilon, cfg.cfl, sL, cL, M0, kc, A, B, stats)
            if stats[5] < 0:
                raise SolverError(f"concentration inversion failed near t={t:.6g}")
        S[j], C[j] = s, c
        mass[j] = (s.sum() * dx, mm.sum() * dx)
        flux[j] = stats[1:3]
    meta = {"epsilon": cfg.epsilon, "N": cfg.N, "dx": dx, "T": cfg.T, "steps": int(stats[0]),
            "max_step_conservation_error": float(stats[3]), "clip_events": int(stats[4]),
            "last_dt": float(stats[5]), "mass": mass, "boundary_flux": flux, "left": cfg.left,
            "right": cfg.right}
    return GridField(x, times, S, C, meta)


def level_crossing(x, y, level):
    """First position where y crosses `level`, linearly interpolated."""
    above = y >= level
    idx = np.nonzero(above[:-1] != above[1:])[0]
    if len(idx) == 0:
        return None
    i = idx[0]
    return float(x[i] + (level - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i]))


def front_speed(field: GridField, level: float, variable: str = "s") -> float:
    """Least-squares slope of the level-crossing position over the second half of the frames."""
    if len(field.t) < 2:
        raise MeasurementError("need at least two frames")
    Y = field.s if variable == "s" else field.c
    if not (Y.min() < level < Y.max()):
        raise MeasurementError(f"level {level} outside the field range")
    half = len(field.t) // 2
    ts, xs = [], []
    for j in range(half, len(field.t)):
        xc = level_crossing(field.x, Y[j], level)
        if xc is not None:
            ts.append(field.t[j])
            xs.append(xc)
    if len(ts) < 2:
        raise MeasurementError(f"no crossing of level {level} in the second half of the run")
    if np.ptp(xs) == 0.0:
        return 0.0
    return float(np.polyfit(ts, xs, 1)[0])


def profile_at(field: GridField, time: float):
    """Nearest frame to `time` as (x, s, c)."""
    if time < field.t[0] - 1e-12 or time > field.t[-1] + 1e-12:
        raise MeasurementError(f"time {time} outside the run [{field.t[0]}, {field.t[-1]}]")
    j = int(np.argmin(np.abs(field.t - time)))
    return field.x, field.s[j].copy(), field.c[j].copy()


def layer_width(x, y, lo, hi):
    """Distance between the crossings of two levels of a monotone front."""
    a, b = level_crossing(x, y, hi), level_crossing(x, y, lo)
    if a is None or b is None:
        raise MeasurementError("front levels not found")
    return abs(b - a)
