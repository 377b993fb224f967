"""Acceptance battery shared by the test suite and the ``suite acceptance`` command."""

import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import entropy, lagrange, riemann, shock, tw_ode, verify, viscous
from .model import DEFAULT_MODEL, ModelConfig

DEFAULT_SEED = 0xC0FFEE

BL_SPEED = (1.0 + np.sqrt(2.0)) / 2.0  # f/s at the c = 0 water front of the default model
BL_LEVEL = 0.25
ZETA_LEVEL = 0.5
EPS_SWEEP = (4e-3, 2e-3, 1e-3)
INJECTION_T = 1.0
INJECTION_FRAMES = 201
AHEAD_MARGIN = 20.0  # in units of epsilon
ORDER_SLACK = 1e-3
STATE_TOL = 1e-8


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    runtime: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name} ({self.runtime:.1f} s)"

    def to_dict(self):
        return {"number": self.number, "name": self.name, "passed": self.passed, "runtime": self.runtime,
                "details": self.details}


def _timed(number, name, fn, *args):
    t = time.perf_counter()
    ok, details = fn(*args)
    return CriterionResult(number, name, bool(ok), time.perf_counter() - t, details)


# ---------------------------------------------------------------- 1

def _c1(seed, m):
    rng = np.random.default_rng(seed)
    shocks = shock.random_s_shocks(rng, 1000, m)
    t = time.perf_counter()
    agree = 0
    errors = []
    for sh in shocks:
        try:
            a = shock.oleinik_s_shock(sh.s_minus, sh.s_plus, sh.c_minus, m)
            b = shock.lagrange_e_condition(shock.map_shock(sh, m), m)
            agree += a == b
        except Exception as exc:  # any exception counts against the criterion
            errors.append(f"{sh}: {exc!r}")
    dt = time.perf_counter() - t
    ok = agree == len(shocks) and not errors and dt < 5.0
    return ok, {"n": len(shocks), "agree": agree, "exceptions": errors[:5], "seconds": dt}


def criterion_1(seed=DEFAULT_SEED, m: ModelConfig = DEFAULT_MODEL):
    return _timed(1, "Oleinik/Lagrange equivalence on 1000 s-shocks", _c1, seed, m)


# ---------------------------------------------------------------- 2

def _c2(m):
    rep = lagrange.validate_F(m)
    z = np.linspace(0.0, 1.0, 101)
    f1 = float(np.max(np.abs(lagrange.F_value(np.ones_like(z), z, m) + 1.0)))
    umax0 = lagrange.U_max(0.0, m)
    ui0 = lagrange.U_inflection(0.0, m)
    e_max = abs(umax0 - (4.0 - 2.0 * np.sqrt(2.0)))
    e_inf = abs(ui0 - 2.0)
    ok = rep.ok and f1 < 1e-12 and e_max < 1e-9 and e_inf < 1e-9
    return ok, {"grid_checks": rep.ok, "failed": [k for k, c in rep.checks.items() if not c.passed],
                "max|F(1,zeta)+1|": f1, "U_max(0) error": e_max, "U_I(0) error": e_inf}


def criterion_2(m: ModelConfig = DEFAULT_MODEL):
    return _timed(2, "Lagrange flux property suite", _c2, m)


# ---------------------------------------------------------------- 3

def _c3(seed, m):
    rng = np.random.default_rng(seed)
    shocks = shock.random_c_shocks(rng, 200, m)
    t = time.perf_counter()
    mismatches, marginal, far_marginal = [], 0, []
    for sh in shocks:
        v = shock.admissible(sh, m)
        r = tw_ode.connection_exists(sh, m)
        dist = v.nullclines.distance if v.nullclines is not None else np.inf
        if r.status == "marginal":
            marginal += 1
            if not dist <= 1e-6:
                far_marginal.append(sh.to_dict())
        elif (r.status == "yes") != v.admissible:
            mismatches.append({**sh.to_dict(), "admissible": v.admissible, "ode": r.status})
    dt = time.perf_counter() - t
    rate = marginal / len(shocks)
    ok = not mismatches and rate < 0.05 and not far_marginal and dt < 60.0
    return ok, {"n": len(shocks), "mismatches": mismatches[:5], "n_mismatches": len(mismatches),
                "marginal_rate": rate, "marginal_far_from_intermediate": len(far_marginal), "seconds": dt}


def criterion_3(seed=DEFAULT_SEED, m: ModelConfig = DEFAULT_MODEL):
    return _timed(3, "travelling-wave ODE against nullcline admissibility on 200 c-shocks", _c3, seed, m)


# ---------------------------------------------------------------- 4

def _c4(seed, m):
    rng = np.random.default_rng(seed)
    worst_u, n_u, fails = -np.inf, 0, []
    for sh in shock.random_s_shocks(rng, 400, m, p_dry=0.0):
        if not shock.admissible(sh, m).admissible:
            continue
        lsh = shock.map_shock(sh, m)
        r = entropy.u_shock_entropy_max(lsh, m)
        n_u += 1
        worst_u = max(worst_u, r.residual)
        if r.residual > 1e-9:
            fails.append({"U-shock": sh.to_dict(), "k": r.k, "residual": r.residual})
    worst_z, min_witness, n_z = -np.inf, np.inf, 0
    for sh in shock.random_c_shocks(rng, 200, m):
        if sh.s_plus == 0.0 or not shock.admissible(sh, m).admissible:
            continue
        lsh = shock.map_shock(sh, m)
        r = entropy.zeta_shock_entropy_max(lsh.zeta_minus, lsh.zeta_plus, m)
        try:
            w = entropy.zeta_shock_G_violation(lsh, m).residual
        except Exception as exc:
            w = -np.inf
            fails.append({"zeta-shock": sh.to_dict(), "error": repr(exc)})
        n_z += 1
        worst_z = max(worst_z, r.residual)
        min_witness = min(min_witness, w)
        if r.residual > 1e-9 or not w > 0:
            fails.append({"zeta-shock": sh.to_dict(), "A_residual": r.residual, "G_witness": w})
    ok = not fails and n_u > 0 and n_z > 0
    return ok, {"n_U_shocks": n_u, "worst_U_residual": worst_u, "n_zeta_shocks": n_z,
                "worst_A_residual": worst_z, "min_G_witness": min_witness, "failures": fails[:5]}


def criterion_4(seed=DEFAULT_SEED, m: ModelConfig = DEFAULT_MODEL):
    return _timed(4, "entropy contrast between U-shocks and zeta-shocks", _c4, seed, m)


# ---------------------------------------------------------------- viscous runs (shared by 5 and 7)

@lru_cache(maxsize=None)
def _bl_run(eps):
    return viscous.run(viscous.ViscousConfig(epsilon=eps, T=0.6, left=(1.0, 0.0), right=(0.0, 0.0), n_frames=41))


@lru_cache(maxsize=None)
def _injection_run(eps):
    return viscous.run(viscous.ViscousConfig(epsilon=eps, T=INJECTION_T, left=(1.0, 1.0), right=(0.0, 0.0),
                                             n_frames=INJECTION_FRAMES))


def injection_fan(m: ModelConfig = DEFAULT_MODEL):
    return riemann.solve_riemann((1.0, 1.0), (0.0, 0.0), m)


def ahead_of_front(g, v_front, margin):
    """Max s over points more than `margin` ahead of x = v_front t, in frames where that region is inside."""
    worst = 0.0
    for j, tj in enumerate(g.t):
        sel = g.x > v_front * tj + margin
        if tj > 0 and sel.any():
            worst = max(worst, float(np.max(g.s[j, sel])))
    return worst


def _c5():
    t = time.perf_counter()
    errs = []
    for eps in EPS_SWEEP:
        v = viscous.front_speed(_bl_run(eps), BL_LEVEL)
        errs.append(abs(v - BL_SPEED) / BL_SPEED)
    monotone = all(a > b for a, b in zip(errs, errs[1:]))
    fan = injection_fan()
    zeta = [w for w in fan.waves if w.kind == riemann.WaveKind.ZETA_SHOCK][0].speed_lo
    v_front = fan.zero_flow.front_speed
    g = _injection_run(1e-3)
    vz = viscous.front_speed(g, ZETA_LEVEL, "c")
    ez = abs(vz - zeta) / zeta
    ahead = ahead_of_front(g, v_front, AHEAD_MARGIN * 1e-3)
    dt = time.perf_counter() - t
    ok = errs[-1] < 0.02 and monotone and ez < 0.03 and ahead < 1e-3 and dt < 240.0
    return ok, {"bl_errors": dict(zip(map(str, EPS_SWEEP), errs)), "monotone": monotone,
                "zeta_speed": vz, "zeta_analytic": zeta, "zeta_error": ez, "max_s_ahead": ahead, "seconds": dt}


def criterion_5():
    return _timed(5, "Riemann fans against vanishing-viscosity runs", _c5)


# ---------------------------------------------------------------- 6

def _c6(m):
    fan = injection_fan(m)
    study = verify.refinement_study(verify.fan_sampler(fan), verify.shock_aligned_rects(fan), m=m)
    const = max(verify.contour_residual(verify.constant_sampler(s, c), verify.Rect(0.1, 0.9, 0.2, 1.3), n, m)
                for s, c in ((0.3, 0.7), (0.8, 0.1), (0.0, 0.5)) for n in verify.CONTOUR_NS)
    decreasing = all(np.all(np.diff(r) < 0) for r in (study.r1, study.r2))
    ok = decreasing and min(study.order1, study.order2) >= 1.0 - ORDER_SLACK and max(const) < 1e-14
    return ok, {**study.to_dict(), "decreasing": decreasing, "constant_residual": max(const)}


def criterion_6(m: ModelConfig = DEFAULT_MODEL):
    return _timed(6, "contour exactness on the injection fan", _c6, m)


# ---------------------------------------------------------------- 7

def _c7():
    drifts = {}
    finite = True
    for eps in (2e-3, 1e-3):
        g = _injection_run(eps)
        poly = verify.t0_extract(g)
        finite &= poly.finite and not poly.empty
        drifts[eps] = verify.omega0_concentration_check(g, poly)
    ok = finite and drifts[1e-3] < 0.02 and drifts[1e-3] < drifts[2e-3]
    return ok, {"t0_finite": finite, "drift": {str(k): v for k, v in drifts.items()}}


def criterion_7():
    return _timed(7, "zero-flow structure of the injection run", _c7)


# ---------------------------------------------------------------- 8

def _c8(m):
    direct = riemann.solve_system_original((1.0, 1.0), (0.0, 0.0), m)
    mapped = riemann.solve_riemann((1.0, 1.0), (0.0, 0.0), m, coords="lagr")
    mapped = riemann.to_original(mapped, m) if mapped.coords != "orig" else mapped
    same_structure = [w.kind for w in direct.waves] == [w.kind for w in mapped.waves]
    diff = 0.0
    if same_structure:
        for a, b in zip(direct.waves, mapped.waves):
            diff = max(diff, float(np.max(np.abs(np.subtract(a.left, b.left)))),
                       float(np.max(np.abs(np.subtract(a.right, b.right)))),
                       abs(a.speed_lo - b.speed_lo), abs(a.speed_hi - b.speed_hi))
    xi = np.linspace(0.0, 1.5, 3001)
    prof = float(np.max(np.abs(direct.state_at(xi) - mapped.state_at(xi)))) if same_structure else np.inf
    ok = same_structure and diff < STATE_TOL
    return ok, {"same_structure": same_structure, "max_state_difference": diff,
                "max_profile_difference": prof}


def criterion_8(m: ModelConfig = DEFAULT_MODEL):
    return _timed(8, "direct and Lagrange-split injection fans agree", _c8, m)


CRITERIA = {1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4,
            5: criterion_5, 6: criterion_6, 7: criterion_7, 8: criterion_8}


def run_all(seed=DEFAULT_SEED, only=None) -> list:
    out = []
    for k, fn in CRITERIA.items():
        if only and k not in only:
            continue
        out.append(fn(seed) if k in (1, 3, 4) else fn())
    return out
