import numpy as np
import pytest
from hypothesis import HealthCheck, example, given, settings, strategies as st
from scipy.optimize import brentq

from chemflood import riemann, viscous
from chemflood.errors import DomainError, StructuralError
from chemflood.grid import GridField
from chemflood.lagrange import LagrangeState
from chemflood.riemann import (WaveKind, convex_envelope, potential, sample_fan, solve_bl, solve_riemann,
                               solve_system_lagrange, solve_system_original, solve_zeta, to_original)
from chemflood.shock import ShockData, admissible

from conftest import corey

SQ = 1 / np.sqrt(2)


def corey_s(s, M):
    return 2 * M * s * (1 - s) / (s * s + M * (1 - s) ** 2) ** 2


def tangent_from(p, M, lo, hi=1.0):
    """s in [lo, hi] where the line through (p, 0) touches the Corey curve, by brentq alone."""
    return brentq(lambda s: corey_s(s, M) * (s - p) - corey(s, M), lo, hi, xtol=1e-15)


def kinds(fan):
    return [w.kind for w in fan.waves]


def injection_oracle():
    # c-shock line through (-d1, 0) with d1 = a(1) / 1, touching f(., 1), hitting f(., 0)
    d1 = 0.25
    s_minus = tangent_from(-d1, 2.0, 0.4)
    v = corey(s_minus, 2.0) / (s_minus + d1)
    s_plus = brentq(lambda s: corey(s, 1.0) - v * (s + d1), 0.5, 0.9, xtol=1e-15)
    return s_minus, s_plus, v, corey(s_plus, 1.0) / s_plus


# ---------------------------------------------------------------- envelopes

def test_welge_chord_is_upper_envelope():
    segs = convex_envelope(0.0, 0.0, 1.0, upper=True)
    assert [g.kind for g in segs] == ["chord", "curve"]
    assert segs[0].a == 0.0
    assert segs[0].b == pytest.approx(SQ, abs=1e-10)


def test_lower_envelope_touches_from_one():
    # by the symmetry f(1 - s) = 1 - f(s) at M = 1 the tangent from (1, 1) touches at 1 - 1/sqrt(2)
    segs = convex_envelope(0.0, 0.0, 1.0)
    assert [g.kind for g in segs] == ["curve", "chord"]
    assert segs[0].b == pytest.approx(1 - SQ, abs=1e-10)
    assert segs[1].b == 1.0


def test_upper_envelope_on_concave_part_is_graph():
    segs = convex_envelope(0.0, 0.5, 1.0, upper=True)
    assert len(segs) == 1 and segs[0].kind == "curve"
    assert (segs[0].a, segs[0].b) == (0.5, 1.0)


def test_envelope_of_linear_function():
    for upper in (False, True):
        segs = riemann.envelope(lambda x: 3.0 * x - 1.0, lambda x: np.full_like(np.asarray(x, float), 3.0),
                                -1.0, 2.0, upper)
        assert all(g.kind in ("curve", "chord") for g in segs)
        assert segs[0].a == -1.0 and segs[-1].b == 2.0


def test_envelope_rejects_bad_interval():
    with pytest.raises(DomainError):
        convex_envelope(0.0, 0.6, 0.6)
    with pytest.raises(DomainError):
        convex_envelope(0.0, -0.1, 0.5)


# ---------------------------------------------------------------- scalar problems

def test_bl_injection_into_oil():
    fan = solve_bl(1.0, 0.0, 0.0)
    assert kinds(fan) == [WaveKind.RAREFACTION, WaveKind.SHOCK]
    assert fan.waves[0].right[0] == pytest.approx(SQ, abs=1e-10)
    front = corey(SQ, 1.0) / SQ
    assert front == pytest.approx(1.207107, abs=1e-6)
    assert fan.waves[1].speed_lo == pytest.approx(front, abs=1e-10)
    assert fan.waves[0].speed_hi == pytest.approx(front, abs=1e-9)


def test_bl_concave_stretch_single_shock():
    fan = solve_bl(0.5, 1.0, 0.0)
    assert kinds(fan) == [WaveKind.SHOCK]
    w = fan.waves[0]
    assert w.speed_lo == pytest.approx(1.0, abs=1e-12)
    assert admissible(ShockData(0.5, 1.0, 0.0, 0.0, w.speed_lo)).admissible


def test_bl_equal_states_empty():
    assert solve_bl(0.3, 0.3, 0.0).waves == []


def test_bl_refinement_invariance():
    for sL, sR, c in [(1.0, 0.0, 0.0), (0.9, 0.1, 0.6), (0.2, 0.95, 1.0), (0.55, 0.05, 0.3)]:
        a = solve_bl(sL, sR, c, n=2 ** 10)
        b = solve_bl(sL, sR, c, n=2 ** 14)
        assert kinds(a) == kinds(b)
        for u, v in zip(a.waves, b.waves):
            assert abs(u.right[0] - v.right[0]) < 1e-8
            assert abs(u.speed_lo - v.speed_lo) < 1e-8


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_bl_shocks_are_oleinik(sL, sR, c):
    fan = solve_bl(sL, sR, c, n=2 ** 10)
    for w in fan.waves:
        if w.is_shock:
            assert admissible(ShockData(w.left[0], w.right[0], c, c, w.speed_lo)).admissible


def test_zeta_shock_and_rarefaction():
    sh = solve_zeta(0.0, 1.0)
    assert kinds(sh) == [WaveKind.ZETA_SHOCK]
    assert sh.waves[0].speed_lo == pytest.approx(0.25, abs=1e-15)
    rf = solve_zeta(1.0, 0.0)
    assert kinds(rf) == [WaveKind.ZETA_RAREFACTION]
    assert (rf.waves[0].speed_lo, rf.waves[0].speed_hi) == pytest.approx((0.125, 0.5), abs=1e-15)
    assert solve_zeta(0.4, 0.4).waves == []


def test_zeta_rarefaction_inverse():
    w = solve_zeta(1.0, 0.0).waves[0]
    eta = np.linspace(0.13, 0.49, 9)
    z = w.inverse(eta)[:, 1]
    # a_c = A / (1 + B z)^2
    np.testing.assert_allclose(0.5 / (1 + z) ** 2, eta, rtol=1e-12)


def test_zeta_outside_unit_interval():
    with pytest.raises(DomainError):
        solve_zeta(-0.1, 0.5)


# ---------------------------------------------------------------- injection problem

def test_numerically_dry_ahead():
    dry = solve_riemann((1.0, 0.2), (0.0, 0.9))
    for s in (1e-7, 1e-40):
        fan = solve_riemann((1.0, 0.2), (s, 0.9))
        assert fan.right == (s, 0.9) and fan.zero_flow is not None
        assert kinds(fan) == kinds(dry)
        for u, v in zip(fan.waves, dry.waves):
            assert u.speed_lo == pytest.approx(v.speed_lo, abs=1e-5)
        front = fan.waves[-1]
        assert front.right == (s, 0.9)
        assert admissible(ShockData(front.left[0], s, 0.9, 0.9, front.speed_lo)).admissible
    near = solve_riemann((1.0, 0.2), (2e-6, 0.9))
    assert near.zero_flow is None
    assert abs(near.waves[-1].speed_lo - dry.waves[-1].speed_lo) < 1e-4


def test_injection_fan_original():
    s_minus, s_plus, v, front = injection_oracle()
    fan = solve_riemann((1.0, 1.0), (0.0, 0.0))
    assert kinds(fan) == [WaveKind.RAREFACTION, WaveKind.ZETA_SHOCK, WaveKind.SHOCK]
    rare, zs, ws = fan.waves
    assert rare.speed_lo == pytest.approx(0.0, abs=1e-12)
    assert rare.right[0] == pytest.approx(s_minus, abs=1e-10)
    assert zs.left == pytest.approx((s_minus, 1.0), abs=1e-10)
    assert zs.right == pytest.approx((s_plus, 0.0), abs=1e-10)
    assert zs.speed_lo == pytest.approx(v, abs=1e-10)
    assert ws.speed_lo == pytest.approx(front, abs=1e-10)
    assert fan.zero_flow is not None
    assert fan.zero_flow.front_speed == ws.speed_lo and fan.zero_flow.c == 0.0


def test_injection_fan_lagrange():
    s_minus, s_plus, _, _ = injection_oracle()
    fan = solve_riemann((1.0, 1.0), (0.0, 0.0), coords="lagr")
    assert fan.coords == "lagrange"
    dry, zs, rare = fan.waves
    assert dry.left[0] is None and dry.speed_lo == 0.0
    assert dry.right[0] == pytest.approx(1 / corey(s_plus, 1.0), rel=1e-10)
    assert zs.speed_lo == pytest.approx(0.25, abs=1e-12)
    assert zs.right[0] == pytest.approx(1 / corey(s_minus, 2.0), rel=1e-10)
    assert rare.right == (1.0, 1.0) and rare.speed_hi == np.inf


def test_injection_state_profile():
    _, s_plus, _, front = injection_oracle()
    fan = solve_riemann((1.0, 1.0), (0.0, 0.0))
    xi = np.array([front * 0.999, front * 1.001, 5.0])
    st_ = fan.state_at(xi)
    assert st_[0] == pytest.approx((s_plus, 0.0), abs=1e-10)
    assert np.all(st_[1:] == 0.0)


def test_direct_and_lagrange_agree(rng):
    for _ in range(8):
        sL = rng.uniform(0.2, 1.0)
        sR = 0.0 if rng.uniform() < 0.4 else rng.uniform(0.0, 1.0)
        cR, cL = np.sort(rng.uniform(0.0, 1.0, 2))
        a = solve_system_original((sL, cL), (sR, cR))
        b = solve_riemann((sL, cL), (sR, cR))
        assert kinds(a) == kinds(b)
        for u, v in zip(a.waves, b.waves):
            assert abs(u.speed_lo - v.speed_lo) < 1e-8 and abs(u.speed_hi - v.speed_hi) < 1e-8


def test_direct_route_scope():
    with pytest.raises(StructuralError):
        solve_system_original((1.0, 0.0), (0.5, 1.0))
    with pytest.raises(DomainError):
        solve_system_original((0.0, 1.0), (0.5, 0.0))


def test_constant_state_fan_identity():
    fan = solve_riemann((0.6, 0.3), (0.6, 0.3))
    assert fan.waves == []
    xi = np.linspace(-1, 3, 7)
    np.testing.assert_array_equal(fan.state_at(xi), np.tile([0.6, 0.3], (7, 1)))


def test_equal_zeta_reduces_to_scalar():
    left, right = LagrangeState(2.5, 0.4), LagrangeState(1.2, 0.4)
    fan = solve_system_lagrange(left, right)
    ref = riemann.solve_U_scalar(left, right)
    assert [(w.kind, w.speed_lo, w.speed_hi) for w in fan.waves] == [(w.kind, w.speed_lo, w.speed_hi)
                                                                      for w in ref.waves]


def test_dry_injection_unsupported():
    with pytest.raises(DomainError):
        solve_system_lagrange(LagrangeState(2.0, 0.3), LagrangeState.dry(0.3))
    with pytest.raises(DomainError):
        to_original(solve_bl(1.0, 0.0, 0.0))


# ---------------------------------------------------------------- zeta-rarefaction problems

def test_lower_concentration_injected():
    # injected c=0 into c=1: the c=1 water front is the Welge chord, M = 2
    fan = solve_riemann((1.0, 0.0), (0.0, 1.0))
    assert kinds(fan) == [WaveKind.RAREFACTION, WaveKind.ZETA_RAREFACTION, WaveKind.RAREFACTION, WaveKind.SHOCK]
    swf = np.sqrt(2 / 3)
    assert fan.waves[-1].left[0] == pytest.approx(swf, abs=1e-9)
    assert fan.waves[-1].speed_lo == pytest.approx(corey(swf, 2.0) / swf, abs=1e-9)
    # the c-wave leaves c=1 at the state touched by the line through (-a_c(1), 0)
    s_res = tangent_from(-0.125, 2.0, 0.6)
    assert fan.waves[1].right == pytest.approx((s_res, 1.0), abs=1e-9)
    assert fan.waves[1].speed_hi == pytest.approx(corey_s(s_res, 2.0), abs=1e-9)


def test_zeta_rarefaction_profile_is_continuous():
    fan = solve_riemann((1.0, 0.0), (0.5, 1.0))
    for w in fan.waves:
        if not w.is_shock:
            xi = np.array([w.speed_lo + 1e-9, w.speed_hi - 1e-9])
            st_ = fan.state_at(xi)
            assert st_[0] == pytest.approx(w.left, abs=1e-5)
            assert st_[1] == pytest.approx(w.right, abs=1e-5)
    xi = np.linspace(fan.waves[1].speed_lo, fan.waves[1].speed_hi, 50)[1:-1]
    c = fan.state_at(xi)[:, 1]
    assert np.all(np.diff(c) > 0)


def test_embedded_u_shock():
    # fast water ahead of a slow injected state: the saturation jump sits inside the c-wave
    fan = solve_riemann((0.6535822995623298, 0.20577504822901882), (0.9210796772829299, 0.8509011245916515))
    assert kinds(fan) == [WaveKind.ZETA_RAREFACTION, WaveKind.SHOCK, WaveKind.ZETA_RAREFACTION]
    sh = fan.waves[1]
    assert sh.left[1] == sh.right[1]
    assert admissible(ShockData(sh.left[0], sh.right[0], sh.left[1], sh.right[1], sh.speed_lo)).admissible


@pytest.mark.parametrize("left,right", [((1.0, 0.0), (0.5, 1.0)), ((0.8, 0.2), (0.4, 0.9))])
def test_zeta_rarefaction_vanishing_viscosity(left, right):
    fan = solve_riemann(left, right)
    errs = []
    for eps, N in [(8e-3, 1024), (2e-3, 2048)]:
        g = viscous.run(viscous.ViscousConfig(epsilon=eps, T=0.4, left=left, right=right, n_frames=3, N=N))
        st_ = fan.state_at(g.x / g.t[-1])
        errs.append(np.mean(np.abs(g.s[-1] - st_[:, 0])) + np.mean(np.abs(g.c[-1] - st_[:, 1])))
    assert errs[1] < errs[0]
    assert errs[1] < 0.05


riemann_data = st.tuples(st.one_of(st.just(1.0), st.floats(0.05, 1.0)),
                         st.one_of(st.just(0.0), st.floats(0.0, 1.0)),
                         st.floats(0.0, 1.0), st.floats(0.0, 1.0))


@settings(max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(riemann_data)
@example((1.0, 1.0, 1.0, 0.0))
@example((1.0, 4e-133, 0.75, 0.0))
@example((0.5, 0.5, 0.03125, 0.0))
@example((1.0, 0.984375, 0.0, 0.0))
@example((0.75, 1.0, 1.0, 0.0))
@example((0.6535822995623298, 0.9210796772829299, 0.20577504822901882, 0.8509011245916515))
def test_fan_invariants(data):
    sL, sR, cL, cR = data
    if sL == sR == 1.0 and cL > cR + 1e-12:
        # the only candidate is a c-jump with s+ = s- = 1, which is never admissible
        with pytest.raises(StructuralError, match="never admissible"):
            solve_riemann((sL, cL), (sR, cR))
        return
    try:
        fan = solve_riemann((sL, cL), (sR, cR))
    except StructuralError as exc:
        # the same degenerate limit, when s ahead is too close to 1 to be resolved in U
        assert cL > cR and sR > 1 - 1e-6 and "never admissible" in str(exc)
        return
    fan.check()
    prev = -np.inf
    for w in fan.waves:
        assert w.speed_lo >= prev - 1e-9
        prev = w.speed_hi
        if w.is_shock:
            assert w.speed_lo > 0
            assert admissible(ShockData(w.left[0], w.right[0], w.left[1], w.right[1], w.speed_lo)).admissible
    assert (fan.zero_flow is not None) == (sR < riemann.DRY_S)
    if fan.zero_flow is not None:
        assert fan.zero_flow.c == cR


# ---------------------------------------------------------------- sampling and potential

def test_sample_fan_initial_row():
    fan = solve_bl(1.0, 0.0, 0.0)
    g = sample_fan(fan, np.linspace(-0.5, 1.0, 7), np.array([0.0, 0.5]))
    # x = 0 belongs to the state ahead
    np.testing.assert_array_equal(g.s[0], [1, 1, 0, 0, 0, 0, 0])


def test_potential_constant_water():
    x = np.linspace(0, 2, 41)
    t = np.linspace(0, 3, 31)
    g = GridField(x, t, np.ones((31, 41)), np.full((31, 41), 0.4))
    for path in ("x-then-t", "t-then-x"):
        p = potential(g, path=path)
        np.testing.assert_allclose(p.phi, t[:, None] - x[None, :], atol=1e-13)
        np.testing.assert_allclose(p.phi0, -x, atol=1e-13)


def test_potential_dry():
    x = np.linspace(0, 1, 11)
    t = np.linspace(0, 1, 6)
    p = potential(GridField(x, t, np.zeros((6, 11)), np.zeros((6, 11))))
    assert np.all(p.phi == 0.0)


def test_potential_path_independence():
    # smooth rarefaction sector of the fan, t in [1, 2]
    fan = solve_bl(1.0, 0.75, 0.0)
    diffs = []
    for n in (41, 81, 161):
        g = sample_fan(fan, np.linspace(0.0, 0.5, n), np.linspace(1.0, 2.0, n))
        d = np.max(np.abs(potential(g, path="x-then-t").phi - potential(g, path="t-then-x").phi))
        diffs.append(d)
    h = 0.5 / 40
    assert diffs[0] < h
    assert diffs[1] < diffs[0] / 1.8 and diffs[2] < diffs[1] / 1.8


def test_potential_unknown_path():
    g = GridField(np.linspace(0, 1, 3), np.linspace(0, 1, 3), np.zeros((3, 3)), np.zeros((3, 3)))
    with pytest.raises(DomainError):
        potential(g, path="diagonal")


def test_profile_and_dict():
    fan = solve_riemann((1.0, 1.0), (0.0, 0.0))
    xi, states = fan.profile()
    assert len(xi) >= riemann.N_PROFILE and states.shape == (len(xi), 2)
    assert np.all(np.diff(xi) > 0)
    d = fan.to_dict()
    assert d["coords"] == "original" and d["zero_flow"]["c"] == 0.0
    assert [w["kind"] for w in d["waves"]] == ["rarefaction", "zeta-shock", "shock"]
