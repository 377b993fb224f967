"""Lagrange splitting transform (s, c) <-> (U, zeta) and the transformed flux.

    U = 1/f(s, c),   zeta = c,   F(U, zeta) = -s/f(s, c)

Zero flow (s = 0) has no finite image and is carried as the tagged DRY state.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from . import _roots
from .errors import DomainError, NoPreimageError
from .model import DEFAULT_MODEL, ModelConfig, ValidationReport, inflection_s, water_front_s


@dataclass(frozen=True)
class LagrangeState:
    """A state in Lagrange coordinates; ``U is None`` marks the DRY state."""

    U: Optional[float]
    zeta: float

    @classmethod
    def dry(cls, zeta: float) -> "LagrangeState":
        return cls(None, float(zeta))

    @property
    def is_dry(self) -> bool:
        return self.U is None

    def __str__(self):
        return f"(DRY, {self.zeta:.6g})" if self.is_dry else f"({self.U:.10g}, {self.zeta:.6g})"


def to_lagrange(s: float, c: float, m: ModelConfig = DEFAULT_MODEL) -> LagrangeState:
    if not (0.0 <= s <= 1.0 and 0.0 <= c <= 1.0):
        raise DomainError(f"state ({s}, {c}) outside the unit square")
    if s == 0.0:
        return LagrangeState.dry(c)
    return LagrangeState(float(1.0 / m.f(s, c)), float(c))


def s_of_U(U, zeta, m: ModelConfig = DEFAULT_MODEL):
    """Vectorised inverse of U = 1/f(s, zeta) by monotone bisection on s in (0, 1]."""
    U = np.asarray(U, dtype=float)
    if np.any(U < 1.0) or np.any(~np.isfinite(U)):
        raise DomainError("U must be finite and >= 1")
    s = _roots.bisect_monotone(lambda x: m.f(x, zeta), 1.0 / U, 0.0, 1.0)
    s = np.where(U == 1.0, 1.0, s)
    return s if s.ndim else float(s)


def from_lagrange(st: LagrangeState, m: ModelConfig = DEFAULT_MODEL):
    """Return (s, c) for a wet Lagrange state."""
    if st.is_dry:
        raise NoPreimageError("DRY state has no finite preimage beyond s = 0")
    return s_of_U(st.U, st.zeta, m), st.zeta


def eval_F(U, zeta, m: ModelConfig = DEFAULT_MODEL):
    """Return (F, F_U, F_UU) at U >= 1.

    F_U = f/f_s - s and F_UU = f_ss f^3 / f_s^3; at U = 1 the derivatives are
    infinite (f_s(1) = 0) and returned as such.
    """
    s = np.asarray(s_of_U(U, zeta, m))
    f = m.f(s, zeta)
    fs = m.f_s(s, zeta)
    with np.errstate(divide="ignore", invalid="ignore"):
        F = -s / f
        FU = f / fs - s
        FUU = m.f_ss(s, zeta) * f**3 / fs**3
    out = (F, FU, FUU)
    if np.ndim(U) == 0:
        out = tuple(float(x) for x in out)
    return out


def F_value(U, zeta, m: ModelConfig = DEFAULT_MODEL):
    return eval_F(U, zeta, m)[0]


def F_zeta(U, zeta, m: ModelConfig = DEFAULT_MODEL):
    """Partial derivative of F in zeta at fixed U: U f_c / f_s."""
    s = np.asarray(s_of_U(U, zeta, m))
    out = np.asarray(U) * m.f_c(s, zeta) / m.f_s(s, zeta)
    return out if out.ndim else float(out)


@lru_cache(maxsize=4096)
def U_max(zeta: float, m: ModelConfig = DEFAULT_MODEL) -> float:
    """Location of the global maximum of F(., zeta)."""
    return float(1.0 / m.f(water_front_s(zeta, m), zeta))


@lru_cache(maxsize=4096)
def U_inflection(zeta: float, m: ModelConfig = DEFAULT_MODEL) -> float:
    """Unique inflection point of F(., zeta)."""
    return float(1.0 / m.f(inflection_s(zeta, m), zeta))


@dataclass(frozen=True)
class FluxCurveL:
    """Convenience view of F for one model; the per-zeta caches are shared and read-only."""

    model: ModelConfig = DEFAULT_MODEL

    def F(self, U, zeta):
        return eval_F(U, zeta, self.model)

    def U_max(self, zeta):
        return U_max(float(zeta), self.model)

    def U_inflection(self, zeta):
        return U_inflection(float(zeta), self.model)


LADDER = np.array([10.0**k for k in range(1, 7)])


def validate_F(m: ModelConfig = DEFAULT_MODEL, n: int = 64) -> ValidationReport:
    """Grid checks of the transformed-flux properties on n zeta-slices."""
    rep = ValidationReport()
    zetas = np.linspace(0.0, 1.0, n)
    neg, one, tail, fu_sign, fuu_sign, fu_tail = [], [], [], [], [], []
    for z in zetas:
        umax, ui = U_max(z, m), U_inflection(z, m)
        if not 1.0 < umax < ui:
            fu_sign.append((umax, z))
        U = np.concatenate([1.0 + np.geomspace(1e-4, 1e3, 400)])
        F, FU, FUU = eval_F(U, z, m)
        if np.any(F >= 0):
            neg.append((float(U[np.argmax(F)]), z))
        if abs(eval_F(1.0, z, m)[0] + 1.0) > 1e-12:
            one.append((1.0, z))
        lo, hi = U < umax * (1 - 1e-6), U > umax * (1 + 1e-6)
        if np.any(FU[lo] <= 0) or np.any(FU[hi] >= 0):
            fu_sign.append((umax, z))
        lo, hi = U < ui * (1 - 1e-6), U > ui * (1 + 1e-6)
        if np.any(FUU[lo] >= 0) or np.any(FUU[hi] <= 0):
            fuu_sign.append((ui, z))
        Ft, FUt, _ = eval_F(LADDER, z, m)
        big = LADDER >= 100
        if np.any(np.diff(Ft[big]) >= 0):
            tail.append((1e6, z))
        if np.any(np.diff(np.abs(FUt[big])) >= 0):
            fu_tail.append((1e6, z))
    rep.add("F<0", not neg, violations=neg)
    rep.add("F(1,zeta)=-1", not one, violations=one)
    rep.add("F->-inf", not tail, violations=tail)
    rep.add("F_U sign pattern", not fu_sign, violations=fu_sign)
    rep.add("F_UU sign pattern", not fuu_sign, violations=fuu_sign)
    rep.add("F_U->0", not fu_tail, violations=fu_tail)
    if m.degenerate:
        rep.flags.append("degenerate: F_zeta≡0")
        rep.add("F_zeta<0", True, "degenerate")
    else:
        rng = np.random.default_rng(0)
        U = 1.0 + rng.random(1000) * 20.0
        Z = rng.random(1000)
        Fz = np.array([F_zeta(u, z, m) for u, z in zip(U, Z)])
        rep.add("F_zeta<0", np.all(Fz < 0), violations=list(zip(U[Fz >= 0], Z[Fz >= 0])))
    return rep
