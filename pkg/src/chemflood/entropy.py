"""Kruzkov entropy residuals across shocks in Lagrange coordinates.

For a jump with speed Phi' the residual is [G(U, k)] - Phi' [|U - k|] with
G(U, k) = (F(U, zeta) - F(k, zeta)) sign(U - k); the entropy inequality holds
when it is <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, InconsistencyError, WrongShockKindError
from .lagrange import eval_F
from .model import DEFAULT_MODEL, ModelConfig
from .shock import RH_TOL, LagrangeShockData, admissible, unmap_shock

DEAD_BAND = 1e-12
N_K = 1025


@dataclass(frozen=True)
class EntropyResidual:
    k: float
    residual: float

    @property
    def verdict(self) -> int:
        if self.residual > DEAD_BAND:
            return 1
        if self.residual < -DEAD_BAND:
            return -1
        return 0


def G(U, k, zeta, m: ModelConfig = DEFAULT_MODEL):
    """Entropy flux paired with |U - k|."""
    return (eval_F(U, zeta, m)[0] - eval_F(k, zeta, m)[0]) * np.sign(np.asarray(U) - np.asarray(k))


def A_flux(zeta, k, m: ModelConfig = DEFAULT_MODEL):
    """Entropy flux paired with |zeta - k| for the adsorption equation."""
    return (m.a(zeta) - m.a(k)) * np.sign(np.asarray(zeta) - np.asarray(k))


def _maximise(fun, lo, hi, n=N_K):
    """Deterministic sampling plus bounded refinement around the best sample."""
    ks = np.linspace(lo, hi, n)
    vals = np.asarray(fun(ks), dtype=float)
    i = int(np.argmax(vals))
    best = EntropyResidual(float(ks[i]), float(vals[i]))
    a, b = ks[max(i - 1, 0)], ks[min(i + 1, n - 1)]
    if b > a:
        r = minimize_scalar(lambda k: -float(fun(np.array([k]))[0]), bounds=(a, b), method="bounded",
                            options={"xatol": 1e-13})
        if -r.fun > best.residual:
            best = EntropyResidual(float(r.x), float(-r.fun))
    return best


def u_shock_residual(lsh: LagrangeShockData, k, m: ModelConfig = DEFAULT_MODEL):
    """Residual [G(U, k)] - v* [|U - k|] for an interior U-shock, vectorised in k."""
    if lsh.is_zeta_shock:
        raise WrongShockKindError("expected a U-shock")
    if lsh.U_minus is None:
        raise DomainError("the shock against the DRY boundary is not an interior U-shock")
    z = lsh.zeta_plus
    k = np.asarray(k, dtype=float)
    Up, Um = lsh.U_plus, lsh.U_minus
    jump_G = G(Up, k, z, m) - G(Um, k, z, m)
    jump_abs = np.abs(Up - k) - np.abs(Um - k)
    return jump_G - lsh.v_star * jump_abs


def u_shock_entropy_max(lsh: LagrangeShockData, m: ModelConfig = DEFAULT_MODEL) -> EntropyResidual:
    """Worst residual over k; outside [min U, max U] the residual vanishes identically."""
    lo, hi = sorted((lsh.U_minus if lsh.U_minus is not None else np.inf, lsh.U_plus))
    if lsh.U_minus is None:
        raise DomainError("the shock against the DRY boundary is not an interior U-shock")
    return _maximise(lambda k: u_shock_residual(lsh, k, m), lo, hi)


def zeta_shock_residual(zeta_minus, zeta_plus, k, m: ModelConfig = DEFAULT_MODEL):
    if zeta_minus == zeta_plus:
        raise DomainError("zeta- = zeta+ is not a zeta-shock")
    k = np.asarray(k, dtype=float)
    phi = (m.a(zeta_plus) - m.a(zeta_minus)) / (zeta_plus - zeta_minus)
    jump_A = A_flux(zeta_plus, k, m) - A_flux(zeta_minus, k, m)
    jump_abs = np.abs(zeta_plus - k) - np.abs(zeta_minus - k)
    return jump_A - phi * jump_abs


def zeta_shock_entropy_max(zeta_minus, zeta_plus, m: ModelConfig = DEFAULT_MODEL) -> EntropyResidual:
    lo, hi = sorted((zeta_minus, zeta_plus))
    return _maximise(lambda k: zeta_shock_residual(zeta_minus, zeta_plus, k, m), lo, hi)


def zeta_shock_G_violation(lsh: LagrangeShockData, m: ModelConfig = DEFAULT_MODEL, k=None) -> EntropyResidual:
    """Witness k below both U's where the U-entropy inequality fails across a zeta-shock.

    The value equals F(k, zeta-) - F(k, zeta+), positive when F decreases in zeta.
    """
    if not lsh.is_zeta_shock:
        raise WrongShockKindError("expected a zeta-shock")
    if lsh.U_minus is None:
        raise DomainError("a zeta-shock cannot border the DRY state")
    zm, zp = lsh.zeta_minus, lsh.zeta_plus
    if k is None:
        k = 1.0 + 0.5 * (min(lsh.U_minus, lsh.U_plus) - 1.0)
    phi = (m.a(zp) - m.a(zm)) / (zp - zm)
    jump_G = G(lsh.U_plus, k, zp, m) - G(lsh.U_minus, k, zm, m)
    jump_abs = abs(lsh.U_plus - k) - abs(lsh.U_minus - k)
    val = float(jump_G - phi * jump_abs)
    if val <= DEAD_BAND and not m.degenerate:
        raise InconsistencyError(f"no entropy violation at k={k:g} (value {val:.3g}); check the sign of F_zeta")
    return EntropyResidual(float(k), val)


def zeta_shock_pair_check(U_pair, V_pair, zeta_pair, m: ModelConfig = DEFAULT_MODEL) -> float:
    """Residual [G(U, V)] - Phi' [|U - V|] for two solutions sharing one zeta-shock.

    Pairs are (minus, plus) in Lagrange order. Each pair must be RH-consistent
    and map to an admissible c-shock.
    """
    zm, zp = zeta_pair
    if zm == zp:
        raise DomainError("zeta- = zeta+ is not a zeta-shock")
    phi = (m.a(zp) - m.a(zm)) / (zp - zm)
    for Um, Up in (U_pair, V_pair):
        r = phi * (Up - Um) - (eval_F(Up, zp, m)[0] - eval_F(Um, zm, m)[0])
        if abs(r) > RH_TOL * max(1.0, abs(Up), abs(Um)):
            raise DomainError(f"pair ({Um}, {Up}) violates the Lagrange RH condition (residual {r:.3g})")
        v = admissible(unmap_shock(LagrangeShockData(Um, Up, zm, zp, phi), m), m)
        if not v.admissible:
            raise DomainError(f"pair ({Um}, {Up}) is an inadmissible connection: {v.reason}")
    (Um, Up), (Vm, Vp) = U_pair, V_pair
    Gp = (eval_F(Up, zp, m)[0] - eval_F(Vp, zp, m)[0]) * np.sign(Up - Vp)
    Gm = (eval_F(Um, zm, m)[0] - eval_F(Vm, zm, m)[0]) * np.sign(Um - Vm)
    return float(Gp - Gm - phi * (abs(Up - Vp) - abs(Um - Vm)))
