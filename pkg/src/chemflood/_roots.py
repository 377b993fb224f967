"""Root-finding helpers shared by the model and wave modules."""

import numpy as np
from scipy.optimize import brentq

from .errors import ModelShapeError

XTOL = 1e-12
NCELLS = 1024


def sign_brackets(fn, lo, hi, ncells=NCELLS):
    """Return the cells of a uniform partition of [lo, hi] where fn changes sign.

    `fn` must accept numpy arrays. Exact zeros on a node are reported as
    degenerate cells of zero width.
    """
    x = np.linspace(lo, hi, ncells + 1)
    y = np.asarray(fn(x), dtype=float)
    out = []
    for i in range(ncells):
        if y[i] == 0.0:
            out.append((x[i], x[i]))
        elif y[i] * y[i + 1] < 0.0:
            out.append((x[i], x[i + 1]))
    if y[-1] == 0.0:
        out.append((x[-1], x[-1]))
    return out


def refine(fn, a, b, xtol=XTOL):
    """Refine a sign-change bracket [a, b] of a scalar function."""
    if a == b:
        return float(a)
    return float(brentq(lambda z: float(fn(z)), a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200))


def unique_root(fn, lo, hi, what, ncells=NCELLS, xtol=XTOL):
    """Bracket on `ncells` cells and refine; exactly one sign change is required."""
    br = sign_brackets(fn, lo, hi, ncells)
    if len(br) != 1:
        raise ModelShapeError(f"{what}: expected one sign change on ({lo:g}, {hi:g}), found {len(br)}")
    return refine(fn, *br[0], xtol=xtol)


def bisect_monotone(g, target, lo, hi, increasing=True, maxiter=200):
    """Vectorised bisection for g(x) = target with g monotone on [lo, hi].

    Runs until the bracket collapses to adjacent floats (or `maxiter`), so the
    answer is as accurate as g itself.
    """
    target = np.asarray(target, dtype=float)
    a = np.full(target.shape, float(lo))
    b = np.full(target.shape, float(hi))
    for _ in range(maxiter):
        mid = 0.5 * (a + b)
        done = (mid <= a) | (mid >= b)
        if np.all(done):
            break
        below = g(mid) < target
        if not increasing:
            below = ~below
        a = np.where(below & ~done, mid, a)
        b = np.where(~below & ~done, mid, b)
    return 0.5 * (a + b)
