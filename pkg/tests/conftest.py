import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from chemflood.model import DEFAULT_MODEL, AdsorptionParams, FluxParams, ModelConfig

SEED = 0xC0FFEE


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def m():
    return DEFAULT_MODEL


def corey_polys(M):
    """Numerator and denominator coefficients of the Corey flux (increasing powers)."""
    num = np.array([0.0, 0.0, 1.0])
    den = P.polyadd(num, M * np.array([1.0, -2.0, 1.0]))
    return num, den


def inflection_oracle(M):
    """Root in (0,1) of the numerator of f_ss, from polynomial algebra alone."""
    n, d = corey_polys(M)
    n1 = P.polysub(P.polymul(P.polyder(n), d), P.polymul(n, P.polyder(d)))
    n2 = P.polysub(P.polymul(P.polyder(n1), d), 2 * P.polymul(n1, P.polyder(d)))
    r = P.polyroots(n2)
    r = r[np.abs(r.imag) < 1e-12].real
    r = r[(r > 0) & (r < 1)]
    assert len(r) == 1
    return float(r[0])


def corey(s, M):
    return s * s / (s * s + M * (1 - s) ** 2)


def model_with(M0=1.0, kc=1.0, A=0.5, B=1.0):
    return ModelConfig(FluxParams(M0=M0, kc=kc), AdsorptionParams(A=A, B=B))
