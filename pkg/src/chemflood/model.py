"""Fractional-flow and adsorption models.

The shipped family is the Corey-quadratic flux

    f(s, c) = s^2 / (s^2 + M(c) (1 - s)^2),   M(c) = M0 (1 + kc c)

with Langmuir adsorption a(c) = A c / (1 + B c). All evaluators accept numpy
arrays; the public ``eval_*`` functions additionally check the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _roots
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class FluxParams:
    """Corey flux parameters: end-point mobility ratio and polymer thickening."""

    M0: float = 1.0
    kc: float = 1.0
    type: str = field(default="corey", init=False)

    def __post_init__(self):
        if not np.isfinite(self.M0) or self.M0 <= 0:
            raise ConfigError(f"M0 must be positive, got {self.M0}")
        if not np.isfinite(self.kc) or self.kc < 0:
            raise ConfigError(f"kc must be nonnegative, got {self.kc}")

    def mobility(self, c):
        return self.M0 * (1.0 + self.kc * c)

    def _den(self, s, c):
        return s * s + self.mobility(c) * (1.0 - s) ** 2

    def f(self, s, c):
        return s * s / self._den(s, c)

    def f_s(self, s, c):
        M = self.mobility(c)
        return 2.0 * M * s * (1.0 - s) / self._den(s, c) ** 2

    def f_c(self, s, c):
        return -self.M0 * self.kc * (s * (1.0 - s)) ** 2 / self._den(s, c) ** 2

    def f_ss(self, s, c):
        M = self.mobility(c)
        D = self._den(s, c)
        dD = 2.0 * s - 2.0 * M * (1.0 - s)
        return 2.0 * M * ((1.0 - 2.0 * s) * D - 2.0 * s * (1.0 - s) * dD) / D**3

    def to_dict(self):
        return {"type": self.type, "M0": self.M0, "kc": self.kc}


@dataclass(frozen=True)
class AdsorptionParams:
    """Langmuir isotherm parameters: capacity A and affinity B."""

    A: float = 0.5
    B: float = 1.0
    type: str = field(default="langmuir", init=False)

    def __post_init__(self):
        for name in ("A", "B"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be positive, got {v}")

    def a(self, c):
        return self.A * c / (1.0 + self.B * c)

    def a_c(self, c):
        return self.A / (1.0 + self.B * c) ** 2

    def a_cc(self, c):
        return -2.0 * self.A * self.B / (1.0 + self.B * c) ** 3

    def to_dict(self):
        return {"type": self.type, "A": self.A, "B": self.B}


FLUX_TYPES = {"corey": FluxParams}
ADSORPTION_TYPES = {"langmuir": AdsorptionParams}


@dataclass(frozen=True)
class ModelConfig:
    """A flux model together with an adsorption isotherm."""

    flux: FluxParams = field(default_factory=FluxParams)
    adsorption: AdsorptionParams = field(default_factory=AdsorptionParams)

    @property
    def degenerate(self) -> bool:
        """True when the flux does not depend on c (kc = 0)."""
        return self.flux.kc == 0.0

    # thin delegates, no domain checks (hot paths)
    def f(self, s, c):
        return self.flux.f(s, c)

    def f_s(self, s, c):
        return self.flux.f_s(s, c)

    def f_c(self, s, c):
        return self.flux.f_c(s, c)

    def f_ss(self, s, c):
        return self.flux.f_ss(s, c)

    def a(self, c):
        return self.adsorption.a(c)

    def a_c(self, c):
        return self.adsorption.a_c(c)

    def a_cc(self, c):
        return self.adsorption.a_cc(c)

    def to_dict(self):
        return {"flux": self.flux.to_dict(), "adsorption": self.adsorption.to_dict()}

    @classmethod
    def from_dict(cls, d):
        try:
            fl = dict(d["flux"])
            ad = dict(d["adsorption"])
            flux_cls = FLUX_TYPES[fl.pop("type")]
            ads_cls = ADSORPTION_TYPES[ad.pop("type")]
        except KeyError as exc:
            raise ConfigError(f"model block: missing or unknown entry {exc}") from None
        try:
            return cls(flux_cls(**fl), ads_cls(**ad))
        except TypeError as exc:
            raise ConfigError(f"model block: {exc}") from None


DEFAULT_MODEL = ModelConfig()


def _check_unit(name, x):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")
    return arr if arr.ndim else float(arr)


def eval_flux(s, c, m: ModelConfig = DEFAULT_MODEL):
    """Return (f, f_s, f_c) on the unit square."""
    s = _check_unit("s", s)
    c = _check_unit("c", c)
    return m.f(s, c), m.f_s(s, c), m.f_c(s, c)


def eval_adsorption(c, m: ModelConfig = DEFAULT_MODEL):
    """Return (a, a_c, a_cc) for c in [0, 1]."""
    c = _check_unit("c", c)
    return m.a(c), m.a_c(c), m.a_cc(c)


@lru_cache(maxsize=4096)
def inflection_s(c: float, m: ModelConfig = DEFAULT_MODEL) -> float:
    """Unique zero of f_ss(., c) in (0, 1)."""
    c = float(_check_unit("c", c))
    return _roots.unique_root(lambda s: m.f_ss(s, c), 0.0, 1.0, f"f_ss(., {c:g})")


@lru_cache(maxsize=4096)
def water_front_s(c: float, m: ModelConfig = DEFAULT_MODEL) -> float:
    """Unique root of psi = f - s f_s on (s^I(c), 1): the tangency point from the origin."""
    c = float(_check_unit("c", c))
    lo = inflection_s(c, m)
    return _roots.unique_root(lambda s: m.f(s, c) - s * m.f_s(s, c), lo, 1.0, f"psi(., {c:g})")


@dataclass
class Check:
    passed: bool
    detail: str = ""
    violations: list = field(default_factory=list)


@dataclass
class ValidationReport:
    """Named verdicts from a grid sweep; ``flags`` carries non-fatal notes."""

    checks: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(ch.passed for ch in self.checks.values())

    def add(self, name, passed, detail="", violations=()):
        self.checks[name] = Check(bool(passed), detail, list(violations)[:20])

    def to_dict(self):
        return {
            "ok": self.ok,
            "flags": list(self.flags),
            "checks": {
                k: {"passed": v.passed, "detail": v.detail, "violations": [list(map(float, p)) for p in v.violations]}
                for k, v in self.checks.items()
            },
        }


def _where(mask, *coords):
    idx = np.argwhere(mask)
    return [tuple(cc[tuple(i)] for cc in coords) for i in idx]


def validate_model(m: ModelConfig = DEFAULT_MODEL, n: int = 128) -> ValidationReport:
    """Grid checks of the S-shape, monotonicity and adsorption assumptions."""
    if n < 64:
        raise DomainError("validation grid needs n >= 64")
    rep = ValidationReport()
    g = (np.arange(n) + 0.5) / n
    S, C = np.meshgrid(g, g, indexing="ij")

    fs = m.f_s(S, C)
    rep.add("f_s>0", np.all(fs > 0), violations=_where(fs <= 0, S, C))

    bad = []
    for c in g:
        vals = m.f_ss(g, c)
        changes = np.count_nonzero(np.diff(np.sign(vals)) != 0)
        if changes != 1 or vals[0] <= 0:
            bad.append((np.nan, c))
    rep.add("f_ss single sign change", not bad, violations=bad)

    if m.degenerate:
        rep.flags.append("degenerate: f_c≡0")
        rep.add("f_c<0", True, "degenerate: f_c≡0")
    else:
        fc = m.f_c(S, C)
        rep.add("f_c<0", np.all(fc < 0), violations=_where(fc >= 0, S, C))

    ac = m.a_c(g)
    acc = m.a_cc(g)
    rep.add("a(0)=0", m.a(0.0) == 0.0)
    rep.add("a_c>0", np.all(ac > 0), violations=[(np.nan, c) for c in g[ac <= 0]])
    rep.add("a_cc<0", np.all(acc < 0), violations=[(np.nan, c) for c in g[acc >= 0]])
    return rep
