"""Run configuration: a JSON document validated against a fixed schema before any computation."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema

from .errors import ConfigError
from .model import DEFAULT_MODEL, ModelConfig
from .viscous import ViscousConfig

SCHEMA_VERSION = 1
DEFAULT_SEED = 0xC0FFEE

_num = {"type": "number"}
_unit = {"type": "number", "minimum": 0.0, "maximum": 1.0}
_state = {"type": "array", "items": _unit, "minItems": 2, "maxItems": 2}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj({
    "schema": {"const": SCHEMA_VERSION},
    "model": _obj({
        "flux": _obj({"type": {"enum": ["corey"]}, "M0": {"type": "number", "exclusiveMinimum": 0},
                      "kc": {"type": "number", "minimum": 0}}, ["type"]),
        "adsorption": _obj({"type": {"enum": ["langmuir"]}, "A": {"type": "number", "exclusiveMinimum": 0},
                            "B": {"type": "number", "minimum": 0}}, ["type"]),
    }, ["flux", "adsorption"]),
    "shock": _obj({"s_minus": _unit, "s_plus": _unit, "c_minus": _unit, "c_plus": _unit, "v": _num},
                  ["s_minus", "s_plus", "c_minus", "c_plus"]),
    "riemann": _obj({"left": _state, "right": _state, "coords": {"enum": ["orig", "lagr"]}}, ["left", "right"]),
    "viscous": _obj({"epsilon": {"type": "number", "exclusiveMinimum": 0}, "T": {"type": "number", "exclusiveMinimum": 0},
                     "left": _state, "right": _state, "L": {"type": "number", "exclusiveMinimum": 0},
                     "N": {"type": "integer", "minimum": 256}, "cfl": {"type": "number", "exclusiveMinimum": 0, "maximum": 0.4},
                     "n_frames": {"type": "integer", "minimum": 2}}, ["epsilon", "T"]),
    "verify": _obj({"threshold": {"type": "number", "exclusiveMinimum": 0}, "x0": _num,
                    "buffer_frames": {"type": "integer", "minimum": 0},
                    "ns": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2}}),
    "output": {"type": "string"},
    "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
}, ["schema"])

DEFAULT_CONFIG = {
    "schema": SCHEMA_VERSION,
    "model": {"flux": {"type": "corey", "M0": 1.0, "kc": 1.0},
              "adsorption": {"type": "langmuir", "A": 0.5, "B": 1.0}},
    "seed": DEFAULT_SEED,
}


@dataclass
class RunConfig:
    model: ModelConfig = DEFAULT_MODEL
    shock: Optional[dict] = None
    riemann: Optional[dict] = None
    viscous: Optional[ViscousConfig] = None
    verify: dict = field(default_factory=dict)
    output: Optional[str] = None
    seed: int = DEFAULT_SEED

    @classmethod
    def from_dict(cls, d) -> "RunConfig":
        try:
            jsonschema.validate(d, SCHEMA)
        except jsonschema.ValidationError as exc:
            raise ConfigError(f"config {exc.json_path}: {exc.message}") from None
        model = ModelConfig.from_dict(d["model"]) if "model" in d else DEFAULT_MODEL
        visc = ViscousConfig.from_dict(d["viscous"]) if "viscous" in d else None
        return cls(model, d.get("shock"), d.get("riemann"), visc, dict(d.get("verify", {})), d.get("output"),
                   int(d.get("seed", DEFAULT_SEED)))

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(d)

    def to_dict(self):
        d = {"schema": SCHEMA_VERSION, "model": self.model.to_dict(), "seed": self.seed}
        if self.shock is not None:
            d["shock"] = self.shock
        if self.riemann is not None:
            d["riemann"] = self.riemann
        if self.viscous is not None:
            v = self.viscous
            d["viscous"] = {"epsilon": v.epsilon, "T": v.T, "left": list(v.left), "right": list(v.right), "L": v.L,
                            "N": v.N, "cfl": v.cfl, "n_frames": v.n_frames}
        if self.verify:
            d["verify"] = self.verify
        if self.output is not None:
            d["output"] = self.output
        return d
