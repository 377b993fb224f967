import json
import re
from pathlib import Path

import pytest

from chemflood.config import DEFAULT_CONFIG, DEFAULT_SEED, RunConfig
from chemflood.errors import ConfigError
from chemflood.model import DEFAULT_MODEL

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_default_round_trip():
    cfg = RunConfig.from_dict(DEFAULT_CONFIG)
    assert cfg.model == DEFAULT_MODEL and cfg.seed == DEFAULT_SEED == 0xC0FFEE
    assert RunConfig.from_dict(cfg.to_dict()) == cfg


@pytest.mark.parametrize("name", ["default.json", "injection.json"])
def test_shipped_configs_load(name):
    cfg = RunConfig.load(CONFIGS / name)
    assert RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg


@pytest.mark.parametrize("patch,where", [
    ({"bogus": 1}, "$"),
    ({"schema": 2}, "$.schema"),
    ({"model": {"flux": {"type": "corey", "M0": -1.0}, "adsorption": {"type": "langmuir"}}}, "$.model.flux.M0"),
    ({"viscous": {"epsilon": 1e-3, "T": 1.0, "N": 10}}, "$.viscous.N"),
    ({"riemann": {"left": [1.0, 2.0], "right": [0.0, 0.0]}}, "$.riemann.left[1]"),
    ({"seed": -1}, "$.seed"),
])
def test_schema_errors_carry_a_pointer(patch, where):
    with pytest.raises(ConfigError, match=re.escape(f"config {where}:")):
        RunConfig.from_dict({**DEFAULT_CONFIG, **patch})


def test_missing_schema_version():
    with pytest.raises(ConfigError, match="schema"):
        RunConfig.from_dict({"seed": 1})


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        RunConfig.load(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  'x': 1}")
    with pytest.raises(ConfigError, match="invalid JSON at line 2"):
        RunConfig.load(bad)
