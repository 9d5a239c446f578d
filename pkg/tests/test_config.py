import json

import pytest

from ekmanqg.config import ExperimentConfig
from ekmanqg.pressure import ConfigError


def test_defaults_valid():
    cfg = ExperimentConfig()
    assert cfg.pressure_law.gamma == 2.0
    assert ExperimentConfig.from_dict(cfg.to_dict()) == cfg


def test_partial_sections_merge():
    cfg = ExperimentConfig.from_dict({"law": {"gamma": 1.5}, "dt": 2e-3})
    assert cfg.law == {"gamma": 1.5, "a": 1.0} and cfg.dt == 2e-3


@pytest.mark.parametrize("bad", [
    {"bogus": 1},
    {"law": {"gamma": 0.5}},
    {"profile": {"rho0": -1.0}},
    {"grid": {"N_h": 48}},
    {"profile": {"N3": 100}},
    {"viscosity": {"mu": 0.0}},
    {"eps": []},
    {"eps": [0.1, -0.1]},
    {"dt": 0.0},
    {"seed": 1.5},
])
def test_rejects(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_load(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"eps": [0.1]}))
    assert ExperimentConfig.load(p).eps == [0.1]
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(p)
    p.write_text("{nope")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(p)
    with pytest.raises(ConfigError):
        ExperimentConfig.load(tmp_path / "missing.json")
