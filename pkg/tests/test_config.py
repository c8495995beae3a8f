import json

import numpy as np
import pytest

from chordcdf import config
from chordcdf.config import ConfigError


def test_bundled_config_valid():
    cfg = config.load(config.bundled_config_path())
    assert cfg.nominal() == 1 + 1j
    g = cfg.model()
    np.testing.assert_array_equal(g.cov, [[1.0, 0.0], [0.0, 0.25]])
    np.testing.assert_array_equal(cfg.frequency_grid(), np.arange(0, 101, 5.0))
    assert cfg.plant()(0.0) == 2.0


def test_unknown_keys_rejected_at_every_level():
    for doc in ({"extra": 1}, {"quadrature": {"abs_tol": 1e-9, "speed": 2}},
                {"sysid": {"n_trials": 1, "noise": 0.1}}):
        with pytest.raises(ConfigError):
            config.validate(doc)


def test_error_names_key():
    with pytest.raises(ConfigError, match="density.radius"):
        config.validate({"density": {"type": "uniform-disc", "center": [0, 0], "radius": 0}})
    with pytest.raises(ConfigError, match="density.type"):
        config.validate({"density": {"type": "lognormal"}})
    with pytest.raises(ConfigError, match="nominal"):
        config.validate({"nominal": [1, 2, 3]})


def test_make_grid():
    np.testing.assert_allclose(config.make_grid({"min": 0, "max": 100, "spacing": 5}),
                               np.arange(0, 101, 5.0))
    np.testing.assert_allclose(config.make_grid({"min": 1e-2, "max": 1e4, "count": 7, "scale": "log"}),
                               np.logspace(-2, 4, 7))
    with pytest.raises(ConfigError):
        config.make_grid({"min": 0, "max": 1, "count": 3, "scale": "log"})
    with pytest.raises(ConfigError):
        config.make_grid({"min": 0, "max": 1, "count": 3, "spacing": 0.5})


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        config.load(tmp_path / "missing.json")
    p = tmp_path / "x.json"
    p.write_text(json.dumps({"seed": -1}))
    with pytest.raises(ConfigError, match="seed"):
        config.load(p)


def test_tol_override():
    cfg = config.ExperimentConfig({"quadrature": {"abs_tol": 1e-8}})
    assert cfg.quadrature().abs_tol == 1e-8
    assert cfg.quadrature(1e-6).abs_tol == 1e-6
