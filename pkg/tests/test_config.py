import json
import math

import numpy as np
import pytest

from nhvi import (
    DimensionMismatch,
    SchemaError,
    build_model,
    config_from_dict,
    parse_config,
    serialize_config,
)
from nhvi.cli import bundled_config_path
from nhvi.config import config_to_dict


def minimal_config(**overrides):
    cfg = {
        "model": {"type": "particle", "mass": 1.0, "gravity": 9.8},
        "rule": "midpoint",
        "q0": [0.0, 1.0],
        "v0": [2.0, 0.0],
        "t_final": 1.0,
        "h": 0.01,
    }
    cfg.update(overrides)
    return cfg


class TestBundledConfigs:
    def test_ellipse_matches_reference_parameters(self):
        cfg = parse_config(bundled_config_path("ellipse"))
        assert cfg.model_type == "se2_body"
        p = cfg.model_params
        assert (p["mass"], p["gravity"]) == (1.0, 9.8)
        assert (p["a"], p["b"]) == (1.0, 0.5)
        assert p["inertia"] == 0.3125
        assert cfg.h == 0.01
        assert cfg.q0 == (math.pi / 2, 0.0, 3.5)
        assert cfg.v0 == (-3.0, 2.0, 0.0)
        assert cfg.rule == "midpoint"

    def test_pendulum_matches_reference_parameters(self):
        cfg = parse_config(bundled_config_path("pendulum"))
        p = cfg.model_params
        assert (p["mass"], p["gravity"], p["length"], p["radius"]) == (1.0, 9.8, 2.0, 1.5)
        assert p["f"] == "default"
        assert cfg.h == 1e-3
        assert cfg.q0 == (0.75 * math.pi, 0.0)
        assert cfg.v0 == (0.25 * math.pi, 0.25 * (math.pi + 0.5) * math.pi)
        assert cfg.rule == "retraction-left"

    def test_bundled_models_build(self):
        for name in ("particle", "ellipse", "pendulum"):
            cfg = parse_config(bundled_config_path(name))
            model = build_model(cfg)
            assert model.n == len(cfg.q0)


class TestValidation:
    def test_zero_timestep_rejected(self):
        with pytest.raises(SchemaError, match="h"):
            config_from_dict(minimal_config(h=0.0))

    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(SchemaError, match="timestep"):
            config_from_dict(minimal_config(timestep=0.1))

    def test_unknown_model_key_reports_path(self):
        cfg = minimal_config()
        cfg["model"]["spin"] = 2.0
        with pytest.raises(SchemaError, match="model.spin"):
            config_from_dict(cfg)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            config_from_dict(minimal_config(q0=[0.0, 1.0, 2.0]))

    def test_final_time_must_exceed_start(self):
        with pytest.raises(SchemaError, match="t_final"):
            config_from_dict(minimal_config(t_final=-1.0))

    def test_bad_rule_rejected(self):
        with pytest.raises(SchemaError, match="rule"):
            config_from_dict(minimal_config(rule="leapfrog"))

    def test_unknown_plot_kind_rejected(self):
        with pytest.raises(SchemaError, match=r"plots\[0\]"):
            config_from_dict(minimal_config(outputs={"plots": ["phase_portrait"]}))

    def test_pendulum_constant_gain(self):
        cfg = config_from_dict(
            {
                "model": {
                    "type": "pendulum",
                    "length": 2.0,
                    "radius": 1.5,
                    "f": 0.0,
                },
                "rule": "retraction-left",
                "q0": [2.4, 0.0],
                "v0": [0.1, 0.0],
                "t_final": 1.0,
                "h": 0.001,
            }
        )
        model = build_model(cfg)
        assert model.omega(np.array([1.0, 0.0]))[0, 0] == 0.0

    def test_se2_contact_frame_validation(self):
        cfg = minimal_config()
        cfg["model"] = {
            "type": "se2_body",
            "shape": {"kind": "ellipse", "a": 1.0, "b": 0.5},
            "contact_frame": "diagonal",
        }
        cfg["q0"] = [0.0, 0.0, 3.0]
        cfg["v0"] = [0.0, 0.0, 0.0]
        with pytest.raises(SchemaError, match="contact_frame"):
            config_from_dict(cfg)


class TestRoundTrip:
    def test_parse_serialize_parse_is_identity(self, tmp_path):
        for name in ("particle", "ellipse", "pendulum"):
            cfg = parse_config(bundled_config_path(name))
            path = tmp_path / f"{name}.json"
            path.write_text(serialize_config(cfg))
            assert parse_config(path) == cfg

    def test_defaults_are_materialized(self):
        cfg = config_from_dict(minimal_config())
        doc = config_to_dict(cfg)
        assert doc["t0"] == 0.0
        assert doc["solver"]["tol"] == 1e-10
        assert doc["outputs"]["csv"] is True
        assert json.loads(serialize_config(cfg)) == doc
