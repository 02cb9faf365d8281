"""Simulation configuration: JSON schema, validation, and model construction.

Schema (all keys shown; unknown keys are rejected with their path):

    {
      "model": {
        "type": "particle" | "se2_body" | "pendulum",
        "mass": number, "gravity": number,
        # se2_body only:
        "shape": {"kind": "ellipse", "a": number, "b": number}
               | {"kind": "star", "l": number},
        "inertia": number,            # optional for ellipses: m(a^2+b^2)/4
        # pendulum only:
        "length": number, "radius": number,
        "f": "default" | number       # constraint gain; number means constant
      },
      "rule": "midpoint" | "retraction-left",
      "q0": [..], "v0": [..],         # continuous initial conditions
      "t0": number,                   # default 0
      "t_final": number,
      "h": number,
      "solver": {"tol": .., "max_iter": .., "max_backtracks": .., "fd_eps": ..},
      "outputs": {"csv": bool, "summary": bool,
                  "plots": ["energy" | "coordinates" | "plane_trajectory", ..]}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Tuple

from .discretization import RULES
from .errors import DimensionMismatch, SchemaError
from .geometry import MechanicalModel
from .models import (
    EllipseShape,
    ParticleParams,
    PendulumParams,
    Se2BodyParams,
    StarShape,
    make_particle,
    make_pendulum,
    make_se2_body,
)
from .numerics import NewtonOptions

MODEL_DIMS = {"particle": 2, "se2_body": 3, "pendulum": 2}
PLOT_KINDS = ("energy", "coordinates", "plane_trajectory")


@dataclass(frozen=True)
class OutputOptions:
    csv: bool = True
    summary: bool = True
    plots: Tuple[str, ...] = ()


@dataclass(frozen=True)
class SimConfig:
    model_type: str
    model_params: dict
    rule: str
    q0: Tuple[float, ...]
    v0: Tuple[float, ...]
    t0: float
    t_final: float
    h: float
    solver: NewtonOptions = NewtonOptions()
    outputs: OutputOptions = OutputOptions()


def _reject_unknown(d: dict, allowed, path: str):
    for key in d:
        if key not in allowed:
            raise SchemaError(f"unknown key {key!r}", key_path=f"{path}.{key}" if path else key)


def _get(d: dict, key: str, kind, path: str, default=..., positive=False):
    if key not in d:
        if default is ...:
            raise SchemaError("missing required key", key_path=f"{path}.{key}" if path else key)
        return default
    value = d[key]
    full = f"{path}.{key}" if path else key
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"expected a number, got {value!r}", key_path=full)
        value = float(value)
        if positive and value <= 0:
            raise SchemaError(f"must be positive, got {value}", key_path=full)
    elif kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise SchemaError(f"expected an integer, got {value!r}", key_path=full)
        if positive and value <= 0:
            raise SchemaError(f"must be positive, got {value}", key_path=full)
    elif kind is bool:
        if not isinstance(value, bool):
            raise SchemaError(f"expected a boolean, got {value!r}", key_path=full)
    elif kind is str:
        if not isinstance(value, str):
            raise SchemaError(f"expected a string, got {value!r}", key_path=full)
    return value


def _parse_vector(d: dict, key: str, path: str) -> Tuple[float, ...]:
    full = f"{path}.{key}" if path else key
    if key not in d:
        raise SchemaError("missing required key", key_path=full)
    raw = d[key]
    if not isinstance(raw, list) or not raw:
        raise SchemaError("expected a non-empty array of numbers", key_path=full)
    out = []
    for i, entry in enumerate(raw):
        if isinstance(entry, bool) or not isinstance(entry, (int, float)):
            raise SchemaError(f"expected a number, got {entry!r}", key_path=f"{full}[{i}]")
        out.append(float(entry))
    return tuple(out)


def _parse_model(d, path="model") -> Tuple[str, dict]:
    if not isinstance(d, dict):
        raise SchemaError("expected an object", key_path=path)
    mtype = _get(d, "type", str, path)
    if mtype not in MODEL_DIMS:
        raise SchemaError(
            f"unknown model type {mtype!r}; expected one of {sorted(MODEL_DIMS)}",
            key_path=f"{path}.type",
        )
    params = {
        "mass": _get(d, "mass", float, path, default=1.0, positive=True),
        "gravity": _get(d, "gravity", float, path, default=9.8, positive=True),
    }
    if mtype == "particle":
        _reject_unknown(d, {"type", "mass", "gravity"}, path)
    elif mtype == "se2_body":
        _reject_unknown(d, {"type", "mass", "gravity", "shape", "inertia", "contact_frame"}, path)
        frame = _get(d, "contact_frame", str, path, default="vertical")
        if frame not in ("vertical", "edge-slope"):
            raise SchemaError(
                f"expected 'vertical' or 'edge-slope', got {frame!r}",
                key_path=f"{path}.contact_frame",
            )
        params["contact_frame"] = frame
        shape = d.get("shape")
        if not isinstance(shape, dict):
            raise SchemaError("expected an object", key_path=f"{path}.shape")
        kind = _get(shape, "kind", str, f"{path}.shape")
        if kind == "ellipse":
            _reject_unknown(shape, {"kind", "a", "b"}, f"{path}.shape")
            params["shape_kind"] = "ellipse"
            params["a"] = _get(shape, "a", float, f"{path}.shape", positive=True)
            params["b"] = _get(shape, "b", float, f"{path}.shape", positive=True)
            default_inertia = params["mass"] * (params["a"] ** 2 + params["b"] ** 2) / 4.0
            params["inertia"] = _get(d, "inertia", float, path, default=default_inertia, positive=True)
        elif kind == "star":
            _reject_unknown(shape, {"kind", "l"}, f"{path}.shape")
            params["shape_kind"] = "star"
            params["l"] = _get(shape, "l", float, f"{path}.shape", positive=True)
            params["inertia"] = _get(d, "inertia", float, path, positive=True)
        else:
            raise SchemaError(
                f"unknown shape kind {kind!r}; expected 'ellipse' or 'star'",
                key_path=f"{path}.shape.kind",
            )
    else:  # pendulum
        _reject_unknown(d, {"type", "mass", "gravity", "length", "radius", "f"}, path)
        params["length"] = _get(d, "length", float, path, positive=True)
        params["radius"] = _get(d, "radius", float, path, positive=True)
        if params["radius"] >= params["length"]:
            raise SchemaError("cylinder radius must be smaller than the pendulum length", key_path=f"{path}.radius")
        gain = d.get("f", "default")
        if isinstance(gain, bool) or not isinstance(gain, (int, float, str)):
            raise SchemaError(f"expected 'default' or a number, got {gain!r}", key_path=f"{path}.f")
        if isinstance(gain, str) and gain != "default":
            raise SchemaError(f"expected 'default' or a number, got {gain!r}", key_path=f"{path}.f")
        params["f"] = gain if isinstance(gain, str) else float(gain)
    return mtype, params


def config_from_dict(d: dict) -> SimConfig:
    if not isinstance(d, dict):
        raise SchemaError("top-level configuration must be an object")
    _reject_unknown(
        d, {"model", "rule", "q0", "v0", "t0", "t_final", "h", "solver", "outputs"}, ""
    )
    if "model" not in d:
        raise SchemaError("missing required key", key_path="model")
    mtype, mparams = _parse_model(d["model"])

    rule = _get(d, "rule", str, "")
    if rule not in RULES:
        raise SchemaError(f"unknown rule {rule!r}; expected one of {RULES}", key_path="rule")

    q0 = _parse_vector(d, "q0", "")
    v0 = _parse_vector(d, "v0", "")
    n = MODEL_DIMS[mtype]
    if len(q0) != n or len(v0) != n:
        raise DimensionMismatch(
            f"model {mtype!r} has dimension {n}, got q0 of length {len(q0)} "
            f"and v0 of length {len(v0)}"
        )

    t0 = _get(d, "t0", float, "", default=0.0)
    t_final = _get(d, "t_final", float, "")
    h = _get(d, "h", float, "", positive=True)
    if t_final <= t0:
        raise SchemaError(f"t_final={t_final} must exceed t0={t0}", key_path="t_final")

    solver_raw = d.get("solver", {})
    if not isinstance(solver_raw, dict):
        raise SchemaError("expected an object", key_path="solver")
    _reject_unknown(solver_raw, {"tol", "max_iter", "max_backtracks", "fd_eps"}, "solver")
    try:
        solver = NewtonOptions(
            tol=_get(solver_raw, "tol", float, "solver", default=1e-10, positive=True),
            max_iter=_get(solver_raw, "max_iter", int, "solver", default=50, positive=True),
            max_backtracks=_get(solver_raw, "max_backtracks", int, "solver", default=30),
            fd_eps=_get(solver_raw, "fd_eps", float, "solver", default=1e-7, positive=True),
        )
    except ValueError as exc:
        raise SchemaError(str(exc), key_path="solver") from exc

    outputs_raw = d.get("outputs", {})
    if not isinstance(outputs_raw, dict):
        raise SchemaError("expected an object", key_path="outputs")
    _reject_unknown(outputs_raw, {"csv", "summary", "plots"}, "outputs")
    plots_raw = outputs_raw.get("plots", [])
    if not isinstance(plots_raw, list):
        raise SchemaError("expected an array", key_path="outputs.plots")
    for i, kind in enumerate(plots_raw):
        if kind not in PLOT_KINDS:
            raise SchemaError(
                f"unknown plot kind {kind!r}; expected one of {PLOT_KINDS}",
                key_path=f"outputs.plots[{i}]",
            )
    outputs = OutputOptions(
        csv=_get(outputs_raw, "csv", bool, "outputs", default=True),
        summary=_get(outputs_raw, "summary", bool, "outputs", default=True),
        plots=tuple(plots_raw),
    )

    return SimConfig(
        model_type=mtype,
        model_params=mparams,
        rule=rule,
        q0=q0,
        v0=v0,
        t0=t0,
        t_final=t_final,
        h=h,
        solver=solver,
        outputs=outputs,
    )


def parse_config(path) -> SimConfig:
    """Load and validate a configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SchemaError(f"cannot read configuration file {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON in {path}: {exc}") from exc
    return config_from_dict(raw)


def config_to_dict(cfg: SimConfig) -> dict:
    model: dict = {"type": cfg.model_type}
    p = cfg.model_params
    model["mass"] = p["mass"]
    model["gravity"] = p["gravity"]
    if cfg.model_type == "se2_body":
        if p["shape_kind"] == "ellipse":
            model["shape"] = {"kind": "ellipse", "a": p["a"], "b": p["b"]}
        else:
            model["shape"] = {"kind": "star", "l": p["l"]}
        model["inertia"] = p["inertia"]
        model["contact_frame"] = p["contact_frame"]
    elif cfg.model_type == "pendulum":
        model["length"] = p["length"]
        model["radius"] = p["radius"]
        model["f"] = p["f"]
    return {
        "model": model,
        "rule": cfg.rule,
        "q0": list(cfg.q0),
        "v0": list(cfg.v0),
        "t0": cfg.t0,
        "t_final": cfg.t_final,
        "h": cfg.h,
        "solver": {
            "tol": cfg.solver.tol,
            "max_iter": cfg.solver.max_iter,
            "max_backtracks": cfg.solver.max_backtracks,
            "fd_eps": cfg.solver.fd_eps,
        },
        "outputs": {
            "csv": cfg.outputs.csv,
            "summary": cfg.outputs.summary,
            "plots": list(cfg.outputs.plots),
        },
    }


def serialize_config(cfg: SimConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2)


def build_model(cfg: SimConfig) -> MechanicalModel:
    """Instantiate the mechanical model described by a configuration."""
    p = cfg.model_params
    if cfg.model_type == "particle":
        return make_particle(ParticleParams(mass=p["mass"], gravity=p["gravity"]))
    if cfg.model_type == "se2_body":
        if p["shape_kind"] == "ellipse":
            shape = EllipseShape(a=p["a"], b=p["b"])
        else:
            shape = StarShape(l=p["l"])
        return make_se2_body(
            Se2BodyParams(
                mass=p["mass"],
                gravity=p["gravity"],
                shape=shape,
                inertia=p["inertia"],
                contact_frame=p["contact_frame"],
            )
        )
    gain = p["f"]
    if gain == "default":
        params = PendulumParams(
            mass=p["mass"], gravity=p["gravity"], length=p["length"], radius=p["radius"]
        )
    else:
        const = float(gain)
        params = PendulumParams(
            mass=p["mass"],
            gravity=p["gravity"],
            length=p["length"],
            radius=p["radius"],
            f=lambda theta, _c=const: _c,
        )
    return make_pendulum(params)
