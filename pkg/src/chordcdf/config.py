"""Experiment configuration: JSON schema, validation and typed accessors.

Complex numbers are ``[re, im]`` pairs and polynomial coefficients are listed
in ascending powers of ``s``. Unknown keys are rejected at every level.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import densities, lti
from .cdf import QuadratureSpec
from .exceptions import DomainError

__all__ = ["SCHEMA", "ConfigError", "ExperimentConfig", "load", "bundled_config_path"]


class ConfigError(ValueError):
    """The configuration document is malformed."""


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_COMPLEX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_MATRIX = {"type": "array", "items": _COMPLEX, "minItems": 2, "maxItems": 2}
_COEFFS = {"type": "array", "items": _NUM, "minItems": 1}
_TF = {
    "type": "object",
    "properties": {"num": _COEFFS, "den": _COEFFS},
    "required": ["num", "den"],
    "additionalProperties": False,
}
_GRID = {
    "type": "object",
    "properties": {
        "min": {"type": "number", "minimum": 0},
        "max": {"type": "number", "minimum": 0},
        "spacing": _POS,
        "count": {"type": "integer", "minimum": 1},
        "scale": {"enum": ["linear", "log"]},
    },
    "required": ["min", "max"],
    "additionalProperties": False,
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "density": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"type": {"const": "gaussian"}, "mean": _COMPLEX, "cov": _MATRIX},
                    "required": ["type", "mean", "cov"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "uniform-disc"},
                        "center": _COMPLEX,
                        "radius": _POS,
                    },
                    "required": ["type", "center", "radius"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "truncated-gaussian"},
                        "mean": _COMPLEX,
                        "cov": _MATRIX,
                        "trunc_sigma": _POS,
                    },
                    "required": ["type", "mean", "cov"],
                    "additionalProperties": False,
                },
            ]
        },
        "nominal": _COMPLEX,
        "thresholds": {
            "type": "object",
            "properties": {
                "min": {"type": "number", "minimum": 0, "maximum": 1},
                "max": {"type": "number", "minimum": 0, "maximum": 1},
                "count": {"type": "integer", "minimum": 1},
            },
            "required": ["count"],
            "additionalProperties": False,
        },
        "quadrature": {
            "type": "object",
            "properties": {
                "abs_tol": _POS,
                "rel_tol": _POS,
                "max_subdivisions": {"type": "integer", "minimum": 0},
                "inner_rule": {"enum": ["double-exponential", "endpoint-substitution"]},
                "mass_tolerance": _POS,
                "max_level": {"type": "integer", "minimum": 2, "maximum": 12},
            },
            "additionalProperties": False,
        },
        "monte_carlo": {
            "type": "object",
            "properties": {
                "n_samples": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "slack": {"type": "number", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "plant": _TF,
        "controller": _TF,
        "frequency_grid": _GRID,
        "sysid": {
            "type": "object",
            "properties": {
                "n_trials": {"type": "integer", "minimum": 1},
                "b": _NUM,
                "tau": _POS,
                "Ts": _POS,
                "length": {"type": "integer", "minimum": 100},
                "amplitude": _POS,
                "noise_std": {"type": "number", "minimum": 0},
                "init": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "grid": _GRID,
                "dense_grid": _GRID,
                "histogram_bins": {"type": "integer", "minimum": 1},
            },
            "additionalProperties": False,
        },
        "margin": {
            "type": "object",
            "properties": {
                "n_perturbations": {"type": "integer", "minimum": 1},
                "relative_std": _POS,
            },
            "additionalProperties": False,
        },
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "n_jobs": {"type": "integer", "minimum": 1},
    },
}


def _path(error):
    parts = [str(p) for p in error.absolute_path]
    return ".".join(parts) if parts else "<root>"


def _describe(err):
    """``(path, message)``; a failed ``oneOf`` keyed by ``type`` reports the selected branch."""
    if err.validator != "oneOf" or not isinstance(err.instance, dict):
        return _path(err), err.message
    kind = err.instance.get("type")
    kinds = [branch["properties"]["type"]["const"] for branch in err.validator_value]
    if kind not in kinds:
        return _path(err) + ".type", f"{kind!r} is not one of {kinds}"
    i = kinds.index(kind)
    sub = [e for e in err.context if e.schema_path and e.schema_path[0] == i]
    return _describe(jsonschema.exceptions.best_match(sub)) if sub else (_path(err), err.message)


def validate(doc):
    """Raise :class:`ConfigError` naming the offending key if ``doc`` is invalid."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: (list(e.absolute_path), e.message))
    if errors:
        path, message = _describe(jsonschema.exceptions.best_match(errors))
        raise ConfigError(f"config error at '{path}': {message}")


def make_grid(spec, *, default_count=21):
    """Frequency or threshold grid from ``{"min", "max", "spacing" | "count", "scale"}``."""
    lo, hi = float(spec["min"]), float(spec["max"])
    if hi < lo:
        raise ConfigError(f"grid max {hi} is below min {lo}")
    scale = spec.get("scale", "linear")
    if "spacing" in spec and "count" in spec:
        raise ConfigError("grid takes either 'spacing' or 'count', not both")
    if scale == "log":
        if lo <= 0.0:
            raise ConfigError("log grid needs min > 0")
        if "spacing" in spec:
            raise ConfigError("log grid takes 'count', not 'spacing'")
        return np.logspace(np.log10(lo), np.log10(hi), int(spec.get("count", default_count)))
    if "spacing" in spec:
        step = float(spec["spacing"])
        n = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(n)
    return np.linspace(lo, hi, int(spec.get("count", default_count)))


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated configuration document with typed accessors."""

    doc: dict

    def require(self, key):
        if key not in self.doc:
            raise ConfigError(f"config error at '{key}': required for this command")
        return self.doc[key]

    @property
    def seed(self):
        return int(self.doc.get("seed", 0))

    @property
    def n_jobs(self):
        return int(self.doc.get("n_jobs", 1))

    @property
    def output_dir(self):
        return self.doc.get("output_dir", ".")

    def model(self):
        try:
            return densities.from_config(self.require("density"))
        except DomainError as exc:
            raise ConfigError(f"config error at 'density': {exc}") from exc

    def nominal(self):
        re, im = self.require("nominal")
        return complex(re, im)

    def thresholds(self):
        spec = {"min": 0.0, "max": 1.0, "count": 21}
        spec.update(self.doc.get("thresholds", {}))
        if spec["max"] < spec["min"]:
            raise ConfigError("config error at 'thresholds': max is below min")
        return np.linspace(spec["min"], spec["max"], spec["count"])

    def quadrature(self, abs_tol=None):
        kw = dict(self.doc.get("quadrature", {}))
        if abs_tol is not None:
            kw["abs_tol"] = abs_tol
        return QuadratureSpec(**kw)

    def monte_carlo(self):
        out = {"n_samples": 10 ** 6, "alpha": 0.01, "slack": 2e-3}
        out.update(self.doc.get("monte_carlo", {}))
        return out

    def _tf(self, key):
        spec = self.require(key)
        try:
            return lti.RationalTF(spec["num"], spec["den"])
        except DomainError as exc:
            raise ConfigError(f"config error at '{key}': {exc}") from exc

    def plant(self):
        return self._tf("plant")

    def controller(self):
        return self._tf("controller")

    def frequency_grid(self):
        grid = make_grid(self.require("frequency_grid"))
        if grid.size == 0:
            raise ConfigError("config error at 'frequency_grid': grid is empty")
        return grid

    def sysid(self):
        return dict(self.doc.get("sysid", {}))

    def margin(self):
        out = {"n_perturbations": 1000, "relative_std": 0.2}
        out.update(self.doc.get("margin", {}))
        return out


def load(path):
    """Read and validate a JSON config file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    validate(doc)
    return ExperimentConfig(doc)


def bundled_config_path(name="section4_gaussian.json"):
    """Path of a config shipped with the package."""
    return resources.files("chordcdf") / "data" / name
