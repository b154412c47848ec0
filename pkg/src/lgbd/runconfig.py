"""Flat key=value run configuration: parsing, validation, canonical dump.

The format is one ``section.key = value`` assignment per line, ``#``
comments, and nothing else — no nesting, no locale-dependent number
forms (decimal point only).  Unknown keys are rejected so that typos
fail loudly instead of silently running defaults.
"""

from __future__ import annotations

import dataclasses
import math
import re
from typing import Optional

import numpy as np

from .integrate import StepControl
from .linear_analysis import Diffusivities
from .model import ModelParameters
from .spatial import Grid


class ConfigError(ValueError):
    """Malformed, unknown, or missing configuration."""


_FLOAT_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INT_RE = re.compile(r"^[+-]?\d+$")


def _parse_float(text: str) -> float:
    if not _FLOAT_RE.match(text):
        raise ConfigError(f"not a plain decimal number: {text!r}")
    return float(text)


def _parse_int(text: str) -> int:
    if not _INT_RE.match(text):
        raise ConfigError(f"not an integer: {text!r}")
    return int(text)


def _parse_bool(text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise ConfigError(f"expected true or false, got {text!r}")


def _parse_str(text: str) -> str:
    return text


def _parse_float_list(text: str) -> tuple[float, ...]:
    parts = [s.strip() for s in text.split(",")]
    if not parts or any(not s for s in parts):
        raise ConfigError(f"malformed list value: {text!r}")
    return tuple(_parse_float(s) for s in parts)


# key -> parser.  Everything the CLI can consume; commands check for the
# presence of what they need and ignore the rest.
SCHEMA = {
    "model.r": _parse_float,
    "model.K": _parse_float,
    "model.omega": _parse_float,
    "model.D": _parse_float,
    "model.d": _parse_float,
    "model.c": _parse_float,
    "model.omega1": _parse_float,
    "model.D1": _parse_float,
    "model.m": _parse_float,
    "model.tau": _parse_float,
    "diffusion.d1": _parse_float,
    "diffusion.d2": _parse_float,
    "grid.nx": _parse_int,
    "grid.lx": _parse_float,
    "grid.ny": _parse_int,
    "grid.ly": _parse_float,
    "step.t_end": _parse_float,
    "step.rel_tol": _parse_float,
    "step.abs_tol": _parse_float,
    "step.h_init": _parse_float,
    "step.h_min": _parse_float,
    "step.h_max": _parse_float,
    "step.blowup_threshold": _parse_float,
    "pde.scheme": _parse_str,
    "pde.snapshot_stride": _parse_int,
    "ic.kind": _parse_str,
    "ic.x0": _parse_float,
    "ic.y0": _parse_float,
    "ic.amplitude": _parse_float,
    "ic.mode": _parse_int,
    "ic.profile": _parse_str,
    "jacobian.j11": _parse_float,
    "jacobian.j12": _parse_float,
    "jacobian.j21": _parse_float,
    "jacobian.j22": _parse_float,
    "dispersion.k_max": _parse_float,
    "dispersion.n_points": _parse_int,
    "hopf.k_values": _parse_float_list,
    "hopf.branch": _parse_int,
    "hopf.report_k": _parse_float,
    "hopf.strict_cubic": _parse_bool,
    "blowup.delta1": _parse_float,
    "threshold.scale_low": _parse_float,
    "threshold.scale_high": _parse_float,
    "threshold.width": _parse_float,
    "sweep.key": _parse_str,
    "sweep.start": _parse_float,
    "sweep.stop": _parse_float,
    "sweep.count": _parse_int,
    "sweep.scale": _parse_str,
    "sweep.run": _parse_str,
    "sweep2.key": _parse_str,
    "sweep2.start": _parse_float,
    "sweep2.stop": _parse_float,
    "sweep2.count": _parse_int,
    "sweep2.scale": _parse_str,
    "ksearch.start": _parse_float,
    "ksearch.stop": _parse_float,
    "ksearch.count": _parse_int,
    "ksearch.scale": _parse_str,
}

_DEFAULTS = {
    "model.m": 2.0,
    "model.tau": 0.0,
    "diffusion.d1": 0.0,
    "diffusion.d2": 0.0,
    "grid.lx": math.pi,
    "step.rel_tol": 1e-8,
    "step.abs_tol": 1e-10,
    "step.h_init": 1e-2,
    "step.h_min": 1e-13,
    "step.h_max": 10.0,
    "step.blowup_threshold": 1e8,
    "pde.scheme": "imex",
    "pde.snapshot_stride": 0,
    "ic.kind": "equilibrium",
    "ic.amplitude": 0.005,
    "ic.mode": 10,
    "ic.profile": "cos2",
    "dispersion.n_points": 200,
    "hopf.k_values": (0.0,),
    "hopf.branch": 0,
    "hopf.report_k": 0.0,
    "hopf.strict_cubic": False,
    "sweep.scale": "linear",
    "sweep.run": "simulate",
    "sweep2.scale": "linear",
    "ksearch.scale": "linear",
}

_MODEL_REQUIRED = (
    "model.r",
    "model.K",
    "model.omega",
    "model.D",
    "model.d",
    "model.c",
    "model.omega1",
    "model.D1",
)


@dataclasses.dataclass
class RunConfig:
    """Typed view over a validated flat configuration."""

    values: dict

    def get(self, key: str, default=None):
        if key in self.values:
            return self.values[key]
        if key in _DEFAULTS:
            return _DEFAULTS[key]
        return default

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            raise ConfigError(f"missing required key {key}")
        return value

    def has(self, key: str) -> bool:
        return key in self.values

    # -- assembled objects ---------------------------------------------

    def model_parameters(self) -> ModelParameters:
        missing = [k for k in _MODEL_REQUIRED if k not in self.values]
        if missing:
            raise ConfigError("missing model keys: " + ", ".join(missing))
        return ModelParameters(
            r=self.values["model.r"],
            K=self.values["model.K"],
            omega=self.values["model.omega"],
            D=self.values["model.D"],
            d=self.values["model.d"],
            c=self.values["model.c"],
            omega1=self.values["model.omega1"],
            D1=self.values["model.D1"],
            m=self.get("model.m"),
            tau=self.get("model.tau"),
        )

    def diffusivities(self) -> Diffusivities:
        return Diffusivities(
            d1=self.get("diffusion.d1"), d2=self.get("diffusion.d2")
        )

    def grid(self) -> Grid:
        nx = self.require("grid.nx")
        if "grid.ny" in self.values:
            return Grid(
                nx=nx,
                lx=self.get("grid.lx"),
                ny=self.values["grid.ny"],
                ly=self.get("grid.ly", self.get("grid.lx")),
            )
        return Grid(nx=nx, lx=self.get("grid.lx"))

    def step_control(self) -> StepControl:
        return StepControl(
            t_end=self.require("step.t_end"),
            rel_tol=self.get("step.rel_tol"),
            abs_tol=self.get("step.abs_tol"),
            h_init=self.get("step.h_init"),
            h_min=self.get("step.h_min"),
            h_max=self.get("step.h_max"),
            blowup_threshold=self.get("step.blowup_threshold"),
        )

    def jacobian(self) -> Optional[np.ndarray]:
        keys = ("jacobian.j11", "jacobian.j12", "jacobian.j21", "jacobian.j22")
        present = [k for k in keys if k in self.values]
        if not present:
            return None
        if len(present) != 4:
            raise ConfigError("jacobian requires all four entries j11,j12,j21,j22")
        return np.array(
            [
                [self.values["jacobian.j11"], self.values["jacobian.j12"]],
                [self.values["jacobian.j21"], self.values["jacobian.j22"]],
            ]
        )

    # -- canonical echo -------------------------------------------------

    def dump(self) -> str:
        """Canonical text form; parsing it reproduces this config."""
        lines = []
        for key in sorted(self.values):
            value = self.values[key]
            if isinstance(value, bool):
                text = "true" if value else "false"
            elif isinstance(value, tuple):
                text = ",".join(repr(v) for v in value)
            elif isinstance(value, float):
                text = repr(value)
            else:
                text = str(value)
            lines.append(f"{key} = {text}")
        return "\n".join(lines) + "\n"

    def replace(self, key: str, value) -> "RunConfig":
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key}")
        values = dict(self.values)
        values[key] = value
        return RunConfig(values)


def parse_config(text: str) -> RunConfig:
    """Parse flat ``key = value`` text into a validated RunConfig."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value_text = line.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if key not in SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value_text:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        try:
            values[key] = SCHEMA[key](value_text)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {key}: {exc}") from None
    return RunConfig(values)


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
