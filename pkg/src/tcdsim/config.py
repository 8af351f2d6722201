"""
Scenario and sweep configuration, parsed from a single JSON document.

Schema (every block optional; defaults shown)::

    {
      "geometry": {"screen_distance": 1.0, "slit_separation": 1e-05, "wavelength": 6.5e-07},
      "grid": {"y_min": -0.1, "y_max": 0.1, "points": 201},
      "mode": "fraunhofer_flat",
      "visibility_method": "fourier",
      "environment": {"model": "isolated"},
      "montecarlo": null,
      "output": {"path": "tcd-out", "format": "csv"}
    }

``environment.model`` is one of ``isolated``, ``full``, ``partial`` (needs
``n`` and ``m``), ``mixed`` (needs ``w1``, optional ``inner``) or
``two_sided`` (needs ``p_a``, ``p_b``, optional ``inner``).  ``inner`` is
``{"model": "full"}`` (default) or ``{"model": "partial", "n": .., "m": ..}``.
Complex amplitudes are written as a number or ``{"re": .., "im": ..}``.
``montecarlo`` takes ``samples``, ``seed``, ``bins``, ``delta_y_range`` and
``grid_points``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

from .channels import (
    PRESETS,
    FullDecoherence,
    IntensityMixture,
    Isolated,
    Mixed,
    Partial,
    PartialWhichPath,
    TwoSided,
    EnvironmentModel,
)
from .errors import TCDError, ValidationError
from .geometry import AmplitudeMode, Geometry, ScreenGrid
from .montecarlo import SampleConfig
from .observables import VisibilityMethod


class ConfigError(TCDError):
    """Malformed configuration; the message names the offending field."""


GEOMETRY_DEFAULTS = {"screen_distance": 1.0, "slit_separation": 10e-6, "wavelength": 650e-9}
GRID_DEFAULTS = {"y_min": -0.1, "y_max": 0.1, "points": 201}
MC_DEFAULTS = {"samples": 1_000_000, "seed": 0, "bins": 64, "delta_y_range": None,
               "grid_points": 512}


@dataclass(frozen=True)
class ScenarioConfig:
    screen_distance: float = GEOMETRY_DEFAULTS["screen_distance"]
    slit_separation: float = GEOMETRY_DEFAULTS["slit_separation"]
    wavelength: float = GEOMETRY_DEFAULTS["wavelength"]
    grid: ScreenGrid = ScreenGrid(**GRID_DEFAULTS)
    mode: AmplitudeMode = AmplitudeMode.FRAUNHOFER_FLAT
    visibility_method: VisibilityMethod = VisibilityMethod.FOURIER
    environment: EnvironmentModel = field(default_factory=Isolated)
    montecarlo: Optional[SampleConfig] = None
    output_path: str = "tcd-out"
    output_format: str = "csv"

    @property
    def geometry(self) -> Geometry:
        return Geometry.from_wavelength(self.slit_separation, self.screen_distance, self.wavelength)

    def to_dict(self) -> dict:
        mc = None
        if self.montecarlo is not None:
            c = self.montecarlo
            mc = {"samples": c.samples, "seed": c.seed, "bins": c.bins,
                  "delta_y_range": list(c.delta_y_range) if c.delta_y_range else None,
                  "grid_points": c.grid_points}
        return {
            "geometry": {"screen_distance": self.screen_distance,
                         "slit_separation": self.slit_separation,
                         "wavelength": self.wavelength},
            "grid": {"y_min": self.grid.y_min, "y_max": self.grid.y_max, "points": self.grid.points},
            "mode": self.mode.value,
            "visibility_method": self.visibility_method.value,
            "environment": environment_to_dict(self.environment),
            "montecarlo": mc,
            "output": {"path": self.output_path, "format": self.output_format},
        }

    @classmethod
    def from_dict(cls, data: Any) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
        _reject_unknown(data, {"geometry", "grid", "mode", "visibility_method", "environment",
                               "montecarlo", "output"}, "config")
        geo = {**GEOMETRY_DEFAULTS, **_section(data, "geometry")}
        _reject_unknown(geo, set(GEOMETRY_DEFAULTS), "geometry")
        grid = {**GRID_DEFAULTS, **_section(data, "grid")}
        _reject_unknown(grid, set(GRID_DEFAULTS), "grid")
        out = {"path": "tcd-out", "format": "csv", **_section(data, "output")}
        _reject_unknown(out, {"path", "format"}, "output")
        if out["format"] not in ("csv", "json"):
            raise ConfigError(f"output.format: expected 'csv' or 'json', got {out['format']!r}")

        kw = {}
        for key in GEOMETRY_DEFAULTS:
            kw[key] = _number(geo[key], f"geometry.{key}")
        try:
            grid_obj = ScreenGrid(_number(grid["y_min"], "grid.y_min"),
                                  _number(grid["y_max"], "grid.y_max"),
                                  _integer(grid["points"], "grid.points"))
        except ValidationError as exc:
            raise ConfigError(f"grid: {exc}") from None
        mode = _enum(AmplitudeMode, data.get("mode", "fraunhofer_flat"), "mode")
        method = _enum(VisibilityMethod, data.get("visibility_method", "fourier"),
                       "visibility_method")
        env = environment_from_dict(data.get("environment", {"model": "isolated"}))
        mc = data.get("montecarlo")
        mc_obj = None
        if mc is not None:
            if not isinstance(mc, dict):
                raise ConfigError("montecarlo: expected an object or null")
            _reject_unknown(mc, set(MC_DEFAULTS), "montecarlo")
            mc = {**MC_DEFAULTS, **mc}
            try:
                rng = mc["delta_y_range"]
                mc_obj = SampleConfig(
                    samples=_integer(mc["samples"], "montecarlo.samples"),
                    seed=_integer(mc["seed"], "montecarlo.seed"),
                    bins=_integer(mc["bins"], "montecarlo.bins"),
                    delta_y_range=None if rng is None else tuple(
                        _number(v, "montecarlo.delta_y_range") for v in rng),
                    grid_points=_integer(mc["grid_points"], "montecarlo.grid_points"),
                )
            except ValidationError as exc:
                raise ConfigError(f"montecarlo: {exc}") from None
        cfg = cls(grid=grid_obj, mode=mode, visibility_method=method, environment=env,
                  montecarlo=mc_obj, output_path=str(out["path"]), output_format=out["format"],
                  **kw)
        try:
            cfg.geometry
        except ValidationError as exc:
            raise ConfigError(f"geometry: {exc}") from None
        return cfg


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return ScenarioConfig.from_dict(data)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _section(data: dict, key: str) -> dict:
    val = data.get(key) or {}
    if not isinstance(val, dict):
        raise ConfigError(f"{key}: expected an object")
    return val


def _reject_unknown(d: dict, allowed: set, where: str):
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(extra)}")


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}: expected a finite number, got {v!r}")
    return float(v)


def _integer(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return v


def _enum(cls, v, where: str):
    try:
        return cls(v)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ConfigError(f"{where}: expected one of {choices}, got {v!r}") from None


def _complex(v, where: str) -> complex:
    if isinstance(v, dict):
        _reject_unknown(v, {"re", "im"}, where)
        return complex(_number(v.get("re", 0.0), f"{where}.re"), _number(v.get("im", 0.0), f"{where}.im"))
    return complex(_number(v, where))


def _complex_to_json(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _amplitudes(d: dict, where: str) -> PartialWhichPath:
    for key in ("n", "m"):
        if key not in d:
            raise ConfigError(f"{where}.{key}: required for a partial model")
    try:
        return PartialWhichPath(_complex(d["n"], f"{where}.n"), _complex(d["m"], f"{where}.m"))
    except ValidationError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _inner_from_dict(d, where: str):
    if d is None:
        return FullDecoherence()
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = d.get("model", "full")
    if kind == "full":
        _reject_unknown(d, {"model"}, where)
        return FullDecoherence()
    if kind == "partial":
        _reject_unknown(d, {"model", "n", "m"}, where)
        return _amplitudes(d, where)
    raise ConfigError(f"{where}.model: expected 'full' or 'partial', got {kind!r}")


def environment_from_dict(d) -> EnvironmentModel:
    where = "environment"
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    kind = d.get("model")
    try:
        if kind == "isolated":
            _reject_unknown(d, {"model"}, where)
            return Isolated()
        if kind == "full":
            _reject_unknown(d, {"model"}, where)
            return FullDecoherence()
        if kind == "partial":
            _reject_unknown(d, {"model", "n", "m"}, where)
            return Partial(_amplitudes(d, where))
        if kind == "mixed":
            _reject_unknown(d, {"model", "w1", "inner"}, where)
            if "w1" not in d:
                raise ConfigError(f"{where}.w1: required for a mixed model")
            return Mixed(IntensityMixture(_number(d["w1"], f"{where}.w1"),
                                          _inner_from_dict(d.get("inner"), f"{where}.inner")))
        if kind == "two_sided":
            _reject_unknown(d, {"model", "p_a", "p_b", "inner"}, where)
            for key in ("p_a", "p_b"):
                if key not in d:
                    raise ConfigError(f"{where}.{key}: required for a two_sided model")
            return TwoSided(_number(d["p_a"], f"{where}.p_a"), _number(d["p_b"], f"{where}.p_b"),
                            _inner_from_dict(d.get("inner"), f"{where}.inner"))
    except ValidationError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}.model: expected isolated, full, partial, mixed or two_sided, "
                      f"got {kind!r}")


def _inner_to_dict(inner) -> dict:
    if isinstance(inner, FullDecoherence):
        return {"model": "full"}
    return {"model": "partial", "n": _complex_to_json(inner.n), "m": _complex_to_json(inner.m)}


def environment_to_dict(model: EnvironmentModel) -> dict:
    if isinstance(model, Isolated):
        return {"model": "isolated"}
    if isinstance(model, FullDecoherence):
        return {"model": "full"}
    if isinstance(model, Partial):
        a = model.amplitudes
        return {"model": "partial", "n": _complex_to_json(a.n), "m": _complex_to_json(a.m)}
    if isinstance(model, Mixed):
        return {"model": "mixed", "w1": model.mixture.w1, "inner": _inner_to_dict(model.mixture.inner)}
    if isinstance(model, TwoSided):
        return {"model": "two_sided", "p_a": model.p_a, "p_b": model.p_b,
                "inner": _inner_to_dict(model.inner)}
    raise ValidationError(f"unknown environment model {model!r}")


def preset(name: str) -> EnvironmentModel:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"--preset: expected one of {', '.join(PRESETS)}, got {name!r}") from None


SWEEP_PARAMS = ("n", "w1", "p2")


@dataclass(frozen=True)
class SweepSpec:
    """``n`` sweeps real ``n`` with ``m = sqrt(1/2 - n^2)``; ``w1`` the scattering
    probability; ``p2`` the per-side probability of a two-sided source."""

    parameter: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.parameter not in SWEEP_PARAMS:
            raise ConfigError(f"--param: expected one of {', '.join(SWEEP_PARAMS)}, got {self.parameter!r}")
        if not self.start <= self.stop:
            raise ConfigError("--start must not exceed --stop")
        if self.steps < 1:
            raise ConfigError("--steps must be positive")

    def values(self) -> list[float]:
        if self.steps == 1:
            return [float(self.start)]
        vals = [self.start + (self.stop - self.start) * i / (self.steps - 1) for i in range(self.steps)]
        vals[-1] = float(self.stop)
        return vals
