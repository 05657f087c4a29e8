"""Run configuration: TOML file, environment overrides, validation.

The configuration is a single TOML document (nested key/value with comments)
whose sections mirror the library objects.  Unknown sections or keys are
rejected outright so a typo never silently falls back to a default.  Every
key can also be overridden through the environment with the prefix
``THERMAL_MODES_``, e.g. ``THERMAL_MODES_ENSEMBLE__SEED=7``.
"""

from __future__ import annotations

import ast
import dataclasses
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib
from dataclasses import dataclass
from pathlib import Path

from .gsm import ModeIndex, SchellModel, derive_kernel_params
from .hbt import (
    DetectionOptics,
    GaussianBucket,
    IdealProjector,
    ModeFilter,
    StepPhaseMask,
    calibrate_mask,
    matched_focal_length,
)
from .nystrom import GridSpec
from .speckle import EnsembleConfig, recommended_cutoff

__all__ = ["ConfigError", "RunConfig", "load_config", "ENV_PREFIX"]

ENV_PREFIX = "THERMAL_MODES_"


class ConfigError(Exception):
    """Invalid, missing or unknown configuration content."""


_SCHEMA: dict[str, dict[str, type | tuple]] = {
    "model": {
        "sigma_I": float,
        "sigma_mu": float,
        "wavelength": float,
        "amplitude": float,
    },
    "grid": {
        "half_width": float,
        "half_width_sigmas": float,
        "points": int,
    },
    "ensemble": {
        "realizations": int,
        "mode_cutoff": int,
        "seed": int,
        "dimensions": int,
    },
    "optics": {
        "fiber_waist": float,
        "focal_length": (float, str),
    },
    "spectrum": {
        "max_order": int,
        "numerical": bool,
        "numerical_modes": int,
    },
    "hbt": {
        "max_order": int,
    },
    "scan": {
        "mask_order": int,
        "max_displacement_scaled": float,
        "samples": int,
        "monte_carlo": bool,
        "c_det_factor": float,
    },
    "output": {
        "directory": str,
        "formats": list,
    },
}

_FILTER_KEYS = {"kind", "m", "n", "displacement", "calibrated", "c_det_factor"}


@dataclass(frozen=True)
class SpectrumOptions:
    max_order: int = 8
    numerical: bool = False
    numerical_modes: int = 10


@dataclass(frozen=True)
class ScanOptions:
    mask_order: int = 1
    max_displacement_scaled: float = 4.0
    samples: int = 11
    monte_carlo: bool = False
    c_det_factor: float = 1.0


@dataclass(frozen=True)
class OutputOptions:
    directory: Path = Path("out")
    formats: tuple[str, ...] = ("csv",)


@dataclass(frozen=True)
class RunConfig:
    model: SchellModel
    grid: GridSpec
    ensemble: EnsembleConfig
    optics: DetectionOptics | None
    filters: tuple[ModeFilter, ...]
    spectrum: SpectrumOptions
    scan: ScanOptions
    hbt_max_order: int
    output: OutputOptions
    snapshot: dict  # validated raw data, reproduced verbatim in the manifest


def _coerce(section: str, key: str, value, expected):
    kinds = expected if isinstance(expected, tuple) else (expected,)
    for kind in kinds:
        if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        if kind is int and isinstance(value, int) and not isinstance(value, bool):
            return value
        if kind in (bool, str, list) and isinstance(value, kind):
            return value
    names = "/".join(k.__name__ for k in kinds)
    raise ConfigError(f"[{section}] {key}: expected {names}, got {value!r}")


def _validate(data: dict) -> dict:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a table")
    out: dict = {}
    for section, content in data.items():
        if section == "filters":
            out["filters"] = _validate_filters(content)
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(content, dict):
            raise ConfigError(f"[{section}] must be a table")
        out[section] = {}
        for key, value in content.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            out[section][key] = _coerce(section, key, value, _SCHEMA[section][key])
    return out


def _validate_filters(content) -> list[dict]:
    if not isinstance(content, list):
        raise ConfigError("[[filters]] must be an array of tables")
    validated = []
    for i, entry in enumerate(content):
        if not isinstance(entry, dict):
            raise ConfigError(f"filters[{i}] must be a table")
        unknown = set(entry) - _FILTER_KEYS
        if unknown:
            raise ConfigError(f"filters[{i}]: unknown keys {sorted(unknown)}")
        if entry.get("kind") not in ("ideal", "mask", "bucket"):
            raise ConfigError(f"filters[{i}]: kind must be ideal, mask or bucket")
        validated.append(dict(entry))
    return validated


def _apply_env(data: dict, env) -> None:
    for name, raw in sorted(env.items()):
        if not name.startswith(ENV_PREFIX):
            continue
        path = name[len(ENV_PREFIX):].lower().split("__")
        if len(path) != 2:
            raise ConfigError(f"environment override {name} must be SECTION__KEY")
        section, key = path
        try:
            value = ast.literal_eval(raw)
        except (ValueError, SyntaxError):
            value = raw
        data.setdefault(section, {})[key] = value


def _require(data: dict, section: str, key: str):
    try:
        return data[section][key]
    except KeyError:
        raise ConfigError(f"missing required key {key!r} in section [{section}]") from None


def load_config(
    path: str | Path,
    seed: int | None = None,
    out_dir: str | Path | None = None,
    env=None,
) -> RunConfig:
    """Parse, override and validate a run configuration."""
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config {path} is not valid TOML: {exc}") from exc
    _apply_env(data, os.environ if env is None else env)
    data = _validate(data)
    if seed is not None:
        data.setdefault("ensemble", {})["seed"] = seed
    if out_dir is not None:
        data.setdefault("output", {})["directory"] = str(out_dir)
    return _build(data)


def _build(data: dict) -> RunConfig:
    model = SchellModel(
        sigma_I=_require(data, "model", "sigma_I"),
        sigma_mu=_require(data, "model", "sigma_mu"),
        wavelength=_require(data, "model", "wavelength"),
        amplitude=data.get("model", {}).get("amplitude", 1.0),
    )

    grid_cfg = data.get("grid", {})
    if "half_width" in grid_cfg and "half_width_sigmas" in grid_cfg:
        raise ConfigError("[grid] specify half_width or half_width_sigmas, not both")
    half_width = grid_cfg.get(
        "half_width", grid_cfg.get("half_width_sigmas", 5.0) * model.sigma_I
    )
    grid = GridSpec(half_width=half_width, points=grid_cfg.get("points", 512))

    ens_cfg = data.get("ensemble", {})
    cutoff = ens_cfg.get("mode_cutoff", 0)
    if cutoff <= 0:
        cutoff = recommended_cutoff(model)
    try:
        ensemble = EnsembleConfig(
            realizations=ens_cfg.get("realizations", 10000),
            mode_cutoff=cutoff,
            seed=ens_cfg.get("seed", 0),
            grid=grid,
            dimensions=ens_cfg.get("dimensions", 2),
        )
    except ValueError as exc:
        raise ConfigError(f"[ensemble] {exc}") from exc

    optics = None
    if "optics" in data:
        fiber_waist = _require(data, "optics", "fiber_waist")
        focal = data["optics"].get("focal_length", "matched")
        if focal == "matched":
            focal = matched_focal_length(model, fiber_waist)
        elif isinstance(focal, str):
            raise ConfigError(f"[optics] focal_length: expected number or 'matched', got {focal!r}")
        optics = DetectionOptics(
            fiber_waist=fiber_waist, focal_length=focal, wavenumber=model.wavenumber
        )

    c = derive_kernel_params(model).c
    filters = tuple(_build_filter(entry, c, i) for i, entry in enumerate(data.get("filters", [])))

    spectrum = SpectrumOptions(**data.get("spectrum", {}))
    scan = ScanOptions(**data.get("scan", {}))
    out_cfg = data.get("output", {})
    formats = tuple(out_cfg.get("formats", ["csv"]))
    if any(f not in ("csv", "json") for f in formats):
        raise ConfigError("[output] formats entries must be 'csv' or 'json'")
    output = OutputOptions(directory=Path(out_cfg.get("directory", "out")), formats=formats)

    snapshot = _snapshot(data, model, grid, ensemble)
    return RunConfig(
        model=model,
        grid=grid,
        ensemble=ensemble,
        optics=optics,
        filters=filters,
        spectrum=spectrum,
        scan=scan,
        hbt_max_order=data.get("hbt", {}).get("max_order", 4),
        output=output,
        snapshot=snapshot,
    )


def _build_filter(entry: dict, c: float, position: int) -> ModeFilter:
    kind = entry["kind"]
    if kind == "bucket":
        disp = entry.get("displacement", [0.0, 0.0])
        if not (isinstance(disp, list) and len(disp) == 2):
            raise ConfigError(f"filters[{position}]: displacement must be [dx, dy]")
        factor = entry.get("c_det_factor")
        return GaussianBucket(
            displacement=(float(disp[0]), float(disp[1])),
            c_det=None if factor is None else factor * c,
        )
    index = ModeIndex(int(entry.get("m", 0)), int(entry.get("n", 0)))
    if kind == "ideal":
        return IdealProjector(index)
    mask = StepPhaseMask.for_mode(index, c)
    if entry.get("calibrated", False):
        mask = calibrate_mask(index, c, initial=mask)
    return mask


def _snapshot(data: dict, model: SchellModel, grid: GridSpec, ensemble: EnsembleConfig) -> dict:
    """Fully resolved configuration, including defaults, for the run manifest."""
    snap = {k: (v if not isinstance(v, dict) else dict(v)) for k, v in data.items()}
    snap["model"] = dataclasses.asdict(model)
    snap["grid"] = {"half_width": grid.half_width, "points": grid.points}
    snap["ensemble"] = {
        "realizations": ensemble.realizations,
        "mode_cutoff": ensemble.mode_cutoff,
        "seed": ensemble.seed,
        "dimensions": ensemble.dimensions,
    }
    return snap
