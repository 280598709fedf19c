"""Versioned scenario configuration for experiments and sessions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .experiments import SweepConfig
from .noise import DEFAULT_NOISE, ZERO_NOISE, NoiseModel
from .world import CameraPose

CONFIG_VERSION = 1


class ConfigError(ValueError):
    """Scenario file is malformed or carries an unsupported version."""


@dataclass(frozen=True)
class Scenario:
    seed: int = 0
    fps: float = 30.0
    reasoner: str = "geometric"  # "geometric" | "remote"
    noise: NoiseModel = DEFAULT_NOISE
    sweep: SweepConfig = field(default_factory=SweepConfig)
    camera: CameraPose = field(default_factory=lambda: CameraPose(1.0, 0.0))

    def with_seed(self, seed: int) -> "Scenario":
        noise = NoiseModel(**{**_asdict(self.noise), "seed": seed})
        return Scenario(
            seed=seed,
            fps=self.fps,
            reasoner=self.reasoner,
            noise=noise,
            sweep=self.sweep,
            camera=self.camera,
        )

    def zero_noise(self) -> "Scenario":
        return Scenario(
            seed=self.seed,
            fps=self.fps,
            reasoner=self.reasoner,
            noise=ZERO_NOISE,
            sweep=self.sweep,
            camera=self.camera,
        )


def _asdict(obj) -> dict:
    return {f.name: getattr(obj, f.name) for f in fields(obj)}


def load_scenario(path: str | Path | None) -> Scenario:
    """Load a scenario file, or the defaults when no path is given."""
    if path is None:
        return Scenario()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ConfigError(f"scenario file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return parse_scenario(raw, source=str(path))


def parse_scenario(raw: dict, source: str = "<config>") -> Scenario:
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: scenario must be a JSON object")
    version = raw.get("config_version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError(f"{source}: unsupported config_version {version}")

    known = {"config_version", "seed", "fps", "reasoner", "noise", "sweep", "camera"}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")

    reasoner = raw.get("reasoner", "geometric")
    if reasoner not in ("geometric", "remote"):
        raise ConfigError(f"{source}: reasoner must be 'geometric' or 'remote'")

    seed = raw.get("seed", 0)
    try:
        noise = _parse_noise(raw.get("noise"), seed)
        sweep = _parse_sweep(raw.get("sweep"))
        camera = _parse_camera(raw.get("camera"))
        return Scenario(
            seed=int(seed),
            fps=float(raw.get("fps", 30.0)),
            reasoner=reasoner,
            noise=noise,
            sweep=sweep,
            camera=camera,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _parse_noise(raw: dict | None, seed) -> NoiseModel:
    if raw is None:
        return NoiseModel(**{**_asdict(DEFAULT_NOISE), "seed": int(seed)})
    allowed = {f.name for f in fields(NoiseModel)}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown noise keys {sorted(unknown)}")
    merged = {**_asdict(DEFAULT_NOISE), **raw, "seed": int(raw.get("seed", seed))}
    return NoiseModel(**merged)


def _parse_sweep(raw: dict | None) -> SweepConfig:
    if raw is None:
        return SweepConfig()
    return SweepConfig(
        pan_step_deg=float(raw.get("pan_step_deg", 10.0)),
        pan_range_deg=float(raw.get("pan_range_deg", 60.0)),
        tilt_angles_deg=tuple(raw.get("tilt_angles_deg", (-24.0, 0.0, 24.0))),
    )


def _parse_camera(raw: dict | None) -> CameraPose:
    if raw is None:
        return CameraPose(1.0, 0.0)
    return CameraPose(
        radius_m=float(raw.get("radius_m", 1.0)),
        azimuth_deg=float(raw.get("azimuth_deg", 0.0)),
        pan_deg=float(raw.get("pan_deg", 0.0)),
        tilt_deg=float(raw.get("tilt_deg", 0.0)),
    )
