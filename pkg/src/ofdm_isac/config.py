"""JSON scenario configuration: strict parsing, serialization, and profiles."""

from __future__ import annotations

import json
from pathlib import Path

from .channel import ScatteringParams, TargetTruth
from .errors import ConfigError
from .estimate import CfarParams
from .frame import ALPHABET_KINDS, FrameConfig
from .harness import (
    DETECTION_MODES,
    MITIGATION_MODES,
    ScenarioConfig,
    SceneSpec,
)
from .mitigate import ORDERING_POLICIES

_FRAME_KEYS = {
    "n_subcarriers",
    "n_symbols",
    "subcarrier_spacing_hz",
    "cp_samples",
    "carrier_frequency_hz",
}
_TARGET_KEYS = {"distance_m", "velocity_mps", "rcs_weight"}
_SCENE_KEYS = {"count", "distance_range_m", "velocity_range_mps"}
_SCATTERING_KEYS = {"enabled", "rho", "k_s", "extent_m", "doppler_jitter_hz"}
_CFAR_KEYS = {"guard_cells", "training_cells", "false_alarm_rate"}
_TOP_KEYS = {
    "frame",
    "alphabet",
    "custom_points",
    "targets",
    "scene",
    "snr_y_db",
    "scattering",
    "mitigation",
    "ordering",
    "detection",
    "cfar",
    "trials",
    "master_seed",
}


def _require_keys(obj: dict, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"missing keys in {where}: {sorted(missing)}")


def _number(obj: dict, key: str, where: str, integer: bool = False):
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{where}.{key} must be an integer")
        return int(value)
    return float(value)


def _pair(obj: dict, key: str, where: str) -> tuple[float, float]:
    value = obj[key]
    if not (isinstance(value, list) and len(value) == 2):
        raise ConfigError(f"{where}.{key} must be a [low, high] pair")
    return float(value[0]), float(value[1])


def scenario_from_dict(data: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON document (strict)."""
    _require_keys(
        data, _TOP_KEYS, {"frame", "alphabet", "snr_y_db", "trials", "master_seed"}, "config"
    )
    frame_obj = data["frame"]
    _require_keys(frame_obj, _FRAME_KEYS, _FRAME_KEYS, "frame")
    try:
        frame = FrameConfig(
            n_subcarriers=_number(frame_obj, "n_subcarriers", "frame", integer=True),
            n_symbols=_number(frame_obj, "n_symbols", "frame", integer=True),
            subcarrier_spacing=_number(frame_obj, "subcarrier_spacing_hz", "frame"),
            cp_samples=_number(frame_obj, "cp_samples", "frame", integer=True),
            carrier_frequency=_number(frame_obj, "carrier_frequency_hz", "frame"),
        )
    except ValueError as exc:
        raise ConfigError(f"frame: {exc}") from exc

    alphabet = data["alphabet"]
    if alphabet not in ALPHABET_KINDS:
        raise ConfigError(f"alphabet must be one of {ALPHABET_KINDS}, got {alphabet!r}")
    custom_points = None
    if alphabet == "custom":
        if "custom_points" not in data:
            raise ConfigError("custom alphabet requires custom_points")
        raw_points = data["custom_points"]
        if not isinstance(raw_points, list) or not raw_points:
            raise ConfigError("custom_points must be a non-empty list of [re, im] pairs")
        try:
            custom_points = tuple(
                complex(float(p[0]), float(p[1])) for p in raw_points
            )
        except (TypeError, IndexError, ValueError) as exc:
            raise ConfigError("custom_points entries must be [re, im] pairs") from exc
    elif "custom_points" in data:
        raise ConfigError("custom_points is only valid with the custom alphabet")

    if ("targets" in data) == ("scene" in data):
        raise ConfigError("exactly one of targets or scene must be given")
    targets = None
    scene = None
    if "targets" in data:
        if not isinstance(data["targets"], list) or not data["targets"]:
            raise ConfigError("targets must be a non-empty list")
        built = []
        for k, entry in enumerate(data["targets"]):
            where = f"targets[{k}]"
            _require_keys(entry, _TARGET_KEYS, {"distance_m", "velocity_mps"}, where)
            try:
                built.append(
                    TargetTruth(
                        distance=_number(entry, "distance_m", where),
                        velocity=_number(entry, "velocity_mps", where),
                        rcs_weight=(
                            _number(entry, "rcs_weight", where)
                            if "rcs_weight" in entry
                            else 1.0
                        ),
                    )
                )
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from exc
        targets = tuple(built)
    else:
        scene_obj = data["scene"]
        _require_keys(scene_obj, _SCENE_KEYS, _SCENE_KEYS, "scene")
        try:
            scene = SceneSpec(
                count=_number(scene_obj, "count", "scene", integer=True),
                distance_range=_pair(scene_obj, "distance_range_m", "scene"),
                velocity_range=_pair(scene_obj, "velocity_range_mps", "scene"),
            )
        except ValueError as exc:
            raise ConfigError(f"scene: {exc}") from exc

    scattering = ScatteringParams(enabled=False)
    if "scattering" in data:
        sc = data["scattering"]
        _require_keys(sc, _SCATTERING_KEYS, {"enabled"}, "scattering")
        if not isinstance(sc["enabled"], bool):
            raise ConfigError("scattering.enabled must be a boolean")
        default_jitter = 0.02 / (frame.symbol_duration * frame.n_symbols)
        try:
            scattering = ScatteringParams(
                enabled=sc["enabled"],
                diffuse_fraction=(
                    _number(sc, "rho", "scattering") if "rho" in sc else 0.9
                ),
                n_rays=(_number(sc, "k_s", "scattering", integer=True) if "k_s" in sc else 8),
                extent=(_number(sc, "extent_m", "scattering") if "extent_m" in sc else 8.0),
                doppler_jitter=(
                    _number(sc, "doppler_jitter_hz", "scattering")
                    if "doppler_jitter_hz" in sc
                    else default_jitter
                ),
            )
        except ValueError as exc:
            raise ConfigError(f"scattering: {exc}") from exc

    mitigation = data.get("mitigation", "mf")
    if mitigation not in MITIGATION_MODES:
        raise ConfigError(f"mitigation must be one of {MITIGATION_MODES}")
    ordering = data.get("ordering", "strongest")
    if ordering not in ORDERING_POLICIES:
        raise ConfigError(f"ordering must be one of {ORDERING_POLICIES}")
    detection = data.get("detection", "known-l")
    if detection not in DETECTION_MODES:
        raise ConfigError(f"detection must be one of {DETECTION_MODES}")

    cfar = CfarParams()
    if "cfar" in data:
        cf = data["cfar"]
        _require_keys(cf, _CFAR_KEYS, set(), "cfar")
        try:
            cfar = CfarParams(
                guard_cells=tuple(cf.get("guard_cells", (2, 2))),
                training_cells=tuple(cf.get("training_cells", (8, 8))),
                false_alarm_rate=float(cf.get("false_alarm_rate", 1e-4)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"cfar: {exc}") from exc

    try:
        return ScenarioConfig(
            frame=frame,
            alphabet=alphabet,
            snr_y_db=_number(data, "snr_y_db", "config"),
            scene=scene,
            targets=targets,
            custom_points=custom_points,
            scattering=scattering,
            mitigation=mitigation,
            ordering=ordering,
            detection=detection,
            cfar=cfar,
            n_trials=_number(data, "trials", "config", integer=True),
            master_seed=_number(data, "master_seed", "config", integer=True),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def scenario_to_dict(cfg: ScenarioConfig) -> dict:
    """Serialize a scenario back to its JSON document form."""
    doc: dict = {
        "frame": {
            "n_subcarriers": cfg.frame.n_subcarriers,
            "n_symbols": cfg.frame.n_symbols,
            "subcarrier_spacing_hz": cfg.frame.subcarrier_spacing,
            "cp_samples": cfg.frame.cp_samples,
            "carrier_frequency_hz": cfg.frame.carrier_frequency,
        },
        "alphabet": cfg.alphabet,
    }
    if cfg.custom_points is not None:
        doc["custom_points"] = [[p.real, p.imag] for p in cfg.custom_points]
    if cfg.targets is not None:
        doc["targets"] = [
            {
                "distance_m": t.distance,
                "velocity_mps": t.velocity,
                "rcs_weight": t.rcs_weight,
            }
            for t in cfg.targets
        ]
    else:
        doc["scene"] = {
            "count": cfg.scene.count,
            "distance_range_m": list(cfg.scene.distance_range),
            "velocity_range_mps": list(cfg.scene.velocity_range),
        }
    doc["snr_y_db"] = cfg.snr_y_db
    doc["scattering"] = {
        "enabled": cfg.scattering.enabled,
        "rho": cfg.scattering.diffuse_fraction,
        "k_s": cfg.scattering.n_rays,
        "extent_m": cfg.scattering.extent,
        "doppler_jitter_hz": cfg.scattering.doppler_jitter,
    }
    doc["mitigation"] = cfg.mitigation
    doc["ordering"] = cfg.ordering
    doc["detection"] = cfg.detection
    doc["cfar"] = {
        "guard_cells": list(cfg.cfar.guard_cells),
        "training_cells": list(cfg.cfar.training_cells),
        "false_alarm_rate": cfg.cfar.false_alarm_rate,
    }
    doc["trials"] = cfg.n_trials
    doc["master_seed"] = cfg.master_seed
    return doc


def load_config(path) -> ScenarioConfig:
    """Load and validate a scenario configuration file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(data)


def desk_profile(**overrides) -> dict:
    """Small grid that exercises the full pipeline in seconds.

    N=256 subcarriers keep the per-trial cost low while leaving enough
    delay-Doppler resolution for an 8-target scene at one-cell separation.
    """
    doc = {
        "frame": {
            "n_subcarriers": 256,
            "n_symbols": 64,
            "subcarrier_spacing_hz": 30e3,
            "cp_samples": 18,
            "carrier_frequency_hz": 3.5e9,
        },
        "alphabet": "qam64",
        "scene": {
            "count": 8,
            "distance_range_m": [90.0, 330.0],
            "velocity_range_mps": [-50.0, 50.0],
        },
        "snr_y_db": 0.0,
        "mitigation": "ecstc",
        "ordering": "strongest",
        "detection": "known-l",
        "trials": 300,
        "master_seed": 3402,
    }
    doc.update(overrides)
    return doc


def paper_profile(**overrides) -> dict:
    """Full-scale 6G-band parameter set (slow; not needed for the test suite)."""
    doc = {
        "frame": {
            "n_subcarriers": 6552,
            "n_symbols": 96,
            "subcarrier_spacing_hz": 30e3,
            "cp_samples": 468,
            "carrier_frequency_hz": 3.5e9,
        },
        "alphabet": "qam64",
        "scene": {
            "count": 16,
            "distance_range_m": [45.0, 145.0],
            "velocity_range_mps": [-50.0, 50.0],
        },
        "snr_y_db": 0.0,
        "mitigation": "ecstc",
        "ordering": "nearest",
        "detection": "known-l",
        "trials": 300,
        "master_seed": 3402,
    }
    doc.update(overrides)
    return doc
