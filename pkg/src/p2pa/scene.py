"""Scene and sweep-config documents (JSON, validated against the bundled schemas)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .errors import ConfigInvalid, SceneError
from .geom import (
    CameraPose,
    ImageObservation,
    LandmarkPair,
    ObservationAngles,
    facing_rotation,
    observation_from_angles,
    pinhole_ray,
    up_from_accelerometer,
)
from .sim import NoiseModel, SweepConfig

# tolerance on the norm of supplied unit vectors
UNIT_TOL = 1e-6


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("p2pa").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _field_path(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def parse_document(text: str, schema: str, source: str = "<input>") -> dict:
    """Parse JSON text and validate it; errors carry the line or field at fault."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(load_schema(schema))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise SceneError(f"{source}: field {_field_path(err.absolute_path)}: {err.message}")
    return doc


def _read(path) -> tuple[str, str]:
    try:
        return Path(path).read_text(), str(path)
    except OSError as exc:
        raise SceneError(f"{path}: {exc.strerror}") from None


@dataclass(frozen=True)
class Scene:
    landmarks: LandmarkPair
    ids: tuple
    camera: CameraPose | None = None
    observation: ImageObservation | None = None


def _unit(vec, field: str) -> np.ndarray:
    v = np.asarray(vec, dtype=float)
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > UNIT_TOL:
        raise SceneError(f"field {field}: expected a unit vector, norm is {n!r}")
    return v / n


def _observation(obs: dict) -> ImageObservation:
    if "v1" in obs:
        return ImageObservation(_unit(obs["v1"], "observation.v1"), _unit(obs["v2"], "observation.v2"),
                                _unit(obs["u"], "observation.u"))
    if "pixels" in obs:
        px, f = obs["pixels"], obs["focal_mm"]
        try:
            u = up_from_accelerometer(obs["accel"])
        except ValueError as exc:
            raise SceneError(f"field observation.accel: {exc}") from None
        return ImageObservation(pinhole_ray(px["x1"], px["y1"], f), pinhole_ray(px["x2"], px["y2"], f), u)
    a = obs["angles"]
    if a["beta"] == -math.pi:
        raise SceneError("field observation.angles.beta: must lie in (-pi, pi]")
    return observation_from_angles(ObservationAngles(a["rho1"], a["rho2"], a["beta"]))


def scene_from_dict(doc: dict) -> Scene:
    lms = doc["landmarks"]
    try:
        landmarks = LandmarkPair([lms[0][k] for k in "xyz"], [lms[1][k] for k in "xyz"])
    except ValueError as exc:
        raise SceneError(f"field landmarks: {exc}") from None
    camera = None
    if "camera" in doc:
        pos = np.asarray(doc["camera"]["position"], dtype=float)
        if "rotation" in doc["camera"]:
            R = np.asarray(doc["camera"]["rotation"], dtype=float)
            if (np.abs(R.T @ R - np.eye(3)).max() > UNIT_TOL
                    or abs(np.linalg.det(R) - 1.0) > UNIT_TOL):
                raise SceneError("field camera.rotation: not a proper rotation matrix")
        else:
            R = facing_rotation(pos, 0.5 * (landmarks.m1 + landmarks.m2))
        camera = CameraPose(pos, R)
    obs = _observation(doc["observation"]) if "observation" in doc else None
    return Scene(landmarks, (lms[0]["id"], lms[1]["id"]), camera, obs)


def load_scene(path) -> Scene:
    text, source = _read(path)
    return scene_from_dict(parse_document(text, "scene", source))


def scene_to_dict(scene: Scene) -> dict:
    lm = scene.landmarks
    doc = {
        "landmarks": [
            {"id": ident, "x": float(m[0]), "y": float(m[1]), "z": float(m[2])}
            for ident, m in zip(scene.ids, (lm.m1, lm.m2))
        ]
    }
    if scene.camera is not None:
        doc["camera"] = {
            "position": [float(x) for x in scene.camera.position],
            "rotation": [[float(x) for x in row] for row in scene.camera.rotation],
        }
    if scene.observation is not None:
        o = scene.observation
        doc["observation"] = {k: [float(x) for x in getattr(o, k)] for k in ("v1", "v2", "u")}
    return doc


def dump_json(doc) -> str:
    # json writes floats with repr, which round-trips exactly
    return json.dumps(doc, indent=2) + "\n"


def sweep_from_dict(doc: dict) -> tuple[SweepConfig, int]:
    """SweepConfig plus the requested worker count."""
    lms = doc["landmarks"]
    noise = doc.get("noise", {})
    try:
        config = SweepConfig(
            landmarks=LandmarkPair([lms[0][k] for k in "xyz"], [lms[1][k] for k in "xyz"]),
            camera_horizontal=tuple(doc["camera_horizontal"]),
            altitude_range=tuple(doc["altitude_range"]),
            num_positions=doc["num_positions"],
            samples_per_position=doc["samples_per_position"],
            noise=NoiseModel(math.radians(noise.get("cone_radius_deg", 0.0)),
                             noise.get("accel_half_width", 0.0), noise.get("seed", 0)),
            spacing=doc.get("spacing", "log"),
        )
    except (ConfigInvalid, ValueError) as exc:
        raise SceneError(str(exc)) from None
    return config, doc.get("workers", 1)


def load_sweep(path) -> tuple[SweepConfig, int]:
    text, source = _read(path)
    return sweep_from_dict(parse_document(text, "sweep", source))
