"""Randomized-error simulation: noisy synthetic observations and RMS position
error as a function of camera altitude above co-altitude landmarks."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .classify import multiplicity_from_ground_truth
from .errors import CameraAtLandmark, ConfigInvalid
from .geom import (
    Z_UP,
    CameraPose,
    ImageObservation,
    LandmarkPair,
    Vec3,
    cross,
    facing_rotation,
    norm,
    unit,
)
from .solver import solve_labeled

PAPER_CONE_RADIUS = math.radians(0.36)
PAPER_ACCEL_HALF_WIDTH = 0.001
CSV_HEADER = ("altitude_mm", "rms_total_mm", "rms_x_mm", "rms_y_mm", "rms_z_mm", "failures")


@dataclass(frozen=True)
class NoiseModel:
    """Each landmark direction gets its own cap-uniform error; the accelerometer
    reading gets independent uniform error per axis."""

    cone_radius: float = 0.0        # rad, half-angle of the direction-error cap
    accel_half_width: float = 0.0   # fraction of g, per accelerometer axis
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.cone_radius < math.pi / 2):
            raise ConfigInvalid(f"cone radius must be in [0, pi/2), got {self.cone_radius!r}")
        if not (0.0 <= self.accel_half_width <= 0.1):
            raise ConfigInvalid(f"accelerometer half width must be in [0, 0.1], got {self.accel_half_width!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigInvalid(f"seed must be a non-negative integer, got {self.seed!r}")

    @classmethod
    def paper(cls, seed: int = 0) -> NoiseModel:
        return cls(PAPER_CONE_RADIUS, PAPER_ACCEL_HALF_WIDTH, seed)

    @property
    def is_zero(self) -> bool:
        return self.cone_radius == 0.0 and self.accel_half_width == 0.0


@dataclass(frozen=True)
class SweepConfig:
    landmarks: LandmarkPair
    camera_horizontal: tuple[float, float]
    altitude_range: tuple[float, float]
    num_positions: int
    samples_per_position: int
    noise: NoiseModel = field(default_factory=NoiseModel)
    spacing: str = "log"

    def __post_init__(self):
        lo, hi = self.altitude_range
        if not lo < hi:
            raise ConfigInvalid(f"altitude range must satisfy min < max, got {self.altitude_range!r}")
        if self.num_positions < 1 or self.samples_per_position < 1:
            raise ConfigInvalid("position and sample counts must be >= 1")
        if self.spacing not in ("log", "linear"):
            raise ConfigInvalid(f"spacing must be 'log' or 'linear', got {self.spacing!r}")
        if self.spacing == "log" and lo <= 0:
            raise ConfigInvalid("log spacing needs a positive minimum altitude")

    def altitudes(self) -> np.ndarray:
        lo, hi = self.altitude_range
        if self.spacing == "log":
            return np.geomspace(lo, hi, self.num_positions)
        return np.linspace(lo, hi, self.num_positions)


@dataclass(frozen=True)
class SweepRow:
    altitude: float
    rms_total: float
    rms_x: float
    rms_y: float
    rms_z: float
    failures: int


def _perpendicular_basis(v: Vec3) -> tuple[Vec3, Vec3]:
    # seed with the axis least aligned with v
    k = int(np.argmin(np.abs(v)))
    seed = np.zeros(3)
    seed[k] = 1.0
    e1 = unit(cross(v, seed))
    return e1, cross(v, e1)


def perturb_direction(v: Vec3, cone_radius: float, rng: np.random.Generator) -> Vec3:
    """Random unit vector uniform over the spherical cap of half-angle ``cone_radius`` around v."""
    if cone_radius == 0.0:
        return np.array(v, dtype=float)
    # sample 1 - cos(theta) uniformly: equal-area on the cap
    w = rng.uniform(0.0, 2.0 * math.sin(0.5 * cone_radius) ** 2)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    sin_t = math.sqrt(w * (2.0 - w))
    e1, e2 = _perpendicular_basis(v)
    out = (1.0 - w) * v + sin_t * (math.cos(phi) * e1 + math.sin(phi) * e2)
    return out / norm(out)


def perturb_gravity(u: Vec3, half_width: float, rng: np.random.Generator) -> Vec3:
    """Add independent uniform error in [-half_width, half_width] (units of g) per axis."""
    if half_width == 0.0:
        return np.array(u, dtype=float)
    return unit(u + rng.uniform(-half_width, half_width, 3))


def synthesize_observation(camera: CameraPose, landmarks: LandmarkPair,
                           noise: NoiseModel | None = None,
                           rng: np.random.Generator | None = None) -> ImageObservation:
    c, R = camera.position, camera.rotation
    rays = []
    for m in (landmarks.m1, landmarks.m2):
        delta = m - c
        if norm(delta) <= 1e-12 * landmarks.scale:
            raise CameraAtLandmark("camera coincides with a landmark")
        rays.append(R @ (delta / norm(delta)))
    u = R @ Z_UP
    v1, v2 = rays
    if noise is not None and not noise.is_zero:
        if rng is None:
            rng = np.random.default_rng(noise.seed)
        v1 = perturb_direction(v1, noise.cone_radius, rng)
        v2 = perturb_direction(v2, noise.cone_radius, rng)
        u = perturb_gravity(u, noise.accel_half_width, rng)
    return ImageObservation(v1, v2, u)


def ground_truth_pose(config: SweepConfig, altitude: float) -> CameraPose:
    """Camera at the configured horizontal spot, ``altitude`` above landmark 1,
    level and facing the landmark midpoint."""
    lm = config.landmarks
    hx, hy = config.camera_horizontal
    c = np.array([hx, hy, lm.m1[2] + altitude], dtype=float)
    return CameraPose(c, facing_rotation(c, 0.5 * (lm.m1 + lm.m2)))


def run_position(config: SweepConfig, index: int, altitude: float) -> SweepRow:
    lm = config.landmarks
    truth = ground_truth_pose(config, altitude)
    if multiplicity_from_ground_truth(lm, truth.position).is_infinite:
        raise ConfigInvalid(f"camera altitude {altitude!r} mm is a singular configuration")
    rng = np.random.default_rng((config.noise.seed ^ index) & 0xFFFFFFFFFFFFFFFF)
    sq = np.zeros(3)
    ok = 0
    failures = 0
    for _ in range(config.samples_per_position):
        obs = synthesize_observation(truth, lm, config.noise, rng)
        result = solve_labeled(obs, lm)
        if not result.poses:
            failures += 1
            continue
        errs = [p.position - truth.position for p in result.poses]
        err = min(errs, key=lambda e: float(e @ e))
        sq += err * err
        ok += 1
    if ok == 0:
        nan = math.nan
        return SweepRow(float(altitude), nan, nan, nan, nan, failures)
    mx, my, mz = sq / ok
    return SweepRow(float(altitude), math.sqrt(mx + my + mz), math.sqrt(mx), math.sqrt(my),
                    math.sqrt(mz), failures)


def _run_indexed(args):
    return run_position(*args)


def run_sweep(config: SweepConfig, workers: int = 1) -> list[SweepRow]:
    """RMS error per altitude. Position ``k`` draws from its own stream seeded
    with ``seed ^ k``, so results do not depend on ``workers``."""
    jobs = [(config, k, float(a)) for k, a in enumerate(config.altitudes())]
    if workers <= 1:
        return [run_position(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_indexed, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def paper_config(placement: str = "left", num_positions: int = 1000,
                 samples_per_position: int = 1000, seed: int = 0) -> SweepConfig:
    """Landmarks 150 mm apart on the x axis, camera 500 mm in front of the left
    landmark or the midpoint, altitude 0.001 to 500 mm."""
    x = {"left": 0.0, "center": 75.0}[placement]
    return SweepConfig(
        landmarks=LandmarkPair([0.0, 0.0, 0.0], [150.0, 0.0, 0.0]),
        camera_horizontal=(x, -500.0),
        altitude_range=(0.001, 500.0),
        num_positions=num_positions,
        samples_per_position=samples_per_position,
        noise=NoiseModel.paper(seed),
        spacing="log",
    )


def write_csv(rows: Iterable[SweepRow], out) -> None:
    """Write rows to a path or text stream; floats keep full precision."""
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        with open(out, "w", newline="") as fh:
            write_csv(rows, fh)
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([repr(r.altitude), repr(r.rms_total), repr(r.rms_x), repr(r.rms_y),
                    repr(r.rms_z), r.failures])


def read_csv(src) -> list[SweepRow]:
    if isinstance(src, str) and "\n" in src:
        src = io.StringIO(src)
    if not hasattr(src, "read"):
        with open(src, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(src)
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    return [SweepRow(*(float(x) for x in row[:5]), int(row[5])) for row in reader]


def summarize(rows: Sequence[SweepRow], threshold: float = 20.0) -> dict:
    """Altitude of the smallest RMS error and the first altitude below ``threshold`` mm."""
    finite = [r for r in rows if math.isfinite(r.rms_total)]
    best = min(finite, key=lambda r: r.rms_total) if finite else None
    below = next((r for r in sorted(finite, key=lambda r: r.altitude) if r.rms_total < threshold), None)
    return {
        "min_rms_altitude_mm": best.altitude if best else None,
        "min_rms_mm": best.rms_total if best else None,
        "threshold_mm": threshold,
        "first_altitude_below_threshold_mm": below.altitude if below else None,
        "total_failures": sum(r.failures for r in rows),
    }
