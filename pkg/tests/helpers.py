"""Shared samplers for the test suite."""
from __future__ import annotations

import math

import numpy as np

from p2pa.geom import CameraPose, LandmarkPair, ObservationAngles

# rejection distance from every singular set, mm
MARGIN = 1.0


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Haar-uniform rotation from a normalized Gaussian quaternion."""
    w, x, y, z = rng.normal(size=4)
    n = math.sqrt(w * w + x * x + y * y + z * z)
    w, x, y, z = w / n, x / n, y / n, z / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def sample_configuration(rng: np.random.Generator, box: float = 1000.0,
                         margin: float = MARGIN) -> tuple[LandmarkPair, CameraPose]:
    """Landmarks in a ``box`` cube, camera in a cube twice that size around it,
    rejected if within ``margin`` of a singular set or a landmark."""
    while True:
        m1 = rng.uniform(0.0, box, 3)
        m2 = rng.uniform(0.0, box, 3)
        c = rng.uniform(-0.5 * box, 1.5 * box, 3)
        lm = LandmarkPair(m1, m2)
        e = m2 - m1
        if lm.d < margin:
            continue
        if np.linalg.norm(np.cross(e, c - m1)) / np.linalg.norm(e) < margin:
            continue
        if abs(lm.H) < margin and abs(c[2] - m1[2]) < margin:
            continue
        if min(np.linalg.norm(c - m1), np.linalg.norm(c - m2)) < margin:
            continue
        return lm, CameraPose(c, random_rotation(rng))


def sample_coaltitude(rng: np.random.Generator) -> tuple[LandmarkPair, np.ndarray]:
    """Co-altitude landmarks and a camera off their horizontal plane and line."""
    while True:
        z = rng.uniform(-500.0, 500.0)
        m1 = np.array([*rng.uniform(-500.0, 500.0, 2), z])
        m2 = np.array([*rng.uniform(-500.0, 500.0, 2), z])
        c = rng.uniform(-1000.0, 1000.0, 3)
        lm = LandmarkPair(m1, m2)
        if lm.d < MARGIN or abs(c[2] - z) < MARGIN:
            continue
        return lm, c


def random_colinear_angles(rng: np.random.Generator) -> ObservationAngles:
    """Angles a camera on the landmark line sees: either both landmarks on one
    ray, or on opposite rays."""
    kind = rng.integers(3)
    if kind == 0:
        r = rng.uniform(0.01, math.pi - 0.01)
        return ObservationAngles(r, r, 0.0)
    if kind == 1:
        r = rng.uniform(0.01, math.pi - 0.01)
        return ObservationAngles(r, math.pi - r, math.pi)
    poles = (0.0, math.pi)
    return ObservationAngles(poles[rng.integers(2)], poles[rng.integers(2)], 0.0)
