"""Singular-case detection and the ground-truth multiplicity characterization.

``detect_singular`` works from what a camera measures (angles plus the known
landmark positions) and is what the solver uses. ``multiplicity_from_ground_truth``
works from a known camera position and predicts how many poses the solver must
return; the test suite uses it as the oracle for solution counts.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CameraAtLandmark, DegenerateDenominator
from .geom import LandmarkPair, ObservationAngles, Vec3, cross, norm, vec3

EPS_ANGLE = 1e-9
EPS_PLANE = 1e-9
EPS_SLOPE = 1e-9

__all__ = [
    "LandmarkPair",
    "SingularCase",
    "SlopeData",
    "Multiplicity",
    "detect_singular",
    "slope",
    "slope_data",
    "plane_l_distance",
    "multiplicity_from_ground_truth",
    "discriminant_closed_form",
]


class SingularCase(enum.Enum):
    COLINEAR = "colinear"
    VERTICAL_LANDMARK_LINE = "vertical-landmark-line"
    HORIZONTAL_COPLANAR = "horizontal-coplanar"


@dataclass(frozen=True)
class SlopeData:
    s: float
    s1: float
    s2: float


@dataclass(frozen=True)
class Multiplicity:
    """Number of camera poses consistent with a configuration.

    ``count`` is None when there are infinitely many, in which case ``case``
    names the singular family.
    """

    count: int | None
    case: SingularCase | None = None
    reason: str = ""
    slopes: SlopeData | None = None
    on_plane_l: bool | None = None

    @property
    def is_infinite(self) -> bool:
        return self.count is None

    def __str__(self) -> str:
        if self.count is None:
            return f"Infinite({self.case.value})"
        return {1: "One", 2: "Two"}[self.count]


def _is_pole(rho: float, tol: float) -> bool:
    return rho <= tol or abs(rho - math.pi) <= tol


def detect_singular(landmarks: LandmarkPair, angles: ObservationAngles,
                    tol: float = EPS_ANGLE) -> SingularCase | None:
    """Return the singular family the measured angles belong to, if any.

    Checks run in a fixed order (colinear, vertical landmark line, horizontal
    coplanar) and the first match wins.
    """
    r1, r2, b = angles.rho1, angles.rho2, angles.beta
    if _is_pole(r1, tol) and _is_pole(r2, tol):
        return SingularCase.COLINEAR
    if abs(b) <= tol and abs(r1 - r2) <= tol:
        return SingularCase.COLINEAR
    if abs(abs(b) - math.pi) <= tol and abs(r1 - (math.pi - r2)) <= tol:
        return SingularCase.COLINEAR
    if (landmarks.d <= EPS_PLANE * landmarks.scale and abs(b) <= tol
            and not _is_pole(r1, tol) and not _is_pole(r2, tol)):
        return SingularCase.VERTICAL_LANDMARK_LINE
    if abs(r1 - math.pi / 2) <= tol and abs(r2 - math.pi / 2) <= tol:
        return SingularCase.HORIZONTAL_COPLANAR
    return None


def slope(p: Vec3, q: Vec3) -> float:
    """Altitude gain from p to q per unit of horizontal distance; +-inf when stacked."""
    rise = float(q[2] - p[2])
    run = math.hypot(q[0] - p[0], q[1] - p[1])
    if run == 0.0:
        if rise == 0.0:
            raise ValueError("slope between coincident points")
        return math.copysign(math.inf, rise)
    return rise / run


def slope_data(landmarks: LandmarkPair, camera: Vec3) -> SlopeData:
    return SlopeData(
        s=slope(landmarks.m1, landmarks.m2),
        s1=slope(camera, landmarks.m1),
        s2=slope(camera, landmarks.m2),
    )


def plane_l_distance(landmarks: LandmarkPair, camera: Vec3) -> float:
    """Distance from ``camera`` to the plane through both landmarks that contains
    the horizontal line through landmark 1 perpendicular to the landmark line.

    Undefined (NaN) for vertically stacked landmarks.
    """
    e = landmarks.m2 - landmarks.m1
    dh = landmarks.d
    if dh == 0.0:
        return math.nan
    n_line = np.array([-e[1] / dh, e[0] / dh, 0.0])
    normal = cross(e, n_line)
    normal /= norm(normal)
    return abs(float((vec3(camera) - landmarks.m1) @ normal))


def multiplicity_from_ground_truth(landmarks: LandmarkPair, camera: Vec3,
                                   eps: float = EPS_PLANE) -> Multiplicity:
    c = vec3(camera)
    m1, m2 = landmarks.m1, landmarks.m2
    r1, r2 = norm(c - m1), norm(c - m2)
    scale = max(landmarks.scale, r1, r2)
    if min(r1, r2) <= eps * scale:
        raise CameraAtLandmark("camera coincides with a landmark")

    e = m2 - m1
    if norm(cross(e, c - m1)) / landmarks.scale <= eps * scale:
        return Multiplicity(None, SingularCase.COLINEAR, "landmarks and camera colinear")
    if landmarks.d <= eps * scale:
        return Multiplicity(None, SingularCase.VERTICAL_LANDMARK_LINE,
                            "a vertical line passes through both landmarks")
    if abs(landmarks.H) <= eps * scale and abs(c[2] - m1[2]) <= eps * scale:
        return Multiplicity(None, SingularCase.HORIZONTAL_COPLANAR,
                            "a horizontal plane passes through both landmarks and the camera")

    sd = slope_data(landmarks, c)
    s_abs = abs(sd.s)
    s_max = max(abs(sd.s1), abs(sd.s2))
    dist_l = plane_l_distance(landmarks, c)
    on_l = dist_l <= eps * scale
    if s_abs <= eps:
        return Multiplicity(1, reason="condition (a): s=0", slopes=sd, on_plane_l=on_l)
    if s_max >= s_abs * (1.0 - EPS_SLOPE):
        return Multiplicity(1, reason="condition (a): max(|s1|,|s2|) >= |s|", slopes=sd, on_plane_l=on_l)
    if math.isfinite(s_max) and on_l:
        return Multiplicity(1, reason="condition (b): camera on plane L", slopes=sd, on_plane_l=on_l)
    return Multiplicity(2, reason="max(|s1|,|s2|) < |s| and camera off plane L",
                        slopes=sd, on_plane_l=on_l)


def discriminant_closed_form(A: float, B: float, c: Vec3) -> float:
    """b^2 - 4ac of the distance quadratic (landmark 1 as index i) for landmarks at
    (-A, 0, -B) and (A, 0, B) and a camera at ``c``, in closed form.
    """
    c1, c2, c3 = (float(x) for x in c)
    horiz = A * A - 2.0 * A * c1 + c1 * c1 + c2 * c2
    height = B + c3
    if abs(horiz) < 1e-12 or abs(height) < 1e-12:
        raise DegenerateDenominator("camera above landmark 2 or level with landmark 1")
    return 64.0 * A * A * (B * c1 - A * c3) ** 2 / (horiz * height * height)
