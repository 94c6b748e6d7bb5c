"""Vector geometry, camera ray models and the reduction of raw sensor data to
the three position-relevant angles (two tilt angles and the horizontal angle).

Conventions
-----------
* Object frame: z axis points up (antiparallel to gravity). Positions in mm.
* A rotation ``R`` maps object-frame directions to camera-frame directions,
  so an ideal camera at ``c`` sees landmark ``m`` along ``R @ (m - c) / |m - c|``
  and measures ``u = R @ (0, 0, 1)``.
* The horizontal angle ``beta`` is counterclockwise positive about ``u``
  (right-hand rule), in ``(-pi, pi]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateVertex, IncongruentPairs, NearZeroVector, ParallelInputs

Vec3 = np.ndarray

EPS_Q = 1e-9
TOL_CONGRUENCE = 1e-6
Z_UP = np.array([0.0, 0.0, 1.0])


def vec3(x) -> Vec3:
    v = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector component in {x!r}")
    return v


def cross(a: Vec3, b: Vec3) -> Vec3:
    # np.cross carries a lot of per-call overhead for 3-vectors
    a0, a1, a2 = a
    b0, b1, b2 = b
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def norm(v: Vec3) -> float:
    return math.sqrt(float(v @ v))


def unit(v: Vec3, eps: float = 0.0) -> Vec3:
    n = norm(v)
    if n <= eps or n == 0.0:
        raise NearZeroVector(f"cannot normalize vector of norm {n:g}")
    return v / n


def angle_between(a: Vec3, b: Vec3) -> float:
    """Unsigned angle between two vectors, accurate near 0 and pi."""
    return math.atan2(norm(cross(a, b)), float(a @ b))


def _wrap_beta(beta: float) -> float:
    return math.pi if beta == -math.pi else beta


@dataclass(frozen=True)
class ImageObservation:
    """Unit directions to the two landmarks and the up vector, camera frame."""

    v1: Vec3
    v2: Vec3
    u: Vec3

    def swapped(self) -> ImageObservation:
        return ImageObservation(self.v2, self.v1, self.u)


@dataclass(frozen=True)
class ObservationAngles:
    rho1: float
    rho2: float
    beta: float

    @property
    def rho(self) -> tuple[float, float]:
        return (self.rho1, self.rho2)

    def swapped(self) -> ObservationAngles:
        """Angles seen when the two image points are exchanged."""
        return ObservationAngles(self.rho2, self.rho1, _wrap_beta(-self.beta))

    def max_abs_diff(self, other: ObservationAngles) -> float:
        db = abs(self.beta - other.beta)
        db = min(db, 2.0 * math.pi - db)
        return max(abs(self.rho1 - other.rho1), abs(self.rho2 - other.rho2), db)


@dataclass(frozen=True)
class LandmarkPair:
    """Two labeled landmarks in object coordinates (mm).

    ``H`` is the altitude of landmark 2 above landmark 1, ``d`` the horizontal
    distance between them.
    """

    m1: Vec3
    m2: Vec3

    def __post_init__(self):
        object.__setattr__(self, "m1", vec3(self.m1))
        object.__setattr__(self, "m2", vec3(self.m2))
        if np.array_equal(self.m1, self.m2):
            raise ValueError("landmarks must be distinct")

    @property
    def H(self) -> float:
        return float(self.m2[2] - self.m1[2])

    @property
    def d(self) -> float:
        return math.hypot(self.m2[0] - self.m1[0], self.m2[1] - self.m1[1])

    @cached_property
    def scale(self) -> float:
        return norm(self.m2 - self.m1)

    def __getitem__(self, i: int) -> Vec3:
        # 1-based, matching the landmark numbering used throughout
        if i == 1:
            return self.m1
        if i == 2:
            return self.m2
        raise IndexError(i)

    def swapped(self) -> LandmarkPair:
        return LandmarkPair(self.m2, self.m1)


@dataclass(frozen=True)
class CameraPose:
    """Optical-center position (object frame, mm) and object-to-camera rotation."""

    position: Vec3
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(self.position))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float).reshape(3, 3))

    def distance(self, other: CameraPose) -> float:
        """max(position distance in mm, Frobenius distance of rotations)."""
        return max(norm(self.position - other.position),
                   float(np.linalg.norm(self.rotation - other.rotation)))


def pinhole_ray(x: float, y: float, f: float) -> Vec3:
    """Direction to a landmark imaged at sensor point (x, y) behind a pinhole of focal length f.

    The sensor point sits at ``w = (x, -f, y)``; the ray to the landmark is ``-w/|w|``,
    so the optical axis looks along camera +y with +z up in the image.
    """
    if not f > 0:
        raise ValueError(f"focal length must be positive, got {f}")
    w = np.array([x, -f, y], dtype=float)
    return -w / norm(w)


def spherical_ray(theta: float, phi: float) -> Vec3:
    st = math.sin(theta)
    return np.array([math.cos(phi) * st, math.sin(phi) * st, math.cos(theta)])


def up_from_accelerometer(a) -> Vec3:
    """Up vector from an accelerometer reading.

    A resting accelerometer reports specific force, which points opposite to
    gravity, so the normalized reading is already the up direction.
    """
    a = vec3(a)
    n = norm(a)
    if n <= 1e-6:
        raise NearZeroVector(f"accelerometer reading too small: |a| = {n:g}")
    return a / n


def reduce_to_angles(obs: ImageObservation, eps_q: float = EPS_Q) -> ObservationAngles:
    u = obs.u
    rhos = []
    qs = []
    for v in (obs.v1, obs.v2):
        c = float(u @ v)
        q = v - c * u
        qn = norm(q)
        # atan2 form of arccos(u.v); stays accurate when v is nearly vertical
        rhos.append(math.atan2(qn, c))
        qs.append((q, qn))
    (q1, n1), (q2, n2) = qs
    if n1 > eps_q and n2 > eps_q:
        beta = _wrap_beta(math.atan2(float(cross(q1, q2) @ u), float(q1 @ q2)))
    else:
        beta = 0.0
    return ObservationAngles(rhos[0], rhos[1], beta)


def angles_from_position(camera: Vec3, landmarks: LandmarkPair, eps_q: float = EPS_Q) -> ObservationAngles:
    """Angles an ideal camera at ``camera`` would measure (rotation-free forward model)."""
    v1 = unit(landmarks.m1 - camera)
    v2 = unit(landmarks.m2 - camera)
    return reduce_to_angles(ImageObservation(v1, v2, Z_UP), eps_q)


def observation_from_angles(angles: ObservationAngles) -> ImageObservation:
    """A canonical observation realizing the given angles.

    Uses ``u = z`` and puts landmark 1 in the x-z half plane. Any other
    observation with the same angles differs from this one by a yaw about ``u``.
    """
    r1, r2, b = angles.rho1, angles.rho2, angles.beta
    v1 = np.array([math.sin(r1), 0.0, math.cos(r1)])
    s2 = math.sin(r2)
    v2 = np.array([s2 * math.cos(b), s2 * math.sin(b), math.cos(r2)])
    return ImageObservation(v1, v2, Z_UP.copy())


def signed_horizontal_angle(A, C, B) -> float:
    """Counterclockwise angle at vertex C from ray C->A to ray C->B, in (-pi, pi]."""
    ax, ay = A[0] - C[0], A[1] - C[1]
    bx, by = B[0] - C[0], B[1] - C[1]
    if math.hypot(ax, ay) <= 1e-12 or math.hypot(bx, by) <= 1e-12:
        raise DegenerateVertex("vertex coincides with an endpoint")
    return _wrap_beta(math.atan2(ax * by - ay * bx, ax * bx + ay * by))


def _triad(a1: Vec3, a2: Vec3) -> np.ndarray:
    e1 = a1 / norm(a1)
    n = cross(a1, a2)
    e2 = n / norm(n)
    e3 = cross(e1, e2)
    return np.column_stack((e1, e2, e3))


def rotation_from_two_pairs(a1: Vec3, a2: Vec3, b1: Vec3, b2: Vec3,
                            tol: float = TOL_CONGRUENCE) -> np.ndarray:
    """Proper rotation R with R a1 = b1 and R a2 = b2 (triad construction).

    a1 is mapped exactly; a2 lands in the plane of (b1, b2) on the correct side,
    which is exact when the two pairs enclose the same angle.
    """
    if norm(cross(a1, a2)) <= 1e-9:
        raise ParallelInputs("a1 and a2 are parallel")
    gap = abs(float(a1 @ a2) - float(b1 @ b2))
    if gap > tol:
        raise IncongruentPairs(f"pair angles differ: |a1.a2 - b1.b2| = {gap:g}")
    if norm(cross(b1, b2)) <= 1e-9:
        raise ParallelInputs("b1 and b2 are parallel")
    return _triad(b1, b2) @ _triad(a1, a2).T


def rotation_about(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation by ``angle`` about ``axis``."""
    k = unit(vec3(axis))
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def facing_rotation(camera: Vec3, target: Vec3) -> np.ndarray:
    """Level rotation pointing camera +y horizontally at ``target``, camera +z up."""
    f = np.array([target[0] - camera[0], target[1] - camera[1], 0.0])
    if norm(f) <= 1e-12:
        return np.eye(3)
    return rotation_from_two_pairs(unit(f), Z_UP, np.array([0.0, 1.0, 0.0]), Z_UP)
