"""Closed-form camera pose from two landmark images and a gravity direction.

The position solve works entirely on the reduced angles (rho1, rho2, beta).
Writing ``h_i`` for the camera height above landmark i and ``d_i`` for the
horizontal distance to it, a camera that is not in a singular configuration
satisfies

    h_i = -d_i cot(rho_i)                     (tilt)
    d1^2 + d2^2 - 2 d1 d2 cos(beta) = d^2     (law of cosines, horizontal plane)
    h1 - h2 = H                               (landmark altitude difference)

Eliminating the heights leaves a quadratic in one horizontal distance whose
positive roots (with a positive partner distance) are exactly the camera
positions. Rotation then follows from the two landmark directions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import EPS_ANGLE, EPS_PLANE, SingularCase, detect_singular
from .errors import (
    BadIndexChoice,
    IncongruentPairs,
    MixedHemisphere,
    NearZeroVector,
    NoIntersection,
    NotCoaltitude,
    ParallelInputs,
    SingularInput,
    TheoremViolation,
)
from .geom import (
    Z_UP,
    CameraPose,
    ImageObservation,
    LandmarkPair,
    ObservationAngles,
    Vec3,
    angle_between,
    angles_from_position,
    reduce_to_angles,
    rotation_from_two_pairs,
    unit,
)

# relative to the two terms the discriminant is computed from; below this it is a double root
EPS_DISC = 1e-12
# relative to d; horizontal distances at or below this count as zero
EPS_D = 1e-9
TOL_ROUNDTRIP = 1e-6
TOL_TRIANGLE = 1e-9
DEDUP_REL = 1e-9


@dataclass(frozen=True)
class DistanceSolution:
    d1: float
    d2: float
    h1: float
    h2: float

    def residuals(self, angles: ObservationAngles, landmarks: LandmarkPair) -> tuple[float, float, float]:
        """(law-of-cosines, height difference, worst tilt) residuals."""
        cosines = self.d1 ** 2 + self.d2 ** 2 - 2 * self.d1 * self.d2 * math.cos(angles.beta) - landmarks.d ** 2
        height = self.h1 - self.h2 - landmarks.H
        tilt = 0.0
        for dk, hk, rk in ((self.d1, self.h1, angles.rho1), (self.d2, self.h2, angles.rho2)):
            if 0.0 < rk < math.pi:
                tilt = max(tilt, abs(hk + dk / math.tan(rk)))
        return cosines, height, tilt


@dataclass(frozen=True)
class QuadraticCoeffs:
    """``a x^2 + b x + c = 0`` in ``x = d_j``; ``delta = h_i - h_j``.

    ``disc`` is b^2 - 4ac evaluated as 4 (a d^2 - delta^2 tan^2(rho_i) sin^2(beta)),
    an exact rearrangement that avoids cancelling two nearly equal large terms;
    ``disc_scale`` is the sum of the magnitudes of those two terms.
    """

    a: float
    b: float
    c: float
    i: int
    j: int
    delta: float
    disc: float
    disc_scale: float

    @property
    def discriminant(self) -> float:
        return self.disc

    def roots(self, eps_disc: float = EPS_DISC) -> list[float]:
        return solve_quadratic(self.a, self.b, self.c, eps_disc, self.disc, self.disc_scale)


@dataclass(frozen=True)
class SolveResult:
    singular: SingularCase | None = None
    poses: tuple[CameraPose, ...] = ()

    @property
    def outcome(self) -> str:
        if self.singular is not None:
            return "singular"
        return "poses" if self.poses else "infeasible"


def solve_quadratic(a: float, b: float, c: float, eps_disc: float = EPS_DISC,
                    disc: float | None = None, scale: float | None = None) -> list[float]:
    """Real roots of a x^2 + b x + c with a > 0, cancellation-free.

    A discriminant within ``eps_disc * scale`` of zero is a double root and
    yields a single value. By default ``disc = b^2 - 4ac`` and
    ``scale = b^2 + |4ac|``; pass both if a more accurate evaluation is known.
    """
    if disc is None:
        disc = b * b - 4.0 * a * c
    if scale is None:
        scale = b * b + abs(4.0 * a * c)
    if abs(disc) <= eps_disc * scale:
        return [-b / (2.0 * a)]
    if disc < 0.0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = q / a
    r2 = c / q
    return sorted((r1, r2))


def _cot(x: float) -> float:
    return math.cos(x) / math.sin(x)


def _is_pole(rho: float, tol: float) -> bool:
    return rho <= tol or abs(rho - math.pi) <= tol


def _leading(k: float, beta: float) -> float:
    """1 - 2k cos(beta) + k^2 written as a sum of non-negative terms.

    (1-k)^2 + 4k sin^2(beta/2) for k >= 0 and (1+k)^2 - 4k cos^2(beta/2) for k < 0;
    the expanded form cancels badly near beta = 0 (k ~ 1) and beta = pi (k ~ -1).
    """
    if k >= 0.0:
        return (1.0 - k) ** 2 + 4.0 * k * math.sin(0.5 * beta) ** 2
    return (1.0 + k) ** 2 - 4.0 * k * math.cos(0.5 * beta) ** 2


def quadratic_coeffs(angles: ObservationAngles, i: int, H: float, d: float,
                     tol: float = EPS_ANGLE) -> QuadraticCoeffs:
    if i not in (1, 2):
        raise BadIndexChoice(f"index must be 1 or 2, got {i}")
    j = 3 - i
    ri, rj = angles.rho[i - 1], angles.rho[j - 1]
    if _is_pole(ri, tol) or abs(ri - math.pi / 2) <= tol:
        raise BadIndexChoice(f"rho{i} = {ri!r} is vertical or horizontal")
    if _is_pole(rj, tol):
        raise BadIndexChoice(f"rho{j} = {rj!r} is vertical")
    delta = H if i == 1 else -H
    t = math.tan(ri)
    k = _cot(rj) * t
    a = _leading(k, angles.beta)
    b = 2.0 * delta * t * (math.cos(angles.beta) - k)
    c = delta * delta * t * t - d * d
    p, r = a * d * d, (delta * t * math.sin(angles.beta)) ** 2
    return QuadraticCoeffs(a, b, c, i, j, delta, 4.0 * (p - r), 4.0 * (p + r))


def _ordered(i: int, di: float, dj: float, hi: float, hj: float) -> DistanceSolution:
    if i == 1:
        return DistanceSolution(di, dj, hi, hj)
    return DistanceSolution(dj, di, hj, hi)


def solve_distances(angles: ObservationAngles, landmarks: LandmarkPair,
                    tol: float = EPS_ANGLE, eps_disc: float = EPS_DISC) -> list[DistanceSolution]:
    """All (d1, d2, h1, h2) consistent with the angles; empty when infeasible."""
    case = detect_singular(landmarks, angles, tol)
    if case is not None:
        raise SingularInput(case)
    d, H = landmarks.d, landmarks.H
    if d <= EPS_PLANE * landmarks.scale:
        # stacked landmarks without beta = 0: no camera position produces these angles
        return []
    eps_d = EPS_D * d
    rho = angles.rho

    for i in (1, 2):
        ri = rho[i - 1]
        if not _is_pole(ri, tol):
            continue
        # camera on the vertical line through landmark i
        j = 3 - i
        delta = H if i == 1 else -H
        hj = -d * _cot(rho[j - 1])
        hi = hj + delta
        above = hi > 0 and abs(ri - math.pi) <= tol
        below = hi < 0 and ri <= tol
        if not (above or below):
            return []
        return [_ordered(i, 0.0, d, hi, hj)]

    i = 1 if abs(math.cos(rho[0])) >= abs(math.cos(rho[1])) else 2
    q = quadratic_coeffs(angles, i, H, d, tol)
    ti = math.tan(rho[i - 1])
    cot_j = _cot(rho[q.j - 1])
    out = []
    for dj in q.roots(eps_disc):
        if dj <= eps_d:
            continue
        di = (dj * cot_j - q.delta) * ti
        if di <= eps_d:
            continue
        hj = -dj * cot_j
        out.append(_ordered(i, di, dj, hj + q.delta, hj))
    return out


def solve_coaltitude(angles: ObservationAngles, landmarks: LandmarkPair,
                     tol: float = EPS_ANGLE) -> DistanceSolution:
    """Closed-form solution when both landmarks share an altitude."""
    if abs(landmarks.H) > EPS_PLANE * landmarks.scale:
        raise NotCoaltitude(f"landmark altitude difference {landmarks.H!r} mm")
    r1, r2 = angles.rho1, angles.rho2
    upper = 0.0 < r1 < math.pi / 2 and 0.0 < r2 < math.pi / 2
    lower = math.pi / 2 < r1 < math.pi and math.pi / 2 < r2 < math.pi
    if not (upper or lower):
        raise MixedHemisphere(f"tilt angles {r1!r}, {r2!r} straddle the horizontal")
    case = detect_singular(landmarks, angles, tol)
    if case is not None:
        raise SingularInput(case)
    k = _cot(r1) * math.tan(r2)
    d1 = landmarks.d / math.sqrt(_leading(k, angles.beta))
    h = -d1 * _cot(r1)
    return DistanceSolution(d1, d1 * k, h, h)


def position_from_distances(sol: DistanceSolution, landmarks: LandmarkPair, beta: float,
                            tol: float = TOL_TRIANGLE) -> Vec3:
    """Camera position from horizontal distances, heights and the horizontal angle.

    Of the two circle intersections, takes the one where the counterclockwise
    angle from landmark 1 to landmark 2 (vertex at the camera) has the sign of beta.
    """
    m1, m2 = landmarks.m1, landmarks.m2
    d = landmarks.d
    d1, d2 = sol.d1, sol.d2
    slack = tol * (d1 + d2 + d)
    if d1 + d2 < d - slack or abs(d1 - d2) > d + slack:
        raise NoIntersection(f"circles of radii {d1!r}, {d2!r} around points {d!r} apart do not meet")
    ex = (m2[0] - m1[0]) / d
    ey = (m2[1] - m1[1]) / d
    along = (d1 * d1 - d2 * d2 + d * d) / (2.0 * d)
    # signed offset from twice the triangle area; exact at tangency where sqrt(d1^2 - along^2) is not
    across = d1 * d2 * math.sin(beta) / d
    return np.array([
        m1[0] + along * ex - across * ey,
        m1[1] + along * ey + across * ex,
        m1[2] + sol.h1,
    ])


def rotation_for_position(position: Vec3, obs: ImageObservation, landmarks: LandmarkPair) -> np.ndarray:
    a1 = unit(landmarks.m1 - position)
    a2 = unit(landmarks.m2 - position)
    return rotation_from_two_pairs(a1, a2, obs.v1, obs.v2)


def pose_residual(pose: CameraPose, obs: ImageObservation, landmarks: LandmarkPair,
                  angles: ObservationAngles | None = None) -> float:
    """Worst angular disagreement (rad) between a pose and an observation."""
    if angles is None:
        angles = reduce_to_angles(obs)
    c, R = pose.position, pose.rotation
    worst = angles_from_position(c, landmarks).max_abs_diff(angles)
    worst = max(worst, angle_between(R @ Z_UP, obs.u))
    for m, v in ((landmarks.m1, obs.v1), (landmarks.m2, obs.v2)):
        worst = max(worst, angle_between(R @ (m - c), v))
    return worst


def solve_labeled(obs: ImageObservation, landmarks: LandmarkPair,
                  singular_tol: float = EPS_ANGLE,
                  roundtrip_tol: float = TOL_ROUNDTRIP) -> SolveResult:
    """Every pose consistent with an observation of two labeled landmarks."""
    angles = reduce_to_angles(obs)
    case = detect_singular(landmarks, angles, singular_tol)
    if case is not None:
        return SolveResult(singular=case)
    poses = []
    for sol in solve_distances(angles, landmarks, singular_tol):
        try:
            c = position_from_distances(sol, landmarks, angles.beta)
            pose = CameraPose(c, rotation_for_position(c, obs, landmarks))
        except (NoIntersection, ParallelInputs, IncongruentPairs, NearZeroVector):
            continue
        if pose_residual(pose, obs, landmarks, angles) <= roundtrip_tol:
            poses.append(pose)
    if len(poses) > 2:
        raise TheoremViolation(f"{len(poses)} labeled poses survived")
    return SolveResult(poses=tuple(poses))


def solve_unlabeled(obs: ImageObservation, landmarks: LandmarkPair,
                    singular_tol: float = EPS_ANGLE,
                    roundtrip_tol: float = TOL_ROUNDTRIP) -> SolveResult:
    """Poses for both possible image-to-landmark assignments, merged.

    The swapped assignment reads image point 2 as landmark 1; its angles are
    (rho2, rho1, -beta).
    """
    direct = solve_labeled(obs, landmarks, singular_tol, roundtrip_tol)
    if direct.singular is not None:
        return direct
    swapped = solve_labeled(obs.swapped(), landmarks, singular_tol, roundtrip_tol)
    if swapped.singular is not None:
        return swapped
    poses = list(direct.poses)
    for cand in swapped.poses:
        thresh = DEDUP_REL * (max(landmarks.scale, float(np.linalg.norm(cand.position - landmarks.m1))) + 1.0)
        if all(cand.distance(p) > thresh for p in poses):
            poses.append(cand)
    if len(poses) > 2:
        raise TheoremViolation(f"{len(poses)} unlabeled poses survived")
    return SolveResult(poses=tuple(poses))
