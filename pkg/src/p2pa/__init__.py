"""Camera pose from two landmark images and a gravity direction (P2PA)."""
from .classify import (
    Multiplicity,
    SingularCase,
    SlopeData,
    detect_singular,
    discriminant_closed_form,
    multiplicity_from_ground_truth,
)
from .errors import P2PAError, SingularInput, TheoremViolation
from .geom import (
    CameraPose,
    ImageObservation,
    LandmarkPair,
    ObservationAngles,
    pinhole_ray,
    reduce_to_angles,
    rotation_from_two_pairs,
    signed_horizontal_angle,
    spherical_ray,
    up_from_accelerometer,
)
from .sim import NoiseModel, SweepConfig, SweepRow, run_sweep, synthesize_observation
from .solver import (
    DistanceSolution,
    QuadraticCoeffs,
    SolveResult,
    position_from_distances,
    quadratic_coeffs,
    solve_coaltitude,
    solve_distances,
    solve_labeled,
    solve_unlabeled,
)

__version__ = "0.1.0"
