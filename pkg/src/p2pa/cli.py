"""Command-line front end: solve, classify, synth, simulate.

Exit codes: 0 solved, 1 input error, 2 singular or degenerate, 3 infeasible.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .classify import EPS_ANGLE, multiplicity_from_ground_truth, plane_l_distance
from .errors import CameraAtLandmark, ConfigInvalid, P2PAError, SceneError
from .geom import reduce_to_angles
from .scene import Scene, dump_json, load_scene, load_sweep, scene_to_dict
from .sim import NoiseModel, run_sweep, summarize, synthesize_observation, write_csv
from .solver import TOL_ROUNDTRIP, pose_residual, solve_labeled, solve_unlabeled

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_SINGULAR = 2
EXIT_INFEASIBLE = 3


def _num(x: float):
    # JSON has no infinity; spell it out
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def _multiplicity_report(scene: Scene) -> dict:
    lm = scene.landmarks
    m = multiplicity_from_ground_truth(lm, scene.camera.position)
    out = {"verdict": str(m), "reason": m.reason}
    if m.slopes is not None:
        out["slopes"] = {"s": _num(m.slopes.s), "s1": _num(m.slopes.s1), "s2": _num(m.slopes.s2)}
        out["on_plane_l"] = m.on_plane_l
        out["plane_l_distance_mm"] = plane_l_distance(lm, scene.camera.position)
    return out


def _emit(doc: dict) -> None:
    sys.stdout.write(dump_json(doc))


def cmd_solve(args) -> int:
    scene = load_scene(args.scene)
    if scene.observation is None:
        raise SceneError(f"{args.scene}: field observation: required for solve")
    obs = scene.observation
    solve = solve_unlabeled if args.unlabeled else solve_labeled
    result = solve(obs, scene.landmarks, args.singular_tol, args.roundtrip_tol)
    angles = reduce_to_angles(obs)
    report = {
        "outcome": result.outcome,
        "angles": {"rho1": angles.rho1, "rho2": angles.rho2, "beta": angles.beta},
        "labeled": not args.unlabeled,
        "poses": [
            {
                "position": [float(x) for x in p.position],
                "rotation": [[float(x) for x in row] for row in p.rotation],
                "residual_rad": pose_residual(p, obs, scene.landmarks, angles),
            }
            for p in result.poses
        ],
    }
    if result.singular is not None:
        report["singular"] = result.singular.value
        report["message"] = f"singular: {result.singular.value}"
        print(report["message"], file=sys.stderr)
    if scene.camera is not None:
        try:
            report["ground_truth"] = _multiplicity_report(scene)
        except CameraAtLandmark as exc:
            report["ground_truth"] = {"error": str(exc)}
    _emit(report)
    if result.singular is not None:
        return EXIT_SINGULAR
    return EXIT_OK if result.poses else EXIT_INFEASIBLE


def cmd_classify(args) -> int:
    scene = load_scene(args.scene)
    if scene.camera is None:
        raise SceneError(f"{args.scene}: field camera: required for classify")
    report = _multiplicity_report(scene)
    _emit(report)
    return EXIT_SINGULAR if report["verdict"].startswith("Infinite") else EXIT_OK


def cmd_synth(args) -> int:
    scene = load_scene(args.scene)
    if scene.camera is None:
        raise SceneError(f"{args.scene}: field camera: required for synth")
    noise = None
    if args.cone_deg or args.accel_noise:
        try:
            noise = NoiseModel(math.radians(args.cone_deg), args.accel_noise, args.noise_seed)
        except ConfigInvalid as exc:
            raise SceneError(str(exc)) from None
    rng = np.random.default_rng(args.noise_seed)
    obs = synthesize_observation(scene.camera, scene.landmarks, noise, rng)
    text = dump_json(scene_to_dict(Scene(scene.landmarks, scene.ids, scene.camera, obs)))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config, workers = load_sweep(args.config)
    if args.workers is not None:
        workers = args.workers
    try:
        rows = run_sweep(config, workers)
    except ConfigInvalid as exc:
        raise SceneError(f"{args.config}: {exc}") from None
    write_csv(rows, args.out)
    summary = summarize(rows, args.threshold)
    summary["rows"] = len(rows)
    summary["csv"] = args.out
    _emit(summary)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; argparse's own status 2 means singular here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="p2pa", description="Camera pose from two landmarks and gravity.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a scene's observation for camera pose")
    s.add_argument("scene")
    s.add_argument("--unlabeled", action="store_true", help="image-to-landmark assignment unknown")
    s.add_argument("--singular-tol", type=float, default=EPS_ANGLE,
                   help="angle tolerance (rad) for singular-case detection")
    s.add_argument("--roundtrip-tol", type=float, default=TOL_ROUNDTRIP,
                   help="max angular residual (rad) for a pose to be accepted")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("classify", help="number of poses consistent with a ground-truth camera")
    c.add_argument("scene")
    c.set_defaults(func=cmd_classify)

    y = sub.add_parser("synth", help="fill in a scene's observation from its camera pose")
    y.add_argument("scene")
    y.add_argument("--noise-seed", type=int, default=0)
    y.add_argument("--cone-deg", type=float, default=0.0, help="direction error cap radius, degrees")
    y.add_argument("--accel-noise", type=float, default=0.0, help="accelerometer half width, units of g")
    y.add_argument("-o", "--output", help="write here instead of stdout")
    y.set_defaults(func=cmd_synth)

    m = sub.add_parser("simulate", help="RMS position error versus altitude")
    m.add_argument("config")
    m.add_argument("--out", required=True, help="CSV output path")
    m.add_argument("--workers", type=int, default=None)
    m.add_argument("--threshold", type=float, default=20.0, help="rms level (mm) reported in the summary")
    m.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CameraAtLandmark as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (P2PAError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
