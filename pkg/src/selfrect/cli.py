"""Command-line entry point: rectify, match, eval, synth and sweep.

Exit codes: 0 success, 1 I/O or usage error, 2 insufficient correspondences,
3 degenerate geometry.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import features, synth
from .errors import (
    DegenerateConfigurationError,
    ImageFormatError,
    InsufficientDataError,
)
from .geometry import Homography
from .imaging import load_image, save_image, warp
from .metrics import DEFAULT_EPSILONS, evaluate
from .solver import CorrespondenceSet, RansacConfig, dsr

EXIT_OK, EXIT_USAGE, EXIT_INSUFFICIENT, EXIT_DEGENERATE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _StageError(Exception):
    def __init__(self, stage: str, exc: Exception):
        super().__init__(f"{stage}: {exc}")
        self.stage = stage
        self.exc = exc


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except Exception as exc:  # re-raised with the failing stage attached
        raise _StageError(name, exc) from exc


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(text)


def _ransac_config(args) -> RansacConfig:
    return RansacConfig(
        sample_size=args.sample_size,
        max_iterations=args.iterations,
        inlier_threshold=args.epsilon,
        seed=args.seed,
        refit_on_inliers=args.refit,
    )


def cmd_rectify(args) -> int:
    images = args.images
    if args.corr is None and len(images) != 2:
        raise _StageError("input", ValueError("give MASTER SLAVE images or --corr FILE"))
    if args.corr is not None and images:
        raise _StageError("input", ValueError("--corr replaces the image pair; pass --slave to warp"))
    out = Path(args.out)
    _stage("input", out.mkdir, parents=True, exist_ok=True)

    timing = {}
    slave_img = None
    if args.corr is not None:
        corr = _stage("input", CorrespondenceSet.load, args.corr)
        if args.slave:
            slave_img = _stage("input", load_image, args.slave)
    else:
        master_img = _stage("input", load_image, images[0])
        slave_img = _stage("input", load_image, images[1])
        t0 = time.perf_counter()
        corr = _stage(
            "matching",
            features.match_images,
            master_img,
            slave_img,
            args.max_keypoints,
            args.fast_threshold,
            args.max_distance,
            args.ratio,
        )
        timing["matching"] = (time.perf_counter() - t0) * 1e6
        corr.save(out / "corr.txt")

    t0 = time.perf_counter()
    result = _stage(
        "estimation", dsr, corr, _ransac_config(args), shift_over=args.shift_over, shear=not args.no_shear
    )
    timing["estimation"] = (time.perf_counter() - t0) * 1e6

    result.h_total.save(out / "H.txt")
    (out / "solve.txt").write_text(result.to_text())
    if slave_img is not None:
        rect = _stage("warping", warp, slave_img, result.h_total)
        _stage("output", save_image, rect, out / "slave_rect.png")

    report = evaluate(
        corr, result.master_homography, result.h_total, args.eps, p_max=result.inlier_ratio, timing_us=timing
    )
    name = "report.json" if args.format == "json" else "report.txt"
    (out / name).write_text(report.to_json() if args.format == "json" else report.to_text())
    _emit(args, report.as_dict(), report.to_text())
    return EXIT_OK


def cmd_match(args) -> int:
    master = _stage("input", load_image, args.master)
    slave = _stage("input", load_image, args.slave)
    corr = _stage(
        "matching",
        features.match_images,
        master,
        slave,
        args.max_keypoints,
        args.fast_threshold,
        args.max_distance,
        args.ratio,
    )
    if args.output:
        _stage("output", corr.save, args.output)
        _emit(args, {"matches": len(corr), "output": str(args.output)}, f"matches: {len(corr)}\n")
    else:
        sys.stdout.write(corr.to_text())
    return EXIT_OK


def cmd_eval(args) -> int:
    corr = _stage("input", CorrespondenceSet.load, args.corr)
    hm = _stage("input", Homography.load, args.h_master)
    hs = _stage("input", Homography.load, args.h_slave)
    report = _stage("evaluation", evaluate, corr, hm, hs, args.eps)
    _emit(args, report.as_dict(), report.to_text())
    return EXIT_OK


def _scene_from_args(args) -> synth.SceneSpec:
    return synth.SceneSpec(
        n_points=args.points,
        seed=args.seed,
        noise_sigma=args.noise,
        outlier_fraction=args.outliers,
        outlier_min_offset=args.outlier_offset,
    )


def cmd_synth(args) -> int:
    scene = _stage("input", _scene_from_args, args)
    manifest = _stage(
        "output",
        synth.write_dataset,
        args.out,
        args.n_pairs,
        args.seed,
        scene,
        perfect=args.perfect,
        render=not args.no_render,
        threads=args.threads,
    )
    _emit(
        args,
        {"pairs": args.n_pairs, "manifest": str(manifest)},
        f"pairs: {args.n_pairs}\nmanifest: {manifest}\n",
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.values is not None:
        values = args.values
    elif args.start is not None or args.stop is not None:
        if args.start is None or args.stop is None:
            raise _StageError("input", ValueError("--start and --stop go together"))
        n = int(np.floor((args.stop - args.start) / args.step + 1e-9)) + 1
        values = [args.start + i * args.step for i in range(max(n, 0))]
    else:
        values = None
    scene = _stage("input", _scene_from_args, args)
    rows = _stage(
        "sweep",
        synth.small_drift_sweep,
        args.axis,
        values,
        scene,
        _ransac_config(args),
        reference_calrec=args.reference_calrec,
    )
    if args.output:
        _stage("output", synth.write_sweep_csv, rows, args.output)
    if args.format == "json":
        payload = [{k: v for k, v in vars(r).items() if v is not None} for r in rows]
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    elif not args.output:
        synth.write_sweep_csv(rows, sys.stdout)
    return EXIT_OK


def _add_ransac(p) -> None:
    g = p.add_argument_group("estimation")
    g.add_argument("-M", "--sample-size", type=int, default=20, help="pairs per RANSAC sample")
    g.add_argument("-T", "--iterations", type=int, default=100, help="RANSAC iterations")
    g.add_argument("--epsilon", type=float, default=1.0, help="inlier threshold in pixels")
    g.add_argument("--refit", action="store_true", help="refit the best model on its inliers")


def _add_features(p) -> None:
    g = p.add_argument_group("features")
    g.add_argument("--max-keypoints", type=int, default=2000)
    g.add_argument("--fast-threshold", type=float, default=20.0)
    g.add_argument("--max-distance", type=int, default=64, help="Hamming ceiling (of 256)")
    g.add_argument("--ratio", type=float, default=0.8, help="best/second-best ratio test")


def _add_scene(p) -> None:
    g = p.add_argument_group("scene")
    g.add_argument("--points", type=int, default=200, help="correspondences per pair")
    g.add_argument("--noise", type=float, default=0.3, help="slave point noise sigma, px")
    g.add_argument("--outliers", type=float, default=0.0, help="outlier fraction")
    g.add_argument("--outlier-offset", type=float, default=10.0, help="minimum outlier row offset, px")


def _global_options(suppress: bool) -> argparse.ArgumentParser:
    # accepted before or after the subcommand; the subcommand copies must not
    # overwrite a value given earlier with their defaults
    def default(v):
        return argparse.SUPPRESS if suppress else v

    p = _Parser(add_help=False)
    p.add_argument("--seed", type=int, default=default(0), help="root seed for all randomness")
    p.add_argument("--threads", type=int, default=default(1), help="worker processes for corpus commands")
    p.add_argument("--format", choices=("text", "json"), default=default("text"))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_options(suppress=True)
    parser = _Parser(
        prog="selfrect", description=__doc__.splitlines()[0], parents=[_global_options(suppress=False)]
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("rectify", parents=[common], help="estimate H and warp the slave image")
    p.add_argument("images", nargs="*", metavar="IMAGE", help="MASTER SLAVE images")
    p.add_argument("--corr", help="correspondence file; bypasses feature matching")
    p.add_argument("--slave", help="slave image to warp when --corr is used")
    p.add_argument("--out", "-o", default=".", help="output directory")
    p.add_argument("--eps", type=float, nargs="+", default=list(DEFAULT_EPSILONS))
    p.add_argument("--shift-over", choices=("inliers", "all"), default="inliers")
    p.add_argument("--no-shear", action="store_true", help="skip the shearing factor")
    _add_ransac(p)
    _add_features(p)
    p.set_defaults(func=cmd_rectify)

    p = sub.add_parser("match", parents=[common], help="features only; writes a correspondence file")
    p.add_argument("master")
    p.add_argument("slave")
    p.add_argument("--output", "-o", help="correspondence file (stdout when omitted)")
    _add_features(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("eval", parents=[common], help="PAP and NVD for given homographies")
    p.add_argument("corr")
    p.add_argument("h_master")
    p.add_argument("h_slave")
    p.add_argument("--eps", type=float, nargs="+", default=list(DEFAULT_EPSILONS))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    p.add_argument("--n-pairs", "-n", type=int, default=1)
    p.add_argument("--out", "-o", required=True)
    p.add_argument("--perfect", action="store_true", help="all-zero perturbations")
    p.add_argument("--no-render", action="store_true", help="skip master/slave images")
    _add_scene(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("sweep", parents=[common], help="one-axis small-drift sweep")
    p.add_argument("--axis", required=True, choices=synth.SWEEP_AXES)
    p.add_argument("--values", type=float, nargs="+")
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float, default=0.25)
    p.add_argument("--output", "-o", help="CSV path (stdout when omitted)")
    p.add_argument("--reference-calrec", action="store_true", help="add calibrated-rectification columns")
    _add_scene(p)
    _add_ransac(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, InsufficientDataError):
        return EXIT_INSUFFICIENT
    if isinstance(exc, DegenerateConfigurationError):
        return EXIT_DEGENERATE
    return EXIT_USAGE


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _StageError as err:
        sys.stderr.write(f"selfrect {args.command}: {err.stage} failed: {err.exc}\n")
        return _exit_code(err.exc)
    except (OSError, ImageFormatError, ValueError) as exc:
        sys.stderr.write(f"selfrect {args.command}: {exc}\n")
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
