"""Simulated dual-lens rig with fabrication perturbations.

The master camera sits at the origin looking down +Z. The slave camera is
centred at ``(baseline + t_x, t_y, t_z)`` and rotated by
``Rz(theta_z) @ Ry(theta_y) @ Rx(theta_x)`` (world-to-camera). All randomness
is drawn from generators seeded by ``(seed, stream)`` tuples so results do not
depend on call order or parallelism.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.ndimage import gaussian_filter

from .baselines import CalibratedRig, calibrated_rectify
from .errors import GenerationError
from .geometry import CameraIntrinsics, Homography, RigidPose, project_points, rotation_matrix
from .imaging import Image, save_image
from .metrics import pap
from .solver import CorrespondenceSet, RansacConfig, dsr

DEFAULT_INTRINSICS = CameraIntrinsics.centered(800.0, 960, 720)
BASELINE_MM = 12.0

# uniform sampling ranges for fabrication randomness
PERTURBATION_RANGES = {
    "theta_x": (-3.0, 3.0),
    "theta_y": (-3.0, 3.0),
    "theta_z": (-3.0, 3.0),
    "t_x": (-1.0, 1.0),
    "t_y": (-1.0, 1.0),
    "t_z": (-2.0, 2.0),
}
SMALL_DRIFT_TY = 1.0
SMALL_DRIFT_TZ = 2.0

PSF_SIGMA = 1.0  # optical blur of the rendered camera, px

SWEEP_AXES = ("theta_x", "theta_y", "theta_z", "t_y", "t_z")
SWEEP_GRIDS = {
    "theta_x": np.arange(0, 13) * 0.25,
    "theta_y": np.arange(0, 13) * 0.25,
    "theta_z": np.arange(0, 13) * 0.25,
    "t_y": np.arange(0, 17) * 0.25,
    "t_z": np.arange(0, 17) * 0.25,
}


def derive_seed(seed: int, *stream: int) -> int:
    """Independent 32-bit seed for the sub-stream ``stream`` of ``seed``."""
    return int(np.random.SeedSequence([seed, *stream]).generate_state(1)[0])


@dataclass(frozen=True)
class RigPerturbation:
    theta_x: float = 0.0
    theta_y: float = 0.0
    theta_z: float = 0.0
    t_x: float = 0.0
    t_y: float = 0.0
    t_z: float = 0.0
    baseline: float = BASELINE_MM

    @classmethod
    def perfect(cls, baseline: float = BASELINE_MM) -> "RigPerturbation":
        return cls(baseline=baseline)

    @property
    def small_drift(self) -> bool:
        return abs(self.t_y) <= SMALL_DRIFT_TY and abs(self.t_z) <= SMALL_DRIFT_TZ

    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.theta_x, self.theta_y, self.theta_z)

    def center(self) -> np.ndarray:
        return np.array([self.baseline + self.t_x, self.t_y, self.t_z])

    def slave_pose(self) -> RigidPose:
        return RigidPose.from_center(self.rotation(), self.center())

    def calibrated_rig(self, intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS) -> CalibratedRig:
        return CalibratedRig(intrinsics, intrinsics, self.slave_pose())

    def to_text(self, intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS) -> str:
        lines = [f"width={intrinsics.width}", f"height={intrinsics.height}"]
        for who in ("master", "slave"):
            for attr in ("fx", "fy", "cx", "cy"):
                lines.append(f"{who}_{attr}={getattr(intrinsics, attr)!r}")
        lines += [f"{k}={v!r}" for k, v in asdict(self).items()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RigPerturbation":
        names = {f.name for f in fields(cls)}
        vals = {}
        for line in text.splitlines():
            key, sep, value = line.partition("=")
            if sep and key.strip() in names:
                vals[key.strip()] = float(value)
        return cls(**vals)


@dataclass(frozen=True)
class SceneSpec:
    n_points: int = 200
    depth_min: float = 500.0
    depth_max: float = 10_000.0
    seed: int = 0
    noise_sigma: float = 0.3
    outlier_fraction: float = 0.0
    outlier_min_offset: float = 10.0

    def __post_init__(self) -> None:
        if self.n_points <= 0:
            raise ValueError("n_points must be positive")
        if not 0 < self.depth_min < self.depth_max:
            raise ValueError("need 0 < depth_min < depth_max")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0 <= self.outlier_fraction < 0.5:
            raise ValueError("outlier_fraction must be in [0, 0.5)")


@dataclass(frozen=True)
class GroundTruth:
    slave_true: np.ndarray  # noiseless slave projections (N, 2)
    points: np.ndarray  # 3D scene points, master frame (N, 3)
    disparity: np.ndarray  # master x - true slave x
    inlier: np.ndarray  # False where the pair was replaced by an outlier

    def to_text(self) -> str:
        lines = [f"{len(self.disparity)}"]
        for d, ok, (x, y) in zip(self.disparity, self.inlier, self.slave_true):
            lines.append(f"{d:.17g} {int(ok)} {x:.17g} {y:.17g}")
        return "\n".join(lines) + "\n"


def sample_perturbation(seed: int) -> RigPerturbation:
    """Independent uniform draws over ``PERTURBATION_RANGES``."""
    rng = np.random.default_rng(seed)
    vals = {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in PERTURBATION_RANGES.items()}
    return RigPerturbation(**vals)


def _in_image(xy: np.ndarray, K: CameraIntrinsics) -> np.ndarray:
    return (
        (xy[:, 0] >= 0) & (xy[:, 0] <= K.width - 1) & (xy[:, 1] >= 0) & (xy[:, 1] <= K.height - 1)
    )


def _visible_slave(pose: RigidPose, K: CameraIntrinsics, pts: np.ndarray):
    cam_z = pts @ pose.rotation[2] + pose.translation[2]
    ok = cam_z > 1e-6
    xy = np.full((len(pts), 2), np.nan)
    if ok.any():
        xy[ok] = project_points(K, pose, pts[ok])
    ok &= _in_image(np.nan_to_num(xy, nan=-1.0), K)
    return xy, ok


def generate_correspondences(
    rig: RigPerturbation,
    scene: SceneSpec,
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
    max_rounds: int = 50,
) -> tuple[CorrespondenceSet, GroundTruth]:
    """Project random scene points through both cameras.

    Candidate points are drawn as (master pixel, log-uniform depth) in a
    rig-independent order, so a fixed scene seed yields the same scene across
    rigs; candidates invisible to the slave are skipped.
    """
    K = intrinsics
    pose = rig.slave_pose()
    geo = np.random.default_rng([scene.seed, 0])
    n = scene.n_points
    batch = max(4 * n, 64)
    masters, slaves, points = [], [], []
    found = 0
    for _ in range(max_rounds):
        uv = geo.uniform([0.0, 0.0], [K.width - 1.0, K.height - 1.0], size=(batch, 2))
        z = np.exp(geo.uniform(math.log(scene.depth_min), math.log(scene.depth_max), size=batch))
        pts = np.empty((batch, 3))
        pts[:, 0] = (uv[:, 0] - K.cx) / K.fx * z
        pts[:, 1] = (uv[:, 1] - K.cy) / K.fy * z
        pts[:, 2] = z
        xy, ok = _visible_slave(pose, K, pts)
        take = np.flatnonzero(ok)[: n - found]
        # re-project the master side so both views share one projection path
        masters.append(project_points(K, RigidPose.identity(), pts[take]))
        slaves.append(xy[take])
        points.append(pts[take])
        found += len(take)
        if found == n:
            break
    else:
        raise GenerationError(f"only {found} of {n} scene points visible in both views")

    master = np.concatenate(masters)
    slave_true = np.concatenate(slaves)
    pts = np.concatenate(points)

    noise_rng = np.random.default_rng([scene.seed, 1])
    slave = slave_true + noise_rng.normal(0.0, 1.0, size=(n, 2)) * scene.noise_sigma

    inlier = np.ones(n, dtype=bool)
    n_out = int(round(scene.outlier_fraction * n))
    if n_out:
        if scene.outlier_min_offset * 2 >= K.height - 1:
            raise GenerationError("outlier offset leaves no room inside the image")
        out_rng = np.random.default_rng([scene.seed, 2])
        idx = np.sort(out_rng.choice(n, n_out, replace=False))
        inlier[idx] = False
        for i in idx:
            x = out_rng.uniform(0.0, K.width - 1.0)
            while True:
                y = out_rng.uniform(0.0, K.height - 1.0)
                if abs(y - slave_true[i, 1]) >= scene.outlier_min_offset:
                    break
            slave[i] = (x, y)

    corr = CorrespondenceSet(master, slave, K.width, K.height)
    gt = GroundTruth(slave_true, pts, master[:, 0] - slave_true[:, 0], inlier)
    return corr, gt


# ---------------------------------------------------------------- rendering


@dataclass(frozen=True)
class _Surface:
    depth: float
    cell: float  # texture cell size, mm
    lo: float
    hi: float
    seed: int
    # disc parameters; radius == inf for the background plane
    cx: float = 0.0
    cy: float = 0.0
    radius: float = math.inf


def _hash01(i: np.ndarray, j: np.ndarray, seed: int) -> np.ndarray:
    """Deterministic value in [0, 1) per integer lattice cell."""
    with np.errstate(over="ignore"):
        h = i.astype(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
        h ^= j.astype(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
        h ^= np.uint64(seed) * np.uint64(0x165667B19E3779F9)
        h ^= h >> np.uint64(31)
        h *= np.uint64(0xBF58476D1CE4E5B9)
        h ^= h >> np.uint64(29)
        h *= np.uint64(0x94D049BB133111EB)
        h ^= h >> np.uint64(32)
    return (h >> np.uint64(11)).astype(np.float64) / float(1 << 53)


def _texture(s: _Surface, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    coarse = _hash01(np.floor(X / s.cell).astype(np.int64), np.floor(Y / s.cell).astype(np.int64), s.seed)
    c2 = s.cell * 0.43
    fine = _hash01(np.floor(X / c2).astype(np.int64), np.floor(Y / c2).astype(np.int64), s.seed + 1)
    return s.lo + (s.hi - s.lo) * (0.7 * coarse + 0.3 * fine)


@dataclass(frozen=True)
class ProceduralScene:
    """A textured fronto-parallel backdrop with textured discs in front of it."""

    surfaces: tuple[_Surface, ...]

    @classmethod
    def generate(
        cls,
        texture_seed: int,
        intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
        n_blobs: int = 10,
        backdrop_depth: float = 6000.0,
        cell_px: float = 9.0,
    ) -> "ProceduralScene":
        K = intrinsics
        rng = np.random.default_rng([texture_seed, 7])
        surfaces = [
            _Surface(backdrop_depth, backdrop_depth * cell_px / K.fx, 30.0, 225.0, derive_seed(texture_seed, 0))
        ]
        for b in range(n_blobs):
            z = math.exp(rng.uniform(math.log(700.0), math.log(3000.0)))
            u = rng.uniform(0, K.width - 1)
            v = rng.uniform(0, K.height - 1)
            r_px = rng.uniform(40.0, 110.0)
            lo, hi = (0.0, 255.0) if rng.random() < 0.5 else (15.0, 200.0)
            surfaces.append(
                _Surface(
                    depth=z,
                    cell=z * cell_px * rng.uniform(0.8, 1.3) / K.fx,
                    lo=lo,
                    hi=hi,
                    seed=derive_seed(texture_seed, b + 1),
                    cx=(u - K.cx) / K.fx * z,
                    cy=(v - K.cy) / K.fy * z,
                    radius=r_px * z / K.fx,
                )
            )
        return cls(tuple(surfaces))

    def cast(self, K: CameraIntrinsics, rotation, center, pixels: np.ndarray):
        """Nearest surface hit along each pixel ray: (surface index, X, Y, Z)."""
        rot = np.asarray(rotation, dtype=np.float64)
        c = np.asarray(center, dtype=np.float64)
        px = np.asarray(pixels, dtype=np.float64)
        rx = (px[..., 0] - K.cx) / K.fx
        ry = (px[..., 1] - K.cy) / K.fy
        # world-frame ray direction R^T [rx, ry, 1]
        dx = rot[0, 0] * rx + rot[1, 0] * ry + rot[2, 0]
        dy = rot[0, 1] * rx + rot[1, 1] * ry + rot[2, 1]
        dz = rot[0, 2] * rx + rot[1, 2] * ry + rot[2, 2]
        back = self.surfaces[0]
        t = (back.depth - c[2]) / dz
        sid = np.zeros(px.shape[:-1], dtype=np.intp)
        for k, s in enumerate(self.surfaces[1:], start=1):
            tk = (s.depth - c[2]) / dz
            X = c[0] + tk * dx - s.cx
            Y = c[1] + tk * dy - s.cy
            hit = (X * X + Y * Y <= s.radius * s.radius) & (tk < t) & (tk > 0)
            t = np.where(hit, tk, t)
            sid = np.where(hit, k, sid)
        return sid, c[0] + t * dx, c[1] + t * dy, c[2] + t * dz

    def shade(self, sid: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        out = np.empty(sid.shape)
        for k, s in enumerate(self.surfaces):
            sel = sid == k
            if sel.any():
                out[sel] = _texture(s, X[sel], Y[sel])
        return out

    def render(
        self, K: CameraIntrinsics, rotation, center, supersample: int = 2, psf_sigma: float = PSF_SIGMA
    ) -> Image:
        """Box-filtered ray casting followed by a Gaussian lens blur."""
        n = supersample
        offs = (np.arange(n) + 0.5) / n - 0.5
        acc = np.zeros((K.height, K.width))
        gy, gx = np.mgrid[0 : K.height, 0 : K.width].astype(np.float64)
        for oy in offs:
            for ox in offs:
                pix = np.stack([gx + ox, gy + oy], axis=-1)
                sid, X, Y, _ = self.cast(K, rotation, center, pix)
                acc += self.shade(sid, X, Y)
        acc /= n * n
        if psf_sigma > 0:
            acc = gaussian_filter(acc, psf_sigma, mode="nearest")
        return Image(np.clip(np.rint(acc), 0, 255).astype(np.uint8))


def render_pair(
    rig: RigPerturbation,
    texture_seed: int,
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
) -> tuple[Image, Image]:
    """Ray-cast the procedural scene from the master and the slave camera."""
    scene = ProceduralScene.generate(texture_seed, intrinsics)
    master = scene.render(intrinsics, np.eye(3), np.zeros(3))
    slave = scene.render(intrinsics, rig.rotation(), rig.center())
    return master, slave


def true_slave_positions(
    rig: RigPerturbation,
    texture_seed: int,
    master_pixels,
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
) -> tuple[np.ndarray, np.ndarray]:
    """Where the scene points seen at ``master_pixels`` land in the slave render.

    Returns ``(xy, visible)``; ``visible`` is False for points that are
    occluded or off-frame in the slave view (their ``xy`` is NaN or stale).
    """
    K = intrinsics
    scene = ProceduralScene.generate(texture_seed, K)
    uv = np.asarray(master_pixels, dtype=np.float64).reshape(-1, 2)
    sid, X, Y, Z = scene.cast(K, np.eye(3), np.zeros(3), uv)
    pts = np.stack([X, Y, Z], axis=-1)
    xy, ok = _visible_slave(rig.slave_pose(), K, pts)
    sid2, *_ = scene.cast(K, rig.rotation(), rig.center(), np.nan_to_num(xy))
    return xy, ok & (sid2 == sid)


def rendered_ground_truth(
    rig: RigPerturbation,
    texture_seed: int,
    n_points: int = 500,
    seed: int = 0,
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
) -> CorrespondenceSet:
    """Exact correspondences for the scene drawn by :func:`render_pair`.

    Points hidden from the slave (occluded or off-frame) are dropped, so the
    result may hold fewer than ``n_points`` pairs.
    """
    K = intrinsics
    rng = np.random.default_rng([seed, 11])
    uv = rng.uniform([0.0, 0.0], [K.width - 1.0, K.height - 1.0], size=(n_points, 2))
    xy, ok = true_slave_positions(rig, texture_seed, uv, K)
    return CorrespondenceSet(uv[ok], xy[ok], K.width, K.height)


def checkerboard(
    width: int = 320,
    height: int = 240,
    square: int = 24,
    grain: float = 6.0,
    seed: int = 0,
    supersample: int = 4,
    psf_sigma: float = PSF_SIGMA,
) -> tuple[Image, np.ndarray]:
    """Anti-aliased checkerboard with a faint static grain, seen through the lens blur.

    Returns the image and the (M, 2) array of interior corner positions. The
    grain stands in for surface texture: without it the descriptor tests
    inside flat squares are exact ties. The blur matters for corner
    detection: on a perfectly sharp board every X-junction splits the
    segment-test circle into four short arcs and no corner fires.
    """
    n = supersample
    offs = (np.arange(n) + 0.5) / n - 0.5
    gy, gx = np.mgrid[0:height, 0:width].astype(np.float64)
    ox0 = (width - 1) / 2 - square * (width // (2 * square))
    oy0 = (height - 1) / 2 - square * (height // (2 * square))
    acc = np.zeros((height, width))
    for oy in offs:
        for ox in offs:
            i = np.floor((gx + ox - ox0) / square).astype(int)
            j = np.floor((gy + oy - oy0) / square).astype(int)
            acc += np.where((i + j) % 2 == 0, 200.0, 50.0)
    acc /= n * n
    rng = np.random.default_rng([seed, 3])
    noise = rng.normal(0.0, 1.0, (height // 3 + 2, width // 3 + 2))
    # bilinearly upsampled low-frequency grain
    ys, xs = gy / 3, gx / 3
    y0, x0 = ys.astype(int), xs.astype(int)
    fy, fx = ys - y0, xs - x0
    g = (
        noise[y0, x0] * (1 - fx) * (1 - fy)
        + noise[y0, x0 + 1] * fx * (1 - fy)
        + noise[y0 + 1, x0] * (1 - fx) * fy
        + noise[y0 + 1, x0 + 1] * fx * fy
    )
    acc += grain * g
    if psf_sigma > 0:
        acc = gaussian_filter(acc, psf_sigma, mode="nearest")
    img = Image(np.clip(np.rint(acc), 0, 255).astype(np.uint8))
    cxs = np.arange(ox0 + square, width - 1, square)
    cys = np.arange(oy0 + square, height - 1, square)
    corners = np.array([(x, y) for y in cys for x in cxs])
    return img, corners


# ------------------------------------------------------------- drift sweeps


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    pap_e1: float
    pap_e2: float
    pap_e3: float
    calrec_e1: float | None = None
    calrec_e2: float | None = None
    calrec_e3: float | None = None


def evaluate_rig(
    rig: RigPerturbation,
    scene: SceneSpec,
    cfg: RansacConfig,
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
    reference_calrec: bool = False,
):
    """DSR on one generated pair; PAP measured on the non-outlier pairs.

    Injected outliers are excluded from the score because their vertical
    offset is gross by construction. Returns ``(pap, calrec_pap_or_None,
    solve_result, corr, gt)``.
    """
    corr, gt = generate_correspondences(rig, scene, intrinsics)
    result = dsr(corr, cfg)
    clean = corr.subset(gt.inlier)
    eps = (1.0, 2.0, 3.0)
    score = pap(clean, Homography.identity(), result.h_total, eps)
    ref = None
    if reference_calrec:
        hm, hs = calibrated_rectify(rig.calibrated_rig(intrinsics))
        ref = pap(clean, hm, hs, eps)
    return score, ref, result, corr, gt


def small_drift_sweep(
    axis: str,
    values: Iterable[float] | None = None,
    scene: SceneSpec = SceneSpec(),
    cfg: RansacConfig = RansacConfig(),
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
    reference_calrec: bool = False,
) -> list[SweepRow]:
    """Vary one perturbation at a time on a fixed scene; others stay at zero."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")
    values = SWEEP_GRIDS[axis] if values is None else values
    rows = []
    for v in values:
        rig = replace(RigPerturbation.perfect(), **{axis: float(v)})
        score, ref, *_ = evaluate_rig(rig, scene, cfg, intrinsics, reference_calrec)
        extra = dict(zip(("calrec_e1", "calrec_e2", "calrec_e3"), ref.pap)) if ref else {}
        rows.append(SweepRow(axis, float(v), *score.pap, **extra))
    return rows


def write_sweep_csv(rows: Sequence[SweepRow], dest) -> None:
    """Write sweep rows as CSV to a path or an open text stream."""
    with_ref = any(r.calrec_e1 is not None for r in rows)
    header = ["axis", "value", "pap_e1", "pap_e2", "pap_e3"]
    if with_ref:
        header += ["calrec_e1", "calrec_e2", "calrec_e3"]
    if hasattr(dest, "write"):
        _write_sweep_rows(rows, header, dest)
    else:
        with open(dest, "w", newline="") as fh:
            _write_sweep_rows(rows, header, fh)


def _write_sweep_rows(rows, header, fh) -> None:
    w = csv.writer(fh)
    w.writerow(header)
    for r in rows:
        w.writerow([repr(getattr(r, h)) if h != "axis" else r.axis for h in header])


# ---------------------------------------------------------------- datasets


@dataclass(frozen=True)
class PairSpec:
    index: int
    perturbation_seed: int
    scene_seed: int
    texture_seed: int


def pair_spec(seed: int, index: int) -> PairSpec:
    return PairSpec(
        index, derive_seed(seed, index, 0), derive_seed(seed, index, 1), derive_seed(seed, index, 2)
    )


def write_pair(
    out_dir,
    spec: PairSpec,
    scene: SceneSpec,
    perfect: bool = False,
    render: bool = True,
    intrinsics: CameraIntrinsics = DEFAULT_INTRINSICS,
) -> RigPerturbation:
    """Write ``pair_<idx>/`` with images, correspondences, rig and ground truth."""
    rig = RigPerturbation.perfect() if perfect else sample_perturbation(spec.perturbation_seed)
    d = Path(out_dir) / f"pair_{spec.index:04d}"
    d.mkdir(parents=True, exist_ok=True)
    corr, gt = generate_correspondences(rig, replace(scene, seed=spec.scene_seed), intrinsics)
    corr.save(d / "corr.txt")
    (d / "rig.txt").write_text(rig.to_text(intrinsics))
    (d / "gt.txt").write_text(gt.to_text())
    if render:
        master, slave = render_pair(rig, spec.texture_seed, intrinsics)
        save_image(master, d / "master.png")
        save_image(slave, d / "slave.png")
    return rig


def _write_pair_job(args):
    return write_pair(*args)


def write_dataset(
    out_dir,
    n_pairs: int,
    seed: int,
    scene: SceneSpec = SceneSpec(),
    perfect: bool = False,
    render: bool = True,
    threads: int = 1,
) -> Path:
    """Generate ``n_pairs`` pairs plus a ``manifest.csv`` of seeds and perturbations."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    specs = [pair_spec(seed, i) for i in range(n_pairs)]
    jobs = [(out, s, scene, perfect, render) for s in specs]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            rigs = list(ex.map(_write_pair_job, jobs))
    else:
        rigs = [_write_pair_job(j) for j in jobs]
    names = [f.name for f in fields(RigPerturbation)]
    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "perturbation_seed", "scene_seed", "texture_seed", *names])
        for s, rig in zip(specs, rigs):
            w.writerow(
                [s.index, s.perturbation_seed, s.scene_seed, s.texture_seed]
                + [repr(getattr(rig, n)) for n in names]
            )
    return manifest
