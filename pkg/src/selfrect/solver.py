"""Direct self-rectification: a single homography for the slave image.

The slave transform factors as ``H = Hk @ Hs @ Hy``:

* ``Hy`` aligns rows. Its first row is fixed to (1, 0, 0) and h33 = 1, leaving
  five unknowns that are found by linear regression of the master y-coordinates
  on the slave points, made robust with RANSAC.
* ``Hs`` is an x-only shear chosen to keep the image's edge bisectors
  perpendicular and at their original aspect ratio.
* ``Hk`` shifts horizontally so that the largest disparity becomes zero.

The master image is never transformed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    DegenerateConfigurationError,
    DistortionUndefinedError,
    InsufficientDataError,
    NoModelError,
)
from .geometry import Homography

MIN_PAIRS = 5
_SINGULAR_EPS = 1e-8
_DENOM_EPS = 1e-12

ShiftOver = Literal["inliers", "all"]


@dataclass(frozen=True)
class CorrespondenceSet:
    """Matched pixel pairs; row i of ``master`` corresponds to row i of ``slave``."""

    master: np.ndarray
    slave: np.ndarray
    width: int
    height: int

    def __post_init__(self) -> None:
        m = np.array(self.master, dtype=np.float64).reshape(-1, 2)
        s = np.array(self.slave, dtype=np.float64).reshape(-1, 2)
        if m.shape != s.shape:
            raise ValueError(f"master/slave shape mismatch: {m.shape} vs {s.shape}")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise ValueError("correspondences contain non-finite coordinates")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")
        m.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "master", m)
        object.__setattr__(self, "slave", s)

    def __len__(self) -> int:
        return len(self.master)

    def subset(self, selection) -> "CorrespondenceSet":
        return CorrespondenceSet(
            self.master[selection], self.slave[selection], self.width, self.height
        )

    def to_text(self) -> str:
        lines = [f"{len(self)} {self.width} {self.height}"]
        for (x, y), (xs, ys) in zip(self.master, self.slave):
            lines.append(f"{x:.17g} {y:.17g} {xs:.17g} {ys:.17g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "CorrespondenceSet":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty correspondence file")
        header = lines[0].split()
        if len(header) != 3:
            raise ValueError("header must be 'N width height'")
        n, width, height = (int(v) for v in header)
        if len(lines) - 1 != n:
            raise ValueError(f"header declares {n} pairs, found {len(lines) - 1}")
        data = np.array([[float(v) for v in ln.split()] for ln in lines[1:]])
        data = data.reshape(n, 4)
        return cls(data[:, :2], data[:, 2:], width, height)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "CorrespondenceSet":
        with open(path) as fh:
            return cls.from_text(fh.read())


@dataclass(frozen=True)
class RansacConfig:
    sample_size: int = 20
    max_iterations: int = 100
    inlier_threshold: float = 1.0
    seed: int = 0
    refit_on_inliers: bool = False

    def __post_init__(self) -> None:
        if self.sample_size < MIN_PAIRS:
            raise ValueError(f"sample_size must be >= {MIN_PAIRS}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.inlier_threshold > 0:
            raise ValueError("inlier_threshold must be positive")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class RansacResult:
    h_y: Homography
    inlier_mask: np.ndarray
    p_max: float
    iterations_used: int
    # best inlier ratio after each iteration
    history: np.ndarray = field(repr=False)


@dataclass
class SolveResult:
    h_y: Homography
    h_s: Homography
    h_k: Homography
    h_total: Homography
    inlier_mask: np.ndarray
    inlier_ratio: float
    shear: tuple[float, float]
    shift: float
    iterations_used: int

    @property
    def master_homography(self) -> Homography:
        """DSR never touches the master image."""
        return Homography.identity()

    def to_text(self) -> str:
        out = [
            f"p_max: {self.inlier_ratio!r}",
            f"s_a: {self.shear[0]!r}",
            f"s_b: {self.shear[1]!r}",
            f"k: {self.shift!r}",
            f"iterations_used: {self.iterations_used}",
            "inlier_mask: " + "".join("1" if b else "0" for b in self.inlier_mask),
        ]
        for name in ("h_y", "h_s", "h_k", "h_total"):
            out.append(f"{name}:")
            out.append(getattr(self, name).to_text().rstrip("\n"))
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SolveResult":
        lines = text.splitlines()
        scalars: dict[str, str] = {}
        mats: dict[str, Homography] = {}
        i = 0
        while i < len(lines):
            key, _, value = lines[i].partition(":")
            key, value = key.strip(), value.strip()
            if key in ("h_y", "h_s", "h_k", "h_total"):
                mats[key] = Homography.from_text("\n".join(lines[i + 1 : i + 4]))
                i += 4
                continue
            if key:
                scalars[key] = value
            i += 1
        mask = np.array([c == "1" for c in scalars["inlier_mask"]], dtype=bool)
        return cls(
            h_y=mats["h_y"],
            h_s=mats["h_s"],
            h_k=mats["h_k"],
            h_total=mats["h_total"],
            inlier_mask=mask,
            inlier_ratio=float(scalars["p_max"]),
            shear=(float(scalars["s_a"]), float(scalars["s_b"])),
            shift=float(scalars["k"]),
            iterations_used=int(scalars["iterations_used"]),
        )


def _fit_batch(master_y: np.ndarray, slave: np.ndarray):
    """Least-squares alignment rows for a batch of samples.

    ``master_y`` is (B, n), ``slave`` is (B, n, 2). Returns (h, ok) with h of
    shape (B, 5) holding (h21, h22, h23, h31, h32) in pixel units.

    Coordinates are centred and scaled before solving. The scaled unknowns
    are a linear reparametrisation of the pixel-space ones and the pixel
    constraint h33 = 1 is carried over exactly, so the minimiser is the same
    as that of the unnormalized sum of squared algebraic residuals.
    """
    b, n = master_y.shape
    xs, ys = slave[..., 0], slave[..., 1]
    cx = xs.mean(axis=1, keepdims=True)
    cy = ys.mean(axis=1, keepdims=True)
    rms = np.sqrt(((xs - cx) ** 2 + (ys - cy) ** 2).mean(axis=1, keepdims=True))
    s = np.where(rms > 0, math.sqrt(2.0) / np.where(rms > 0, rms, 1.0), 1.0)
    my = master_y.mean(axis=1, keepdims=True)
    sm = np.sqrt(((master_y - my) ** 2).mean(axis=1, keepdims=True))
    sm = np.where(sm > 0, sm, 1.0)

    xn = s * (xs - cx)
    yn_s = s * (ys - cy)
    yn = (master_y - my) / sm
    a = np.empty((b, n, 5))
    a[..., 0] = xn
    a[..., 1] = yn_s
    a[..., 2] = 1.0
    a[..., 3] = -yn * s * xs
    a[..., 4] = -yn * s * ys

    u, sv, vt = np.linalg.svd(a, full_matrices=False)
    ok = sv[:, -1] > _SINGULAR_EPS
    safe = np.where(ok[:, None], sv, 1.0)
    coef = np.einsum("bni,bn->bi", u, yn) / safe
    q = np.einsum("bji,bj->bi", vt, coef)

    s, cx, cy, my, sm = s[:, 0], cx[:, 0], cy[:, 0], my[:, 0], sm[:, 0]
    q31, q32 = q[:, 3], q[:, 4]
    q33 = 1.0 + s * (cx * q31 + cy * q32)
    # back to pixels: g2 = sm*q2 + my*q3, then h = g @ N with N = [[s,0,-s cx],[0,s,-s cy],[0,0,1]]
    g21 = sm * q[:, 0] + my * q31
    g22 = sm * q[:, 1] + my * q32
    g23 = sm * q[:, 2] + my * q33
    h = np.empty((b, 5))
    h[:, 0] = g21 * s
    h[:, 1] = g22 * s
    h[:, 2] = g23 - s * (cx * g21 + cy * g22)
    h[:, 3] = q31 * s
    h[:, 4] = q32 * s
    return h, ok & np.all(np.isfinite(h), axis=1)


def _hy_from_params(h) -> Homography:
    return Homography.vertical_alignment(*(float(v) for v in h))


def alignment_objective(h_y: Homography, corr: CorrespondenceSet) -> float:
    """Sum over pairs of (h2 . p' - (h3 . p') * y)^2, the linearised row error."""
    m = h_y.matrix
    xs, ys = corr.slave[:, 0], corr.slave[:, 1]
    r = (m[1, 0] * xs + m[1, 1] * ys + m[1, 2]) - (
        m[2, 0] * xs + m[2, 1] * ys + m[2, 2]
    ) * corr.master[:, 1]
    return float(np.dot(r, r))


def vertical_residuals(h_y: Homography, corr: CorrespondenceSet) -> np.ndarray:
    """|y_i - y~_i| where y~ is the row of the transformed slave point."""
    with np.errstate(divide="ignore", invalid="ignore"):
        yt = h_y.transform(corr.slave)[:, 1]
        res = np.abs(corr.master[:, 1] - yt)
    return np.where(np.isfinite(res), res, np.inf)


def fit_hy_least_squares(subset: CorrespondenceSet) -> Homography:
    """Closed-form row-alignment homography over every pair in ``subset``."""
    if len(subset) < MIN_PAIRS:
        raise InsufficientDataError(
            f"need at least {MIN_PAIRS} pairs to fit the alignment, got {len(subset)}"
        )
    h, ok = _fit_batch(subset.master[None, :, 1], subset.slave[None])
    if not ok[0]:
        raise DegenerateConfigurationError(
            "degenerate point configuration: alignment regression is rank deficient"
        )
    return _hy_from_params(h[0])


def _sample_indices(rng: np.random.Generator, n: int, m: int, t: int) -> np.ndarray:
    # t independent draws of m distinct indices: the m smallest of n random keys
    return np.argpartition(rng.random((t, n)), m - 1, axis=1)[:, :m]


def solve_hy_ransac(corr: CorrespondenceSet, cfg: RansacConfig) -> RansacResult:
    """Keep the sample fit with the largest share of inliers (earliest on ties).

    A pair is an inlier when its vertical residual is strictly below
    ``cfg.inlier_threshold``. If fewer than ``cfg.sample_size`` pairs are
    available, a single fit on all of them is used instead.
    """
    n = len(corr)
    if n < MIN_PAIRS:
        raise InsufficientDataError(
            f"need at least {MIN_PAIRS} correspondences, got {n}"
        )
    eps = cfg.inlier_threshold
    if n < cfg.sample_size:
        idx = np.arange(n)[None, :]
    else:
        rng = np.random.default_rng(cfg.seed)
        idx = _sample_indices(rng, n, cfg.sample_size, cfg.max_iterations)
    iterations = idx.shape[0]

    params, ok = _fit_batch(corr.master[idx, 1], corr.slave[idx])
    if not ok.any():
        raise NoModelError(f"all {iterations} candidate fits were degenerate")

    xs, ys = corr.slave[:, 0], corr.slave[:, 1]
    h21, h22, h23, h31, h32 = (params[:, j : j + 1] for j in range(5))
    with np.errstate(divide="ignore", invalid="ignore"):
        yt = (h21 * xs + h22 * ys + h23) / (h31 * xs + h32 * ys + 1.0)
        inl = np.abs(corr.master[:, 1] - yt) < eps
    counts = np.where(ok, inl.sum(axis=1), -1)
    best = int(np.argmax(counts))
    history = np.maximum.accumulate(np.maximum(counts, 0)) / n

    h_y = _hy_from_params(params[best])
    mask = vertical_residuals(h_y, corr) < eps
    if cfg.refit_on_inliers and mask.sum() >= MIN_PAIRS:
        try:
            refit = fit_hy_least_squares(corr.subset(mask))
        except DegenerateConfigurationError:
            pass
        else:
            h_y = refit
            mask = vertical_residuals(h_y, corr) < eps
    return RansacResult(
        h_y=h_y,
        inlier_mask=mask,
        p_max=float(mask.sum()) / n,
        iterations_used=iterations,
        history=history,
    )


def edge_midpoints(width: int, height: int) -> np.ndarray:
    """Midpoints a (top), b (right), c (bottom), d (left) of the image edges."""
    w1, h1 = width - 1.0, height - 1.0
    return np.array([[w1 / 2, 0.0], [w1, h1 / 2], [w1 / 2, h1], [0.0, h1 / 2]])


def compute_shear(h_y: Homography, width: int, height: int):
    """Shear (s_a, s_b) keeping the mapped edge bisectors perpendicular.

    Returns ``(s_a, s_b, Hs)``. The ratio of squared lengths of the sheared
    horizontal and vertical bisectors equals (w / h)^2. A mirrored solution
    (s_a < 0) is flipped to its positive counterpart.
    """
    mid = edge_midpoints(width, height)
    if np.any(np.abs(h_y.denominators(mid)) < _DENOM_EPS):
        raise DistortionUndefinedError("an edge midpoint maps to infinity")
    a, b, c, d = h_y.transform(mid)
    ux, uy = b - d
    vx, vy = a - c
    w, h = float(width), float(height)
    den = h * w * (uy * vx - ux * vy)
    if not abs(den) > _DENOM_EPS:
        raise DistortionUndefinedError("mapped edge bisectors are parallel")
    s_a = (h * h * uy * uy + w * w * vy * vy) / den
    s_b = (h * h * ux * uy + w * w * vx * vy) / -den
    if s_a < 0:
        s_a, s_b = -s_a, -s_b
    return float(s_a), float(s_b), Homography.shear(s_a, s_b)


def compute_shift(corr: CorrespondenceSet, h_pre: Homography, mask=None):
    """Horizontal shift making max(x~ - x) zero over the selected pairs.

    ``k`` is that maximum as measured after ``h_pre``; the returned shifting
    homography translates by ``-k`` so the maximum becomes exactly zero.
    """
    sel = np.ones(len(corr), dtype=bool) if mask is None else np.asarray(mask, bool)
    if not sel.any():
        raise InsufficientDataError("no correspondences selected for the shift")
    xt = h_pre.transform(corr.slave[sel])[:, 0]
    k = float(np.max(xt - corr.master[sel, 0]))
    return k, Homography.translation(-k)


def dsr(
    corr: CorrespondenceSet,
    cfg: RansacConfig | None = None,
    *,
    shift_over: ShiftOver = "inliers",
    shear: bool = True,
) -> SolveResult:
    """Estimate the slave rectifying homography from correspondences alone."""
    cfg = cfg or RansacConfig()
    if shift_over not in ("inliers", "all"):
        raise ValueError(f"shift_over must be 'inliers' or 'all', got {shift_over!r}")
    ransac = solve_hy_ransac(corr, cfg)
    if shear:
        s_a, s_b, h_s = compute_shear(ransac.h_y, corr.width, corr.height)
    else:
        s_a, s_b, h_s = 1.0, 0.0, Homography.identity()
    h_pre = h_s @ ransac.h_y
    mask = ransac.inlier_mask if shift_over == "inliers" else None
    k, h_k = compute_shift(corr, h_pre, mask)
    return SolveResult(
        h_y=ransac.h_y,
        h_s=h_s,
        h_k=h_k,
        h_total=h_k @ h_s @ ransac.h_y,
        inlier_mask=ransac.inlier_mask,
        inlier_ratio=ransac.p_max,
        shear=(s_a, s_b),
        shift=k,
        iterations_used=ransac.iterations_used,
    )
