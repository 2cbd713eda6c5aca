"""FAST-9 corners, upright BRIEF-256 descriptors and mutual Hamming matching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imaging import Image
from .solver import CorrespondenceSet

MARGIN = 16
PATCH = 31
N_BITS = 256
BOX_RADIUS = 2  # 5x5 smoothing box

# Bresenham circle of radius 3, clockwise from 12 o'clock
CIRCLE = np.array(
    [
        (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
        (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
    ]
)


def _brief_pattern(seed: int = 0x5EED) -> np.ndarray:
    """(256, 4) integer offsets (ax, ay, bx, by), isotropic Gaussian sigma = 31/5."""
    rng = np.random.default_rng(seed)
    half = PATCH // 2
    pts = rng.normal(0.0, PATCH / 5.0, size=(N_BITS, 4))
    return np.clip(np.rint(pts), -half, half).astype(np.intp)


BRIEF_PATTERN = _brief_pattern()
BRIEF_PATTERN.setflags(write=False)


@dataclass(frozen=True)
class Keypoint:
    x: int
    y: int
    score: float


@dataclass(frozen=True)
class BinaryDescriptor:
    bits: bytes  # 32 bytes, bit j of the descriptor is bit (7 - j % 8) of byte j // 8

    def __post_init__(self) -> None:
        if len(self.bits) != N_BITS // 8:
            raise ValueError("descriptor must hold exactly 256 bits")

    def distance(self, other: "BinaryDescriptor") -> int:
        x = np.bitwise_xor(
            np.frombuffer(self.bits, np.uint8), np.frombuffer(other.bits, np.uint8)
        )
        return int(np.unpackbits(x).sum())


def _gray(img: Image | np.ndarray) -> np.ndarray:
    if isinstance(img, Image):
        return img.gray()
    return np.asarray(img, dtype=np.float64)


def _arc_of_nine(flags: np.ndarray) -> np.ndarray:
    """flags: (16, n) bool; True where some 9 circularly contiguous are set."""
    f = np.concatenate([flags, flags[:8]]).astype(np.int16)
    c = np.concatenate([np.zeros((1, f.shape[1]), np.int16), np.cumsum(f, axis=0)])
    windows = c[9:25] - c[0:16]
    return (windows == 9).any(axis=0)


def fast_scores(img: Image | np.ndarray, threshold: float = 20.0) -> np.ndarray:
    """Corner score map (0 for non-corners), zero within MARGIN of the border."""
    g = _gray(img)
    h, w = g.shape
    score = np.zeros((h, w))
    if h <= 2 * MARGIN or w <= 2 * MARGIN:
        return score
    m = MARGIN
    c = g[m : h - m, m : w - m]

    def ring(k):
        dx, dy = CIRCLE[k]
        return g[m + dy : h - m + dy, m + dx : w - m + dx]

    # an arc of 9 always covers at least two compass points
    nb = np.zeros(c.shape, np.int8)
    nd = np.zeros(c.shape, np.int8)
    for k in (0, 4, 8, 12):
        r = ring(k)
        nb += r > c + threshold
        nd += r < c - threshold
    cy, cx = np.nonzero((nb >= 2) | (nd >= 2))
    if len(cy) == 0:
        return score
    centre = c[cy, cx]
    vals = np.stack([g[cy + m + dy, cx + m + dx] for dx, dy in CIRCLE])
    bright = vals > centre + threshold
    dark = vals < centre - threshold
    corner = _arc_of_nine(bright) | _arc_of_nine(dark)
    sb = np.where(bright, vals - centre - threshold, 0.0).sum(axis=0)
    sd = np.where(dark, centre - vals - threshold, 0.0).sum(axis=0)
    s = np.maximum(sb, sd)
    score[cy[corner] + m, cx[corner] + m] = s[corner]
    return score


def _non_max_suppress(score: np.ndarray) -> np.ndarray:
    padded = np.pad(score, 1)
    h, w = score.shape
    keep = score > 0
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            keep &= score >= padded[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w]
    return keep


def detect(img: Image | np.ndarray, max_keypoints: int = 2000, threshold: float = 20.0) -> list[Keypoint]:
    """FAST-9 corners after 3x3 non-maximum suppression, strongest first."""
    score = fast_scores(img, threshold)
    ys, xs = np.nonzero(_non_max_suppress(score))
    s = score[ys, xs]
    order = np.argsort(-s, kind="stable")[:max_keypoints]
    return [Keypoint(int(xs[i]), int(ys[i]), float(s[i])) for i in order]


def _box_sums(g: np.ndarray) -> np.ndarray:
    r = BOX_RADIUS
    p = np.pad(g, r + 1, mode="edge")
    if np.issubdtype(p.dtype, np.integer):
        p = p.astype(np.int64)
    ii = np.cumsum(np.cumsum(p, axis=0), axis=1)
    k = 2 * r + 1
    # sums over k x k windows, aligned so out[y, x] is centred on g[y, x]
    return ii[k:, k:] - ii[:-k, k:] - ii[k:, :-k] + ii[:-k, :-k]


def _smoothed(img: Image | np.ndarray) -> np.ndarray:
    if isinstance(img, Image) and img.channels == 1:
        return _box_sums(img.pixels.astype(np.int64))  # exact integer sums
    return _box_sums(_gray(img))


def _check_margin(xs: np.ndarray, ys: np.ndarray, w: int, h: int) -> None:
    bad = (xs < MARGIN) | (ys < MARGIN) | (xs > w - 1 - MARGIN) | (ys > h - 1 - MARGIN)
    if bad.any():
        raise ValueError(f"keypoint closer than {MARGIN} px to the image border")


def describe_all(img: Image | np.ndarray, keypoints) -> np.ndarray:
    """Packed descriptors, shape (n, 32) uint8."""
    sm = _smoothed(img)
    h, w = sm.shape
    xs = np.array([kp.x for kp in keypoints], dtype=np.intp)
    ys = np.array([kp.y for kp in keypoints], dtype=np.intp)
    if len(xs) == 0:
        return np.zeros((0, N_BITS // 8), np.uint8)
    _check_margin(xs, ys, w, h)
    ax, ay, bx, by = BRIEF_PATTERN.T
    a = sm[ys[:, None] + ay, xs[:, None] + ax]
    b = sm[ys[:, None] + by, xs[:, None] + bx]
    return np.packbits(a > b, axis=1)


def describe(img: Image | np.ndarray, kp: Keypoint) -> BinaryDescriptor:
    return BinaryDescriptor(describe_all(img, [kp])[0].tobytes())


def hamming_matrix(desc_a: np.ndarray, desc_b: np.ndarray) -> np.ndarray:
    a = np.unpackbits(np.asarray(desc_a, np.uint8), axis=1).astype(np.float32)
    b = np.unpackbits(np.asarray(desc_b, np.uint8), axis=1).astype(np.float32)
    d = a.sum(1)[:, None] + b.sum(1)[None, :] - 2.0 * (a @ b.T)
    return np.rint(d).astype(np.int32)


def _best_two(d: np.ndarray):
    best = np.argmin(d, axis=1)
    d1 = d[np.arange(len(d)), best]
    if d.shape[1] > 1:
        d2 = np.partition(d, 1, axis=1)[:, 1]
    else:
        d2 = np.full(len(d), np.iinfo(np.int32).max)
    return best, d1, d2


def match_indices(desc_a, desc_b, max_distance: int = 64, ratio: float = 0.8) -> np.ndarray:
    """(n, 2) index pairs: mutual nearest neighbours passing both filters."""
    if len(desc_a) == 0 or len(desc_b) == 0:
        return np.zeros((0, 2), np.intp)
    d = hamming_matrix(desc_a, desc_b)
    best_ab, d1_a, d2_a = _best_two(d)
    best_ba, d1_b, d2_b = _best_two(d.T)
    ia = np.arange(len(d))
    jb = best_ab
    ok = best_ba[jb] == ia
    ok &= d1_a <= max_distance
    ok &= d1_a <= ratio * d2_a
    ok &= d1_b[jb] <= ratio * d2_b[jb]
    return np.stack([ia[ok], jb[ok]], axis=1)


def match(
    desc_a,
    desc_b,
    kps_a,
    kps_b,
    width: int,
    height: int,
    max_distance: int = 64,
    ratio: float = 0.8,
) -> CorrespondenceSet:
    """Correspondences with the first image as master."""
    if not kps_a or not kps_b:
        raise ValueError("matching needs non-empty keypoint lists")
    if isinstance(desc_a, (list, tuple)):
        desc_a = np.stack([np.frombuffer(d.bits, np.uint8) for d in desc_a])
    if isinstance(desc_b, (list, tuple)):
        desc_b = np.stack([np.frombuffer(d.bits, np.uint8) for d in desc_b])
    pairs = match_indices(desc_a, desc_b, max_distance, ratio)
    pa = np.array([(kps_a[i].x, kps_a[i].y) for i in pairs[:, 0]], dtype=np.float64)
    pb = np.array([(kps_b[j].x, kps_b[j].y) for j in pairs[:, 1]], dtype=np.float64)
    return CorrespondenceSet(pa.reshape(-1, 2), pb.reshape(-1, 2), width, height)


def match_images(
    master: Image,
    slave: Image,
    max_keypoints: int = 2000,
    threshold: float = 20.0,
    max_distance: int = 64,
    ratio: float = 0.8,
) -> CorrespondenceSet:
    """Detect, describe and match; the correspondence source for image pairs."""
    if (master.width, master.height) != (slave.width, slave.height):
        raise ValueError("master and slave images must have the same size")
    ka = detect(master, max_keypoints, threshold)
    kb = detect(slave, max_keypoints, threshold)
    if not ka or not kb:
        return CorrespondenceSet(np.zeros((0, 2)), np.zeros((0, 2)), master.width, master.height)
    da = describe_all(master, ka)
    db = describe_all(slave, kb)
    return match(da, db, ka, kb, master.width, master.height, max_distance, ratio)
