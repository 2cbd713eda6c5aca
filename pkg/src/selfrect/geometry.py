"""Homogeneous points, homographies and pinhole projection.

Pixel convention: (0, 0) is the centre of the top-left pixel, x grows to the
right and y grows downward, so the extreme pixel centres are ``w - 1`` and
``h - 1``. Angles at public interfaces are in degrees; lengths in millimetres.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateConfigurationError, ProjectionError

_H33_EPS = 1e-12
_DET_EPS = 1e-12
_DEPTH_EPS = 1e-9


class Point2H(NamedTuple):
    """A homogeneous image point ``(x, y, w)``; ``w == 0`` is a direction."""

    x: float
    y: float
    w: float = 1.0

    def normalized(self) -> "Point2H":
        if self.w == 0:
            raise ValueError("cannot normalize a point at infinity")
        return Point2H(self.x / self.w, self.y / self.w, 1.0)


class Point3(NamedTuple):
    X: float
    Y: float
    Z: float


def _check_finite(*values: float) -> None:
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"non-finite coordinate in {values!r}")


class Homography:
    """Immutable 3x3 projective transform, canonicalized so that h33 == 1.

    When |h33| is too small to divide by, the matrix is scaled by its
    largest-magnitude entry instead and ``canonical`` is False.
    """

    __slots__ = ("_m", "canonical")

    def __init__(self, matrix) -> None:
        m = np.array(matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise ValueError(f"homography must be 3x3, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("homography has non-finite entries")
        if abs(m[2, 2]) > _H33_EPS:
            if m[2, 2] != 1.0:
                m = m / m[2, 2]
            canonical = True
        else:
            m = m / m.flat[np.argmax(np.abs(m))]
            canonical = False
        if abs(np.linalg.det(m)) <= _DET_EPS:
            raise DegenerateConfigurationError("homography is not invertible")
        m.setflags(write=False)
        self._m = m
        self.canonical = canonical

    # constructors for the factor matrices

    @classmethod
    def identity(cls) -> "Homography":
        return cls(np.eye(3))

    @classmethod
    def translation(cls, tx: float, ty: float = 0.0) -> "Homography":
        return cls([[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]])

    @classmethod
    def vertical_alignment(cls, h21, h22, h23, h31, h32) -> "Homography":
        """Alignment factor: first row fixed at (1, 0, 0), h33 = 1."""
        return cls([[1.0, 0.0, 0.0], [h21, h22, h23], [h31, h32, 1.0]])

    @classmethod
    def shear(cls, s_a: float, s_b: float) -> "Homography":
        return cls([[s_a, s_b, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    def __matmul__(self, other: "Homography") -> "Homography":
        if not isinstance(other, Homography):
            return NotImplemented
        return Homography(self._m @ other._m)

    def inverse(self) -> "Homography":
        return Homography(np.linalg.inv(self._m))

    def __eq__(self, other) -> bool:
        return isinstance(other, Homography) and np.array_equal(self._m, other._m)

    def __hash__(self) -> int:
        return hash(self._m.tobytes())

    def __repr__(self) -> str:
        rows = "; ".join(" ".join(f"{v:.6g}" for v in row) for row in self._m)
        return f"Homography([{rows}])"

    def allclose(self, other: "Homography", atol: float = 1e-9) -> bool:
        return bool(np.allclose(self._m, other._m, rtol=0.0, atol=atol))

    def transform(self, xy) -> np.ndarray:
        """Apply to an (N, 2) array of pixel coordinates; returns (N, 2).

        Entries are written out component-wise (no BLAS) so that the result of
        a row depends only on that row of the matrix: matrices that share rows
        2 and 3 produce bit-identical y-coordinates.
        """
        xy = np.asarray(xy, dtype=np.float64)
        x, y = xy[..., 0], xy[..., 1]
        m = self._m
        w = m[2, 0] * x + m[2, 1] * y + m[2, 2]
        out = np.empty_like(xy)
        out[..., 0] = (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / w
        out[..., 1] = (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / w
        return out

    def denominators(self, xy) -> np.ndarray:
        xy = np.asarray(xy, dtype=np.float64)
        m = self._m
        return m[2, 0] * xy[..., 0] + m[2, 1] * xy[..., 1] + m[2, 2]

    def to_text(self) -> str:
        """Three rows of three whitespace-separated values, round-trip exact."""
        return "".join(" ".join(f"{v:.17g}" for v in row) + "\n" for row in self._m)

    @classmethod
    def from_text(cls, text: str) -> "Homography":
        rows = [line.split() for line in text.strip().splitlines() if line.strip()]
        if len(rows) != 3 or any(len(r) != 3 for r in rows):
            raise ValueError("homography text must be 3 lines of 3 numbers")
        return cls([[float(v) for v in r] for r in rows])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "Homography":
        with open(path) as fh:
            return cls.from_text(fh.read())


def apply_homography(h: Homography, p: Point2H) -> Point2H:
    """Map a homogeneous point; normalized unless the image is at infinity."""
    _check_finite(*p)
    x, y, w = h.matrix @ np.array([p.x, p.y, p.w], dtype=np.float64)
    if w == 0:
        return Point2H(float(x), float(y), 0.0)
    return Point2H(float(x / w), float(y / w), 1.0)


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image size must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    @classmethod
    def centered(cls, focal: float, width: int, height: int) -> "CameraIntrinsics":
        return cls(focal, focal, (width - 1) / 2, (height - 1) / 2, width, height)

    @property
    def K(self) -> np.ndarray:
        return np.array(
            [[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]]
        )

    @property
    def K_inv(self) -> np.ndarray:
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.cx / self.fx],
                [0.0, 1.0 / self.fy, -self.cy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )


def rotation_matrix(theta_x: float, theta_y: float, theta_z: float) -> np.ndarray:
    """Rz(theta_z) @ Ry(theta_y) @ Rx(theta_x), angles in degrees."""
    ax, ay, az = (math.radians(t) for t in (theta_x, theta_y, theta_z))
    cx, sx = math.cos(ax), math.sin(ax)
    cy, sy = math.cos(ay), math.sin(ay)
    cz, sz = math.cos(az), math.sin(az)
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rz = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    return rz @ ry @ rx


@dataclass(frozen=True)
class RigidPose:
    """World-to-camera transform: X_cam = rotation @ X_world + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        r = np.array(self.rotation, dtype=np.float64)
        t = np.array(self.translation, dtype=np.float64).reshape(3)
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not np.allclose(r.T @ r, np.eye(3), rtol=0.0, atol=1e-9):
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(r) - 1.0) > 1e-9:
            raise ValueError("rotation must have determinant +1")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidPose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_center(cls, rotation, center) -> "RigidPose":
        """Pose of a camera located at ``center`` (world frame)."""
        r = np.asarray(rotation, dtype=np.float64)
        return cls(r, -r @ np.asarray(center, dtype=np.float64))

    @property
    def center(self) -> np.ndarray:
        return -self.rotation.T @ self.translation


def project_points(K: CameraIntrinsics, pose: RigidPose, points) -> np.ndarray:
    """Vectorised projection of an (N, 3) array; raises if any point is behind."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    cam = pts @ pose.rotation.T + pose.translation
    z = cam[:, 2]
    if np.any(~(z > _DEPTH_EPS)):
        raise ProjectionError("point lies behind or on the camera plane")
    out = np.empty((len(pts), 2))
    out[:, 0] = K.fx * cam[:, 0] / z + K.cx
    out[:, 1] = K.fy * cam[:, 1] / z + K.cy
    return out


def project(K: CameraIntrinsics, pose: RigidPose, P: Point3 | Sequence[float]) -> Point2H:
    P = Point3(*P)
    _check_finite(*P)
    x, y = project_points(K, pose, [P])[0]
    return Point2H(float(x), float(y), 1.0)


def exact_rotation_homography(
    K_perfect: CameraIntrinsics, K_actual: CameraIntrinsics, rotation
) -> Homography:
    """Homography from the unrotated camera's pixels to the rotated camera's.

    Exact for two cameras sharing an optical centre: p'' ~ K'' R K'^-1 p'.
    """
    r = np.asarray(rotation, dtype=np.float64)
    return Homography(K_actual.K @ r @ K_perfect.K_inv)
