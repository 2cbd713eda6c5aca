"""Calibrated rectification from known camera parameters.

Both cameras are rotated to a common orientation whose x-axis is the baseline
and re-projected with the master intrinsics; each image gets
``K_new @ R_new @ R_old.T @ K_old^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfigurationError
from .geometry import CameraIntrinsics, Homography, RigidPose, rotation_matrix


@dataclass(frozen=True)
class CalibratedRig:
    """Master camera at the world origin; ``pose`` maps world to slave camera."""

    K_master: CameraIntrinsics
    K_slave: CameraIntrinsics
    pose: RigidPose

    def __post_init__(self) -> None:
        if np.linalg.norm(self.pose.center) == 0:
            raise DegenerateConfigurationError("camera centres coincide")

    @classmethod
    def from_text(cls, text: str) -> "CalibratedRig":
        """Parse the key=value rig record written by the synthetic generator."""
        vals: dict[str, float] = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"malformed rig line: {line!r}")
            vals[key.strip()] = float(value)
        try:
            width, height = int(vals["width"]), int(vals["height"])
            cams = [
                CameraIntrinsics(
                    vals[f"{who}_fx"], vals[f"{who}_fy"],
                    vals[f"{who}_cx"], vals[f"{who}_cy"], width, height,
                )
                for who in ("master", "slave")
            ]
            rot = rotation_matrix(vals["theta_x"], vals["theta_y"], vals["theta_z"])
            center = [vals["baseline"] + vals["t_x"], vals["t_y"], vals["t_z"]]
        except KeyError as exc:
            raise ValueError(f"rig record is missing {exc.args[0]!r}") from None
        return cls(cams[0], cams[1], RigidPose.from_center(rot, center))

    @classmethod
    def load(cls, path) -> "CalibratedRig":
        with open(path) as fh:
            return cls.from_text(fh.read())


def calibrated_rectify(rig: CalibratedRig) -> tuple[Homography, Homography]:
    """Rectifying homographies ``(h_master, h_slave)`` for a calibrated pair."""
    baseline = rig.pose.center  # master centre is the origin
    x_axis = baseline / np.linalg.norm(baseline)
    for name, axis in (("master", np.array([0.0, 0.0, 1.0])), ("slave", rig.pose.rotation[2])):
        if np.linalg.norm(np.cross(axis, x_axis)) < 1e-9:
            raise DegenerateConfigurationError(f"baseline is parallel to the {name} optical axis")
    y_axis = np.cross([0.0, 0.0, 1.0], x_axis)
    y_axis /= np.linalg.norm(y_axis)
    z_axis = np.cross(x_axis, y_axis)
    r_new = np.stack([x_axis, y_axis, z_axis])

    k_new = rig.K_master.K
    h_master = Homography(k_new @ r_new @ rig.K_master.K_inv)
    h_slave = Homography(k_new @ r_new @ rig.pose.rotation.T @ rig.K_slave.K_inv)
    return h_master, h_slave
