"""Self-rectification of dual-lens cameras from feature correspondences alone."""

from .baselines import CalibratedRig, calibrated_rectify
from .errors import (
    DegenerateConfigurationError,
    DistortionUndefinedError,
    GenerationError,
    ImageFormatError,
    InsufficientDataError,
    NoModelError,
    ProjectionError,
    RectificationError,
)
from .geometry import (
    CameraIntrinsics,
    Homography,
    Point2H,
    Point3,
    RigidPose,
    apply_homography,
    project,
    rotation_matrix,
)
from .imaging import Image, load_image, save_image, warp
from .metrics import RectificationReport, evaluate, nvd, pap
from .solver import (
    CorrespondenceSet,
    RansacConfig,
    SolveResult,
    dsr,
    fit_hy_least_squares,
    solve_hy_ransac,
)

__version__ = "0.1.0"

__all__ = [
    "CalibratedRig",
    "CameraIntrinsics",
    "CorrespondenceSet",
    "DegenerateConfigurationError",
    "DistortionUndefinedError",
    "GenerationError",
    "Homography",
    "Image",
    "ImageFormatError",
    "InsufficientDataError",
    "NoModelError",
    "Point2H",
    "Point3",
    "ProjectionError",
    "RansacConfig",
    "RectificationError",
    "RectificationReport",
    "RigidPose",
    "SolveResult",
    "apply_homography",
    "calibrated_rectify",
    "dsr",
    "evaluate",
    "fit_hy_least_squares",
    "load_image",
    "nvd",
    "pap",
    "project",
    "rotation_matrix",
    "save_image",
    "solve_hy_ransac",
    "warp",
]
