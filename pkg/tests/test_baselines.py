import numpy as np
import pytest

from selfrect.baselines import CalibratedRig, calibrated_rectify
from selfrect.errors import DegenerateConfigurationError
from selfrect.geometry import CameraIntrinsics, Homography, RigidPose, project_points, rotation_matrix
from selfrect.metrics import pap, vertical_errors
from selfrect.solver import CorrespondenceSet
from selfrect.synth import DEFAULT_INTRINSICS, RigPerturbation, SceneSpec, generate_correspondences


@pytest.mark.parametrize(
    "rig",
    [
        RigPerturbation(),
        RigPerturbation(theta_x=2.0, theta_y=-3.0, theta_z=1.0),
        RigPerturbation(theta_x=-1.0, t_x=0.8, t_y=1.7, t_z=-3.2),
    ],
)
def test_known_calibration_aligns_rows(rig):
    corr, _ = generate_correspondences(rig, SceneSpec(noise_sigma=0.0, seed=2))
    hm, hs = calibrated_rectify(rig.calibrated_rig())
    assert vertical_errors(corr, hm, hs).max() < 1e-6


def test_perfect_rig_is_identity():
    hm, hs = calibrated_rectify(RigPerturbation().calibrated_rig())
    assert hm.allclose(hs, atol=1e-12)
    assert hm.allclose(Homography.identity(), atol=1e-12)


def test_noise_leaves_pap_high():
    rig = RigPerturbation(theta_y=2.0, t_y=0.5)
    corr, _ = generate_correspondences(rig, SceneSpec(noise_sigma=0.3, seed=4))
    hm, hs = calibrated_rectify(rig.calibrated_rig())
    assert pap(corr, hm, hs, (3.0,)).pap[0] == 1.0


def test_baseline_along_optical_axis():
    pose = RigidPose.from_center(np.eye(3), [0.0, 0.0, 10.0])
    with pytest.raises(DegenerateConfigurationError):
        calibrated_rectify(CalibratedRig(DEFAULT_INTRINSICS, DEFAULT_INTRINSICS, pose))


def test_coincident_centres():
    with pytest.raises(DegenerateConfigurationError):
        CalibratedRig(DEFAULT_INTRINSICS, DEFAULT_INTRINSICS, RigidPose.identity())


def test_rig_text_round_trip(tmp_path):
    rig = RigPerturbation(theta_x=0.5, theta_y=-1.25, theta_z=2.0, t_x=0.1, t_y=-0.2, t_z=0.3)
    path = tmp_path / "rig.txt"
    path.write_text(rig.to_text())
    cal = CalibratedRig.load(path)
    assert np.allclose(cal.pose.rotation, rotation_matrix(0.5, -1.25, 2.0))
    assert np.allclose(cal.pose.center, rig.center())
    assert cal.K_slave == DEFAULT_INTRINSICS


def test_rig_text_errors():
    with pytest.raises(ValueError, match="missing"):
        CalibratedRig.from_text("width=10\nheight=10\n")
    with pytest.raises(ValueError, match="malformed"):
        CalibratedRig.from_text("width 10\n")


def test_distinct_slave_intrinsics():
    k2 = CameraIntrinsics(820.0, 815.0, 470.0, 365.0, 960, 720)
    rig = CalibratedRig(DEFAULT_INTRINSICS, k2, RigidPose.from_center(rotation_matrix(1, 1, 1), [12, 0, 0]))
    hm, hs = calibrated_rectify(rig)
    rng = np.random.default_rng(0)
    pts = rng.uniform([-1500, -1000, 2000], [1500, 1000, 6000], (50, 3))
    corr = CorrespondenceSet(
        project_points(DEFAULT_INTRINSICS, RigidPose.identity(), pts), project_points(k2, rig.pose, pts), 960, 720
    )
    assert vertical_errors(corr, hm, hs).max() < 1e-6


def test_theta_z_rig_on_1000_points():
    rig = RigPerturbation(theta_z=2.0)
    corr, _ = generate_correspondences(rig, SceneSpec(n_points=1000, noise_sigma=0.0, seed=8))
    hm, hs = calibrated_rectify(rig.calibrated_rig())
    assert len(corr) == 1000 and vertical_errors(corr, hm, hs).max() < 1e-6


def test_wrong_calibration_lowers_pap():
    rig = RigPerturbation(theta_x=1.0, theta_y=-2.0, theta_z=1.5)
    corr, _ = generate_correspondences(rig, SceneSpec(noise_sigma=0.3, seed=5))
    true = pap(corr, *calibrated_rectify(rig.calibrated_rig()), (1.0,)).pap[0]
    stale = RigPerturbation(theta_x=1.0, theta_y=-1.0, theta_z=1.5)
    wrong = pap(corr, *calibrated_rectify(stale.calibrated_rig()), (1.0,)).pap[0]
    assert wrong < true - 0.1


def test_dsr_after_calrec_does_not_hurt():
    from selfrect.solver import dsr

    eps = (1.0, 2.0, 3.0)
    for i in range(5):
        rig = RigPerturbation(theta_x=0.5 * i, theta_y=-1.0, t_y=0.3 * i, t_z=-0.5)
        corr, _ = generate_correspondences(rig, SceneSpec(noise_sigma=0.3, outlier_fraction=0.1, seed=i))
        hm, hs = calibrated_rectify(rig.calibrated_rig())
        cal = pap(corr, hm, hs, eps).pap
        pre = CorrespondenceSet(hm.transform(corr.master), hs.transform(corr.slave), corr.width, corr.height)
        both = pap(pre, Homography.identity(), dsr(pre).h_total, eps).pap
        assert all(b >= c - 0.01 for b, c in zip(both, cal))
