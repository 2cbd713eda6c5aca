import numpy as np
import pytest

from selfrect.solver import CorrespondenceSet
from selfrect.synth import RigPerturbation, SceneSpec, generate_correspondences

ACCEPTANCE_LABELS = {
    "AC1": "pure-rotation exactness",
    "AC2": "small-drift corpus PAP",
    "AC3": "master NVD is zero",
    "AC4a": "mean slave NVD bound",
    "AC4b": "shear never raises slave NVD",
    "AC5": "shear/shift leave PAP bit-identical",
    "AC6": "shift postcondition",
    "AC7": "RANSAC robustness",
    "AC8": "least-squares oracle equivalence",
    "AC9": "sweep shape",
    "AC10": "estimation latency",
    "AC11": "end-to-end on rendered images",
    "AC12": "warp round-trip",
}
_results: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def record():
    """Store one pass/fail line for an acceptance criterion."""

    def _record(label: str, ok: bool, detail: str) -> bool:
        _results[label] = (bool(ok), detail)
        print(f"{'PASS' if ok else 'FAIL'} {label} {ACCEPTANCE_LABELS[label]}: {detail}")
        return bool(ok)

    return _record


def pytest_terminal_summary(terminalreporter):
    ran = [k for k in ACCEPTANCE_LABELS if k in _results]
    if not ran:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label, name in ACCEPTANCE_LABELS.items():
        if label in _results:
            ok, detail = _results[label]
            tr.write_line(f"{'PASS' if ok else 'FAIL'} {label} {name}: {detail}")
        else:
            tr.write_line(f"FAIL {label} {name}: not completed")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tilted_rig():
    return RigPerturbation(theta_x=1.5, theta_y=-2.0, theta_z=0.8, t_x=0.3, t_y=0.2, t_z=-0.4)


@pytest.fixture
def clean_pair(tilted_rig):
    corr, gt = generate_correspondences(tilted_rig, SceneSpec(n_points=200, noise_sigma=0.0, seed=5))
    return corr, gt


@pytest.fixture
def tiny_corr():
    m = np.array([[10.0, 20.0], [200.0, 40.0], [400.0, 300.0], [50.0, 500.0], [700.0, 650.0], [900.0, 100.0]])
    s = m + np.array([5.0, 1.0])
    return CorrespondenceSet(m, s, 960, 720)
