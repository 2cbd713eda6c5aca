"""Acceptance suite: each test checks one criterion at its stated tolerance
and records a PASS/FAIL line that is repeated in the terminal summary."""

import time
from dataclasses import replace

import numpy as np
import pytest
from scipy.ndimage import binary_erosion
from scipy.optimize import least_squares

from selfrect.features import match_images
from selfrect.geometry import Homography
from selfrect.imaging import warp
from selfrect.metrics import nvd, pap, vertical_errors
from selfrect.solver import (
    RansacConfig,
    dsr,
    fit_hy_least_squares,
    solve_hy_ransac,
)
from selfrect.synth import (
    RigPerturbation,
    SceneSpec,
    derive_seed,
    generate_correspondences,
    render_pair,
    rendered_ground_truth,
    sample_perturbation,
    small_drift_sweep,
)

W, H = 960, 720
IDENT = Homography.identity()
EPS = (1.0, 2.0, 3.0)


def _random_rotation_rig(rng):
    tx, ty, tz = rng.uniform(-3.0, 3.0, size=3)
    return RigPerturbation(theta_x=tx, theta_y=ty, theta_z=tz)


@pytest.fixture(scope="module")
def corpus():
    """200 pairs over the full perturbation ranges, sigma 0.3 px, 10% outliers."""
    t0 = time.perf_counter()
    pairs = []
    for i in range(200):
        rig = sample_perturbation(derive_seed(2, i, 0))
        scene = SceneSpec(n_points=200, seed=derive_seed(2, i, 1), noise_sigma=0.3, outlier_fraction=0.1)
        corr, gt = generate_correspondences(rig, scene)
        pairs.append((rig, corr, gt, dsr(corr)))
    return pairs, time.perf_counter() - t0


def test_pure_rotation_is_recovered_exactly(record):
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    worst, min_pap = 0.0, 1.0
    for i in range(100):
        rig = _random_rotation_rig(rng)
        corr, _ = generate_correspondences(rig, SceneSpec(n_points=200, noise_sigma=0.0, seed=1000 + i))
        res = dsr(corr)
        worst = max(worst, float(vertical_errors(corr, IDENT, res.h_total).max()))
        min_pap = min(min_pap, pap(corr, IDENT, res.h_total, (1.0,)).pap[0])
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and min_pap == 1.0 and elapsed < 5.0
    record("AC1", ok, f"max residual {worst:.2e} px, min PAP(1) {min_pap}, {elapsed:.2f} s")
    assert ok


def test_corpus_pap_floors_and_monotonicity(corpus, record):
    pairs, gen_time = corpus
    t0 = time.perf_counter()
    scores = []
    for _, corr, gt, res in pairs:
        scores.append(pap(corr.subset(gt.inlier), IDENT, res.h_total, EPS).pap)
    scores = np.array(scores)
    elapsed = gen_time + time.perf_counter() - t0
    mean = scores.mean(axis=0)
    monotone = bool(np.all(np.diff(scores, axis=1) >= 0))
    ok = mean[0] >= 0.75 and mean[2] >= 0.93 and monotone and elapsed < 60.0
    record(
        "AC2",
        ok,
        f"mean PAP {mean[0]:.4f}/{mean[1]:.4f}/{mean[2]:.4f}, monotone {monotone}, {elapsed:.1f} s",
    )
    assert ok


def test_master_transform_never_distorts(corpus, record):
    pairs, _ = corpus
    structural = all(res.master_homography == IDENT for *_, res in pairs)
    values = [nvd(res.master_homography, W, H) for *_, res in pairs]
    ok = structural and all(v == 0.0 for v in values)
    record("AC3", ok, f"identity on all {len(pairs)} runs: {structural}, max NVD {max(values)}")
    assert ok


def test_mean_slave_distortion_bound(corpus, record):
    pairs, _ = corpus
    mean = float(np.mean([nvd(res.h_total, W, H) for *_, res in pairs]))
    ok = mean <= 0.20
    record("AC4a", ok, f"mean slave NVD {mean:.4f}")
    assert ok


def test_shear_never_increases_slave_distortion(corpus, record):
    pairs, _ = corpus
    worse = []
    for i, (_, corr, _, res) in enumerate(pairs):
        with_shear = nvd(res.h_total, W, H)
        without = nvd(dsr(corr, shear=False).h_total, W, H)
        if not (with_shear <= without or abs(with_shear - without) <= 1e-9):
            worse.append(with_shear - without)
    ok = not worse
    detail = f"{len(worse)}/{len(pairs)} pairs worse with shear"
    if worse:
        detail += f" (largest increase {max(worse):.4f})"
    record("AC4b", ok, detail)
    assert ok


def test_shear_and_shift_leave_pap_bit_identical(record):
    rng = np.random.default_rng(505)
    mismatches = 0
    for i in range(100):
        rig = sample_perturbation(derive_seed(5, i))
        scene = SceneSpec(seed=derive_seed(5, i, 1), noise_sigma=float(rng.uniform(0, 1)), outlier_fraction=0.1)
        corr, _ = generate_correspondences(rig, scene)
        res = dsr(corr)
        stages = [res.h_y, res.h_s @ res.h_y, res.h_total]
        reports = [pap(corr, IDENT, h, EPS) for h in stages]
        errors = [vertical_errors(corr, IDENT, h) for h in stages]
        same = reports[0] == reports[1] == reports[2]
        same &= all(np.array_equal(errors[0], e) for e in errors[1:])
        mismatches += not same
    ok = mismatches == 0
    record("AC5", ok, f"{100 - mismatches}/100 solves identical")
    assert ok


def test_shift_zeroes_maximum_inlier_disparity(corpus, record):
    pairs, _ = corpus
    worst = 0.0
    for _, corr, _, res in pairs:
        m = res.inlier_mask
        d = res.h_total.transform(corr.slave[m])[:, 0] - corr.master[m, 0]
        worst = max(worst, abs(float(d.max())))
    ok = worst <= 1e-9
    record("AC6", ok, f"max |max disparity| {worst:.2e}")
    assert ok


def test_ransac_recovers_outlier_free_fit(record):
    # minimal samples: with 30% contamination a 20-pair sample is clean with
    # probability ~1e-3, so only the minimal sample size makes this attainable
    cfg = RansacConfig(sample_size=5, max_iterations=100, inlier_threshold=1.0)
    hits, errs = 0, []
    for i in range(100):
        rig = replace(sample_perturbation(derive_seed(7, i, 0)), t_y=0.0, t_z=0.0)
        scene = SceneSpec(
            n_points=200, seed=derive_seed(7, i, 1), noise_sigma=0.0, outlier_fraction=0.3, outlier_min_offset=10.0
        )
        corr, gt = generate_correspondences(rig, scene)
        ref = fit_hy_least_squares(corr.subset(gt.inlier))
        got = solve_hy_ransac(corr, replace(cfg, seed=i)).h_y
        err = float(np.abs(got.matrix - ref.matrix).max())
        errs.append(err)
        hits += err < 1e-4
    ok = hits >= 98
    record("AC7", ok, f"{hits}/100 trials within 1e-4 (median entry error {np.median(errs):.1e})")
    assert ok


def _iterative_fit(corr):
    """Gauss-Newton/LM on the summed squared algebraic row error, from identity."""
    xs, ys = corr.slave[:, 0], corr.slave[:, 1]
    y = corr.master[:, 1]

    def residual(p):
        h21, h22, h23, h31, h32 = p
        return (h21 * xs + h22 * ys + h23) - (h31 * xs + h32 * ys + 1.0) * y

    def jacobian(p):
        return np.stack([xs, ys, np.ones_like(xs), -xs * y, -ys * y], axis=1)

    sol = least_squares(
        residual,
        np.array([0.0, 1.0, 0.0, 0.0, 0.0]),
        jac=jacobian,
        method="lm",
        x_scale="jac",
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    return sol.x


def test_closed_form_matches_iterative_minimizer(record):
    rng = np.random.default_rng(808)
    worst = 0.0
    for i in range(50):
        rig = sample_perturbation(derive_seed(8, i))
        corr, _ = generate_correspondences(rig, SceneSpec(n_points=200, seed=derive_seed(8, i, 1)))
        sub = corr.subset(rng.choice(len(corr), 20, replace=False))
        m = fit_hy_least_squares(sub).matrix
        closed = np.array([m[1, 0], m[1, 1], m[1, 2], m[2, 0], m[2, 1]])
        worst = max(worst, float(np.abs(closed - _iterative_fit(sub)).max()))
    ok = worst < 1e-6
    record("AC8", ok, f"max component difference {worst:.2e}")
    assert ok


def test_sweep_shape(record):
    t0 = time.perf_counter()
    sweeps = {a: small_drift_sweep(a) for a in ("theta_x", "theta_y", "theta_z", "t_y", "t_z")}
    elapsed = time.perf_counter() - t0
    drops = {}
    for a in ("theta_x", "theta_y", "theta_z"):
        by = {r.value: r.pap_e1 for r in sweeps[a]}
        drops[a] = abs(by[3.0] - by[0.0])
    ty = {r.value: r.pap_e1 for r in sweeps["t_y"]}
    tz = {r.value: r.pap_e1 for r in sweeps["t_z"]}
    order = all(ty[m] <= tz[m] for m in (2.0, 3.0, 4.0))
    ok = max(drops.values()) <= 0.05 and order and elapsed < 120.0
    detail = (
        f"max rotation drop {max(drops.values()):.3f}; "
        + ", ".join(f"t={m:g}: {ty[m]:.3f}<={tz[m]:.3f}" for m in (2.0, 3.0, 4.0))
        + f"; {elapsed:.1f} s"
    )
    record("AC9", ok, detail)
    assert ok


def test_estimation_latency(record):
    rig = sample_perturbation(derive_seed(10))
    corr, _ = generate_correspondences(rig, SceneSpec(n_points=500, seed=10, outlier_fraction=0.1))
    cfg = RansacConfig(sample_size=20, max_iterations=100)
    dsr(corr, cfg)  # warm-up
    times = []
    for _ in range(100):
        t0 = time.perf_counter()
        dsr(corr, cfg)
        times.append(time.perf_counter() - t0)
    median_ms = float(np.median(times)) * 1e3
    ok = median_ms < 10.0
    record("AC10", ok, f"median {median_ms:.2f} ms over 100 runs (N=500, M=20, T=100)")
    assert ok


@pytest.mark.slow
def test_end_to_end_on_rendered_pairs(record):
    worst_pap, fewest = 1.0, None
    for i in range(20):
        rig = sample_perturbation(derive_seed(11, i, 0))
        tex = derive_seed(11, i, 2)
        master, slave = render_pair(rig, tex)
        matches = match_images(master, slave)
        fewest = len(matches) if fewest is None else min(fewest, len(matches))
        res = dsr(matches)
        truth = rendered_ground_truth(rig, tex, n_points=500, seed=i)
        worst_pap = min(worst_pap, pap(truth, IDENT, res.h_total, (1.0,)).pap[0])
    ok = worst_pap >= 0.9 and fewest >= 100
    record("AC11", ok, f"min PAP(1) {worst_pap:.3f}, fewest matches {fewest}")
    assert ok


@pytest.mark.slow
def test_warp_round_trip(record):
    worst = 0.0
    for i in range(3):
        rig = sample_perturbation(derive_seed(12, i, 0))
        _, slave = render_pair(rig, derive_seed(12, i, 2))
        corr, _ = generate_correspondences(rig, SceneSpec(seed=derive_seed(12, i, 1)))
        h = dsr(corr).h_total
        back = warp(warp(slave, h), h.inverse())
        interior = binary_erosion(back.mask, iterations=2)
        err = np.abs(back.pixels.astype(float) - slave.pixels.astype(float))[interior]
        worst = max(worst, float(err.mean()))
    ok = worst <= 2.0
    record("AC12", ok, f"worst interior MAE {worst:.3f} levels over 3 renders")
    assert ok
