"""Exit criteria for the package, one test per criterion.

Run with ``pytest tests/test_acceptance.py``; a PASS/FAIL line per criterion is
printed in the terminal summary.
"""
import time

import numpy as np
import pytest

from ucmvdr import (
    CovarianceKind,
    CovarianceMatrix,
    DlPolicy,
    Scene,
    SourceSpec,
    UlaConfig,
    beampattern,
    cbf_weights,
    ensemble_covariance,
    find_zeros,
    generate_snapshots,
    load_config,
    mvdr_weights,
    project_zeros_to_unit_circle,
    run_experiment,
    sample_covariance,
    uc_mvdr,
    white_noise_gain,
    zeros_to_coefficients,
)
from ucmvdr.experiment import read_trials_csv
from ucmvdr.polynomial import zero_angles
from ucmvdr.rng import trial_seed

PAPER = load_config("paper_fig3.cfg")


@pytest.fixture(scope="module")
def paper_run(tmp_path_factory):
    """Full 5000-trial paper scenario, DL calibrated to the pilot mean UC WNG."""
    out = tmp_path_factory.mktemp("paper_fig3")
    config = PAPER.replace(output_dir=str(out))
    t0 = time.perf_counter()
    summary = run_experiment(config, workers=1)
    elapsed = time.perf_counter() - t0
    return config, summary, read_trials_csv(out / "trials.csv"), elapsed


def test_1_ensemble_wng(report):
    t0 = time.perf_counter()
    cfg = UlaConfig(11)
    scene = Scene([SourceSpec(3 / 11, 1e4)], 1.0)
    wng = white_noise_gain(mvdr_weights(ensemble_covariance(cfg, scene), cfg))
    elapsed = time.perf_counter() - t0
    ok = abs(wng - 10.473) <= 0.005 and elapsed < 1.0
    report(1, "ensemble WNG", ok, f"{wng:.6f} (10.473 +/- 0.005), {elapsed:.3f} s")
    assert ok


def test_2_unit_circle_constraint(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240)
    worst = 0.0
    for _ in range(200):
        n = int(rng.choice([5, 11, 21]))
        d = int(rng.integers(1, 4))
        scene = Scene(
            [SourceSpec(rng.uniform(-1, 1), 10 ** (rng.uniform(0, 50) / 10)) for _ in range(d)], 1.0
        )
        cfg = UlaConfig(n)
        w = mvdr_weights(ensemble_covariance(cfg, scene), cfg).weights
        worst = max(worst, np.max(np.abs(np.abs(find_zeros(w.conj())) - 1)))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 10
    report(2, "ensemble MVDR zeros on unit circle", ok, f"max ||z|-1| = {worst:.2e} (< 1e-6), {elapsed:.2f} s")
    assert ok


def test_3_wng_improvement(paper_run, report):
    config, summary, cols, elapsed = paper_run
    uc = summary.per_method["UC"]["mean_wng"]
    smi = summary.per_method["SMI"]["mean_wng"]
    ok = 5.0 <= uc <= 6.4 and 2.2 <= smi <= 3.1 and uc > 1.8 * smi and elapsed < 120
    report(3, "mean WNG UC vs SMI", ok,
           f"UC {uc:.3f} in [5.0, 6.4], SMI {smi:.3f} in [2.2, 3.1], ratio {uc / smi:.2f} > 1.8, "
           f"run {elapsed:.1f} s < 120 s")
    assert ok


def test_4_interferer_suppression(paper_run, report):
    config, summary, cols, _ = paper_run
    pm = summary.per_method
    med_uc, med_smi, med_dl = (pm[m]["median_out_power"] for m in ("UC", "SMI", "DL"))
    matched = abs(summary.dl_pilot_mean_wng - summary.dl_target_wng) <= 0.01 * summary.dl_target_wng
    ok = matched and med_uc <= med_smi / 10 and med_uc <= med_dl / 4
    report(4, "median interferer output power ordering", ok,
           f"SMI/UC = {med_smi / med_uc:.1f} (>= 10), DL/UC = {med_dl / med_uc:.1f} (>= 4), "
           f"delta = {summary.dl_factor:.4g}, DL pilot WNG {summary.dl_pilot_mean_wng:.3f} vs "
           f"target {summary.dl_target_wng:.3f}")
    assert ok


def test_5_per_trial_dominance(paper_run, report):
    _, _, cols, _ = paper_run
    uc = np.array(cols["UC"]["wng"])
    smi = np.array(cols["SMI"]["wng"])
    frac = float(np.mean(uc > smi))
    ok = frac >= 0.95
    report(5, "fraction of trials with UC WNG > SMI WNG", ok, f"{frac:.4f} (>= 0.95)")
    assert ok


def test_6_perfect_nulls(report):
    cfg, scene = PAPER.ula, PAPER.scene
    guard = 2 * np.pi / cfg.n_sensors
    worst_null, inside = 0.0, 0
    for i in range(PAPER.n_trials):
        scm = sample_covariance(generate_snapshots(cfg, scene, PAPER.n_snapshots, trial_seed(PAPER.seed, i)))
        res = uc_mvdr(scm, cfg)
        ang = zero_angles(res.zeros)
        inside += int(np.sum(np.abs(ang) < guard))
        out = np.unique(ang[np.abs(ang) > guard])
        if out.size:
            b = beampattern(res.weights, cfg, out / np.pi).values
            worst_null = max(worst_null, float(np.max(np.abs(b))))
    ok = worst_null < 1e-10 and inside == 0
    report(6, "UC perfect nulls / clear main lobe", ok,
           f"max |B| at projected zeros {worst_null:.2e} (< 1e-10), zeros inside main lobe: {inside}")
    assert ok


def test_7_round_trip_and_oracles(report):
    rng = np.random.default_rng(7)
    rt = 0.0
    for deg in range(1, 32):
        for _ in range(5):
            c = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
            c /= c[0]
            rt = max(rt, np.linalg.norm(zeros_to_coefficients(find_zeros(c)) - c) / np.linalg.norm(c))

    cbf_err = 0.0
    for n in (2, 5, 11, 21, 32):
        for u0 in (0.0, 0.37, -0.8):
            cfg = UlaConfig(n, look_direction_u=u0)
            w = mvdr_weights(CovarianceMatrix(np.eye(n, dtype=complex), CovarianceKind.ENSEMBLE), cfg)
            cbf_err = max(cbf_err, np.max(np.abs(w.weights - cbf_weights(cfg).weights)))

    x = generate_snapshots(UlaConfig(11), Scene(), 10**6, seed=12345).data
    scm_err = np.linalg.norm(sample_covariance(x).matrix - np.eye(11)) / np.linalg.norm(np.eye(11))

    from ucmvdr import kernels
    idem = True
    for _ in range(100):
        n = int(rng.integers(2, 33))
        a = rng.uniform(-np.pi, np.pi, n - 1)
        once = kernels.project_angles(a, 0.0, 2 * np.pi / n)
        idem &= np.array_equal(kernels.project_angles(once, 0.0, 2 * np.pi / n), once)
        z = project_zeros_to_unit_circle(rng.uniform(0.1, 3, n - 1) * np.exp(1j * a), n)
        idem &= np.array_equal(zero_angles(z), zero_angles(project_zeros_to_unit_circle(z, n))) or \
            np.allclose(project_zeros_to_unit_circle(z, n), z, rtol=0, atol=4e-16)

    ok = rt < 1e-7 and cbf_err < 1e-12 and scm_err < 0.01 and idem
    report(7, "round trip and oracle suites", ok,
           f"round trip {rt:.1e} (< 1e-7), MVDR(I) vs CBF {cbf_err:.1e} (< 1e-12), "
           f"SCM(1e6) rel err {scm_err:.4f} (< 0.01), projection idempotent: {idem}")
    assert ok


def test_8_determinism_across_workers(tmp_path, report):
    base = PAPER.replace(n_trials=100, dl_policy=DlPolicy("match_mean_wng", pilot_trials=200))
    a = base.replace(output_dir=str(tmp_path / "w1"))
    b = base.replace(output_dir=str(tmp_path / "w3"))
    run_experiment(a, workers=1)
    run_experiment(b, workers=3)
    same = (tmp_path / "w1" / "trials.csv").read_bytes() == (tmp_path / "w3" / "trials.csv").read_bytes()
    report(8, "byte-identical trials.csv across worker counts", same, "1 vs 3 worker processes")
    assert same
