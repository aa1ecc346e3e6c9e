"""One test per acceptance criterion; each records a PASS/FAIL summary line.

Tolerances and replicate counts are the pinned acceptance values. Run with
``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section of the terminal summary.
"""

from time import perf_counter

import numpy as np
import pytest
from scipy.stats import spearmanr

from pwspec import kernels, local_periodograms, periodogram
from pwspec.inference import bayesian_ci, stationarity_test
from pwspec.periodogram import dft_power_direct, dft_power_fft
from pwspec.selection import gacv_stationary, loocv_ckl, select
from pwspec.simulation import (AR3, BenchmarkConfig, ProcessSpec, benchmark, gen_arma,
                               gen_locally_stationary, gen_locally_stationary_direct, ls1_g,
                               ls2_g)

pytestmark = pytest.mark.slow


def test_kernel_exactness(acceptance):
    t0 = perf_counter()
    rng = np.random.default_rng(1)
    w = rng.uniform(size=20)
    diag_err = float(np.max(np.abs(kernels.r1(w, w) - 1 / 720)))
    b4_err = abs(float(kernels.b4(0.0)) + 1 / 30)
    worst = np.inf
    for _ in range(50):
        n = int(rng.integers(5, 60))
        wg, ug = rng.uniform(size=n), rng.uniform(size=n)
        theta = 10.0 ** rng.uniform(-3, 2, size=4)
        G = kernels.gram_matrix(wg, ug, theta)
        worst = min(worst, np.linalg.eigvalsh(G).min() / np.linalg.norm(G, 2))
    ok = diag_err < 1e-12 and b4_err < 1e-12 and worst >= -1e-8
    assert acceptance(1, "kernel exactness", ok,
                      f"|r1(w,w)-1/720| {diag_err:.1e}, |b4(0)+1/30| {b4_err:.1e}, "
                      f"min eig/||G|| {worst:.1e}", perf_counter() - t0, 1)


def test_parseval_and_fft(acceptance):
    t0 = perf_counter()
    rng = np.random.default_rng(2)
    pars, fft = 0.0, 0.0
    for _ in range(100):
        x = rng.standard_normal(int(rng.integers(8, 400))) * rng.uniform(0.1, 10)
        y_fft, y_dir = dft_power_fft(x), dft_power_direct(x)
        pars = max(pars, abs(y_fft.sum() - x @ x) / (x @ x))
        fft = max(fft, float(np.max(np.abs(y_fft - y_dir)) / np.max(y_dir)))
    ok = pars < 1e-9 and fft < 1e-9
    assert acceptance(2, "Parseval and FFT path", ok,
                      f"max Parseval rel err {pars:.1e}, max FFT-direct rel err {fft:.1e}",
                      perf_counter() - t0, 5)


def test_gacv_tracks_loocv(acceptance):
    t0 = perf_counter()
    lams = np.logspace(-7, -1, 10)
    hits, rhos = 0, []
    for seed in range(20):
        pg = periodogram(gen_arma(AR3, 32, seed))
        cv = np.array([loocv_ckl(lam, pg) for lam in lams])
        gv = np.array([gacv_stationary(lam, pg).value for lam in lams])
        rhos.append(spearmanr(cv, gv).statistic)
        if seed < 10:
            hits += abs(int(np.argmin(cv)) - int(np.argmin(gv))) <= 1
    rho = float(np.median(rhos))
    ok = hits >= 8 and rho >= 0.7
    assert acceptance(3, "GACV vs exact leave-one-out", ok,
                      f"argmin within one index {hits}/10, median Spearman {rho:.2f}",
                      perf_counter() - t0, 120)


def _benchmark(process, methods, reps, T=128, **kw):
    return benchmark(BenchmarkConfig(process, T, methods=methods, reps=reps, seed=0, **kw))


def test_ar3_benchmark(acceptance):
    t0 = perf_counter()
    rep = _benchmark("AR3", ("LS", "IM", "DM", "DV", "PO"), 200)
    re = rep.median_re
    ok = 1.2 <= re["LS"] <= 1.9 and 0.9 <= re["PO"] <= 1.3 and 1.0 <= re["DV"] <= 2.2
    detail = ", ".join(f"{m}/DM {re[m]:.2f}" for m in ("LS", "IM", "DV", "PO"))
    assert acceptance(4, "AR3 benchmark T=128, 200 reps", ok, detail, perf_counter() - t0, 900)


def test_ma4_im_pathology(acceptance):
    t0 = perf_counter()
    rep = _benchmark("MA4", ("IM", "DM"), 200)
    ratio = rep.median_re["IM"]
    ok = ratio > 2
    assert acceptance(5, "MA4 IM pathology T=128, 200 reps", ok,
                      f"IM/DM {ratio:.2f}, IM nonconverged {rep.nonconverged['IM']}",
                      perf_counter() - t0, 900)


def test_ls1_benchmark(acceptance):
    t0 = perf_counter()
    rep = _benchmark("LS1", ("LS", "DM", "DV"), 30, T=1024, K=32, J=32)
    re = rep.median_re
    ok = re["LS"] > 1.2 and 0.7 <= re["DV"] <= 1.4
    assert acceptance(6, "LS1 benchmark T=1024 (32,32), 30 reps", ok,
                      f"LS/DM {re['LS']:.2f}, DV/DM {re['DV']:.2f}, "
                      f"nonconverged {rep.nonconverged}", perf_counter() - t0, 1800)


def test_stationarity_calibration(acceptance):
    t0 = perf_counter()

    def rejects(x):
        res = stationarity_test(local_periodograms(x, K=32, J=32), n_perm=199, seed=0,
                                fast=True)
        return res.p1 <= 0.05, res.p2 <= 0.05

    null = np.array([rejects(gen_arma(AR3, 1024, s)) for s in range(100)])
    alt = np.array([rejects(gen_locally_stationary(ls1_g, 1024, s)) for s in range(100)])
    size, power = null.mean(axis=0), alt.mean(axis=0)
    ok = bool(np.all((0.01 <= size) & (size <= 0.12)) and np.all(power >= 0.9))
    assert acceptance(7, "stationarity test size and power", ok,
                      f"size (deviance, L2) {size[0]:.2f}, {size[1]:.2f}; "
                      f"power {power[0]:.2f}, {power[1]:.2f}", perf_counter() - t0, 1800)


def test_scale_equivariance(acceptance):
    t0 = perf_counter()
    shift_err, lam_err = 0.0, 0.0
    for seed in range(5):
        x_ar = gen_arma(AR3, 128, seed).values
        x_ls = gen_locally_stationary(ls2_g, 256, seed).values
        cases = [(periodogram(x_ar), periodogram(10 * x_ar)),
                 (local_periodograms(x_ls, K=8, J=8), local_periodograms(10 * x_ls, K=8, J=8))]
        for data, scaled in cases:
            for method in ("DM", "DV"):
                a, b = select(data, method), select(scaled, method)
                shift_err = max(shift_err, float(np.max(np.abs(
                    b.fit.fitted - a.fit.fitted - 2 * np.log(10)))))
                lam_err = max(lam_err, abs(np.log10(b.best_lambda / a.best_lambda)))
    ok = shift_err <= 1e-6 and lam_err < 0.1
    assert acceptance(8, "scale equivariance (DM, DV)", ok,
                      f"max |shift - 2 log 10| {shift_err:.1e}, "
                      f"max |d log10 lambda| {lam_err:.1e}", perf_counter() - t0, 120)


def test_generator_audit(acceptance):
    t0 = perf_counter()
    gen_err = 0.0
    for T in (16, 33, 64, 100, 128, 256):
        for seed in range(3):
            for g in (ls1_g, ls2_g):
                a = gen_locally_stationary(g, T, seed).values
                b = gen_locally_stationary_direct(g, T, seed).values
                gen_err = max(gen_err, float(np.max(np.abs(a - b)) / np.max(np.abs(b))))
    ratios = {}
    for name, g in (("LS1", ls1_g), ("LS2", ls2_g)):
        acc = None
        for seed in range(100):
            grid = local_periodograms(gen_locally_stationary(g, 1024, seed), K=32, J=32)
            acc = grid.values if acc is None else acc + grid.values
        W, U = np.meshgrid(grid.freqs, grid.times, indexing="ij")
        ratios[name] = float(np.mean(acc / 100) / np.mean(np.exp(g(W, U))))
    ok = gen_err <= 1e-8 and all(abs(r - 1) <= 0.1 for r in ratios.values())
    assert acceptance(9, "locally stationary generator", ok,
                      f"FFT vs direct {gen_err:.1e}, grand-mean ratio "
                      + ", ".join(f"{k} {v:.3f}" for k, v in ratios.items()),
                      perf_counter() - t0, 300)


def test_band_coverage(acceptance):
    t0 = perf_counter()
    cover = []
    for seed in range(100):
        pg = periodogram(gen_arma(ProcessSpec("WN"), 256, seed))
        band = bayesian_ci(select(pg, "DM").fit)
        cover.append(np.mean((band.lower <= 0) & (0 <= band.upper)))
    c = float(np.mean(cover))
    ok = 0.85 <= c <= 0.99
    assert acceptance(10, "Bayesian band coverage, white noise T=256", ok,
                      f"mean across-the-function coverage {c:.3f}", perf_counter() - t0, 600)
