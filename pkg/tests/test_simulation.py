import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pwspec import local_periodograms
from pwspec.periodogram import PeriodogramSet
from pwspec.simulation import (AR3, MA4, BenchmarkConfig, ProcessSpec, arma_autocovariance,
                               benchmark, gen_arma, gen_locally_stationary,
                               gen_locally_stationary_direct, hermitian_noise, ls1_g, ls2_g,
                               mse, relative_efficiencies, true_arma_spectrum)
from pwspec.whittle import fit_stationary


def yule_walker_rho1(ar):
    """Lag-1 autocorrelation of a causal AR(3) from the Yule-Walker equations."""
    a1, a2, a3 = ar
    # unknowns rho1, rho2, rho3 with rho0 = 1
    A = np.array([[1 - a2, -a3, 0.0],
                  [-(a1 + a3), 1.0, 0.0],
                  [-a2, -a1, 1.0]])
    b = np.array([a1, a2, a3])
    return np.linalg.solve(A, b)[0]


def test_white_noise_variance():
    x = gen_arma(ProcessSpec("WN"), 4096, 0).values
    assert abs(x.var() - 1.0) < 0.1


def test_ar3_lag1_autocorrelation():
    x = gen_arma(AR3, 4096, 1).values
    x = x - x.mean()
    r1 = np.sum(x[1:] * x[:-1]) / np.sum(x * x)
    assert abs(r1 - yule_walker_rho1(AR3.ar)) < 0.1


def test_autocovariance_oracle_agrees_with_yule_walker():
    g = arma_autocovariance(AR3, 3)
    assert g[1] / g[0] == pytest.approx(yule_walker_rho1(AR3.ar), rel=1e-8)


def test_arma_deterministic():
    np.testing.assert_array_equal(gen_arma(MA4, 100, 5).values, gen_arma(MA4, 100, 5).values)


def test_nonstationary_ar_rejected():
    with pytest.raises(ValueError):
        gen_arma(ProcessSpec("bad", ar=(1.2,)), 100, 0)


def test_true_spectrum_values():
    assert true_arma_spectrum(AR3, 0.0) == pytest.approx(1 / 0.1792 ** 2, rel=1e-10)
    assert true_arma_spectrum(AR3, 0.0) == pytest.approx(31.14, abs=0.01)
    assert true_arma_spectrum(MA4, 0.0) == pytest.approx(0.16, rel=1e-10)
    assert true_arma_spectrum(MA4, 0.5) == pytest.approx(2.56, rel=1e-10)


def test_spectrum_integrates_to_variance():
    w = np.arange(4096) / 4096
    for spec in (AR3, MA4):
        assert true_arma_spectrum(spec, w).mean() == pytest.approx(
            arma_autocovariance(spec, 0)[0], rel=1e-6)


def test_local_spectra_values():
    assert ls1_g(0.25, 0.25) == pytest.approx(5 + np.log(1.25), abs=1e-12)
    assert ls1_g(0.25, 0.25) == pytest.approx(5.2231, abs=1e-4)
    assert ls1_g(0.5, 0.75) == pytest.approx(3 + np.log(2.25), abs=1e-12)
    assert ls2_g(0.5, 0.0) == pytest.approx(5.0, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 1), st.floats(0, 1))
def test_local_spectra_mirror_symmetric(w, u):
    for g in (ls1_g, ls2_g):
        assert g(w, u) == pytest.approx(g(1 - w, u), abs=1e-9)


def test_hermitian_noise_structure():
    Z = hermitian_noise(16, np.random.default_rng(0))
    np.testing.assert_allclose(Z[1:], np.conj(Z[1:][::-1]), atol=0)
    assert Z[0].imag == 0 and Z[8].imag == 0


@pytest.mark.parametrize("T", [16, 63, 128])
def test_fast_generator_matches_direct(T):
    a = gen_locally_stationary(ls1_g, T, 3).values
    b = gen_locally_stationary_direct(ls1_g, T, 3).values
    np.testing.assert_allclose(a, b, atol=1e-8 * np.abs(b).max())


def test_locally_stationary_deterministic():
    np.testing.assert_array_equal(gen_locally_stationary(ls2_g, 256, 9).values,
                                  gen_locally_stationary(ls2_g, 256, 9).values)


def test_constant_log_spectrum_gives_stationary_variance():
    c, T = 0.5, 128
    flat = lambda w, u: np.full(np.broadcast(w, u).shape, c)  # noqa: E731
    var_fast = np.mean([gen_locally_stationary(flat, T, s).values.var() for s in range(100)])
    var_ref = np.mean([gen_locally_stationary_direct(flat, T, s).values.var() for s in range(100)])
    assert var_fast == pytest.approx(var_ref, rel=1e-8)
    # sum_k e^c |Z_k|^2 with E|Z_k|^2 = 1/T: variance e^c up to the lost mean
    assert var_fast == pytest.approx(np.exp(c), rel=0.1)


def test_ls1_block_variance_follows_modulation():
    hits = 0
    for s in range(100):
        x = gen_locally_stationary(ls1_g, 1024, s).values
        early = x[128:256].var()   # u near 0.19, sin > 0
        late = x[640:768].var()    # u near 0.69, sin < 0
        hits += early > late
    assert hits >= 90


def test_mse_identities():
    pg = PeriodogramSet(np.arange(16) / 16, np.exp(np.linspace(0, 1, 16)))
    fit = fit_stationary(pg, 1e8)
    assert mse(fit, fit.fitted) == pytest.approx(0.0, abs=1e-20)
    truth = fit.fitted + np.linspace(-1, 1, 16)
    assert mse(fit, truth) == pytest.approx(np.var(truth - fit.fitted) + 0.0, rel=1e-9)
    assert mse(fit, truth) >= 0


def test_mse_constant_fit_is_population_variance():
    truth = np.sin(np.arange(32))
    pg = PeriodogramSet(np.arange(32) / 32, np.full(32, np.exp(truth.mean())))
    fit = fit_stationary(pg, 1e-3)
    assert mse(fit, truth) == pytest.approx(np.var(truth), rel=1e-8)


def test_mse_callable_truth_on_grid():
    g = local_periodograms(gen_locally_stationary(ls1_g, 256, 0), K=4, J=4)
    from pwspec.whittle import fit_ssanova
    fit = fit_ssanova(g, 1e-3, (1, 1, 1, 1))
    W, U = np.meshgrid(g.freqs, g.times, indexing="ij")
    assert mse(fit, ls1_g) == pytest.approx(mse(fit, ls1_g(W, U).ravel()), rel=1e-12)


def test_relative_efficiencies_pairwise_complete():
    re = relative_efficiencies({"DM": [1.0, 2.0, np.nan], "LS": [2.0, np.nan, 3.0]})
    assert re["LS"] == (2.0, 2.0, 1)


def test_config_validation():
    with pytest.raises(ValueError):
        BenchmarkConfig("AR3", 128, reps=0)
    with pytest.raises(ValueError):
        BenchmarkConfig("XYZ", 128)
    with pytest.raises(ValueError):
        BenchmarkConfig("LS1", 1024, methods=("PO",))
    with pytest.raises(ValueError):
        BenchmarkConfig("AR3", 128, methods=("QQ",))
    cfg = BenchmarkConfig("AR3", 128, methods=("LS",))
    assert cfg.methods == ("DM", "LS")


def test_benchmark_deterministic_and_shaped():
    cfg = BenchmarkConfig("AR3", 64, methods=("LS", "IM", "DM", "DV", "PO"), reps=3, seed=10)
    a, b = benchmark(cfg), benchmark(cfg)
    assert a.to_json() == b.to_json()
    d = json.loads(a.to_json())
    assert "timing" not in d and set(d["mse"]) == {"LS", "IM", "DM", "DV", "PO"}
    assert all(len(v) == 3 for v in d["mse"].values())
    table = a.table()
    for m in ("LS", "IM", "DV", "PO", "median", "mean", "failures"):
        assert m in table


def test_benchmark_local_process_runs():
    cfg = BenchmarkConfig("LS2", 256, methods=("LS",), reps=2, K=8, J=8)
    rep = benchmark(cfg)
    assert rep.pairs["LS"] == 2
