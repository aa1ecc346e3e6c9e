import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pwspec import TimeSeries, local_periodograms, normalize_series, periodogram
from pwspec.periodogram import (block_bounds, default_grid, dft_power_direct, dft_power_fft,
                                eeg_grid)
from pwspec.simulation import AR3, arma_autocovariance, gen_arma, true_arma_spectrum

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_zero_series():
    pg = periodogram(np.zeros(16))
    assert np.all(pg.values == 0)
    assert pg.T == 16
    np.testing.assert_allclose(pg.freqs, np.arange(16) / 16)


def test_alternating_series_hand_dft():
    x = np.array([1.0, -1.0, 1.0, -1.0])
    for y in (dft_power_direct(x), dft_power_fft(x)):
        np.testing.assert_allclose(y, [0.0, 0.0, 4.0, 0.0], atol=1e-12)


def test_short_series_rejected():
    with pytest.raises(ValueError):
        periodogram(np.ones(7))


def test_nonfinite_rejected():
    with pytest.raises(ValueError):
        TimeSeries([1.0, np.nan, 2.0])


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(8, 200), elements=finite))
def test_parseval_and_symmetry(x):
    y = periodogram(x).values
    assert np.all(y >= 0)
    np.testing.assert_allclose(y.sum(), np.sum(x ** 2), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(y[1:], y[1:][::-1], rtol=1e-9, atol=1e-9 * max(1, y.max()))


@settings(max_examples=30, deadline=None)
@given(arrays(float, st.integers(8, 120), elements=finite))
def test_fft_matches_direct(x):
    a, b = dft_power_fft(x), dft_power_direct(x)
    np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9 * max(1.0, b.max()))


def test_prime_length_uses_direct_path(rng):
    x = rng.standard_normal(101)
    np.testing.assert_allclose(periodogram(x).values, periodogram(x, method="fft").values,
                               rtol=1e-9)


def expected_periodogram(spec, T):
    """Exact mean periodogram: the Fejer-weighted autocovariance sum."""
    gam = arma_autocovariance(spec, T)
    h = np.arange(1, T)[:, None]
    w = np.arange(T)[None, :] / T
    return gam[0] + 2 * np.sum((1 - h / T) * gam[1:T, None] * np.cos(2 * np.pi * h * w), 0)


def test_monte_carlo_mean_tracks_ar3_spectrum():
    T, reps = 128, 2000
    acc = np.zeros(T)
    for s in range(reps):
        acc += periodogram(gen_arma(AR3, T, s)).values
    mean = acc / reps
    w = np.arange(T) / T
    band = (w >= 0.05) & (w <= 0.45)
    rel = np.abs(mean[band] / expected_periodogram(AR3, T)[band] - 1)
    assert rel.max() < 0.10
    # leakage at T = 128 inflates the upper band, so the true spectrum is
    # only matched where the dynamic range is mild
    low = (w >= 0.05) & (w <= 0.2)
    rel_true = np.abs(mean[low] / true_arma_spectrum(AR3, w[low]) - 1)
    assert rel_true.max() < 0.10


def test_local_zero_series():
    g = local_periodograms(np.zeros(256), K=8, J=4)
    assert g.values.shape == (8, 4)
    assert np.all(g.values == 0)


def test_local_defaults():
    K, J = default_grid(1024)
    assert (K, J) == (32, 32)
    g = local_periodograms(np.random.default_rng(0).standard_normal(1024))
    assert (g.K, g.J) == (32, 32)
    np.testing.assert_allclose(g.freqs, np.arange(1, 33) / 33)


def test_blocks_near_equal_and_cover():
    b = block_bounds(1000, 7)
    assert b[0] == 0 and b[-1] == 1000
    assert np.ptp(np.diff(b)) <= 1


def test_times_are_block_midpoints():
    g = local_periodograms(np.ones(256), K=4, J=4, block_demean=False)
    np.testing.assert_allclose(g.times, [0.125, 0.375, 0.625, 0.875])


def test_eeg_grid_coordinates():
    freqs, bounds, times = eeg_grid()
    np.testing.assert_allclose(freqs, np.arange(1, 33) / 33)
    j = np.arange(1, 64)
    np.testing.assert_allclose(times[:63], (938 * j - 468.5) / 60000)
    assert times[63] == pytest.approx(0.9925, abs=1e-4)
    assert bounds[0] == 0 and bounds[-1] == 60000 and bounds.size == 65


def test_local_white_noise_grand_mean():
    means = [local_periodograms(np.random.default_rng(s).standard_normal(1024), K=16,
                                J=16).values.mean() for s in range(100)]
    assert 0.8 <= np.mean(means) <= 1.2
    assert all(0.6 <= m <= 1.4 for m in means)


def test_local_block_mean_matches_stationary_spectrum():
    acc = 0.0
    for s in range(200):
        acc = acc + local_periodograms(gen_arma(AR3, 1024, s), K=8, J=8).values.mean(axis=1)
    mean = acc / 200
    freqs = np.arange(1, 9) / 9
    np.testing.assert_allclose(mean, true_arma_spectrum(AR3, freqs), rtol=0.25)


def test_local_grid_limit():
    with pytest.raises(ValueError):
        local_periodograms(np.zeros(1024), K=200, J=32)


def test_local_short_series():
    with pytest.raises(ValueError):
        local_periodograms(np.zeros(32), K=4, J=4)


def test_explicit_blocks_validated():
    with pytest.raises(ValueError):
        local_periodograms(np.zeros(128), K=4, blocks=[0, 64, 60, 128])


def test_normalize_identical_channels():
    out = normalize_series([[1.0, 2.0, 5.0], [1.0, 2.0, 5.0]])
    for c in out:
        np.testing.assert_allclose(c.values, 0.0)


def test_normalize_constant_channels():
    a, b = normalize_series([[1, 1, 1], [3, 3, 3]])
    np.testing.assert_allclose(a.values, [-1, -1, -1])
    np.testing.assert_allclose(b.values, [1, 1, 1])


def test_normalize_single_channel():
    (a,) = normalize_series([[1, 2, 3]])
    np.testing.assert_allclose(a.values, [-1, 0, 1])


def test_normalize_length_mismatch():
    with pytest.raises(ValueError):
        normalize_series([[1, 2, 3], [1, 2]])


@settings(max_examples=30, deadline=None)
@given(arrays(float, st.tuples(st.integers(2, 4), st.integers(3, 30)), elements=finite))
def test_normalize_zero_cross_channel_mean(X):
    out = normalize_series(list(X))
    np.testing.assert_allclose(np.mean([c.values for c in out], axis=0), 0.0, atol=1e-9)
