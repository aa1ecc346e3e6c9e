"""Periodograms of stationary series and blocked local periodograms."""

from dataclasses import dataclass, field

import numpy as np

GRID_LIMIT = 4096
MIN_T_STATIONARY = 8
MIN_T_LOCAL = 64


@dataclass(frozen=True)
class TimeSeries:
    """A real-valued, equally spaced series.

    ``sampling_rate_hz`` is metadata only: all frequencies used internally are
    in cycles per sample, ``w`` in [0, 1].
    """

    values: np.ndarray
    sampling_rate_hz: float = 1.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if v.size == 0:
            raise ValueError("empty series")
        if not np.all(np.isfinite(v)):
            raise ValueError("series contains non-finite values")
        if not self.sampling_rate_hz > 0:
            raise ValueError("sampling rate must be positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def T(self):
        return self.values.size

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class PeriodogramSet:
    freqs: np.ndarray
    values: np.ndarray

    @property
    def T(self):
        return self.values.size


@dataclass(frozen=True)
class LocalPeriodogramGrid:
    """K x J matrix of local periodograms; rows are frequencies, columns time blocks."""

    freqs: np.ndarray
    times: np.ndarray
    values: np.ndarray
    block_bounds: np.ndarray = field(default=None)

    @property
    def K(self):
        return self.freqs.size

    @property
    def J(self):
        return self.times.size

    @property
    def n(self):
        return self.values.size

    def with_values(self, values):
        return LocalPeriodogramGrid(self.freqs, self.times, np.asarray(values, float),
                                    self.block_bounds)


def _as_series(x):
    return x if isinstance(x, TimeSeries) else TimeSeries(np.asarray(x, dtype=float))


def _fft_friendly(T):
    # largest prime factor <= 7
    for p in (2, 3, 5, 7):
        while T % p == 0:
            T //= p
    return T == 1


def dft_power_direct(x):
    """``|sum_t x_t exp(i 2 pi k t / T)|**2 / T`` by direct O(T^2) summation."""
    x = np.asarray(x, dtype=float)
    T = x.size
    t = np.arange(T)
    kt = np.outer(t, t) % T
    E = np.exp(2j * np.pi * kt / T)
    return np.abs(E @ x) ** 2 / T


def dft_power_fft(x):
    x = np.asarray(x, dtype=float)
    # sign of the exponent is irrelevant for the squared modulus
    return np.abs(np.fft.fft(x)) ** 2 / x.size


def periodogram(x, method="auto"):
    """Raw periodogram at all T Fourier frequencies ``k/T``.

    The redundant upper half (``y_k = y_{T-k}``) is kept so that the
    ordinates can be smoothed periodically. The input is not mean-corrected
    here; see :func:`normalize_series`.

    Parameters
    ----------
    x : TimeSeries or array_like
    method : {"auto", "fft", "direct"}
        "auto" uses the FFT when T has only small prime factors.
    """
    ts = _as_series(x)
    T = ts.T
    if T < MIN_T_STATIONARY:
        raise ValueError(f"need T >= {MIN_T_STATIONARY}, got {T}")
    if method == "auto":
        method = "fft" if _fft_friendly(T) else "direct"
    if method == "fft":
        y = dft_power_fft(ts.values)
    elif method == "direct":
        y = dft_power_direct(ts.values)
    else:
        raise ValueError(f"unknown method {method!r}")
    return PeriodogramSet(freqs=np.arange(T) / T, values=y)


def block_bounds(T, J):
    """J near-equal blocks covering 0..T (sizes differ by at most one)."""
    return (np.arange(J + 1) * T) // J


def default_grid(T):
    """Default (K, J) with block length close to sqrt(T)."""
    J = max(1, int(round(np.sqrt(T))))
    K = J
    while K * J > GRID_LIMIT:
        K -= 1
    return K, J


def default_freqs(K):
    """``k/(K+1)`` for k = 1..K (excludes w = 0)."""
    return np.arange(1, K + 1) / (K + 1)


def eeg_grid(T=60000, J=64, K=32, block=938):
    """Explicit grid used for 5-minute, 200 Hz recordings.

    Frequencies ``k/(K+1)``; blocks of ``block`` samples with the last block
    taking the remainder; times ``(block*j - 468.5)/T`` for j < J and the last
    block's midpoint for j = J.
    """
    freqs = default_freqs(K)
    bounds = np.minimum(np.arange(J + 1) * block, T)
    bounds[-1] = T
    j = np.arange(1, J)
    times = np.empty(J)
    times[:-1] = (block * j - 468.5) / T
    times[-1] = 0.5 * (bounds[-2] + bounds[-1]) / T
    return freqs, bounds, times


def local_periodograms(x, K=None, J=None, freqs=None, blocks=None, times=None,
                       block_demean=True, grid_limit=GRID_LIMIT):
    """Local periodograms on disjoint time blocks.

    ``I[k, j] = |sum_{t in block j} X_t exp(i 2 pi w_k t)|**2 / len(block j)``.

    Parameters
    ----------
    x : TimeSeries or array_like
    K, J : int, optional
        Number of frequencies and of blocks; defaults follow :func:`default_grid`.
    freqs : array_like, optional
        Explicit frequencies; overrides K.
    blocks : array_like of int, optional
        Explicit block boundaries ``0 = b_1 < ... < b_{J+1} = T``; overrides J.
    times : array_like, optional
        Explicit rescaled times; by default block midpoints over T.
    block_demean : bool
        Subtract each block's mean before transforming.
    """
    ts = _as_series(x)
    T = ts.T
    if T < MIN_T_LOCAL:
        raise ValueError(f"need T >= {MIN_T_LOCAL} for local periodograms, got {T}")
    dK, dJ = default_grid(T)
    if blocks is not None:
        bounds = np.asarray(blocks, dtype=int)
        if bounds[0] != 0 or bounds[-1] != T or np.any(np.diff(bounds) <= 0):
            raise ValueError("block boundaries must increase strictly from 0 to T")
        J = bounds.size - 1
    else:
        J = dJ if J is None else int(J)
        if J < 1:
            raise ValueError("J must be positive")
        if J > T / 8:
            raise ValueError(f"J={J} too large for T={T} (need J <= T/8)")
        bounds = block_bounds(T, J)
    if freqs is not None:
        freqs = np.asarray(freqs, dtype=float).ravel()
        if np.any(freqs < 0) or np.any(freqs > 1):
            raise ValueError("frequencies must lie in [0, 1]")
    else:
        K = dK if K is None else int(K)
        if K < 1:
            raise ValueError("K must be positive")
        freqs = default_freqs(K)
    if freqs.size * J > grid_limit:
        raise ValueError(f"grid {freqs.size}x{J} exceeds limit {grid_limit}")
    if times is None:
        times = 0.5 * (bounds[:-1] + bounds[1:]) / T
    else:
        times = np.asarray(times, dtype=float).ravel()
        if times.size != J or np.any(times < 0) or np.any(times > 1):
            raise ValueError("times must be J values in [0, 1]")

    vals = np.empty((freqs.size, J))
    for j in range(J):
        t = np.arange(bounds[j], bounds[j + 1])
        seg = ts.values[t]
        if block_demean:
            seg = seg - seg.mean()
        E = np.exp(2j * np.pi * np.outer(freqs, t))
        vals[:, j] = np.abs(E @ seg) ** 2 / t.size
    return LocalPeriodogramGrid(freqs=freqs, times=times, values=vals, block_bounds=bounds)


def normalize_series(channels):
    """Subtract the across-channel mean at every time point.

    A single channel falls back to subtracting its own time mean.
    """
    chans = [_as_series(c) for c in channels]
    if not chans:
        raise ValueError("no channels")
    T = chans[0].T
    if any(c.T != T for c in chans):
        raise ValueError("channels differ in length")
    if len(chans) == 1:
        c = chans[0]
        return [TimeSeries(c.values - c.values.mean(), c.sampling_rate_hz)]
    X = np.vstack([c.values for c in chans])
    X = X - X.mean(axis=0)
    return [TimeSeries(X[i], c.sampling_rate_hz) for i, c in enumerate(chans)]
