"""Test processes, exact spectra and the relative-efficiency benchmark harness."""

import json
import time
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.signal import lfilter

from .periodogram import TimeSeries, default_grid, local_periodograms, periodogram
from .selection import METHODS, select

STATIONARY_PROCESSES = ("AR3", "MA4")
LOCAL_PROCESSES = ("LS1", "LS2")
SVD_RTOL = 1e-13


@dataclass(frozen=True)
class ProcessSpec:
    """ARMA process ``phi(B) X_t = theta(B) e_t`` with unit innovation variance.

    ``ar`` holds ``(phi_1, ..., phi_p)`` of ``X_t = sum phi_i X_{t-i} + ...``;
    ``ma`` holds ``(theta_1, ..., theta_q)`` of ``... + e_t + sum theta_j e_{t-j}``.
    """

    name: str
    ar: tuple = ()
    ma: tuple = ()

    @property
    def order(self):
        return max(len(self.ar), len(self.ma))

    def is_stationary(self):
        if not self.ar:
            return True
        roots = np.roots(np.r_[1.0, -np.asarray(self.ar)][::-1])
        return bool(np.all(np.abs(roots) > 1.0))


AR3 = ProcessSpec("AR3", ar=(1.4256, -0.7344, 0.1296))
MA4 = ProcessSpec("MA4", ma=(-0.3, -0.6, -0.3, 0.6))
PROCESSES = {"AR3": AR3, "MA4": MA4}


def gen_arma(spec, T, seed):
    """Simulate ``T`` values after discarding a burn-in of ``10 * order + 100``."""
    if not spec.is_stationary():
        raise ValueError(f"AR part of {spec.name} is not stationary")
    burn = 10 * spec.order + 100
    e = np.random.default_rng(seed).standard_normal(T + burn)
    x = lfilter(np.r_[1.0, spec.ma], np.r_[1.0, -np.asarray(spec.ar)], e)
    return TimeSeries(x[burn:])


def true_arma_spectrum(spec, w):
    """``|theta(e^{-i 2 pi w})|^2 / |phi(e^{-i 2 pi w})|^2``."""
    z = np.exp(-2j * np.pi * np.asarray(w, float))
    num = np.polyval(np.r_[1.0, spec.ma][::-1], z)
    den = np.polyval(np.r_[1.0, -np.asarray(spec.ar)][::-1], z)
    return np.abs(num) ** 2 / np.abs(den) ** 2


def arma_autocovariance(spec, max_lag):
    """Autocovariances ``gamma(0..max_lag)`` from the MA(infinity) weights."""
    n = 5000 + max_lag
    impulse = np.zeros(n)
    impulse[0] = 1.0
    psi = lfilter(np.r_[1.0, spec.ma], np.r_[1.0, -np.asarray(spec.ar)], impulse)
    return np.array([psi[:n - h] @ psi[h:] for h in range(max_lag + 1)])


# ---------------------------------------------------------------------------
# locally stationary processes


def ls1_g(w, u):
    return 4.0 + np.sin(2 * np.pi * np.asarray(u, float)) + np.log(
        1.25 - np.cos(2 * np.pi * np.asarray(w, float)))


def ls2_g(w, u):
    w, u = np.asarray(w, float), np.asarray(u, float)
    s = np.sin(2 * np.pi * np.exp(u))
    return 5.0 - 8.0 * (w - 0.5) ** 2 + s + 0.01 * (w - 0.5) ** 2 * s


LOCAL_SPECTRA = {"LS1": ls1_g, "LS2": ls2_g}

AMPLITUDES = ("sqrt", "exp")


def _amplitude_matrix(g_true, T, amplitude):
    k = np.arange(T) / T
    G = g_true(k[:, None], k[None, :])
    if amplitude == "sqrt":
        return np.exp(G / 2.0)
    if amplitude == "exp":
        return np.exp(G)
    raise ValueError(f"unknown amplitude {amplitude!r}; choose from {AMPLITUDES}")


def hermitian_noise(T, rng):
    """``Z_k = conj(Z_{T-k})`` with ``E|Z_k|^2 = 1/T``.

    Real normal at ``k = 0`` and ``k = T/2``; otherwise real and imaginary
    parts are independent with variance ``1/(2T)``.
    """
    half = T // 2
    Z = np.zeros(T, complex)
    Z[0] = rng.standard_normal() / np.sqrt(T)
    m = half - 1 if T % 2 == 0 else half
    parts = rng.standard_normal((m, 2)) / np.sqrt(2.0 * T)
    Z[1:m + 1] = parts[:, 0] + 1j * parts[:, 1]
    Z[T - m:] = np.conj(Z[1:m + 1][::-1])
    if T % 2 == 0:
        Z[half] = rng.standard_normal() / np.sqrt(T)
    return Z


@lru_cache(maxsize=8)
def _amplitude_factors(g_true, T, amplitude):
    A = _amplitude_matrix(g_true, T, amplitude)
    U, s, Vt = np.linalg.svd(A)
    r = int(np.sum(s > SVD_RTOL * s[0]))
    return U[:, :r] * s[:r], Vt[:r]


def _check_real(X):
    scale = max(1.0, float(np.max(np.abs(X.real))))
    if np.max(np.abs(X.imag)) > 1e-8 * scale:
        raise ValueError("generated series has an imaginary part; g must satisfy "
                         "g(w, u) = g(1 - w, u)")
    return X.real


def gen_locally_stationary(g_true, T, seed, amplitude="sqrt"):
    """``X_t = sum_k A(k/T, t/T) exp(i 2 pi k t / T) Z_k`` via a low-rank split of A.

    ``A = exp(g/2)`` by default, which makes local periodograms unbiased for
    ``exp(g)``; ``amplitude="exp"`` uses ``A = exp(g)``. The T x T amplitude
    matrix is factored once per ``(g_true, T)`` so each draw costs one inverse
    FFT per retained singular component.
    """
    Z = hermitian_noise(T, np.random.default_rng(seed))
    Uk, Vt = _amplitude_factors(g_true, T, amplitude)
    X = np.sum(Vt * (T * np.fft.ifft(Uk.T * Z, axis=1)), axis=0)
    return TimeSeries(_check_real(X))


def gen_locally_stationary_direct(g_true, T, seed, amplitude="sqrt"):
    """O(T^2) reference implementation by direct summation."""
    Z = hermitian_noise(T, np.random.default_rng(seed))
    A = _amplitude_matrix(g_true, T, amplitude)
    t = np.arange(T)
    E = np.exp(2j * np.pi * np.outer(t, t) / T)
    X = np.einsum("kt,kt,k->t", A, E, Z)
    return TimeSeries(_check_real(X))


# ---------------------------------------------------------------------------
# accuracy


def mse(fit, g_true):
    """Mean squared error of ``fit.fitted`` on the fit's own grid.

    ``g_true`` is an array of true values, or a callable of ``w`` (stationary)
    or ``(w, u)`` (time-varying).
    """
    if not fit.converged:
        raise ValueError("fit did not converge")
    if callable(g_true):
        if hasattr(fit, "times"):
            g = g_true(np.repeat(fit.freqs, fit.times.size), np.tile(fit.times, fit.freqs.size))
        else:
            g = g_true(fit.freqs)
    else:
        g = np.asarray(g_true, float).ravel()
    return float(np.mean((fit.fitted - g) ** 2))


# ---------------------------------------------------------------------------
# benchmark harness


@dataclass
class BenchmarkConfig:
    process: str
    T: int
    methods: tuple = METHODS
    reps: int = 100
    seed: int = 0
    K: int = None
    J: int = None

    def __post_init__(self):
        if self.process not in STATIONARY_PROCESSES + LOCAL_PROCESSES:
            raise ValueError(f"unknown process {self.process!r}")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        self.methods = tuple(self.methods)
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ValueError(f"unknown methods {bad}")
        if "DM" not in self.methods:
            self.methods = ("DM",) + self.methods
        if self.local:
            if "PO" in self.methods:
                raise ValueError("PO applies to stationary processes only")
            dK, dJ = default_grid(self.T)
            self.K = dK if self.K is None else int(self.K)
            self.J = dJ if self.J is None else int(self.J)

    @property
    def local(self):
        return self.process in LOCAL_PROCESSES


@dataclass
class SimulationReport:
    config: dict
    mse: dict
    nonconverged: dict
    median_re: dict
    mean_re: dict
    pairs: dict
    timing: dict = field(default_factory=dict)

    def to_json(self, include_timing=False):
        d = asdict(self)
        if not include_timing:
            d.pop("timing")
        return json.dumps(_jsonable(d), indent=2, sort_keys=True)

    def table(self):
        methods = [m for m in self.config["methods"] if m != "DM"]
        c = self.config
        head = f"{c['process']}  T={c['T']}"
        if c.get("K"):
            head += f"  (K,J)=({c['K']},{c['J']})"
        head += f"  reps={c['reps']}"
        lines = [head, "          " + "".join(f"{m:>14}" for m in methods)]
        for label, src in (("median", self.median_re), ("mean", self.mean_re)):
            cells = []
            for m in methods:
                v = src[m]
                cells.append("nan" if v is None else f"{v:.2f}")
            lines.append(f"{label:<10}" + "".join(f"{x:>14}" for x in cells))
        lines.append(f"{'failures':<10}" + "".join(f"{self.nonconverged[m]:>14}"
                                                    for m in methods))
        lines.append(f"DM failures: {self.nonconverged['DM']}")
        return "\n".join(lines)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return None if not np.isfinite(x) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def simulate_replicate(config, r):
    """Data and truth for replicate ``r`` (seed ``config.seed + r``)."""
    seed = config.seed + r
    if config.local:
        g_true = LOCAL_SPECTRA[config.process]
        x = gen_locally_stationary(g_true, config.T, seed)
        data = local_periodograms(x, K=config.K, J=config.J)
        W, U = np.meshgrid(data.freqs, data.times, indexing="ij")
        truth = g_true(W, U).ravel()
    else:
        spec = PROCESSES[config.process]
        x = gen_arma(spec, config.T, seed)
        data = periodogram(x)
        truth = np.log(true_arma_spectrum(spec, data.freqs))
    return data, truth


def run_replicate(config, r):
    data, truth = simulate_replicate(config, r)
    out = {}
    for m in config.methods:
        try:
            res = select(data, m)
        except (np.linalg.LinAlgError, FloatingPointError, ValueError):
            out[m] = np.nan
            continue
        out[m] = np.nan if res.nonconverged or res.fit is None else mse(res.fit, truth)
    return out


def relative_efficiencies(mse_by_method, reference="DM"):
    """Pairwise-complete ratios ``MSE_m / MSE_ref``; returns ``(median, mean, n)`` per method."""
    ref = np.asarray(mse_by_method[reference], float)
    out = {}
    for m, v in mse_by_method.items():
        if m == reference:
            continue
        v = np.asarray(v, float)
        ok = np.isfinite(v) & np.isfinite(ref)
        ratios = v[ok] / ref[ok]
        out[m] = ((float(np.median(ratios)), float(np.mean(ratios)), int(ok.sum()))
                  if ok.any() else (None, None, 0))
    return out


def benchmark(config, progress=None):
    """Run ``config.reps`` replicates; replicate ``r`` uses seed ``config.seed + r``."""
    start = time.perf_counter()
    per_method = {m: [] for m in config.methods}
    for r in range(config.reps):
        res = run_replicate(config, r)
        for m in config.methods:
            per_method[m].append(res[m])
        if progress:
            progress(r)
    re = relative_efficiencies(per_method)
    cfg = {k: v for k, v in asdict(config).items()}
    cfg["methods"] = list(config.methods)
    return SimulationReport(
        config=cfg,
        mse=per_method,
        nonconverged={m: int(np.sum(~np.isfinite(v))) for m, v in per_method.items()},
        median_re={m: v[0] for m, v in re.items()},
        mean_re={m: v[1] for m, v in re.items()},
        pairs={m: v[2] for m, v in re.items()},
        timing={"seconds": time.perf_counter() - start},
    )
