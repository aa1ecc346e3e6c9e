"""Permutation tests for stationarity, Bayesian confidence bands, difference maps."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import norm

from . import kernels
from .periodogram import LocalPeriodogramGrid
from .selection import select_reduced, select_ssanova
from .whittle import (NotConvergedError, ReducedFit, SsanovaFit, StationaryFit,
                      evaluate_spectrum, evaluate_tvs, evaluate_tvs_lattice, fit_ssanova, whittle_nll)

MIN_PERMUTATIONS = 99
MAX_DROP_FRACTION = 0.2
LATTICE_SIZE = 64


class PermutationFailure(RuntimeError):
    """Too many permutation replicates failed to converge."""


@dataclass
class StationarityTestResult:
    s1: float
    s2: float
    p1: float
    p2: float
    n_perm: int
    perm_s1: np.ndarray
    perm_s2: np.ndarray
    seed: int
    dropped: int
    lam_full: float
    theta_full: np.ndarray
    lam_reduced: float
    fast: bool

    def to_dict(self):
        return {"s1": self.s1, "s2": self.s2, "p1": self.p1, "p2": self.p2,
                "n_perm": self.n_perm, "dropped": self.dropped, "seed": self.seed,
                "fast": self.fast, "lambda_full": self.lam_full,
                "theta_full": list(map(float, self.theta_full)),
                "lambda_reduced": self.lam_reduced,
                "perm_s1": list(map(float, self.perm_s1)),
                "perm_s2": list(map(float, self.perm_s2))}


def unit_lattice(size=LATTICE_SIZE):
    return np.linspace(0.0, 1.0, size)


def deviance_difference(y, fitted_reduced, fitted_full):
    """``D_R - D_F``; the ``log y`` terms cancel."""
    return whittle_nll(fitted_reduced, y) - whittle_nll(fitted_full, y)


def l2_distance(fit_full, fit_reduced, size=LATTICE_SIZE):
    """Trapezoid-rule integral of the squared surface difference over [0, 1]^2."""
    w = u = unit_lattice(size)
    diff = evaluate_tvs_lattice(fit_full, w, u) - evaluate_tvs_lattice(fit_reduced, w, u)
    return float(np.trapezoid(np.trapezoid(diff ** 2, u, axis=1), w))


def _statistics(fit_full, fit_reduced, size=LATTICE_SIZE):
    return (deviance_difference(fit_full.y, fit_reduced.fitted, fit_full.fitted),
            l2_distance(fit_full, fit_reduced, size))


def stationarity_test(grid, n_perm=199, seed=0, fast=False, n_jobs=1, select_kw=None):
    """Permutation test of ``H0: g(w, u) = beta_1 + s_1(w)``.

    Time blocks (columns of the K x J grid) are shuffled. The reduced model
    depends on the data only through row means, so it is fitted once. With
    ``fast=True`` the full model keeps the observed ``(lambda, theta)``;
    otherwise they are reselected for every replicate.
    """
    if not isinstance(grid, LocalPeriodogramGrid):
        raise TypeError("expected a LocalPeriodogramGrid")
    if n_perm < MIN_PERMUTATIONS:
        raise ValueError(f"need at least {MIN_PERMUTATIONS} permutations, got {n_perm}")
    select_kw = select_kw or {}
    full = select_ssanova(grid, "DM", **select_kw)
    reduced = select_reduced(grid)
    if full.nonconverged or reduced.nonconverged:
        raise NotConvergedError("observed-data fits did not converge")
    s1, s2 = _statistics(full.fit, reduced.fit)

    rng = np.random.default_rng(seed)
    perms = [rng.permutation(grid.J) for _ in range(n_perm)]

    def replicate(perm):
        g = grid.with_values(grid.values[:, perm])
        if fast:
            f = fit_ssanova(g, full.fit.lam, full.fit.theta, system=full.fit.system)
        else:
            f = select_ssanova(g, "DM", **select_kw).fit
        if f is None or not f.converged:
            return None
        return _statistics(f, reduced.fit)

    if n_jobs == 1:
        out = [replicate(p) for p in perms]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            out = list(pool.map(replicate, perms))
    ok = [o for o in out if o is not None]
    dropped = n_perm - len(ok)
    if dropped > MAX_DROP_FRACTION * n_perm:
        raise PermutationFailure(f"{dropped} of {n_perm} permutation fits failed")
    perm_s1 = np.array([o[0] for o in ok])
    perm_s2 = np.array([o[1] for o in ok])
    p1 = (1 + int(np.sum(perm_s1 >= s1))) / (len(ok) + 1)
    p2 = (1 + int(np.sum(perm_s2 >= s2))) / (len(ok) + 1)
    return StationarityTestResult(s1=s1, s2=s2, p1=p1, p2=p2, n_perm=n_perm, perm_s1=perm_s1,
                                  perm_s2=perm_s2, seed=seed, dropped=dropped,
                                  lam_full=full.fit.lam, theta_full=full.fit.theta,
                                  lam_reduced=reduced.fit.lam, fast=fast)


# ---------------------------------------------------------------------------
# Bayesian confidence bands


@dataclass
class ConfidenceBand:
    freqs: np.ndarray
    center: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    sd: np.ndarray
    times: np.ndarray = None


def _eval_design(fit, w, u):
    """Kernel sections, prior variances and null-space rows at evaluation points."""
    if isinstance(fit, StationaryFit):
        xi = kernels.cross_kernel(fit.freqs, w)
        rxx = np.full(w.size, kernels.r1(0.0, 0.0))
        phi = np.ones((1, w.size))
    elif isinstance(fit, SsanovaFit):
        pw, pu = fit.system.points
        xi = kernels.cross_kernel(pw, w, pu, u, fit.theta)
        rxx = kernels.ssanova_kernel(w, u, w, u, fit.theta)
        phi = np.vstack([np.ones(w.size), u - 0.5])
    else:
        raise TypeError("bands are available for stationary and SS ANOVA fits")
    return xi, rxx, phi


def posterior_sd(fit, w, u=None, sigma2=1.0):
    """Posterior standard deviation of ``g`` at the points ``(w, u)``.

    ``sigma2 / (n lam) * [R(x,x) - xi' M^-1 xi + q' (S'M^-1 S)^-1 q]`` with
    ``M = Sigma + n lam I`` and ``q = phi(x) - S' M^-1 xi``. At the data
    points this equals ``sigma2`` times the diagonal of the hat matrix.
    """
    w = np.asarray(w, float).ravel()
    u = None if u is None else np.asarray(u, float).ravel()
    xi, rxx, phi = _eval_design(fit, w, u)
    var = _posterior_var(fit, xi, rxx, phi)
    return np.sqrt(sigma2 * var)


def _posterior_var(fit, xi, rxx, phi):
    sysm, nlam = fit.system, fit.nlam
    Mxi = sysm.minv(xi, nlam)
    q = phi - sysm.S.T @ Mxi
    Hinv = sysm.null_gram_inv(nlam)
    var = (rxx - np.sum(xi * Mxi, axis=0) + np.sum(q * (Hinv @ q), axis=0)) / nlam
    return np.maximum(var, 0.0)


def mirror_factor(freqs):
    """``len(freqs)`` over the number of distinct frequencies modulo ``w ~ 1 - w``.

    Periodogram ordinates of a real series satisfy ``I(w) = I(1 - w)``, so a
    frequency set holding both members of a pair carries each observation
    twice.
    """
    w = np.mod(np.asarray(freqs, float).ravel(), 1.0)
    folded = np.round(np.minimum(w, 1.0 - w), 12)
    return w.size / np.unique(folded).size


def bayesian_ci(fit, w=None, u=None, level=0.95, sigma2=None, mirror_correction=True):
    """Pointwise Bayesian band ``g_hat +/- z * sd``.

    Evaluates at the fit's own grid when no points are given. ``sigma2``
    defaults to the fit's dispersion (1 for Whittle fits). With
    ``mirror_correction`` the variance is inflated by :func:`mirror_factor`
    so that mirrored ordinates are not counted as independent data.
    """
    if not fit.converged:
        raise NotConvergedError("fit did not converge")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if isinstance(fit, ReducedFit):
        raise TypeError("bands are available for stationary and SS ANOVA fits")
    if sigma2 is None:
        sigma2 = fit.dispersion
    if mirror_correction:
        sigma2 = sigma2 * mirror_factor(fit.freqs)
    ssanova = isinstance(fit, SsanovaFit)
    if w is None:
        if ssanova:
            w, u = fit.system.points
        else:
            w = fit.freqs
    w = np.asarray(w, float).ravel()
    if ssanova:
        if u is None:
            raise ValueError("SS ANOVA bands need time coordinates u")
        w, u = np.broadcast_arrays(w, np.asarray(u, float).ravel())
        w, u = w.ravel(), u.ravel()
    xi, rxx, phi = _eval_design(fit, w, u)
    center = evaluate_tvs(fit, w, u) if ssanova else evaluate_spectrum(fit, w)
    sd = np.sqrt(sigma2 * _posterior_var(fit, xi, rxx, phi))
    half = norm.ppf(0.5 + level / 2.0) * sd
    return ConfidenceBand(freqs=w, times=u, center=center, lower=center - half,
                          upper=center + half, level=level, sd=sd)


# ---------------------------------------------------------------------------
# pre- versus baseline-segment comparison


@dataclass
class DifferenceMap:
    freqs: np.ndarray
    times: np.ndarray
    delta: np.ndarray
    significant: np.ndarray
    sign: np.ndarray
    level: float

    def rows(self):
        """Long-format rows ``(w, u, delta, significant, sign)``."""
        return zip(self.freqs, self.times, self.delta, self.significant, self.sign)


def segment_difference(fit_pre, fit_base, level=0.95, w=None, u=None):
    """``g_pre - g_base`` with cells flagged where ``g_base`` leaves the band of ``g_pre``.

    Defaults to the shared estimation grid of the two fits.
    """
    for f in (fit_pre, fit_base):
        if not isinstance(f, SsanovaFit):
            raise TypeError("segment_difference expects SS ANOVA fits")
    if w is None:
        if (fit_pre.freqs.shape != fit_base.freqs.shape
                or fit_pre.times.shape != fit_base.times.shape
                or not np.allclose(fit_pre.freqs, fit_base.freqs)
                or not np.allclose(fit_pre.times, fit_base.times)):
            raise ValueError("fits are on incompatible grids; pass an explicit lattice")
        w, u = fit_pre.system.points
    w, u = np.broadcast_arrays(np.asarray(w, float).ravel(), np.asarray(u, float).ravel())
    band = bayesian_ci(fit_pre, w, u, level=level)
    g_base = evaluate_tvs(fit_base, w, u)
    delta = band.center - g_base
    significant = (g_base < band.lower) | (g_base > band.upper)
    sign = np.where(significant, np.sign(delta), 0).astype(int)
    return DifferenceMap(freqs=np.array(w), times=np.array(u), delta=delta,
                         significant=significant, sign=sign, level=level)
