"""Smoothing-parameter selection.

Methods (the names are also the CLI vocabulary):

``DM``  direct GML evaluated at the converged penalized Whittle fit
``DV``  GACV evaluated at the converged fit
``IM``  indirect GML: Gaussian GML on the working response at every IRPLS step
``PO``  two-step risk-estimate grid search
``LS``  Gaussian spline fit to bias-corrected log-periodograms, GML-selected
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from . import kernels
from .periodogram import LocalPeriodogramGrid, PeriodogramSet
from .systems import DenseSystem, KronSystem
from .whittle import (MAX_ITER, TOL, SsanovaFit, StationaryFit, _irpls,
                      fit_reduced, fit_ssanova, fit_stationary, stationary_system,
                      whittle_nll)

METHODS = ("DM", "DV", "IM", "PO", "LS")

LOG10_LAM_RANGE = (-9.0, 1.0)
LOG10_THETA_RANGE = (-6.0, 6.0)
COARSE_POINTS = 13
XATOL = 1e-3

LOG_FLOOR = 1e-12
EULER_GAMMA = 0.57721
EDGE_CORRECTION = 0.30135


@dataclass
class CriterionEval:
    lam: float
    value: float
    method: str
    theta: np.ndarray = None
    converged: bool = True
    aux: dict = field(default_factory=dict, repr=False)


@dataclass
class SelectionResult:
    best_lambda: float
    fit: object
    criterion_trace: list
    method: str
    best_theta: np.ndarray = None
    nonconverged: bool = False
    message: str = ""

    @property
    def best_value(self):
        vals = [e.value for e in self.criterion_trace if np.isfinite(e.value)]
        return min(vals) if vals else np.inf


# ---------------------------------------------------------------------------
# criteria evaluated on a converged Whittle fit


def gml_value(fit):
    """Direct GML criterion of a converged fit (any system type)."""
    y, g = fit.y, fit.fitted
    u = 1.0 - y * np.exp(-g)
    yc = g - u
    logdet, quad = fit.system.gml_terms(yc, fit.nlam)
    return whittle_nll(g, y) - 0.5 * float(u @ u) + 0.5 * (logdet + quad)


def influence_matrix(fit):
    """``F = (diag(y e^-g) + n lam Omega)^-1`` restricted to the model space.

    Built from the fit's unit-weight hat matrix ``A`` as
    ``(I - A (I - D))^-1 A`` so that unpenalized and dropped directions are
    handled exactly.
    """
    A = fit.system.hat_matrix(fit.nlam)
    D = fit.y * np.exp(-fit.fitted)
    M = np.eye(fit.n) - A * (1.0 - D)[None, :]
    return np.linalg.solve(M, A)


GACV_FORMS = ("scaled", "printed", "printed-h")


def gacv_value(fit, form="scaled"):
    """GACV of a converged fit.

    With ``F = (diag(y e^-g) + n lam Omega)^-1``, ``H = F diag(e^-g)`` and
    ``r = y e^-g``:

    ``"scaled"``     ``sum(r + g) + tr F / (n - tr F) * sum r (r - 1)``
    ``"printed"``    ``sum(r + g) + tr H / (n - tr F) * sum r (y - e^g)``
    ``"printed-h"``  as ``"printed"`` with ``n - tr H`` in the denominator

    The forms agree for a flat spectrum. ``"scaled"`` averages the
    leave-one-out leverages on a scale-free footing and tracks exact
    leave-one-out CV far better when the spectrum has a wide dynamic range;
    it is the default for stationary spectra. SS ANOVA selection defaults to
    ``"printed"``. ``"printed-h"`` is not invariant to rescaling the data.
    A nonpositive denominator returns NaN.
    """
    y, g = fit.y, fit.fitted
    eg = np.exp(-g)
    r = y * eg
    fdiag = np.diag(influence_matrix(fit))
    tr_f = float(fdiag.sum())
    tr_h = float(fdiag @ eg)
    base = float(np.sum(r + g))
    if form == "scaled":
        denom, num, resid = fit.n - tr_f, tr_f, float(np.sum(r * (r - 1.0)))
    elif form == "printed":
        denom, num, resid = fit.n - tr_f, tr_h, float(np.sum(r * (y - np.exp(g))))
    elif form == "printed-h":
        denom, num, resid = fit.n - tr_h, tr_h, float(np.sum(r * (y - np.exp(g))))
    else:
        raise ValueError(f"unknown GACV form {form!r}; choose from {GACV_FORMS}")
    aux = {"tr_f": tr_f, "tr_h": tr_h, "denominator": denom}
    if not denom > 0:
        return np.nan, aux
    return base + num / denom * resid, aux


def _criterion(fit, method, **kw):
    if not fit.converged:
        return np.inf, {}
    if method == "DM":
        return gml_value(fit), {}
    if method == "DV":
        v, aux = gacv_value(fit, **kw)
        return (v if np.isfinite(v) else np.inf), aux
    raise ValueError(f"criterion not available for method {method!r}")


def gml_stationary(lam, pgram, system=None):
    fit = fit_stationary(pgram, lam, system=system)
    value, aux = _criterion(fit, "DM")
    return CriterionEval(lam, value, "DM", converged=fit.converged, aux=aux)


def gacv_stationary(lam, pgram, system=None, form="scaled"):
    fit = fit_stationary(pgram, lam, system=system)
    value, aux = _criterion(fit, "DV", form=form) if fit.converged else (np.inf, {})
    return CriterionEval(lam, value, "DV", converged=fit.converged and np.isfinite(value),
                         aux=aux)


def gml_ssanova(lam, theta, grid, system=None):
    fit = fit_ssanova(grid, lam, theta, system=system)
    value, aux = _criterion(fit, "DM")
    return CriterionEval(lam, value, "DM", theta=fit.theta, converged=fit.converged, aux=aux)


def gacv_ssanova(lam, theta, grid, system=None, form="printed"):
    fit = fit_ssanova(grid, lam, theta, system=system)
    value, aux = _criterion(fit, "DV", form=form) if fit.converged else (np.inf, {})
    return CriterionEval(lam, value, "DV", theta=fit.theta,
                         converged=fit.converged and np.isfinite(value), aux=aux)


def loocv_ckl(lam, pgram, max_T=64):
    """Exact leave-one-out estimate of the CKL criterion by ``T`` refits.

    ``(2/T) sum_i {y_i exp(-g_i^(-i)) + g_i}``: only the data-dependent term
    uses the fit without ordinate i. The penalty weight ``T * lam`` is kept
    when an ordinate is removed.
    """
    T = pgram.T
    if T > max_T:
        raise ValueError(f"leave-one-out oracle limited to T <= {max_T}")
    w, y = pgram.freqs, pgram.values
    Sigma = kernels.gram_matrix(w, limit=np.inf)
    full = fit_stationary(pgram, lam)
    if not full.converged:
        raise RuntimeError("full-data fit did not converge")
    total = 0.0
    for i in range(T):
        keep = np.arange(T) != i
        sysi = DenseSystem(np.ones((T - 1, 1)), Sigma[np.ix_(keep, keep)])
        res = _irpls(y[keep], sysi, T * lam)
        if not res.converged:
            raise RuntimeError(f"leave-one-out fit {i} did not converge")
        gi = res.d[0] + res.c @ Sigma[keep, i]
        total += y[i] * np.exp(-gi) + full.fitted[i]
    return 2.0 * total / T


# ---------------------------------------------------------------------------
# one-dimensional search over log10 lambda


def _search_log10(f, lo=LOG10_LAM_RANGE[0], hi=LOG10_LAM_RANGE[1], n_grid=COARSE_POINTS,
                  xatol=XATOL):
    """Coarse grid followed by a bounded golden-section/parabolic refinement.

    Returns ``(best_x, best_value)``; ``f`` records its own trace.
    """
    xs = np.linspace(lo, hi, n_grid)
    vals = np.array([f(x) for x in xs])
    if not np.any(np.isfinite(vals)):
        return None, np.inf
    i = int(np.nanargmin(np.where(np.isfinite(vals), vals, np.inf)))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n_grid - 1)]
    best_x, best_v = xs[i], vals[i]
    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": xatol})
    if np.isfinite(res.fun) and res.fun < best_v:
        best_x, best_v = float(res.x), float(res.fun)
    return float(best_x), float(best_v)


def _cached_eval(evaluate, method, theta=None, **kw):
    trace, fits = [], {}

    def f(x):
        x = float(x)
        if x not in fits:
            fit = evaluate(10.0 ** x)
            value, aux = _criterion(fit, method, **kw)
            fits[x] = (fit, value)
            trace.append(CriterionEval(10.0 ** x, value, method, theta=theta,
                                       converged=bool(np.isfinite(value)), aux=aux))
        return fits[x][1]

    return f, trace, fits


def select_stationary(pgram, method="DM", lam_range=LOG10_LAM_RANGE, n_grid=COARSE_POINTS,
                      gacv_form="scaled"):
    """Select lambda for a stationary periodogram by DM or DV."""
    if not isinstance(pgram, PeriodogramSet):
        raise TypeError("expected a PeriodogramSet")
    if method not in ("DM", "DV"):
        raise ValueError(f"select_stationary supports DM and DV, not {method!r}")
    system = stationary_system(pgram.freqs)
    kw = {"form": gacv_form} if method == "DV" else {}
    f, trace, fits = _cached_eval(lambda lam: fit_stationary(pgram, lam, system=system), method,
                                  **kw)
    x, v = _search_log10(f, *lam_range, n_grid=n_grid)
    if x is None:
        any_fit = next(iter(fits.values()))[0]
        return SelectionResult(np.nan, any_fit, trace, method, nonconverged=True,
                               message="no smoothing parameter produced a converged fit")
    return SelectionResult(10.0 ** x, fits[x][0], trace, method)


# ---------------------------------------------------------------------------
# SS ANOVA search over (lambda, theta_2..theta_4) with theta_1 = 1


def _theta_from(x):
    return np.concatenate([[1.0], 10.0 ** np.asarray(x[1:], float)])


class _KronCache:
    def __init__(self, grid, null="linear", size=4):
        self.grid, self.null, self.size, self.store = grid, null, size, {}

    def __call__(self, theta):
        key = tuple(np.round(np.asarray(theta, float), 15))
        s = self.store.get(key)
        if s is None:
            if len(self.store) >= self.size:
                self.store.pop(next(iter(self.store)))
            s = KronSystem(self.grid.freqs, self.grid.times, theta, null=self.null)
            self.store[key] = s
        return s


DEFAULT_THETA = (1.0, 1.0, 1.0, 100.0)
SSANOVA_MAX_EVALS = {"DM": 120, "DV": 40}


def _ssanova_starts(log_lam):
    return [np.array([log_lam, 0.0, 0.0, 2.0]),
            np.array([log_lam - 1.0, -2.0, 1.0, 3.0]),
            np.array([log_lam + 1.0, 2.0, -2.0, 1.0])]


def select_ssanova(grid, method="DM", n_starts=3, max_evals=None, lam_range=LOG10_LAM_RANGE,
                   theta_range=LOG10_THETA_RANGE, gacv_form="printed"):
    """Select ``(lambda, theta)`` for the SS ANOVA model by DM or DV.

    A coarse lambda scan at a default theta locates the starting region; the
    simplex search then runs from ``n_starts`` spread points over
    ``(log10 lambda, log10 theta_2, log10 theta_3, log10 theta_4)`` and the
    best result is kept. ``max_evals`` caps each simplex run; it defaults to
    :data:`SSANOVA_MAX_EVALS` for the method (GACV needs the full influence
    matrix and is far costlier per evaluation).
    """
    if max_evals is None:
        max_evals = SSANOVA_MAX_EVALS.get(method, 120)
    if not isinstance(grid, LocalPeriodogramGrid):
        raise TypeError("expected a LocalPeriodogramGrid")
    if method not in ("DM", "DV"):
        raise ValueError(f"select_ssanova supports DM and DV, not {method!r}")
    systems = _KronCache(grid)
    kw = {"form": gacv_form} if method == "DV" else {}
    trace, best = [], {"value": np.inf, "fit": None, "x": None}
    seen = {}

    def f(x):
        x = np.clip(np.asarray(x, float),
                    [lam_range[0]] + [theta_range[0]] * 3,
                    [lam_range[1]] + [theta_range[1]] * 3)
        key = tuple(np.round(x, 12))
        if key in seen:
            return seen[key]
        theta = _theta_from(x)
        fit = fit_ssanova(grid, 10.0 ** x[0], theta, system=systems(theta))
        value, aux = _criterion(fit, method, **kw)
        trace.append(CriterionEval(10.0 ** x[0], value, method, theta=theta,
                                   converged=bool(np.isfinite(value)), aux=aux))
        if value < best["value"]:
            best.update(value=value, fit=fit, x=x)
        seen[key] = value
        return value

    scan = np.linspace(*lam_range, COARSE_POINTS)
    x0 = np.log10(DEFAULT_THETA[1:])
    vals = [f(np.concatenate([[s], x0])) for s in scan]
    log_lam = scan[int(np.argmin(vals))] if np.any(np.isfinite(vals)) else -5.0
    bounds = [lam_range] + [theta_range] * 3
    for start in _ssanova_starts(log_lam)[:n_starts]:
        start = np.clip(start, [b[0] for b in bounds], [b[1] for b in bounds])
        minimize(f, start, method="Nelder-Mead", bounds=bounds,
                 options={"maxfev": max_evals, "xatol": 1e-2, "fatol": 1e-4,
                          "initial_simplex": _simplex(start, bounds)})
    if best["fit"] is None:
        return SelectionResult(np.nan, None, trace, method, nonconverged=True,
                               message="no (lambda, theta) produced a converged fit")
    fit = best["fit"]
    return SelectionResult(fit.lam, fit, trace, method, best_theta=fit.theta)


def _simplex(start, bounds, step=1.0):
    pts = [start]
    for i in range(start.size):
        p = start.copy()
        p[i] = p[i] + step if p[i] + step <= bounds[i][1] else p[i] - step
        pts.append(p)
    return np.array(pts)


def select_reduced(grid, lam_range=LOG10_LAM_RANGE):
    """Direct-GML lambda for the frequency-only model on a K x J grid."""
    system_k = stationary_system(grid.freqs)
    system_n = KronSystem(grid.freqs, grid.times, (1.0, 0.0, 0.0, 0.0), null="constant")
    trace, fits = [], {}

    def f(x):
        x = float(x)
        if x not in fits:
            fit = fit_reduced(grid, 10.0 ** x, system=system_k)
            value = reduced_gml(fit, system_n) if fit.converged else np.inf
            fits[x] = (fit, value)
            trace.append(CriterionEval(10.0 ** x, value, "DM", converged=fit.converged))
        return fits[x][1]

    x, _ = _search_log10(f, *lam_range)
    if x is None:
        return SelectionResult(np.nan, next(iter(fits.values()))[0], trace, "DM",
                               nonconverged=True, message="reduced model did not converge")
    return SelectionResult(10.0 ** x, fits[x][0], trace, "DM")


def reduced_gml(fit, system_n):
    """Direct GML of a reduced fit, computed on all n grid cells."""
    y, g = fit.y, fit.fitted
    u = 1.0 - y * np.exp(-g)
    logdet, quad = system_n.gml_terms(g - u, y.size * fit.lam)
    return whittle_nll(g, y) - 0.5 * float(u @ u) + 0.5 * (logdet + quad)


# ---------------------------------------------------------------------------
# Gaussian GML (used by IM and LS)


def gaussian_gml(z, system, nlam):
    """``log`` of the Gaussian GML score ``z'Pz / det(P)^(1/(n-m))`` (up to constants)."""
    logdet, quad = system.gml_terms(z, nlam)
    if not quad > 0:
        return -np.inf if quad == 0 else np.nan
    return float(np.log(quad) + logdet / (system.n - system.m))


def _gaussian_select_lambda(z, system, n, lam_range=LOG10_LAM_RANGE, n_grid=COARSE_POINTS,
                            xatol=XATOL):
    def f(x):
        v = gaussian_gml(z, system, n * 10.0 ** x)
        return v if np.isfinite(v) else (-1e300 if v == -np.inf else np.inf)

    x, _ = _search_log10(f, *lam_range, n_grid=n_grid, xatol=xatol)
    return x


def _gaussian_select_theta(z, grid, systems, x0, max_evals=80,
                           lam_range=LOG10_LAM_RANGE, theta_range=LOG10_THETA_RANGE):
    n = z.size

    def f(x):
        x = np.clip(x, [lam_range[0]] + [theta_range[0]] * 3,
                    [lam_range[1]] + [theta_range[1]] * 3)
        v = gaussian_gml(z, systems(_theta_from(x)), n * 10.0 ** x[0])
        return v if np.isfinite(v) else np.inf

    bounds = [lam_range] + [theta_range] * 3
    res = minimize(f, x0, method="Nelder-Mead", bounds=bounds,
                   options={"maxfev": max_evals, "xatol": 1e-3, "fatol": 1e-8,
                            "initial_simplex": _simplex(np.asarray(x0, float), bounds, 0.5)})
    return np.clip(res.x, [b[0] for b in bounds], [b[1] for b in bounds])


def _residual_variance(z, fitted, system, nlam):
    return float(np.sum((z - fitted) ** 2) / (z.size - system.trace_hat(nlam)))


def ls_fit(data):
    """Gaussian smoothing spline on bias-corrected log-periodograms."""
    if isinstance(data, PeriodogramSet):
        T = data.T
        corr = np.full(T, EULER_GAMMA)
        corr[0] = EDGE_CORRECTION
        if T % 2 == 0:
            corr[T // 2] = EDGE_CORRECTION
        z = np.log(np.maximum(data.values, LOG_FLOOR)) + corr
        system = stationary_system(data.freqs)
        x = _gaussian_select_lambda(z, system, T)
        lam = 10.0 ** x
        fitted, c, d = system.smooth(z, T * lam)
        fit = StationaryFit(freqs=data.freqs, y=data.values, d=float(d[0]), c=c, lam=lam,
                            fitted=fitted, converged=True, iterations=1, objective=np.nan,
                            system=system, kind="ls",
                            dispersion=_residual_variance(z, fitted, system, T * lam))
        trace = [CriterionEval(lam, gaussian_gml(z, system, T * lam), "LS")]
        return SelectionResult(lam, fit, trace, "LS")
    if isinstance(data, LocalPeriodogramGrid):
        y = data.values.ravel()
        z = np.log(np.maximum(y, LOG_FLOOR)) + EULER_GAMMA
        systems = _KronCache(data)
        x0 = np.concatenate([[0.0], np.log10(DEFAULT_THETA[1:])])
        s0 = systems(DEFAULT_THETA)
        x0[0] = _gaussian_select_lambda(z, s0, y.size)
        x = _gaussian_select_theta(z, data, systems, x0, max_evals=200)
        theta = _theta_from(x)
        system = systems(theta)
        lam = 10.0 ** x[0]
        fitted, c, d = system.smooth(z, y.size * lam)
        fit = SsanovaFit(freqs=data.freqs, times=data.times, y=y, d=d, c=c, lam=lam,
                         theta=theta, fitted=fitted, converged=True, iterations=1,
                         objective=np.nan, system=system, kind="ls",
                         dispersion=_residual_variance(z, fitted, system, y.size * lam))
        trace = [CriterionEval(lam, gaussian_gml(z, system, y.size * lam), "LS", theta=theta)]
        return SelectionResult(lam, fit, trace, "LS", best_theta=theta)
    raise TypeError("expected a PeriodogramSet or LocalPeriodogramGrid")


# ---------------------------------------------------------------------------
# indirect GML


def indirect_gml_fit(data, max_iter=MAX_ITER, tol=TOL, lam_tol=1e-3):
    """IRPLS with the smoothing parameters reselected at every iteration.

    Converges when both the fitted values (``tol``) and ``log10 lambda``
    (``lam_tol``) stabilize; otherwise the result is flagged as nonconverged.
    """
    stationary = isinstance(data, PeriodogramSet)
    if stationary:
        y = data.values
        system = stationary_system(data.freqs)
    elif isinstance(data, LocalPeriodogramGrid):
        y = data.values.ravel()
        systems = _KronCache(data)
        x = np.concatenate([[-5.0], np.log10(DEFAULT_THETA[1:])])
    else:
        raise TypeError("expected a PeriodogramSet or LocalPeriodogramGrid")
    n = y.size
    g = np.full(n, np.log(y.mean() + 1e-10))
    trace, converged, log_lam = [], False, None
    c = np.zeros(n)
    d = np.zeros(1 if stationary else 2)
    theta = None
    it = 0
    for it in range(1, max_iter + 1):
        z = g + y * np.exp(-g) - 1.0
        if not np.all(np.isfinite(z)):
            break
        if stationary:
            new_log_lam = _gaussian_select_lambda(z, system, n, xatol=1e-5)
            sys_it = system
        else:
            if it == 1:
                x[0] = _gaussian_select_lambda(z, systems(_theta_from(x)), n)
            x = _gaussian_select_theta(z, data, systems, x)
            new_log_lam = float(x[0])
            theta = _theta_from(x)
            sys_it = systems(theta)
        if new_log_lam is None:
            break
        nlam = n * 10.0 ** new_log_lam
        g_new, c, d = sys_it.smooth(z, nlam)
        trace.append(CriterionEval(10.0 ** new_log_lam, gaussian_gml(z, sys_it, nlam), "IM",
                                   theta=theta))
        step = np.max(np.abs(g_new - g))
        lam_step = np.inf if log_lam is None else abs(new_log_lam - log_lam)
        g, log_lam = g_new, new_log_lam
        if not np.all(np.isfinite(g)):
            break
        if step < tol and lam_step < lam_tol:
            converged = True
            break
    lam = 10.0 ** log_lam if log_lam is not None else np.nan
    if stationary:
        fit = StationaryFit(freqs=data.freqs, y=y, d=float(d[0]), c=c, lam=lam, fitted=g,
                            converged=converged, iterations=it, objective=np.nan,
                            system=system, kind="im")
    else:
        fit = SsanovaFit(freqs=data.freqs, times=data.times, y=y, d=d, c=c, lam=lam,
                         theta=theta, fitted=g, converged=converged, iterations=it,
                         objective=np.nan, system=sys_it, kind="im")
    return SelectionResult(lam, fit, trace, "IM", best_theta=theta, nonconverged=not converged,
                           message="" if converged else "indirect GML did not converge")


# ---------------------------------------------------------------------------
# two-step risk-estimate grid search


PO_LN_LAM_RANGE = (-25.0, -1.0)


def po_risk(fit, v):
    """``sum (g - v)^2 + 2 tr A`` for a fit and a working-response target ``v``."""
    return float(np.sum((fit.fitted - v) ** 2) + 2.0 * fit.system.trace_hat(fit.nlam))


def po_risk_fit(pgram, n_first=5, n_second=50, ln_lam_range=PO_LN_LAM_RANGE):
    if not isinstance(pgram, PeriodogramSet):
        raise TypeError("the risk-estimate method applies to stationary periodograms only")
    system = stationary_system(pgram.freqs)
    y = pgram.values
    trace = []

    def working(g):
        return g + y * np.exp(-g) - 1.0

    best1 = (np.inf, None)
    for lam in np.exp(np.linspace(*ln_lam_range, n_first)):
        fit = fit_stationary(pgram, lam, system=system)
        r = po_risk(fit, working(fit.fitted)) if fit.converged else np.inf
        trace.append(CriterionEval(lam, r, "PO", converged=fit.converged, aux={"step": 1}))
        if r < best1[0]:
            best1 = (r, fit)
    if best1[1] is None:
        return SelectionResult(np.nan, fit, trace, "PO", nonconverged=True,
                               message="no first-step fit converged")
    v = working(best1[1].fitted)
    best2 = (np.inf, None)
    for lam in np.exp(np.linspace(*ln_lam_range, n_second)):
        fit = fit_stationary(pgram, lam, system=system)
        r = po_risk(fit, v) if fit.converged else np.inf
        trace.append(CriterionEval(lam, r, "PO", converged=fit.converged, aux={"step": 2}))
        if r < best2[0]:
            best2 = (r, fit)
    if best2[1] is None:
        return SelectionResult(np.nan, fit, trace, "PO", nonconverged=True,
                               message="no second-step fit converged")
    return SelectionResult(best2[1].lam, best2[1], trace, "PO")


def select(data, method, **kw):
    """Dispatch on method name and input type.

    Extra keyword arguments go to :func:`select_stationary` or
    :func:`select_ssanova` (DM and DV only).
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method == "LS":
        return ls_fit(data)
    if method == "IM":
        return indirect_gml_fit(data)
    if method == "PO":
        return po_risk_fit(data)
    if isinstance(data, PeriodogramSet):
        return select_stationary(data, method, **kw)
    return select_ssanova(data, method, **kw)
