"""Reproducing kernels for the periodic spline and SS ANOVA model spaces.

All functions are vectorised over numpy arrays and broadcast their arguments.
Frequencies ``w`` and rescaled times ``u`` live in [0, 1].
"""

import numpy as np

GRAM_LIMIT = 4096

_TOL = 1e-12


def _check_unit(x, name="argument"):
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x < -_TOL) or np.any(x > 1 + _TOL):
        raise ValueError(f"{name} must lie in [0, 1]")
    return x


def frac(x):
    """Fractional part mapping into [0, 1); exact integers map to 0."""
    x = np.asarray(x, dtype=float)
    return x - np.floor(x)


def b2(u):
    """Scaled Bernoulli polynomial ``(u - 0.5)**2 - 1/12``."""
    u = _check_unit(u)
    return (u - 0.5) ** 2 - 1.0 / 12.0


def b4(w):
    """Scaled Bernoulli polynomial ``(w-.5)**4 - (w-.5)**2/2 + 7/240``."""
    w = _check_unit(w)
    s = (w - 0.5) ** 2
    return s * s - s / 2.0 + 7.0 / 240.0


def r1(w1, w2):
    """Periodic cubic spline kernel ``-B4(frac(w1 - w2)) / 24``."""
    w1 = _check_unit(w1, "w1")
    w2 = _check_unit(w2, "w2")
    return -b4(frac(w1 - w2)) / 24.0


def r2(u1, u2):
    """Smooth main-effect kernel in time.

    ``B2(u1) B2(u2) / 4 - B4(frac(u1 - u2)) / 24``.
    """
    u1 = _check_unit(u1, "u1")
    u2 = _check_unit(u2, "u2")
    return b2(u1) * b2(u2) / 4.0 - b4(frac(u1 - u2)) / 24.0


def r3(g1, g2):
    """Linear-smooth interaction kernel; ``g1``, ``g2`` are ``(w, u)`` pairs."""
    (w1, u1), (w2, u2) = g1, g2
    return r1(w1, w2) * (np.asarray(u1, float) - 0.5) * (np.asarray(u2, float) - 0.5)


def r4(g1, g2):
    """Smooth-smooth interaction kernel; ``g1``, ``g2`` are ``(w, u)`` pairs."""
    (w1, u1), (w2, u2) = g1, g2
    return r1(w1, w2) * r2(u1, u2)


def ssanova_kernel(w1, u1, w2, u2, theta):
    """Weighted sum ``sum_r theta_r R_r`` evaluated elementwise (broadcasting)."""
    theta = np.asarray(theta, dtype=float)
    k1 = r1(w1, w2)
    out = theta[0] * k1
    if theta[1] != 0.0 or theta[3] != 0.0:
        k2 = r2(u1, u2)
        out = out + theta[1] * k2 + theta[3] * k1 * k2
    if theta[2] != 0.0:
        out = out + theta[2] * k1 * (np.asarray(u1, float) - 0.5) * (np.asarray(u2, float) - 0.5)
    return out


def gram_matrix(w, u=None, theta=None, limit=GRAM_LIMIT):
    """Dense Gram matrix on a set of points.

    With ``u`` and ``theta`` omitted this is the stationary matrix
    ``{R1(w_i, w_j)}``; otherwise entry (i, j) is
    ``sum_r theta_r R_r((w_i, u_i), (w_j, u_j))``.
    """
    w = np.asarray(w, dtype=float).ravel()
    n = w.size
    if n > limit:
        raise ValueError(f"Gram matrix of size {n} exceeds limit {limit}")
    if u is None:
        if theta is not None:
            raise ValueError("theta requires time coordinates u")
        G = r1(w[:, None], w[None, :])
    else:
        u = np.asarray(u, dtype=float).ravel()
        if u.size != n:
            raise ValueError("w and u must have equal length")
        theta = _check_theta(theta)
        G = ssanova_kernel(w[:, None], u[:, None], w[None, :], u[None, :], theta)
    return 0.5 * (G + G.T)


def cross_kernel(w_data, w_eval, u_data=None, u_eval=None, theta=None):
    """Kernel sections ``K(x_i, x)``: rows index data points, columns evaluation points."""
    w_data = np.asarray(w_data, float).ravel()
    w_eval = np.asarray(w_eval, float).ravel()
    if u_data is None:
        return r1(w_data[:, None], w_eval[None, :])
    u_data = np.asarray(u_data, float).ravel()
    u_eval = np.asarray(u_eval, float).ravel()
    return ssanova_kernel(w_data[:, None], u_data[:, None],
                          w_eval[None, :], u_eval[None, :], _check_theta(theta))


def _check_theta(theta):
    theta = np.asarray(theta if theta is not None else (1.0, 1.0, 1.0, 1.0), dtype=float)
    if theta.shape != (4,):
        raise ValueError("theta must have four entries")
    if np.any(~np.isfinite(theta)) or np.any(theta < 0):
        raise ValueError("theta entries must be finite and nonnegative")
    return theta


def subsample_basis(n, m, rng=None):
    """Indices of ``m`` representer points spread uniformly over ``0..n-1``.

    Deterministic (evenly spaced) when ``rng`` is None.
    """
    if not 0 < m <= n:
        raise ValueError("need 0 < m <= n")
    if rng is None:
        return np.unique(np.round(np.linspace(0, n - 1, m)).astype(int))
    return np.sort(rng.choice(n, size=m, replace=False))
