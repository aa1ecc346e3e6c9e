"""Penalized least-squares systems ``(Sigma + n*lam*I) c + S d = z``, ``S'c = 0``.

Two interchangeable implementations:

``DenseSystem``
    QR of the null-space basis ``S`` and a spectral decomposition of
    ``Q2' Sigma Q2``. One factorization serves every value of lambda.

``KronSystem``
    Product grids ``{w_k} x {u_j}`` with the SS ANOVA kernel. The Gram matrix
    is ``A1 (x) M_theta + theta_2 E_K (x) B2``; rotating by the eigenvectors of
    ``A1`` and ``M_theta`` leaves a diagonal plus a rank-J term, so every solve
    costs O(n (K + J) + J^3) instead of O(n^3).

Both expose the quantities needed for fitting, GML, GACV and posterior
variances. ``nlam`` always denotes the product ``n * lambda`` that multiplies
the identity.
"""

from functools import cached_property

import numpy as np
import scipy.linalg as sla

from . import kernels

EIG_RTOL = 1e-10


class DenseSystem:
    """Factorized system for an arbitrary Gram matrix and null-space basis."""

    def __init__(self, S, Sigma):
        S = np.asarray(S, dtype=float)
        if S.ndim == 1:
            S = S[:, None]
        Sigma = np.asarray(Sigma, dtype=float)
        n, m = S.shape
        if Sigma.shape != (n, n):
            raise ValueError("Sigma and S dimensions disagree")
        Q, R = np.linalg.qr(S, mode="complete")
        R = R[:m]
        rdiag = np.abs(np.diag(R))
        if m and rdiag.min() <= 1e-10 * max(rdiag.max(), 1.0):
            raise np.linalg.LinAlgError("null-space basis S is rank deficient")
        self.S, self.Sigma = S, Sigma
        self.n, self.m = n, m
        self.Q1, self.Q2, self.R = Q[:, :m], Q[:, m:], R
        delta, U = np.linalg.eigh(self.Q2.T @ Sigma @ self.Q2)
        dmax = delta.max() if delta.size else 0.0
        delta[delta < EIG_RTOL * dmax] = 0.0
        self.delta = delta
        self.V = self.Q2 @ U

    def sigma_apply(self, c):
        return self.Sigma @ c

    def smooth(self, z, nlam):
        """Return ``(fitted, c, d)`` for working response ``z``."""
        zeta = self.V.T @ z
        c = self.V @ (zeta / (self.delta + nlam))
        fitted = z - nlam * c
        d = sla.solve_triangular(self.R, self.Q1.T @ (fitted - self.Sigma @ c))
        return fitted, c, d

    def gml_terms(self, yc, nlam):
        """``(sum ln(delta/nlam + 1), sum zeta^2 / (delta/nlam + 1))``."""
        zeta = self.V.T @ yc
        r = self.delta / nlam + 1.0
        return np.log(r).sum(), (zeta ** 2 / r).sum()

    def trace_hat(self, nlam):
        return self.m + (self.delta / (self.delta + nlam)).sum()

    def hat_matrix(self, nlam):
        return np.eye(self.n) - nlam * (self.V / (self.delta + nlam)) @ self.V.T

    def _chol(self, nlam):
        cache = self.__dict__.setdefault("_chol_cache", {})
        if nlam not in cache:
            cache.clear()
            cache[nlam] = sla.cho_factor(self.Sigma + nlam * np.eye(self.n))
        return cache[nlam]

    def minv(self, X, nlam):
        return sla.cho_solve(self._chol(nlam), X)

    def null_gram_inv(self, nlam):
        """``(S' M^{-1} S)^{-1}`` with ``M = Sigma + nlam I``."""
        return np.linalg.inv(self.S.T @ self.minv(self.S, nlam))


class KronSystem:
    """SS ANOVA system on the product grid ``freqs x times``.

    Vectors are flattened in C order from a ``(K, J)`` array, i.e. index
    ``k * J + j`` pairs frequency ``k`` with time block ``j``.

    Parameters
    ----------
    freqs, times : array_like
    theta : sequence of 4 nonnegative floats
    null : {"linear", "constant"}
        Null space ``{1, u - 0.5}`` (full model) or ``{1}`` (frequency-only model).
    """

    def __init__(self, freqs, times, theta, null="linear"):
        self.freqs = np.asarray(freqs, float).ravel()
        self.times = np.asarray(times, float).ravel()
        self.theta = kernels._check_theta(theta)
        if not np.any(self.theta > 0):
            raise ValueError("at least one theta must be positive")
        K, J = self.freqs.size, self.times.size
        self.K, self.J, self.n = K, J, K * J
        w, u = self.freqs, self.times
        A1 = kernels.r1(w[:, None], w[None, :])
        lam1, Phi = np.linalg.eigh(0.5 * (A1 + A1.T))
        self.A1, self.Phi, self.lam1 = A1, Phi, np.clip(lam1, 0.0, None)
        self.a = Phi.T @ np.ones(K)

        th = self.theta
        ell = u - 0.5
        self.B2 = kernels.r2(u[:, None], u[None, :])
        Mt = th[0] * np.ones((J, J)) + th[2] * np.outer(ell, ell) + th[3] * self.B2
        self.Mt = 0.5 * (Mt + Mt.T)
        xi, Psi = np.linalg.eigh(self.Mt)
        self.Psi, self.xi = Psi, np.clip(xi, 0.0, None)
        self.Bt = th[1] * (Psi.T @ self.B2 @ Psi) if th[1] > 0 else None

        if null == "linear":
            Su = np.column_stack([np.ones(J), ell])
        elif null == "constant":
            Su = np.ones((J, 1))
        else:
            raise ValueError(f"unknown null space {null!r}")
        self.null = null
        self.m = Su.shape[1]
        self.Su = Su
        # rotated null-space columns, each (K, J)
        self.St = np.stack([np.outer(self.a, Psi.T @ Su[:, l]) for l in range(self.m)])
        S = np.stack([np.outer(np.ones(K), Su[:, l]).ravel() for l in range(self.m)], axis=1)
        if np.linalg.matrix_rank(S) < self.m:
            raise np.linalg.LinAlgError("null-space basis S is rank deficient")
        self.S = S
        self._logdet_StS = np.linalg.slogdet(S.T @ S)[1]
        self.dsig = self.lam1[:, None] * self.xi[None, :]
        self._cache = {}

    # -- rotations -------------------------------------------------------
    def fwd(self, v):
        V = np.asarray(v, float).reshape(v.shape[:-1] + (self.K, self.J))
        return self.Phi.T @ V @ self.Psi

    def inv(self, Vt):
        V = self.Phi @ Vt @ self.Psi.T
        return V.reshape(V.shape[:-2] + (self.n,))

    # -- factorization for one value of nlam ------------------------------
    def _factor(self, nlam):
        f = self._cache.get(nlam)
        if f is not None:
            return f
        D = self.dsig + nlam
        a2 = self.a ** 2
        f = {"D": D, "core": None, "logdet_core": 0.0}
        if self.Bt is not None:
            G = (a2[:, None] / D).sum(axis=0)
            C = np.eye(self.J) + self.Bt * G[None, :]
            lu = sla.lu_factor(C)
            f["core"] = lu
            f["logdet_core"] = np.sum(np.log(np.abs(np.diag(lu[0]))))
        MS = np.stack([self._minv_rot(St, f) for St in self.St])
        H = np.einsum("lkj,mkj->lm", self.St, MS)
        f["MS"], f["H"] = MS, H
        f["Hinv"] = np.linalg.inv(H)
        if len(self._cache) > 8:
            self._cache.clear()
        self._cache[nlam] = f
        return f

    def _minv_rot(self, Vt, f):
        D = f["D"]
        W = Vt / D
        if f["core"] is None:
            return W
        zw = np.tensordot(W, self.a, axes=([-2], [0]))  # (..., J)
        s = sla.lu_solve(f["core"], (zw @ self.Bt.T).T).T if zw.ndim > 1 else \
            sla.lu_solve(f["core"], self.Bt @ zw)
        return W - (self.a[:, None] * s[..., None, :]) / D

    def _p_rot(self, Vt, f):
        """``P v`` in rotated coordinates, with ``P = Q2 (Q2' M Q2)^{-1} Q2'``."""
        MV = self._minv_rot(Vt, f)
        SMv = np.einsum("lkj,...kj->...l", f["MS"], Vt)
        coef = SMv @ f["Hinv"].T
        return MV - np.einsum("...l,lkj->...kj", coef, f["MS"]), coef

    # -- public interface ---------------------------------------------------
    def sigma_apply(self, c):
        Ct = self.fwd(c)
        out = self.dsig * Ct
        if self.Bt is not None:
            zc = Ct.T @ self.a if Ct.ndim == 2 else np.tensordot(Ct, self.a, axes=([-2], [0]))
            out = out + self.a[:, None] * (zc @ self.Bt.T)[..., None, :]
        return self.inv(out)

    def smooth(self, z, nlam):
        f = self._factor(nlam)
        ct, d = self._p_rot(self.fwd(z), f)
        c = self.inv(ct)
        return z - nlam * c, c, d

    def gml_terms(self, yc, nlam):
        f = self._factor(nlam)
        pt, _ = self._p_rot(self.fwd(yc), f)
        quad = nlam * float(np.sum(self.fwd(yc) * pt))
        logdet_M = np.log(f["D"]).sum() + f["logdet_core"]
        logdet = (logdet_M + np.linalg.slogdet(f["H"])[1] - self._logdet_StS
                  - (self.n - self.m) * np.log(nlam))
        return logdet, quad

    def trace_hat(self, nlam):
        f = self._factor(nlam)
        D = f["D"]
        tr_minv = (1.0 / D).sum()
        tr_minv2_S = f["MS"]
        if f["core"] is not None:
            g2 = (self.a[:, None] ** 2 / D ** 2).sum(axis=0)
            X = sla.lu_solve(f["core"], self.Bt * g2[None, :])
            tr_minv -= np.trace(X)
        tr_corr = np.trace(f["Hinv"] @ np.einsum("lkj,mkj->lm", tr_minv2_S, tr_minv2_S))
        return self.n - nlam * (tr_minv - tr_corr)

    def hat_matrix(self, nlam):
        f = self._factor(nlam)
        It = self.fwd(np.eye(self.n))
        Pt, _ = self._p_rot(It, f)
        P = self.inv(Pt)
        P = 0.5 * (P + P.T)
        return np.eye(self.n) - nlam * P

    def minv(self, X, nlam):
        f = self._factor(nlam)
        X = np.asarray(X, float)
        out = self.inv(self._minv_rot(self.fwd(X.T), f))
        return out.T

    def null_gram_inv(self, nlam):
        return self._factor(nlam)["Hinv"]

    @cached_property
    def Sigma(self):
        """Dense Gram matrix (for checks and small problems)."""
        w = np.repeat(self.freqs, self.J)
        u = np.tile(self.times, self.K)
        return kernels.gram_matrix(w, u, self.theta, limit=np.inf)

    @property
    def points(self):
        return np.repeat(self.freqs, self.J), np.tile(self.times, self.K)
