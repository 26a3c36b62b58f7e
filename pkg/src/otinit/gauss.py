"""Gaussian approximations: moments, matrix square roots, Bures-Wasserstein
geometry and the Gaussian warm start for squared-Euclidean costs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure

__all__ = [
    "GaussianParams",
    "MongeMap",
    "fit_gaussian",
    "sqrtm",
    "bures_squared",
    "w2_squared",
    "monge_matrix",
    "gaussian_potential",
    "gaus_init",
]

RIDGE = 1e-6


@dataclass(frozen=True)
class GaussianParams:
    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class MongeMap:
    """Affine map ``x -> A (x - mean_src) + mean_dst`` between Gaussians."""

    A: np.ndarray
    mean_src: np.ndarray
    mean_dst: np.ndarray

    def __call__(self, X):
        X = np.atleast_2d(X)
        return (X - self.mean_src) @ self.A + self.mean_dst


def _ridge(cov, ridge):
    d = cov.shape[0]
    scale = np.trace(cov) / d
    return ridge * (scale if scale > 0 else 1.0)


def fit_gaussian(measure: DiscreteMeasure, ridge: float = RIDGE) -> GaussianParams:
    """Weighted mean and covariance, plus ``ridge * tr(cov)/d`` on the diagonal.

    When the covariance vanishes (a single atom) the ridge is ``ridge`` itself.
    """
    a, X = measure.weights, measure.support
    mean = a @ X
    Xc = X - mean
    cov = (Xc * a[:, None]).T @ Xc
    cov = 0.5 * (cov + cov.T)
    cov += _ridge(cov, ridge) * np.eye(cov.shape[0])
    return GaussianParams(mean, cov)


def _check_spd(M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    scale = max(np.abs(M).max(), np.finfo(float).tiny)
    if np.abs(M - M.T).max() > 1e-10 * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def _eig_sqrt(M):
    w, V = np.linalg.eigh(M)
    if w[0] <= 0:
        raise ValueError("matrix is not positive definite")
    s = np.sqrt(w)
    return (V * s) @ V.T, (V / s) @ V.T


def sqrtm(M, max_iter: int = 30, check_every: int = 5, tol: float = 1e-12, return_method=False):
    """Square root and inverse square root of an SPD matrix.

    Runs the coupled Newton-Schulz iteration on ``M / ||M||_F``. The
    residual ``||S S - M||_F / ||M||_F`` and ``||S S^-1 - I||_F`` are checked
    every ``check_every`` steps; if they are not both below ``tol`` within
    ``max_iter`` steps (or stop improving) the symmetric eigendecomposition
    is used instead.

    Returns ``(sqrt, inv_sqrt)``, plus the method used (``"newton_schulz"``
    or ``"eigh"``) when ``return_method`` is true.
    """
    M = _check_spd(M)
    d = M.shape[0]
    if np.linalg.eigvalsh(M)[0] <= 0:
        raise ValueError("matrix is not positive definite")
    norm = np.linalg.norm(M)
    I = np.eye(d)
    Y = M / norm
    Z = I.copy()
    best = np.inf
    method = "eigh"
    for k in range(1, max_iter + 1):
        T = 0.5 * (3.0 * I - Z @ Y)
        Y = Y @ T
        Z = T @ Z
        if k % check_every == 0 or k == max_iter:
            S = 0.5 * (Y + Y.T) * np.sqrt(norm)
            Si = 0.5 * (Z + Z.T) / np.sqrt(norm)
            if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Si))):
                break
            res = max(np.linalg.norm(S @ S - M) / norm, np.linalg.norm(S @ Si - I))
            if res <= tol:
                method = "newton_schulz"
                break
            if res >= best:
                break  # stalled
            best = res
    if method == "eigh":
        S, Si = _eig_sqrt(M)
    return (S, Si, method) if return_method else (S, Si)


def bures_squared(S1, S2) -> float:
    """``tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)``, clamped at zero."""
    S1 = _check_spd(S1)
    S2 = _check_spd(S2)
    if S1.shape != S2.shape:
        raise ValueError("covariances have different dimensions")
    # tr((S1^1/2 S2 S1^1/2)^1/2) is the nuclear norm of S2^1/2 S1^1/2; this
    # avoids a square root of the product, whose condition number is squared.
    r1, _ = sqrtm(S1)
    r2, _ = sqrtm(S2)
    cross = np.linalg.svd(r2 @ r1, compute_uv=False).sum()
    return max(0.0, float(np.trace(S1) + np.trace(S2) - 2.0 * cross))


def w2_squared(p: GaussianParams, q: GaussianParams) -> float:
    """Squared 2-Wasserstein distance between two Gaussians."""
    diff = p.mean - q.mean
    return float(diff @ diff) + bures_squared(p.cov, q.cov)


def monge_matrix(S_mu, S_nu, mean_src=None, mean_dst=None) -> MongeMap:
    """Gaussian Monge map whose symmetric slope ``A`` satisfies ``A S_mu A = S_nu``.

    The means only set the affine shift; they default to zero.
    """
    S_mu = _check_spd(S_mu)
    S_nu = _check_spd(S_nu)
    r, ri = sqrtm(S_mu)
    mid = r @ S_nu @ r
    c, _ = sqrtm(0.5 * (mid + mid.T))
    A = ri @ c @ ri
    d = S_mu.shape[0]
    mean_src = np.zeros(d) if mean_src is None else np.asarray(mean_src, dtype=np.float64)
    mean_dst = np.zeros(d) if mean_dst is None else np.asarray(mean_dst, dtype=np.float64)
    return MongeMap(0.5 * (A + A.T), mean_src, mean_dst)


def gaussian_potential(X, p: GaussianParams, q: GaussianParams, A=None) -> np.ndarray:
    """Optimal potential for the cost ``||x - y||^2`` from ``N(p)`` to ``N(q)``:
    ``||x||^2 - (x - m_p)^T A (x - m_p) - 2 m_q^T x``."""
    if A is None:
        A = monge_matrix(p.cov, q.cov).A
    elif isinstance(A, MongeMap):
        A = A.A
    X = np.atleast_2d(X)
    Xc = X - p.mean
    return np.einsum("ij,ij->i", X, X) - np.einsum("ij,jk,ik->i", Xc, A, Xc) - 2.0 * X @ q.mean


def gaus_init(mu: DiscreteMeasure, nu: DiscreteMeasure, mu_params=None, nu_params=None):
    """Warm start ``f^(0)`` on the support of ``mu`` from Gaussian fits.

    Pass precomputed :class:`GaussianParams` to reuse fits across problems.
    For the ``nu``-side vector call ``gaus_init(nu, mu)``.
    """
    p = mu_params if mu_params is not None else fit_gaussian(mu)
    q = nu_params if nu_params is not None else fit_gaussian(nu)
    return gaussian_potential(mu.support, p, q)
