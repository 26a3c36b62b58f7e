"""Gaussian mixtures: weighted k-means + EM fitting, the mixture-level
Bures-Wasserstein cost, and the mixture warm start.

The warm start solves a small ``K x K`` entropic problem between the two
fitted mixtures and spreads its potential over the points with the
posterior responsibilities of the source mixture.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from sklearn.cluster import KMeans

from .gauss import RIDGE, GaussianParams, _ridge, bures_squared
from .measures import CostMatrix, DiscreteMeasure
from .sinkhorn import SinkhornConfig, sinkhorn_solve

__all__ = [
    "GmmParams",
    "kmeans",
    "fit_gmm",
    "log_responsibilities",
    "responsibilities",
    "gmm_cost_matrix",
    "gmm_init",
]

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class GmmParams:
    weights: np.ndarray
    components: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size != len(self.components):
            raise ValueError("one weight per component is required")
        if np.any(w <= 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("mixture weights must be positive and sum to 1")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def K(self) -> int:
        return len(self.components)

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.components])

    @property
    def covs(self) -> np.ndarray:
        return np.array([c.cov for c in self.components])

    def permuted(self, perm) -> "GmmParams":
        perm = list(perm)
        return GmmParams(self.weights[perm], tuple(self.components[k] for k in perm))


def kmeans(X, weights, K, seed=0, max_iter=100):
    """Weighted Lloyd iterations from a seeded k-means++ start.

    Returns ``(centers, labels)``. Empty clusters are relocated to far-away
    points by scikit-learn's implementation.
    """
    X = np.asarray(X, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if K > X.shape[0]:
        raise ValueError(f"K={K} exceeds the number of points {X.shape[0]}")
    km = KMeans(n_clusters=K, init="k-means++", n_init=1, max_iter=max_iter, algorithm="lloyd", random_state=seed)
    km.fit(X, sample_weight=w)
    return km.cluster_centers_, km.labels_


def _log_densities(X, means, covs):
    """``log N(x_i; m_k, S_k)`` as an ``(n, K)`` array."""
    n, d = X.shape
    out = np.empty((n, len(means)))
    for k, (m, S) in enumerate(zip(means, covs)):
        L = np.linalg.cholesky(S)
        z = np.linalg.solve(L, (X - m).T)
        out[:, k] = -0.5 * (np.einsum("ij,ij->j", z, z) + d * _LOG_2PI) - np.log(np.diag(L)).sum()
    return out


def log_responsibilities(params: GmmParams, X) -> np.ndarray:
    """Posterior log-probabilities of each component, normalized per point."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    L = np.log(params.weights)[None, :] + _log_densities(X, params.means, params.covs)
    return L - logsumexp(L, axis=1, keepdims=True)


def responsibilities(params: GmmParams, X) -> np.ndarray:
    return np.exp(log_responsibilities(params, X))


def _m_step(X, w, R, cov_kind, ridge):
    Nk = (w[:, None] * R).sum(axis=0)
    means = (R * w[:, None]).T @ X / Nk[:, None]
    d = X.shape[1]
    covs = np.empty((len(Nk), d, d))
    for k in range(len(Nk)):
        Xc = X - means[k]
        S = (Xc * (w * R[:, k])[:, None]).T @ Xc / Nk[k]
        if cov_kind == "diagonal":
            S = np.diag(np.diag(S))
        S = 0.5 * (S + S.T)
        covs[k] = S + _ridge(S, ridge) * np.eye(d)
    return Nk / Nk.sum(), means, covs


def fit_gmm(
    measure: DiscreteMeasure,
    K: int,
    seed: int = 0,
    cov_kind: str = "full",
    ridge: float = RIDGE,
    max_iter: int = 200,
    tol: float = 1e-6,
) -> GmmParams:
    """Fit a ``K``-component mixture to a weighted point cloud.

    Atom weights act as fractional counts. EM starts from the hard k-means
    partition and stops once the weighted log-likelihood gains less than
    ``tol`` or after ``max_iter`` steps.
    """
    if cov_kind not in ("full", "diagonal"):
        raise ValueError(f"unknown covariance kind {cov_kind!r}")
    X, w = measure.support, measure.weights
    n = X.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"need 1 <= K <= n, got K={K}, n={n}")
    _, labels = kmeans(X, w, K, seed=seed)
    R = np.zeros((n, K))
    R[np.arange(n), labels] = 1.0
    alpha, means, covs = _m_step(X, w, R, cov_kind, ridge)

    prev = -np.inf
    for _ in range(max_iter):
        logp = np.log(alpha)[None, :] + _log_densities(X, means, covs)
        norm = logsumexp(logp, axis=1, keepdims=True)
        ll = float(w @ norm[:, 0])
        R = np.exp(logp - norm)
        mass = (w[:, None] * R).sum(axis=0)
        dead = np.flatnonzero(mass <= 1e-12)
        if dead.size:
            # hand the worst-explained atoms to starved components
            worst = np.argsort(norm[:, 0], kind="stable")[: dead.size]
            for k, i in zip(dead, worst):
                R[i] = 0.0
                R[i, k] = 1.0
        alpha, means, covs = _m_step(X, w, R, cov_kind, ridge)
        if ll - prev < tol and not dead.size:
            break
        prev = ll
    comps = tuple(GaussianParams(m, S) for m, S in zip(means, covs))
    return GmmParams(alpha, comps)


def gmm_cost_matrix(rho: GmmParams, tau: GmmParams) -> CostMatrix:
    """``C[k, l] = ||m_k - m_l||^2 + B^2(S_k, S_l)`` between mixture components."""
    if rho.means.shape[1] != tau.means.shape[1]:
        raise ValueError("mixtures live in different dimensions")
    C = np.empty((rho.K, tau.K))
    for k, p in enumerate(rho.components):
        for l, q in enumerate(tau.components):
            diff = p.mean - q.mean
            C[k, l] = diff @ diff + bures_squared(p.cov, q.cov)
    return CostMatrix(C, "squared_euclidean")


def gmm_init(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    K: int,
    epsilon: float,
    seed: int = 0,
    cov_kind: str = "full",
    rho: GmmParams | None = None,
    tau: GmmParams | None = None,
    inner_tau: float = 1e-6,
    inner_max_iters: int = 100_000,
) -> np.ndarray:
    """Mixture warm start ``f^(0)`` on the support of ``mu``.

    ``rho`` and ``tau`` may carry mixtures fitted earlier (they are reused
    as is). Raises ``RuntimeError`` if the ``K x K`` problem does not converge.
    """
    rho = rho if rho is not None else fit_gmm(mu, K, seed=seed, cov_kind=cov_kind)
    tau = tau if tau is not None else fit_gmm(nu, K, seed=seed, cov_kind=cov_kind)
    C = gmm_cost_matrix(rho, tau)
    cfg = SinkhornConfig(epsilon, tau=inner_tau, max_iters=inner_max_iters)
    dp, report = sinkhorn_solve(rho.weights, tau.weights, C, cfg)
    if not report.converged:
        raise RuntimeError(
            f"mixture-level problem did not converge ({report.iterations} iterations, "
            f"error {report.final_error:.3g})"
        )
    return responsibilities(rho, mu.support) @ dp.f
