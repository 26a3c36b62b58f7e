"""Subsample warm start: solve on uniform subsamples, then extend the
target-side potential to every source point with the entropic c-transform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import DiscreteMeasure, build_cost_sqeuclidean, make_measure
from .sinkhorn import SinkhornConfig, _row_lse, sinkhorn_solve

__all__ = [
    "SubsampleSpec",
    "default_spec",
    "subsample_measure",
    "entropic_extrapolate",
    "subsample_init",
]


@dataclass(frozen=True)
class SubsampleSpec:
    size_mu: int
    size_nu: int
    seed: int = 0

    def __post_init__(self):
        if self.size_mu < 1 or self.size_nu < 1:
            raise ValueError("subsample sizes must be positive")


def default_spec(n: int, m: int, seed: int = 0) -> SubsampleSpec:
    """One tenth of each side, at least 16 points (never more than available)."""
    return SubsampleSpec(min(n, max(16, n // 10)), min(m, max(16, m // 10)), seed)


def subsample_measure(measure: DiscreteMeasure, size: int, seed: int = 0) -> DiscreteMeasure:
    """Uniform sample of ``size`` atoms without replacement, weights ``1/size``."""
    if not 1 <= size <= measure.n:
        raise ValueError(f"cannot draw {size} atoms from a measure of size {measure.n}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(measure.n, size=size, replace=False))
    return make_measure("uniform", measure.support[idx])


def _sqeuclidean(X, Z):
    return build_cost_sqeuclidean(X, Z).values


def entropic_extrapolate(g_breve, Z, epsilon: float, X, cost=None) -> np.ndarray:
    """``-eps * log( mean_j exp((g_j - c(x_i, z_j)) / eps) )`` for every ``x_i``.

    ``cost(X, Z)`` must return the ``(len(X), len(Z))`` cost matrix; the
    default is the squared Euclidean distance.
    """
    g = np.asarray(g_breve, dtype=np.float64).reshape(-1)
    Cxz = (cost or _sqeuclidean)(np.asarray(X, dtype=np.float64), np.asarray(Z, dtype=np.float64))
    if Cxz.shape[1] != g.size:
        raise ValueError("potential and subsample support sizes differ")
    M = (g[None, :] - Cxz) / epsilon
    return -epsilon * (_row_lse(M) - np.log(g.size))


def subsample_init(
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    epsilon: float,
    spec: SubsampleSpec | None = None,
    tau: float = 0.01,
    inner_tau: float | None = None,
    max_iters: int = 10000,
    cost=None,
) -> np.ndarray:
    """Warm start ``f^(0)`` on ``mu`` from a solve on subsampled measures.

    The inner problem uses the same ``epsilon`` and cost, solved to
    ``inner_tau`` (``tau / 10`` by default). Raises ``RuntimeError`` if it
    does not converge.
    """
    spec = spec or default_spec(mu.n, nu.n)
    sub_mu = subsample_measure(mu, spec.size_mu, seed=spec.seed)
    sub_nu = subsample_measure(nu, spec.size_nu, seed=spec.seed + 1)
    cost_fn = cost or _sqeuclidean
    C = cost_fn(sub_mu.support, sub_nu.support)
    cfg = SinkhornConfig(epsilon, tau=inner_tau if inner_tau is not None else tau / 10, max_iters=max_iters)
    dp, report = sinkhorn_solve(sub_mu, sub_nu, C, cfg)
    if not report.converged:
        raise RuntimeError(
            f"subsampled problem did not converge ({report.iterations} iterations, "
            f"error {report.final_error:.3g})"
        )
    return entropic_extrapolate(dp.g, sub_nu.support, epsilon, mu.support, cost=cost_fn)
