"""Soft ranks and soft sorts read off entropic couplings to a uniform grid."""

from __future__ import annotations

import numpy as np

from .init1d import dual_1d
from .measures import build_cost_1d
from .sinkhorn import DualPotentials, SinkhornConfig, coupling_from_duals, sinkhorn_solve

__all__ = ["sort_problem", "soft_rank", "soft_sort"]


def _standardize(v):
    v = np.asarray(v, dtype=np.float64)
    s = v.std()
    return (v - v.mean()) / s if s > 0 else np.zeros_like(v)


def sort_problem(x, m=None, a=None, b=None):
    """Standardized inputs, targets ``1..m`` mapped affinely onto their range,
    and both weight vectors."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    n = x.size
    m = n if m is None else m
    a = np.full(n, 1.0 / n) if a is None else np.asarray(a, dtype=np.float64) / np.sum(a)
    b = np.full(m, 1.0 / m) if b is None else np.asarray(b, dtype=np.float64) / np.sum(b)
    xs = _standardize(x)
    ys = np.linspace(xs.min(), xs.max(), m) if n else np.zeros(m)
    return xs, ys, a, b


def _solve(x, epsilon, config, init, dualsort_iters, m, a, b):
    xs, ys, a, b = sort_problem(x, m, a, b)
    config = config or SinkhornConfig(epsilon)
    if config.epsilon != epsilon:
        raise ValueError("config.epsilon differs from epsilon")
    C = build_cost_1d(xs, ys)
    start = None
    if init == "dualsort":
        f, g = dual_1d(xs, ys, a, b, dualsort_iters=dualsort_iters)
        if xs.size <= ys.size:
            start = DualPotentials(f, np.zeros(ys.size), epsilon)
        else:
            start = DualPotentials(np.zeros(xs.size), g, epsilon)
    elif init != "zero":
        raise ValueError(f"unknown initializer {init!r} (use 'zero' or 'dualsort')")
    dp, report = sinkhorn_solve(a, b, C, config, init=start)
    if report.failure:
        raise FloatingPointError(report.failure)
    return coupling_from_duals(dp, C).values, report


def soft_rank(x, epsilon=0.01, config=None, init="zero", dualsort_iters=3, m=None, a=None, b=None, return_report=False):
    """Soft ranks ``n * P z`` with ``z = (1, ..., m)``.

    Inputs and targets are standardized before the cost is built, so one
    ``epsilon`` behaves alike across data scales.
    """
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    P, report = _solve(x, epsilon, config, init, dualsort_iters, m, a, b)
    ranks = x.size * P @ np.arange(1, P.shape[1] + 1, dtype=np.float64)
    return (ranks, report) if return_report else ranks


def soft_sort(x, epsilon=0.01, config=None, init="zero", dualsort_iters=3, m=None, a=None, b=None, return_report=False):
    """Soft sorted values ``n * P^T x``."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    P, report = _solve(x, epsilon, config, init, dualsort_iters, m, a, b)
    values = x.size * P.T @ x
    return (values, report) if return_report else values
