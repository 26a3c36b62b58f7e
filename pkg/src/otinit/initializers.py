"""Initializer tags and a single entry point producing warm starts.

Only one potential is produced: ``f`` on ``mu`` when ``n <= m``, otherwise
``g`` on ``nu`` (the smaller vector). The solver then updates the other
side first.

Tags::

    zero                  no warm start
    dualsort[:k]          1D closed form after k DualSort passes (default 3)
    gaus                  Gaussian Monge-map potential
    gmm[:K]               mixture warm start (default K=10)
    subsample[:size]      subsample-then-extrapolate (default one tenth, >= 16)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gauss import gaus_init
from .gmm import gmm_init
from .init1d import dual_1d
from .measures import CostMatrix, DiscreteMeasure
from .sinkhorn import DualPotentials
from .subsample import SubsampleSpec, default_spec, subsample_init

__all__ = ["InitSpec", "parse_initializer", "initialize", "principal_projection"]

_DEFAULTS = {"zero": None, "dualsort": 3, "gaus": None, "gmm": 10, "subsample": None}


@dataclass(frozen=True)
class InitSpec:
    name: str
    param: int | None = None

    @property
    def tag(self) -> str:
        return self.name if self.param is None else f"{self.name}:{self.param}"


def parse_initializer(tag: str) -> InitSpec:
    text = tag.strip().lower()
    if text.endswith(")") and "(" in text:  # "dualsort(3)" spelling
        text = text[:-1].replace("(", ":", 1)
    name, _, arg = text.partition(":")
    if name not in _DEFAULTS:
        raise ValueError(f"unknown initializer {tag!r}; expected one of {sorted(_DEFAULTS)}")
    if not arg:
        return InitSpec(name, _DEFAULTS[name])
    if _DEFAULTS[name] is None and name != "subsample":
        raise ValueError(f"initializer {name!r} takes no parameter")
    try:
        value = int(arg)
    except ValueError:
        raise ValueError(f"bad parameter in initializer tag {tag!r}") from None
    if value < 1:
        raise ValueError(f"initializer parameter must be positive in {tag!r}")
    return InitSpec(name, value)


def principal_projection(X, Y):
    """Project two clouds onto the leading principal axis of their union."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[1] == 1:
        return X[:, 0], Y[:, 0]
    Z = np.vstack([X, Y])
    center = Z.mean(axis=0)
    _, _, Vt = np.linalg.svd(Z - center, full_matrices=False)
    axis = Vt[0]
    return (X - center) @ axis, (Y - center) @ axis


def _one_side(mu, nu, spec, epsilon, C, tau, seed):
    """Potential on the support of ``mu`` for the problem ``mu -> nu``."""
    if spec.name == "dualsort":
        x, y = principal_projection(mu.support, nu.support)
        f, _ = dual_1d(x, y, mu.weights, nu.weights, dualsort_iters=spec.param)
        return f
    if C.kind != "squared_euclidean":
        raise ValueError(f"initializer {spec.name!r} requires a squared-Euclidean cost")
    if spec.name == "gaus":
        return gaus_init(mu, nu)
    if spec.name == "gmm":
        K = min(spec.param, mu.n, nu.n)
        return gmm_init(mu, nu, K, epsilon, seed=seed)
    if spec.name == "subsample":
        if spec.param is None:
            sub = default_spec(mu.n, nu.n, seed)
        else:
            sub = SubsampleSpec(min(spec.param, mu.n), min(spec.param, nu.n), seed)
        return subsample_init(mu, nu, epsilon, sub, tau=tau)
    raise AssertionError(spec.name)


def initialize(
    tag: str | InitSpec,
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    C: CostMatrix,
    epsilon: float,
    *,
    tau: float = 0.01,
    seed: int = 0,
) -> DualPotentials | None:
    """Warm start for ``sinkhorn_solve`` (``None`` for the zero initializer).

    For ``dualsort`` on data with ``d > 1`` both clouds are projected on
    their leading principal axis and the 1D potential of the projections
    is used as a heuristic start.
    """
    spec = parse_initializer(tag) if isinstance(tag, str) else tag
    if spec.name == "zero":
        return None
    n, m = mu.n, nu.n
    if n <= m:
        f = _one_side(mu, nu, spec, epsilon, C, tau, seed)
        return DualPotentials(f, np.zeros(m), epsilon)
    g = _one_side(nu, mu, spec, epsilon, C.T, tau, seed)
    return DualPotentials(np.zeros(n), g, epsilon)
