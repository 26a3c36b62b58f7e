"""Synthetic point clouds and the (source, target) pairs used by the suite."""

from __future__ import annotations

import re

import numpy as np
from sklearn.datasets import make_blobs, make_moons, make_s_curve

from ..measures import DiscreteMeasure, make_measure
from ..softops import sort_problem

__all__ = [
    "DATASETS",
    "parse_dataset",
    "gen_blobs_1d",
    "gen_two_moons",
    "gen_s_curve_2d",
    "gen_blobs2d",
    "gen_gaussian",
    "gen_mixture",
    "make_pair",
]

DATASETS = ("blobs1d", "two_moons", "s_curve_2d", "blobs2d_3", "gauss_pair", "mixture_pair")
MOONS_NOISE = 0.05


def parse_dataset(tag: str) -> tuple[str, tuple[int, ...]]:
    """``gauss_pair(5)``, ``gauss_pair:5`` or ``mixture_pair(50,10)`` -> name and integer args."""
    m = re.fullmatch(r"\s*([a-z0-9_]+)\s*(?:\((.*)\)|:(.*))?\s*", tag.lower())
    if not m or m.group(1) not in DATASETS:
        raise ValueError(f"unknown dataset {tag!r}; expected one of {DATASETS}")
    name = m.group(1)
    raw = m.group(2) if m.group(2) is not None else m.group(3)
    try:
        args = tuple(int(v) for v in raw.split(",")) if raw and raw.strip() else ()
    except ValueError:
        raise ValueError(f"bad dataset arguments in {tag!r}") from None
    defaults = {"gauss_pair": (5,), "mixture_pair": (10, 10)}.get(name, ())
    if len(args) > len(defaults):
        raise ValueError(f"too many arguments for dataset {name!r}")
    args = args + defaults[len(args):]
    if any(v < 1 for v in args):
        raise ValueError(f"dataset arguments must be positive in {tag!r}")
    return name, args


def gen_blobs_1d(n: int, seed: int) -> np.ndarray:
    """Uniform mixture of 5 Gaussians, std 3, centers uniform in (-10, 10)."""
    x, _ = make_blobs(n_samples=n, n_features=1, centers=5, cluster_std=3.0,
                      center_box=(-10.0, 10.0), random_state=seed)
    return x[:, 0]


def gen_two_moons(n: int, noise: float = MOONS_NOISE, seed: int = 0, labels: bool = False):
    """Two interleaved unit half-circles plus isotropic Gaussian noise."""
    X, y = make_moons(n_samples=n, noise=noise, random_state=seed)
    return (X, y) if labels else X


def gen_s_curve_2d(n: int, seed: int) -> np.ndarray:
    """Planar S shape: the 3D S-curve seen along its uniform height axis."""
    X, _ = make_s_curve(n_samples=n, random_state=seed)
    return X[:, [0, 2]]


def gen_blobs2d(n: int, centers=3, seed: int = 0, cluster_std: float = 1.0) -> np.ndarray:
    """Isotropic 2D blobs; ``centers`` is a count or an explicit ``(k, 2)`` array."""
    X, _ = make_blobs(n_samples=n, n_features=2, centers=centers, cluster_std=cluster_std,
                      center_box=(-10.0, 10.0), random_state=seed)
    return X


def _random_spd(rng, d, scale=1.0):
    G = rng.standard_normal((d, d))
    return scale * (G @ G.T / d + 0.1 * np.eye(d))


def gen_gaussian(n: int, d: int, seed: int) -> np.ndarray:
    """Samples of a Gaussian with random mean and covariance."""
    rng = np.random.default_rng(seed)
    mean = rng.standard_normal(d)
    L = np.linalg.cholesky(_random_spd(rng, d))
    return mean + rng.standard_normal((n, d)) @ L.T


def gen_mixture(n: int, d: int, components: int, seed: int) -> np.ndarray:
    """Samples of a random ``components``-Gaussian mixture (Dirichlet weights)."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.full(components, 5.0))
    means = 3.0 * rng.standard_normal((components, d))
    chols = [np.linalg.cholesky(_random_spd(rng, d, 0.5)) for _ in range(components)]
    labels = rng.choice(components, size=n, p=weights)
    X = rng.standard_normal((n, d))
    for k in range(components):
        sel = labels == k
        X[sel] = means[k] + X[sel] @ chols[k].T
    return X


def make_pair(dataset: str, n: int, seed: int) -> tuple[DiscreteMeasure, DiscreteMeasure]:
    """Uniform source and target measures of size ``n`` for a dataset tag."""
    name, args = parse_dataset(dataset)
    ss = np.random.SeedSequence(seed)
    s_mu, s_nu = (int(s) for s in ss.generate_state(2) % (2**31 - 1))
    if name == "blobs1d":
        x, y, _, _ = sort_problem(gen_blobs_1d(n, s_mu))
        X, Y = x[:, None], y[:, None]
    elif name == "two_moons":
        P, lab = gen_two_moons(2 * n, seed=s_mu, labels=True)
        X, Y = P[lab == 0], P[lab == 1]
    elif name == "s_curve_2d":
        X, Y = gen_s_curve_2d(n, s_mu), gen_two_moons(n, seed=s_nu)
    elif name == "blobs2d_3":
        # two samples of one 3-blob distribution: shared centers, separate draws
        centers = np.random.default_rng(s_mu).uniform(-10.0, 10.0, size=(3, 2))
        X, Y = gen_blobs2d(n, centers, s_mu), gen_blobs2d(n, centers, s_nu)
    elif name == "gauss_pair":
        X, Y = gen_gaussian(n, args[0], s_mu), gen_gaussian(n, args[0], s_nu)
    else:
        d, k = args
        X, Y = gen_mixture(n, d, k, s_mu), gen_mixture(n, d, k, s_nu)
    return make_measure("uniform", X), make_measure("uniform", Y)
