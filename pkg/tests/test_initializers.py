import numpy as np
import pytest

from otinit import SinkhornConfig, build_cost_1d, build_cost_sqeuclidean, make_measure, sinkhorn_solve
from otinit.gauss import gaus_init
from otinit.initializers import InitSpec, initialize, parse_initializer, principal_projection

from .conftest import random_problem


def test_parse_tags():
    assert parse_initializer("zero") == InitSpec("zero")
    assert parse_initializer("dualsort") == InitSpec("dualsort", 3)
    assert parse_initializer("dualsort(3)") == InitSpec("dualsort", 3)
    assert parse_initializer("gmm:4") == InitSpec("gmm", 4)
    assert parse_initializer("subsample:50").tag == "subsample:50"
    for bad in ("warm", "gaus:2", "gmm:0", "gmm:x"):
        with pytest.raises(ValueError):
            parse_initializer(bad)


def test_zero_is_none(rng):
    mu, nu, C = random_problem(rng, 5, 5)
    assert initialize("zero", mu, nu, C, 0.1) is None


@pytest.mark.parametrize("tag", ["dualsort", "gaus", "gmm:2", "subsample:8"])
def test_smaller_side_only(rng, tag):
    mu, nu, C = random_problem(rng, 20, 30)
    dp = initialize(tag, mu, nu, C, 0.1)
    assert np.any(dp.f != 0) and not np.any(dp.g)
    dp = initialize(tag, nu, mu, C.T, 0.1)
    assert np.any(dp.g != 0) and not np.any(dp.f)


def test_g_side_is_swapped_problem(rng):
    mu, nu, C = random_problem(rng, 12, 8)
    dp = initialize("gaus", mu, nu, C, 0.1)
    np.testing.assert_allclose(dp.g, gaus_init(nu, mu), atol=1e-12)


def test_gaus_needs_squared_cost(rng):
    mu = make_measure("uniform", rng.standard_normal(5))
    C = build_cost_1d(mu.support[:, 0], mu.support[:, 0], cost=lambda x, y: np.abs(x - y))
    with pytest.raises(ValueError):
        initialize("gaus", mu, mu, C, 0.1)


def test_principal_projection_recovers_line(rng):
    t = rng.standard_normal(30)
    X = np.c_[t, 2 * t]
    px, _ = principal_projection(X, X + 1e-9)
    assert abs(abs(np.corrcoef(px, t)[0, 1]) - 1) < 1e-9


@pytest.mark.parametrize("tag", ["dualsort", "gaus", "gmm:3", "subsample"])
def test_every_initializer_converges(rng, tag):
    mu, nu, C = random_problem(rng, 40, 40)
    dp0 = initialize(tag, mu, nu, C, 0.05, seed=1)
    _, rep = sinkhorn_solve(mu, nu, C, SinkhornConfig(0.05), init=dp0)
    assert rep.converged
