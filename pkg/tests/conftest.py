import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_problem(rng, n, m, d=2, uniform=True):
    from otinit import build_cost_sqeuclidean, make_measure

    X = rng.uniform(0.0, 1.0, (n, d))
    Y = rng.uniform(0.0, 1.0, (m, d)) + 0.2
    a = "uniform" if uniform else rng.uniform(0.2, 1.0, n)
    b = "uniform" if uniform else rng.uniform(0.2, 1.0, m)
    mu, nu = make_measure(a, X), make_measure(b, Y)
    return mu, nu, build_cost_sqeuclidean(X, Y)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.VERDICTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(test_acceptance.VERDICTS):
            terminalreporter.write_line(test_acceptance.VERDICTS[number])
