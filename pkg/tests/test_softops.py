import numpy as np
import pytest

from otinit import SinkhornConfig
from otinit.softops import soft_rank, soft_sort, sort_problem


def test_single_entry():
    assert soft_rank([3.7]).tolist() == pytest.approx([1.0])
    assert soft_sort([3.7]).tolist() == pytest.approx([3.7])


def test_well_separated_ranks():
    x = np.array([0.0, 10.0, 20.0, 30.0, 40.0])
    np.testing.assert_allclose(soft_rank(x, epsilon=1e-3), [1, 2, 3, 4, 5], atol=0.1)
    np.testing.assert_allclose(soft_rank(x[[3, 0, 4, 2, 1]], epsilon=1e-3), [4, 1, 5, 3, 2], atol=0.1)


def test_reversal_equivariance(rng):
    x = rng.standard_normal(12)
    cfg = SinkhornConfig(0.05, tau=1e-12)
    r = soft_rank(x, 0.05, config=cfg)
    np.testing.assert_allclose(soft_rank(x[::-1], 0.05, config=cfg), r[::-1], atol=1e-9)


def test_constant_sorts_to_itself():
    np.testing.assert_allclose(soft_sort(np.full(6, 2.5)), 2.5, atol=1e-12)


def test_well_separated_sort(rng):
    x = rng.permutation(np.arange(8.0) * 5)
    out = soft_sort(x, epsilon=1e-3)
    assert np.abs(out - np.sort(x)).max() <= 0.1 * np.ptp(x) / 8


def test_mean_preserved(rng):
    for _ in range(5):
        x = rng.standard_normal(20) * 4 + 1
        assert soft_sort(x, 0.01).mean() == pytest.approx(x.mean(), abs=1e-9)


def test_rank_bounds_and_mean(rng):
    n, tau = 30, 0.01
    r, rep = soft_rank(rng.standard_normal(n), 0.01, return_report=True)
    assert rep.converged
    assert r.min() >= 1 * (1 - tau * n) and r.max() <= n * (1 + tau * n)
    assert abs(r.mean() - (n + 1) / 2) <= n * tau


def test_dualsort_same_fixed_point(rng):
    x = rng.standard_normal(40)
    tau = 1e-5
    cfg = SinkhornConfig(0.01, tau=tau)
    r0 = soft_rank(x, 0.01, config=cfg)
    r1 = soft_rank(x, 0.01, config=cfg, init="dualsort")
    np.testing.assert_allclose(r1, r0, atol=10 * tau)


def test_target_size_and_weights(rng):
    x = rng.standard_normal(10)
    r = soft_rank(x, 0.01, m=4)
    assert r.shape == (10,)
    assert 1 - 1e-6 <= r.min() and r.max() <= 10 * 4
    w = rng.uniform(0.5, 1.0, 10)
    assert soft_sort(x, 0.01, a=w, m=10).shape == (10,)


def test_sort_problem_scaling():
    xs, ys, a, b = sort_problem([1.0, 5.0, 3.0])
    assert xs.mean() == pytest.approx(0.0) and xs.std() == pytest.approx(1.0)
    assert ys[0] == pytest.approx(xs.min()) and ys[-1] == pytest.approx(xs.max())
    np.testing.assert_allclose(np.diff(ys), np.diff(ys)[0])


def test_bad_init():
    with pytest.raises(ValueError):
        soft_rank([1.0, 2.0], init="gaus")


def test_config_epsilon_mismatch():
    with pytest.raises(ValueError):
        soft_rank([1.0, 2.0], 0.1, config=SinkhornConfig(0.2))
