import numpy as np
import pytest

from figures import isotonic_fit


def test_monotone_input_unchanged():
    x = np.array([1.0, 2.0, 3.0])
    y = np.array([0.1, 0.2, 0.3])
    ux, fit = isotonic_fit(x, y)
    np.testing.assert_allclose(fit, y)
    np.testing.assert_allclose(ux, x)


def test_violators_pooled():
    x = np.array([1.0, 2.0, 3.0, 4.0])
    y = np.array([0.1, 0.4, 0.2, 0.5])
    _, fit = isotonic_fit(x, y)
    np.testing.assert_allclose(fit, [0.1, 0.3, 0.3, 0.5])


def test_fit_is_nondecreasing_random():
    rng = np.random.default_rng(0)
    for _ in range(20):
        x = rng.uniform(size=30)
        y = rng.uniform(size=30)
        _, fit = isotonic_fit(x, y)
        assert np.all(np.diff(fit) >= -1e-12)


def test_ties_in_x_are_averaged():
    x = np.array([1.0, 1.0, 2.0])
    y = np.array([0.0, 1.0, 0.7])
    ux, fit = isotonic_fit(x, y)
    np.testing.assert_allclose(ux, [1.0, 2.0])
    np.testing.assert_allclose(fit, [0.5, 0.7])


def test_weights_shift_pool_average():
    x = np.array([1.0, 2.0])
    y = np.array([1.0, 0.0])
    _, fit = isotonic_fit(x, y, weights=np.array([3.0, 1.0]))
    np.testing.assert_allclose(fit, [0.75, 0.75])


def test_constant_fit_for_decreasing_input():
    x = np.arange(5.0)
    y = np.array([5.0, 4.0, 3.0, 2.0, 1.0])
    _, fit = isotonic_fit(x, y)
    np.testing.assert_allclose(fit, np.full(5, 3.0))


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        isotonic_fit(np.array([1.0]), np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        isotonic_fit(np.array([]), np.array([]))
