"""Fixed-step RK4 and the adaptive fallback, checked on closed-form problems."""
import numpy as np
import pytest

from greensim.integrators import (
    convergence_order,
    integrate_adaptive,
    integrate_fixed,
    rk4_step,
)


def decay(y):
    return -y


def logistic(y):
    return y * (1.0 - y)


class TestRk4Step:
    def test_exact_for_cubic(self):
        # RK4 integrates polynomials up to t^4 exactly; d/dt of t^3 sampled
        # autonomously via an augmented state [t, y]
        def f(z):
            return np.array([1.0, 3.0 * z[0] ** 2])

        z = rk4_step(f, np.array([0.0, 0.0]), 0.5)
        assert z[1] == pytest.approx(0.125, rel=1e-14)

    def test_linear_decay_matches_series(self):
        # one step of RK4 on y' = -y reproduces the 4th-order Taylor polynomial
        h = 0.1
        y = rk4_step(decay, np.array([1.0]), h)[0]
        want = 1.0 - h + h**2 / 2 - h**3 / 6 + h**4 / 24
        assert y == pytest.approx(want, rel=1e-14)


class TestFixedIntegration:
    def test_decay_accuracy(self):
        y = integrate_fixed(decay, np.array([1.0]), 1.0, 12)[0]
        assert y == pytest.approx(np.exp(-1.0), rel=1e-5)

    def test_fourth_order_on_decay(self):
        # halving the substep should shrink the error ~16x
        exact = np.exp(-1.0)
        e1 = abs(integrate_fixed(decay, np.array([1.0]), 1.0, 8)[0] - exact)
        e2 = abs(integrate_fixed(decay, np.array([1.0]), 1.0, 16)[0] - exact)
        assert 14.0 < e1 / e2 < 18.0

    def test_fourth_order_on_logistic(self):
        exact = 1.0 / (1.0 + np.exp(-1.0))  # y(1) from y(0) = 1/2
        e1 = abs(integrate_fixed(logistic, np.array([0.5]), 1.0, 8)[0] - exact)
        e2 = abs(integrate_fixed(logistic, np.array([0.5]), 1.0, 16)[0] - exact)
        assert 14.0 < e1 / e2 < 18.0

    def test_substep_count_validated(self):
        with pytest.raises(ValueError):
            integrate_fixed(decay, np.array([1.0]), 1.0, 0)

    def test_preserves_shape(self):
        y0 = np.array([1.0, 2.0, 3.0])
        y = integrate_fixed(lambda x: -x, y0, 0.5, 4)
        assert y.shape == y0.shape


class TestConvergenceOrderHelper:
    def test_reports_sixteen_on_decay(self):
        ratio = convergence_order(decay, np.array([1.0]), 1.0, substeps=8)
        assert 14.0 < ratio < 18.0


class TestAdaptiveIntegration:
    def test_matches_closed_form(self):
        y = integrate_adaptive(decay, np.array([1.0]), 2.0, rtol=1e-9, atol=1e-12)
        assert y[0] == pytest.approx(np.exp(-2.0), rel=1e-7)

    def test_agrees_with_fixed_step(self):
        y_a = integrate_adaptive(logistic, np.array([0.25]), 1.5,
                                 rtol=1e-9, atol=1e-12)
        y_f = integrate_fixed(logistic, np.array([0.25]), 1.5, 64)
        assert y_a[0] == pytest.approx(y_f[0], rel=1e-8)
