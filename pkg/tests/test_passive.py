import math

import numpy as np
import pytest

from preflearn.core import Dataset, Embedding, WeightVector
from preflearn.errors import UnsupportedNoiseError, UsageError
from preflearn.noise import NoiseModel
from preflearn.oracle import Oracle
from preflearn.passive import MleSettings, fit_erm_noise_free, fit_mle, loss_and_gradient

from conftest import random_simplex

LOGISTIC = NoiseModel.logistic()


def labelled(w_star, n, noise, seed, m=None):
    rng = np.random.default_rng(seed)
    m = m or len(w_star)
    x, xp = rng.random((n, m)), rng.random((n, m))
    o = Oracle(WeightVector(w_star), noise, rng=rng)
    return Dataset(x, xp, xp - x, o.query_many(xp - x))


def fd_gradient(f, w, h=1e-6):
    g = np.zeros_like(w)
    for i in range(w.size):
        e = np.zeros_like(w)
        e[i] = h
        g[i] = (f(w + e) - f(w - e)) / (2 * h)
    return g


class TestErm:
    def test_single_constraint_vertex(self):
        # maximise w1 - w2 over the segment: the vertex (1, 0)
        r = fit_erm_noise_free(Dataset.from_deltas([[1, -1]], [1]))
        np.testing.assert_allclose(r.w.w, [1, 0], atol=1e-12)
        assert r.consistent and r.min_slack == pytest.approx(1.0)

    def test_contradiction(self):
        r = fit_erm_noise_free(Dataset.from_deltas([[1, -1], [-1, 1]], [1, 1]))
        np.testing.assert_allclose(r.w.w, [0.5, 0.5], atol=1e-12)
        assert not r.consistent

    def test_strict_contradiction(self):
        r = fit_erm_noise_free(Dataset.from_deltas([[0.5, 0.5], [0.5, 0.5]], [1, 0]))
        assert not r.consistent and r.min_slack < 0

    def test_uninformative_labels(self, rng):
        # all differences coordinatewise positive: every simplex point fits, whatever w_star is
        x = rng.random((300, 3)) * 0.5
        xp = x + 0.01 + rng.random((300, 3)) * 0.4
        outs = []
        for w_star in ([1, 0, 0], [0, 1, 0], [0.2, 0.3, 0.5]):
            o = Oracle(WeightVector(w_star), NoiseModel.zero(), rng=0)
            y = o.query_many(xp - x)
            assert np.all(y == 1)
            r = fit_erm_noise_free(Dataset(x, xp, xp - x, y))
            assert np.all((xp - x) @ random_simplex(rng, 3, 100).T > 0)
            outs.append(r.w.w)
        np.testing.assert_array_equal(outs[0], outs[1])
        np.testing.assert_array_equal(outs[0], outs[2])

    def test_consistency_on_separable_data(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            m = int(rng.integers(2, 6))
            data = labelled(random_simplex(rng, m), 300, NoiseModel.zero(), seed)
            r = fit_erm_noise_free(data)
            s = 2.0 * data.y - 1
            assert np.all(s * (data.delta @ r.w.w) >= -1e-12)
            assert r.consistent

    def test_empty(self):
        with pytest.raises(UsageError):
            fit_erm_noise_free(None)


class TestLossAndGradient:
    def test_hand_example(self):
        data = Dataset.from_deltas([[0.4, -0.4]], [1])
        r = loss_and_gradient(WeightVector([0.5, 0.5]), data, LOGISTIC)
        assert r.loss == pytest.approx(math.log(2), abs=1e-15)
        np.testing.assert_allclose(r.grad, [-0.2, 0.2], atol=1e-15)
        assert not r.floored

    def test_zero_differences(self):
        data = Dataset.from_deltas(np.zeros((5, 3)), [1, 0, 1, 1, 0])
        r = loss_and_gradient([0.2, 0.3, 0.5], data, LOGISTIC)
        assert r.loss == pytest.approx(math.log(2))
        np.testing.assert_array_equal(r.grad, 0)

    @pytest.mark.parametrize("nm", [LOGISTIC, NoiseModel.gaussian(), NoiseModel.logistic(0.2)], ids=["logistic", "gaussian", "logistic-0.2"])
    def test_finite_differences(self, nm):
        for seed in range(30):
            rng = np.random.default_rng(seed)
            m = int(rng.integers(2, 7))
            data = labelled(random_simplex(rng, m), int(rng.integers(1, 60)), nm, seed)
            w = random_simplex(rng, m)
            g = loss_and_gradient(w, data, nm).grad
            fd = fd_gradient(lambda u: loss_and_gradient(u, data, nm).loss, w)
            assert np.linalg.norm(g - fd) <= 1e-6 * max(np.linalg.norm(g), 1e-12)

    def test_convex_along_segments(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            data = labelled(random_simplex(rng, 4), 200, LOGISTIC, seed)
            a, b = random_simplex(rng, 4), random_simplex(rng, 4)
            t = np.linspace(0, 1, 41)
            vals = np.array([loss_and_gradient((1 - s) * a + s * b, data, LOGISTIC).loss for s in t])
            assert np.all(vals[:-2] - 2 * vals[1:-1] + vals[2:] >= -1e-9)

    def test_floor(self):
        nm = NoiseModel.tabulated([-0.1, 0.1], [0.0, 1.0])
        data = Dataset.from_deltas([[0.8, -0.8]], [0])
        r = loss_and_gradient([1.0, 0.0], data, nm)
        assert r.floored and r.loss == pytest.approx(-math.log(1e-300))
        assert not loss_and_gradient([1.0, 0.0], data, LOGISTIC).floored

    def test_zero_noise(self):
        with pytest.raises(UnsupportedNoiseError):
            loss_and_gradient([0.5, 0.5], Dataset.from_deltas([[0.1, 0]], [1]), NoiseModel.zero())


class TestMle:
    def test_sign_symmetric_data(self):
        data = Dataset.from_deltas([[0.4, -0.4], [0.4, -0.4], [-0.2, 0.2], [-0.2, 0.2]], [1, 0, 1, 0])
        r = fit_mle(data, LOGISTIC, w0=[0.9, 0.1])
        np.testing.assert_allclose(r.w.w, [0.5, 0.5], atol=1e-6)
        assert r.loss == pytest.approx(math.log(2), abs=1e-10)
        assert r.converged

    def test_recovers_weights(self):
        data = labelled([0.2, 0.3, 0.5], 10_000, LOGISTIC, seed=7)
        r = fit_mle(data, LOGISTIC)
        assert r.converged
        assert np.linalg.norm(r.w.w - [0.2, 0.3, 0.5]) <= 0.1
        assert not r.floored

    def test_monotone_losses(self):
        for seed in range(5):
            data = labelled(random_simplex(np.random.default_rng(seed), 4), 500, NoiseModel.gaussian(0.5), seed)
            r = fit_mle(data, NoiseModel.gaussian(0.5))
            assert np.all(np.diff(r.loss_history) <= 1e-15)

    def test_stationarity_matches_constrained_optimum(self):
        from scipy.optimize import minimize

        data = labelled([0.1, 0.6, 0.3], 400, LOGISTIC, seed=3)
        r = fit_mle(data, LOGISTIC)
        ref = minimize(
            lambda w: loss_and_gradient(w, data, LOGISTIC).loss,
            np.full(3, 1 / 3),
            jac=lambda w: loss_and_gradient(w, data, LOGISTIC).grad,
            method="SLSQP",
            bounds=[(0, 1)] * 3,
            constraints=[{"type": "eq", "fun": lambda w: w.sum() - 1}],
            options={"ftol": 1e-15, "maxiter": 500},
        )
        assert r.loss <= ref.fun + 1e-10
        np.testing.assert_allclose(r.w.w, ref.x, atol=1e-4)

    def test_max_iterations(self):
        data = labelled([0.2, 0.8], 100, LOGISTIC, seed=1)
        r = fit_mle(data, LOGISTIC, MleSettings(max_iterations=2, gradient_tolerance=1e-300))
        assert r.iterations == 2 and not r.converged

    def test_errors(self):
        data = Dataset.from_deltas([[0.1, 0]], [1])
        with pytest.raises(UnsupportedNoiseError):
            fit_mle(data, NoiseModel.zero())
        with pytest.raises(UsageError):
            fit_mle(None, LOGISTIC)
        with pytest.raises(UsageError):
            MleSettings(shrink=1.5)
