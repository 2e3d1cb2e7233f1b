import math

import numpy as np
import pytest

from preflearn.core import Embedding, QueryPair, WeightVector
from preflearn.errors import UnsupportedNoiseError
from preflearn.noise import NoiseModel
from preflearn.oracle import Oracle, eta, query, repeated_query


def pair(delta):
    delta = np.asarray(delta, dtype=float)
    x = 0.5 - delta / 2
    return QueryPair(x, x + delta, delta)


def oracle(w, noise, seed=0):
    return Oracle(WeightVector(w), noise, rng=seed)


class TestQuery:
    def test_positive_margin(self):
        o = oracle([0.5, 0.5], NoiseModel.zero())
        assert all(query(o, pair([0.4, 0.2])) == 1 for _ in range(50))
        assert o.query_count == 50

    def test_tie_is_fair_coin(self):
        o = oracle([0.5, 0.5], NoiseModel.zero(), seed=3)
        ys = [query(o, pair([0.2, -0.2])) for _ in range(20000)]
        assert abs(np.mean(ys) - 0.5) < 0.015
        assert o.query_count == 20000

    def test_logistic_rate(self):
        o = oracle([0.3, 0.7], NoiseModel.logistic(), seed=4)
        p = pair([1, -1])
        assert o.margin(p) == pytest.approx(-0.4)
        expected = 1 / (1 + math.exp(0.4))
        assert expected == pytest.approx(0.4013, abs=1e-4)
        ys = [query(o, p) for _ in range(10**5)]
        assert abs(np.mean(ys) - expected) <= 0.005

    def test_binomial_three_sigma(self):
        o = oracle([0.2, 0.3, 0.5], NoiseModel.gaussian(0.5), seed=9)
        p = pair([0.3, -0.1, 0.2])
        prob = o.prob_one(p)
        ys = o.query_many(np.tile(p.delta, (10**5, 1)))
        assert abs(ys.mean() - prob) <= 3 * math.sqrt(prob * (1 - prob) / 10**5)


class TestRepeatedQuery:
    def test_deterministic_labels(self):
        o = oracle([0.5, 0.5], NoiseModel.zero())
        assert repeated_query(o, pair([0.6, 0.0]), 50) == 50
        assert repeated_query(o, pair([-0.6, 0.0]), 50) == 0
        assert o.query_count == 100

    def test_zero_margin_concentration(self):
        o = oracle([0.5, 0.5], NoiseModel.logistic(), seed=11)
        s = repeated_query(o, pair([0.2, -0.2]), 10**4)
        assert abs(s / 10**4 - 0.5) <= 0.02
        assert o.query_count == 10**4

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            repeated_query(oracle([0.5, 0.5], NoiseModel.zero()), pair([0, 0]), 0)


class TestEta:
    @pytest.mark.parametrize("sign", [1, -1])
    def test_margin_04(self, sign):
        o = oracle([0.5, 0.5], NoiseModel.logistic())
        assert eta(o, pair([sign * 0.8, 0])) == pytest.approx(1 / (1 + math.exp(0.4)), rel=1e-12)

    def test_margin_zero(self):
        assert eta(oracle([0.5, 0.5], NoiseModel.logistic()), pair([0.2, -0.2])) == 0.5

    def test_margin_five(self):
        # margin 5 is out of reach for unit-box pairs; check the c.d.f. identity directly
        o = Oracle(WeightVector([0.5, 0.5]), NoiseModel.logistic(), rng=0)
        big = QueryPair.__new__(QueryPair)
        object.__setattr__(big, "delta", np.array([10.0, 0.0]))
        assert eta(o, big) == pytest.approx(1 / (1 + math.exp(5)), rel=1e-12)
        assert eta(o, big) == pytest.approx(0.0067, abs=1e-4)

    def test_zero_noise_unsupported(self):
        with pytest.raises(UnsupportedNoiseError):
            eta(oracle([0.5, 0.5], NoiseModel.zero()), pair([0.2, 0]))


def test_determinism():
    pairs = [pair(d) for d in np.random.default_rng(0).uniform(-0.5, 0.5, (200, 3))]
    runs = []
    for _ in range(2):
        o = oracle([0.2, 0.3, 0.5], NoiseModel.logistic(), seed=42)
        labels = [query(o, p) for p in pairs] + [repeated_query(o, pairs[0], 77)]
        runs.append((labels, o.query_count))
    assert runs[0] == runs[1]
    assert runs[0][1] == 277


def test_embedding_dimension_checked():
    with pytest.raises(ValueError):
        Oracle(WeightVector([0.5, 0.5]), NoiseModel.zero(), Embedding.identity(3))
