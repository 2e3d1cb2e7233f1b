"""Labelling oracle holding the hidden utility weights."""

from __future__ import annotations

import numpy as np

from .core import Embedding, QueryPair, WeightVector
from .errors import UnsupportedNoiseError
from .noise import NoiseModel


class Oracle:
    """Answers comparison queries for a hidden ``w_star`` and counts them.

    The label of ``(x, x')`` is 1 with probability ``F(w_star . delta)``.
    Each single query consumes one uniform from ``rng``; a block of ``T``
    repetitions consumes one binomial draw. An oracle is not thread-safe.
    """

    def __init__(
        self,
        w_star: WeightVector,
        noise: NoiseModel,
        embedding: Embedding | None = None,
        rng: np.random.Generator | int | None = None,
    ):
        self._w_star = w_star if isinstance(w_star, WeightVector) else WeightVector(w_star)
        self.noise = noise
        self.embedding = embedding if embedding is not None else Embedding.identity(self._w_star.m)
        if self.embedding.output_dim != self._w_star.m:
            raise ValueError("embedding output dimension does not match w_star")
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self.query_count = 0

    @property
    def m(self) -> int:
        return self._w_star.m

    def reveal(self) -> WeightVector:
        """The hidden weights; for metrics and instrumentation, never for learners."""
        return self._w_star

    def margin(self, pair: QueryPair) -> float:
        return float(self._w_star.w @ pair.delta)

    def prob_one(self, pair: QueryPair) -> float:
        return float(self.noise.cdf(self.margin(pair)))

    def query(self, pair: QueryPair) -> int:
        self.query_count += 1
        return int(self.rng.random() < self.prob_one(pair))

    def query_many(self, deltas: np.ndarray) -> np.ndarray:
        """Label each row of an ``(n, m)`` difference array once."""
        deltas = np.atleast_2d(deltas)
        p = np.asarray(self.noise.cdf(deltas @ self._w_star.w))
        self.query_count += len(deltas)
        return (self.rng.random(len(deltas)) < p).astype(np.int8)

    def repeated_query(self, pair: QueryPair, T: int) -> int:
        """Sum of ``T`` independent labels of the same pair."""
        if T < 1:
            raise ValueError("repetition count must be positive")
        self.query_count += T
        return int(self.rng.binomial(T, self.prob_one(pair)))

    def eta(self, pair: QueryPair) -> float:
        """Chance of a misreported label, ``F(-|w_star . delta|)``."""
        if not self.noise.has_density:
            raise UnsupportedNoiseError("flip rate is degenerate under zero noise")
        return float(self.noise.cdf(-abs(self.margin(pair))))


def query(o: Oracle, pair: QueryPair) -> int:
    return o.query(pair)


def repeated_query(o: Oracle, pair: QueryPair, T: int) -> int:
    return o.repeated_query(pair, T)


def eta(o: Oracle, pair: QueryPair) -> float:
    return o.eta(pair)
