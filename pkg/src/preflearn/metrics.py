"""Error functionals and the covariance seminorm."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .core import Dataset, WeightVector
from .errors import DomainError, NumericalError

SYM_TOL = 1e-12
PSD_TOL = 1e-10


def _vec(w) -> np.ndarray:
    return np.asarray(w.w if isinstance(w, WeightVector) else w, dtype=float)


DeltaSampler = Callable[[np.random.Generator, int], np.ndarray]


def _draw_deltas(pair_sampler, rng: np.random.Generator, n: int) -> np.ndarray:
    if hasattr(pair_sampler, "sample_deltas"):
        return pair_sampler.sample_deltas(rng, n)
    return np.asarray(pair_sampler(rng, n), dtype=float)


def disagreement(w_hat, w_star, deltas) -> np.ndarray:
    """Expected disagreement of the two noise-free predictors on each row.

    Both margins nonzero: 0 or 1. Any zero margin: 1/2, since a tied
    comparison is a fair coin independent of the other predictor.
    """
    deltas = np.atleast_2d(deltas)
    s_hat = np.sign(deltas @ _vec(w_hat))
    s_star = np.sign(deltas @ _vec(w_star))
    tied = (s_hat == 0) | (s_star == 0)
    return np.where(tied, 0.5, (s_hat != s_star).astype(float))


def estimate_e1(u_hat, u_star, pair_sampler, n_mc: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte Carlo estimate of the pairwise-prediction error and its standard error.

    ``pair_sampler`` is a :class:`~preflearn.experiments.PairDistribution`
    or any callable ``(rng, n) -> (n, m)`` array of embedded differences.
    """
    if n_mc < 1:
        raise DomainError("n_mc must be at least 1")
    deltas = _draw_deltas(pair_sampler, rng, n_mc)
    d = disagreement(u_hat, u_star, deltas)
    est = float(d.mean())
    stderr = float(d.std() / math.sqrt(n_mc))
    return est, stderr


def e2_distance(w_hat, w_star) -> float:
    """Euclidean parameter error ``||w_hat - w_star||_2``."""
    a, b = _vec(w_hat), _vec(w_star)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def e2_power(w_hat, w_star, p: float = 2.0) -> float:
    """The ``||w_hat - w_star||_p ** p`` reading of the parameter error."""
    a, b = _vec(w_hat), _vec(w_star)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.sum(np.abs(a - b) ** p))


def jacobi_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm is at most ``tol`` (scaled
    by the matrix norm when that exceeds 1). Returned in ascending order.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.ndim != 2 or a.shape[1] != n:
        raise DomainError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=SYM_TOL):
        raise DomainError("matrix must be symmetric")
    a = (a + a.T) / 2
    target = tol * max(1.0, float(np.linalg.norm(a)))

    def off(m):
        return float(np.linalg.norm(m - np.diag(np.diag(m))))

    for _ in range(max_sweeps):
        if off(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-150 * max(abs(diff), 1.0):
                    t = apq / diff  # theta would overflow; first-order rotation
                else:
                    theta = diff / (2 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q], rot[q, p] = s, -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
    else:
        raise NumericalError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Second moment of embedded pair differences."""

    sigma: np.ndarray
    n: int

    def __post_init__(self):
        s = np.array(self.sigma, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise DomainError("covariance must be a square matrix")
        if not np.allclose(s, s.T, rtol=0, atol=SYM_TOL):
            raise DomainError("covariance must be symmetric")
        if jacobi_eigenvalues(s)[0] < -PSD_TOL:
            raise DomainError("covariance is not positive semidefinite")
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @classmethod
    def from_deltas(cls, deltas) -> "CovarianceMatrix":
        deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
        return cls(deltas.T @ deltas / len(deltas), len(deltas))

    @classmethod
    def from_dataset(cls, data: Dataset) -> "CovarianceMatrix":
        return cls.from_deltas(data.delta)


SigmaLike = Union[CovarianceMatrix, np.ndarray]


def _sigma(sigma: SigmaLike) -> np.ndarray:
    return sigma.sigma if isinstance(sigma, CovarianceMatrix) else np.asarray(sigma, dtype=float)


def covariance_seminorm(v, sigma: SigmaLike) -> float:
    """``sqrt(v^T Sigma v)``."""
    v = _vec(v)
    q = float(v @ _sigma(sigma) @ v)
    if q < -PSD_TOL:
        raise NumericalError(f"negative quadratic form {q:.3g}")
    return math.sqrt(max(q, 0.0))


def min_eigenvalue(sigma: SigmaLike) -> float:
    return float(jacobi_eigenvalues(_sigma(sigma))[0])


def max_eigenvalue(sigma: SigmaLike) -> float:
    return float(jacobi_eigenvalues(_sigma(sigma))[-1])
