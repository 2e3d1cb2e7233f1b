"""Coordinates on the probability simplex and the box-shaped version space.

The simplex ``{w >= 0, sum(w) = 1}`` lives in an ``(m-1)``-dimensional
affine hull. :class:`SimplexFrame` fixes an orthonormal basis of that hull
so that learners can binary-search one axis at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Embedding, QueryPair, WeightVector
from .errors import DomainError, NoPreimageError

MAX_SHRINK = 60


def zero_sum_basis(m: int) -> np.ndarray:
    """Orthonormal rows spanning ``{v : sum(v) = 0}``.

    Classical Gram-Schmidt over ``e_1 - e_m, e_2 - e_m, ..., e_{m-1} - e_m``
    in that order, so the basis is reproducible for a given ``m``.
    """
    if m < 2:
        raise DomainError("simplex dimension must be at least 2")
    basis = np.zeros((m - 1, m))
    for i in range(m - 1):
        v = np.zeros(m)
        v[i], v[-1] = 1.0, -1.0
        for j in range(i):
            v -= (basis[j] @ v) * basis[j]
        basis[i] = v / np.linalg.norm(v)
    return basis


@dataclass(frozen=True, eq=False)
class SimplexFrame:
    m: int

    def __post_init__(self):
        basis = zero_sum_basis(self.m)
        basis.setflags(write=False)
        centroid = np.full(self.m, 1.0 / self.m)
        centroid.setflags(write=False)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "centroid", centroid)

    @property
    def dim(self) -> int:
        return self.m - 1

    def coords(self, w) -> np.ndarray:
        """Frame coordinates of a point (or rows of points) in the affine hull."""
        return (np.asarray(w, dtype=float) - self.centroid) @ self.basis.T

    def point_from_coords(self, t) -> np.ndarray:
        return self.centroid + np.asarray(t, dtype=float) @ self.basis

    def cut_normal(self, axis: int, c: float) -> np.ndarray:
        """Normal ``v`` with ``v . w = coords(w)[axis] - c`` for all simplex ``w``.

        The hyperplane ``v . w = 0`` passes through the origin of R^m and
        meets the simplex exactly on the slice ``coords[axis] == c``.
        """
        if not 0 <= axis < self.dim:
            raise DomainError(f"axis {axis} out of range for m={self.m}")
        return self.basis[axis] - c


@dataclass
class VersionSpace:
    """Bounding box, in frame coordinates, of the surviving hypotheses."""

    frame: SimplexFrame
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        self.lo = np.array(self.lo, dtype=float)
        self.hi = np.array(self.hi, dtype=float)
        if np.any(self.lo > self.hi):
            raise DomainError("version space interval with lo > hi")

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def midpoints(self) -> np.ndarray:
        return (self.lo + self.hi) / 2

    def width(self, axis: int) -> float:
        return float(self.hi[axis] - self.lo[axis])

    def midpoint(self, axis: int) -> float:
        return float((self.lo[axis] + self.hi[axis]) / 2)

    def keep_upper(self, axis: int, c: float) -> None:
        self.lo[axis] = c

    def keep_lower(self, axis: int, c: float) -> None:
        self.hi[axis] = c

    def contains(self, t, tol: float = 1e-12) -> bool:
        t = np.asarray(t, dtype=float)
        return bool(np.all(t >= self.lo - tol) and np.all(t <= self.hi + tol))


def initial_version_space(m: int, frame: SimplexFrame | None = None) -> VersionSpace:
    """Exact bounding box of the simplex vertices in frame coordinates."""
    frame = frame or SimplexFrame(m)
    vertices = frame.coords(np.eye(m))
    return VersionSpace(frame, vertices.min(axis=0), vertices.max(axis=0))


def cut_normal(f: SimplexFrame, axis: int, c: float) -> np.ndarray:
    return f.cut_normal(axis, c)


def point_from_coords(f: SimplexFrame, t) -> np.ndarray:
    return f.point_from_coords(t)


def build_query(f: SimplexFrame, e: Embedding, v) -> tuple[QueryPair, float]:
    """Synthesize a pair whose embedded difference points along ``v``.

    The pair is anchored at the embedded center of the input box and its
    difference is ``alpha * v / ||v||_2`` with
    ``alpha = min(||v||_2 / (2 ||v||_inf), 1)``, which keeps the endpoint
    inside ``[0, 1]^m`` for an anchor at 1/2. If the embedding cannot
    reach the endpoint, ``alpha`` is halved until it can. Returns the pair
    and ``alpha``; the sign of ``w . delta`` equals the sign of ``w . v``.
    """
    v = np.asarray(v, dtype=float)
    if v.shape != (f.m,):
        raise DomainError(f"normal vector must have length {f.m}")
    norm2 = float(np.linalg.norm(v))
    if norm2 == 0.0:
        raise DomainError("cannot build a query from a zero normal")
    direction = v / norm2
    alpha = min(0.5 * norm2 / float(np.abs(v).max()), 1.0)

    x = e.invert(e.embed(e.box_center))
    anchor = e.embed(x)
    for _ in range(MAX_SHRINK):
        try:
            x_prime = e.invert(anchor + alpha * direction)
        except NoPreimageError:
            alpha /= 2
            continue
        return QueryPair(x, x_prime, e.embed(x_prime) - anchor), alpha
    raise NoPreimageError("embedding cannot realise any step along the cut normal")


def project_to_simplex(p) -> WeightVector:
    """Euclidean projection onto ``{w >= 0, sum(w) = 1}`` (sort-and-threshold)."""
    p = np.asarray(p, dtype=float).ravel()
    u = np.sort(p)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, p.size + 1)
    rho = np.count_nonzero(u - css / k > 0)
    theta = css[rho - 1] / rho
    w = np.maximum(p - theta, 0.0)
    # renormalise rounding residue so the sum check is exact to machine precision
    return WeightVector(w / w.sum())
