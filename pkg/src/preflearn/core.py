"""Domain types: weight vectors, embeddings, query pairs and datasets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
from scipy.optimize import linprog

from .errors import DomainError, NoPreimageError, UsageError

SUM_TOL = 1e-9
NEG_CLIP = -1e-12
BOX_TOL = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class WeightVector:
    """A point on the probability simplex, ``w >= 0`` and ``sum(w) == 1``.

    Components in ``[-1e-12, 0)`` are treated as floating-point residue and
    clipped to zero.
    """

    w: np.ndarray

    def __post_init__(self):
        w = np.array(self.w, dtype=float).ravel()
        if w.size < 2:
            raise DomainError(f"weight vector needs m >= 2 components, got {w.size}")
        if not np.all(np.isfinite(w)):
            raise DomainError("weight vector has non-finite components")
        if np.any(w < NEG_CLIP):
            raise DomainError(f"negative weight component: {w.min():.3g}")
        w = np.where(w < 0, 0.0, w)
        if abs(w.sum() - 1.0) > SUM_TOL:
            raise DomainError(f"weights sum to {w.sum():.12g}, not 1")
        object.__setattr__(self, "w", _frozen(w))

    @classmethod
    def uniform(cls, m: int) -> "WeightVector":
        return cls(np.full(m, 1.0 / m))

    @property
    def m(self) -> int:
        return self.w.size

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)

    def __len__(self) -> int:
        return self.m


@dataclass(frozen=True, eq=False)
class Embedding:
    """Feature map ``phi`` from an input box in R^d into ``[0, 1]^m``.

    Only the identity map and full-row-rank affine maps ``A x + b`` are
    supported, so that inversion is exact.
    """

    kind: str
    input_dim: int
    output_dim: int
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    lower: np.ndarray = field(default=None)  # type: ignore[assignment]
    upper: np.ndarray = field(default=None)  # type: ignore[assignment]
    tolerance: float = 1e-10

    def __post_init__(self):
        d = self.input_dim
        lower = np.zeros(d) if self.lower is None else np.asarray(self.lower, float)
        upper = np.ones(d) if self.upper is None else np.asarray(self.upper, float)
        if lower.shape != (d,) or upper.shape != (d,) or np.any(lower > upper):
            raise UsageError("input box bounds must be length-d with lower <= upper")
        object.__setattr__(self, "lower", _frozen(lower))
        object.__setattr__(self, "upper", _frozen(upper))

        if self.kind == "identity":
            if self.output_dim != d:
                raise UsageError("identity embedding needs input_dim == output_dim")
            if np.any(lower < 0) or np.any(upper > 1):
                raise UsageError("identity embedding box must lie inside [0, 1]^d")
        elif self.kind == "affine":
            A = np.asarray(self.A, dtype=float)
            b = np.asarray(self.b, dtype=float)
            if A.shape != (self.output_dim, d) or b.shape != (self.output_dim,):
                raise UsageError(f"affine embedding needs A of shape (m, d) and b of length m")
            if np.linalg.matrix_rank(A) < self.output_dim:
                raise UsageError("affine embedding matrix must have full row rank")
            # exact image bounds of the box, row by row
            lo_img = b + np.minimum(A * lower, A * upper).sum(axis=1)
            hi_img = b + np.maximum(A * lower, A * upper).sum(axis=1)
            if np.any(lo_img < -BOX_TOL) or np.any(hi_img > 1 + BOX_TOL):
                raise UsageError("affine embedding does not map the input box into [0, 1]^m")
            object.__setattr__(self, "A", _frozen(A))
            object.__setattr__(self, "b", _frozen(b))
            object.__setattr__(self, "_pinv", _frozen(np.linalg.pinv(A)))
        else:
            raise UsageError(f"unknown embedding kind {self.kind!r}")

    @classmethod
    def identity(cls, m: int, lower=None, upper=None) -> "Embedding":
        return cls("identity", m, m, lower=lower, upper=upper)

    @classmethod
    def affine(cls, A, b, lower=None, upper=None, tolerance: float = 1e-10) -> "Embedding":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        m, d = A.shape
        return cls("affine", d, m, A=A, b=b, lower=lower, upper=upper, tolerance=tolerance)

    @classmethod
    def from_config(cls, cfg: dict, m: int | None = None) -> "Embedding":
        """Build from ``{"kind": "identity" | "affine", "A": ..., "b": ...}``.

        An optional ``"box": [[lo, hi], ...]`` overrides the unit input box.
        """
        kind = cfg.get("kind", "identity")
        box = cfg.get("box")
        lower = upper = None
        if box is not None:
            box = np.asarray(box, dtype=float)
            lower, upper = box[:, 0], box[:, 1]
        if kind == "identity":
            dim = cfg.get("dim", m)
            if dim is None:
                raise UsageError("identity embedding config needs a dimension")
            return cls.identity(int(dim), lower, upper)
        if kind == "affine":
            return cls.affine(cfg["A"], cfg["b"], lower, upper, cfg.get("tolerance", 1e-10))
        raise UsageError(f"unknown embedding kind {kind!r}")

    def to_config(self) -> dict:
        cfg: dict = {"kind": self.kind}
        if self.kind == "identity":
            cfg["dim"] = self.input_dim
        else:
            cfg["A"] = self.A.tolist()
            cfg["b"] = self.b.tolist()
        cfg["box"] = np.column_stack([self.lower, self.upper]).tolist()
        return cfg

    @property
    def box_center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2

    def in_box(self, x) -> np.ndarray | bool:
        x = np.asarray(x, dtype=float)
        ok = (x >= self.lower - BOX_TOL) & (x <= self.upper + BOX_TOL)
        return ok.all(axis=-1)

    def embed(self, x) -> np.ndarray:
        """Map a point (or an ``(n, d)`` batch) into ``[0, 1]^m``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_dim:
            raise DomainError(f"expected input of dimension {self.input_dim}, got {x.shape[-1]}")
        if not np.all(self.in_box(x)):
            raise DomainError("input lies outside the declared box")
        if self.kind == "identity":
            return x
        return x @ self.A.T + self.b

    def invert(self, v) -> np.ndarray:
        """Return a box point ``x`` with ``embed(x)`` within ``tolerance`` of ``v``."""
        v = np.asarray(v, dtype=float)
        if v.shape[-1] != self.output_dim:
            raise DomainError(f"expected point of dimension {self.output_dim}, got {v.shape[-1]}")
        if self.kind == "identity":
            x = v
        else:
            x = (v - self.b) @ self._pinv.T
            if v.ndim == 1 and not self.in_box(x):
                x = self._box_preimage(v)
        if not np.all(self.in_box(x)):
            raise NoPreimageError("point is outside the image of the input box")
        x = np.clip(x, self.lower, self.upper)
        if np.max(np.abs(self.embed(x) - v)) >= self.tolerance:
            raise NoPreimageError("no preimage within tolerance")
        return x

    def _box_preimage(self, v: np.ndarray) -> np.ndarray:
        # the minimum-norm solution left the box; look for any solution inside it
        res = linprog(
            np.zeros(self.input_dim),
            A_eq=self.A,
            b_eq=v - self.b,
            bounds=list(zip(self.lower, self.upper)),
            method="highs",
        )
        if res.status != 0:
            raise NoPreimageError("point is outside the image of the input box")
        return res.x


def embed(e: Embedding, x) -> np.ndarray:
    return e.embed(x)


def invert(e: Embedding, v) -> np.ndarray:
    return e.invert(v)


@dataclass(frozen=True, eq=False)
class QueryPair:
    """Two candidates ``(x, x')`` with cached difference ``phi(x') - phi(x)``."""

    x: np.ndarray
    x_prime: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        delta = _frozen(self.delta)
        if np.any(np.abs(delta) > 1 + BOX_TOL):
            raise DomainError("pair difference leaves [-1, 1]^m")
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "x_prime", _frozen(self.x_prime))
        object.__setattr__(self, "delta", delta)


def make_pair(e: Embedding, x, x_prime) -> QueryPair:
    x = np.asarray(x, dtype=float)
    x_prime = np.asarray(x_prime, dtype=float)
    return QueryPair(x, x_prime, e.embed(x_prime) - e.embed(x))


@dataclass(frozen=True)
class LabeledExample:
    pair: QueryPair
    y: int

    def __post_init__(self):
        if self.y not in (0, 1):
            raise DomainError(f"label must be 0 or 1, got {self.y!r}")


class Dataset:
    """Labelled comparisons held column-wise.

    ``x``, ``x_prime`` are ``(n, d)``, ``delta`` is ``(n, m)`` and ``y`` is a
    length-``n`` array of 0/1 labels. ``examples`` materialises the rows as
    :class:`LabeledExample` objects.
    """

    def __init__(self, x, x_prime, delta, y, metadata: dict | None = None):
        self.x = _frozen(np.atleast_2d(x))
        self.x_prime = _frozen(np.atleast_2d(x_prime))
        self.delta = _frozen(np.atleast_2d(delta))
        y = np.asarray(y)
        if y.size and not np.all((y == 0) | (y == 1)):
            raise DomainError("labels must be 0 or 1")
        self.y = y.astype(np.int8)
        self.y.setflags(write=False)
        n = self.y.size
        if n < 1:
            raise UsageError("dataset must contain at least one example")
        if not (len(self.x) == len(self.x_prime) == len(self.delta) == n):
            raise UsageError("dataset columns have inconsistent lengths")
        if np.any(np.abs(self.delta) > 1 + BOX_TOL):
            raise DomainError("pair difference leaves [-1, 1]^m")
        self.metadata = dict(metadata or {})
        self.metadata["n"] = n

    @classmethod
    def from_arrays(cls, e: Embedding, x, x_prime, y, metadata: dict | None = None) -> "Dataset":
        x = np.atleast_2d(np.asarray(x, dtype=float))
        x_prime = np.atleast_2d(np.asarray(x_prime, dtype=float))
        return cls(x, x_prime, e.embed(x_prime) - e.embed(x), y, metadata)

    @classmethod
    def from_examples(cls, examples: Iterable[LabeledExample], metadata: dict | None = None) -> "Dataset":
        examples = list(examples)
        if not examples:
            raise UsageError("dataset must contain at least one example")
        return cls(
            [ex.pair.x for ex in examples],
            [ex.pair.x_prime for ex in examples],
            [ex.pair.delta for ex in examples],
            [ex.y for ex in examples],
            metadata,
        )

    @classmethod
    def from_deltas(cls, delta, y, metadata: dict | None = None) -> "Dataset":
        """Dataset under the identity embedding anchored at the box center."""
        delta = np.atleast_2d(np.asarray(delta, dtype=float))
        x = np.full_like(delta, 0.5) - delta / 2
        return cls(x, x + delta, delta, y, metadata)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def m(self) -> int:
        return self.delta.shape[1]

    def __len__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[LabeledExample]:
        for i in range(self.n):
            yield LabeledExample(QueryPair(self.x[i], self.x_prime[i], self.delta[i]), int(self.y[i]))

    @property
    def examples(self) -> list[LabeledExample]:
        return list(self)

    def second_moment(self) -> np.ndarray:
        """Empirical ``(1/n) sum delta delta^T``."""
        return self.delta.T @ self.delta / self.n

    def write_jsonl(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for i in range(self.n):
                row = {"x": self.x[i].tolist(), "x_prime": self.x_prime[i].tolist(), "y": int(self.y[i])}
                fh.write(json.dumps(row) + "\n")

    @classmethod
    def read_jsonl(cls, path: str | Path, e: Embedding, metadata: dict | None = None) -> "Dataset":
        xs, xps, ys = [], [], []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    xs.append(row["x"])
                    xps.append(row["x_prime"])
                    ys.append(row["y"])
                except (json.JSONDecodeError, KeyError) as exc:
                    raise UsageError(f"{path}:{lineno}: malformed example ({exc})") from exc
        if not ys:
            raise UsageError(f"{path}: no examples")
        return cls.from_arrays(e, xs, xps, ys, metadata)
