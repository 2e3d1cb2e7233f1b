"""Symmetric noise c.d.f.s for random-utility comparison labels.

A comparison ``(x, x')`` is labelled 1 with probability ``F(w . delta)``,
where ``F`` is the c.d.f. of the utility-difference noise. Every model here
satisfies ``F(z) + F(-z) = 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import optimize, special

from .errors import DomainError, UnsupportedNoiseError, UsageError

FD_STEP = 1e-5

KINDS = ("zero", "logistic", "gaussian", "tabulated")


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Noise c.d.f. with density, second derivative, inverse and log-c.d.f.

    ``scale`` is the logistic scale ``s`` or the Gaussian ``sigma``.
    Tabulated models interpolate ``table_z``/``table_f`` linearly and are
    symmetrised as ``(F(z) + 1 - F(-z)) / 2``.
    """

    kind: str
    scale: float = 1.0
    table_z: np.ndarray | None = None
    table_f: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("logistic", "gaussian") and not self.scale > 0:
            raise UsageError("noise scale must be positive")
        if self.kind == "tabulated":
            z = np.asarray(self.table_z, dtype=float)
            f = np.asarray(self.table_f, dtype=float)
            if z.ndim != 1 or z.shape != f.shape or z.size < 2:
                raise UsageError("tabulated c.d.f. needs matching 1-d z and F columns")
            if np.any(np.diff(z) <= 0):
                raise UsageError("tabulated z values must be strictly increasing")
            if np.any(np.diff(f) < 0) or f.min() < 0 or f.max() > 1:
                raise UsageError("tabulated F must be nondecreasing within [0, 1]")
            z.setflags(write=False)
            f.setflags(write=False)
            object.__setattr__(self, "table_z", z)
            object.__setattr__(self, "table_f", f)

    # constructors

    @classmethod
    def zero(cls) -> "NoiseModel":
        return cls("zero")

    @classmethod
    def logistic(cls, scale: float = 1.0) -> "NoiseModel":
        return cls("logistic", scale)

    @classmethod
    def gaussian(cls, sigma: float = 1.0) -> "NoiseModel":
        return cls("gaussian", sigma)

    @classmethod
    def tabulated(cls, z, f) -> "NoiseModel":
        return cls("tabulated", 1.0, np.asarray(z, float), np.asarray(f, float))

    @classmethod
    def from_csv(cls, path: str | Path) -> "NoiseModel":
        """Read a ``z,F`` CSV file with strictly increasing ``z``."""
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != ["z", "F"]:
                raise UsageError(f"{path}: expected header 'z,F'")
            rows = [(float(r["z"]), float(r["F"])) for r in reader]
        z, f = zip(*rows) if rows else ((), ())
        return cls.tabulated(z, f)

    @classmethod
    def from_spec(cls, spec) -> "NoiseModel":
        """Parse ``"logistic"``, ``{"kind": "gaussian", "sigma": 2}`` and similar."""
        if isinstance(spec, NoiseModel):
            return spec
        if isinstance(spec, str):
            spec = {"kind": spec}
        kind = spec.get("kind")
        if kind == "zero":
            return cls.zero()
        if kind == "logistic":
            return cls.logistic(float(spec.get("scale", 1.0)))
        if kind == "gaussian":
            return cls.gaussian(float(spec.get("sigma", spec.get("scale", 1.0))))
        if kind == "tabulated":
            if "path" in spec:
                return cls.from_csv(spec["path"])
            return cls.tabulated(spec["z"], spec["F"])
        raise UsageError(f"unknown noise kind {kind!r}")

    def to_spec(self) -> dict:
        if self.kind == "logistic":
            return {"kind": "logistic", "scale": self.scale}
        if self.kind == "gaussian":
            return {"kind": "gaussian", "sigma": self.scale}
        if self.kind == "tabulated":
            return {"kind": "tabulated", "z": self.table_z.tolist(), "F": self.table_f.tolist()}
        return {"kind": "zero"}

    @property
    def has_density(self) -> bool:
        return self.kind != "zero"

    def _require_density(self, what: str):
        if not self.has_density:
            raise UnsupportedNoiseError(f"{what} is undefined for zero noise")

    # c.d.f. and derivatives

    def _table(self, z):
        return np.interp(z, self.table_z, self.table_f)

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        if self.kind == "logistic":
            out = special.expit(z / self.scale)
        elif self.kind == "gaussian":
            out = special.ndtr(z / self.scale)
        elif self.kind == "tabulated":
            out = 0.5 * (self._table(z) + 1.0 - self._table(-z))
        else:
            out = np.where(z > 0, 1.0, np.where(z < 0, 0.0, 0.5))
        return out if out.ndim else float(out)

    def pdf(self, z):
        """First derivative ``F'``."""
        self._require_density("density")
        z = np.asarray(z, dtype=float)
        s = self.scale
        if self.kind == "logistic":
            out = special.expit(z / s) * special.expit(-z / s) / s
        elif self.kind == "gaussian":
            out = np.exp(-0.5 * (z / s) ** 2) / (s * math.sqrt(2 * math.pi))
        else:
            out = (self.cdf(z + FD_STEP) - self.cdf(z - FD_STEP)) / (2 * FD_STEP)
        return out if np.ndim(out) else float(out)

    def pdf_prime(self, z):
        """Second derivative ``F''``."""
        self._require_density("second derivative")
        z = np.asarray(z, dtype=float)
        s = self.scale
        if self.kind == "logistic":
            p, q = special.expit(z / s), special.expit(-z / s)
            out = p * q * (q - p) / s**2
        elif self.kind == "gaussian":
            out = -z / s**2 * self.pdf(z)
        else:
            out = (self.cdf(z + FD_STEP) - 2 * self.cdf(z) + self.cdf(z - FD_STEP)) / FD_STEP**2
        return out if np.ndim(out) else float(out)

    def logcdf(self, z):
        """``log F(z)``, accurate in the far left tail for analytic kinds."""
        z = np.asarray(z, dtype=float)
        if self.kind == "logistic":
            out = -np.logaddexp(0.0, -z / self.scale)
        elif self.kind == "gaussian":
            out = special.log_ndtr(z / self.scale)
        else:
            with np.errstate(divide="ignore"):
                out = np.log(self.cdf(z))
        return out if np.ndim(out) else float(out)

    def hazard(self, z):
        """``F'(z) / F(z)``, the score factor of the likelihood."""
        self._require_density("hazard")
        z = np.asarray(z, dtype=float)
        if self.kind == "logistic":
            out = special.expit(-z / self.scale) / self.scale
        elif self.kind == "gaussian":
            t = z / self.scale
            out = np.exp(-0.5 * t * t - special.log_ndtr(t)) / (self.scale * math.sqrt(2 * math.pi))
        else:
            f = np.maximum(self.cdf(z), 1e-300)
            out = self.pdf(z) / f
        return out if np.ndim(out) else float(out)

    def inv_cdf(self, p):
        p_arr = np.asarray(p, dtype=float)
        if self.kind == "zero":
            raise UnsupportedNoiseError("zero noise has no inverse c.d.f.")
        if np.any(~((p_arr > 0) & (p_arr < 1))):
            raise DomainError("inverse c.d.f. needs p strictly inside (0, 1)")
        if self.kind == "logistic":
            out = self.scale * special.logit(p_arr)
        elif self.kind == "gaussian":
            out = self.scale * special.ndtri(p_arr)
        else:
            out = np.vectorize(self._inv_table)(p_arr)
        return out if np.ndim(out) else float(out)

    def _inv_table(self, p: float) -> float:
        lo, hi = -abs(self.table_z).max() - 1.0, abs(self.table_z).max() + 1.0
        fa, fb = self.cdf(lo) - p, self.cdf(hi) - p
        if fa > 0 or fb < 0:
            raise DomainError(f"probability {p} outside the tabulated range")
        return optimize.brentq(lambda z: self.cdf(z) - p, lo, hi, xtol=1e-15, rtol=1e-15)


def cdf(nm: NoiseModel, z):
    return nm.cdf(z)


def inv_cdf(nm: NoiseModel, p):
    return nm.inv_cdf(p)


def sample_flip(nm: NoiseModel, margin: float, rng: np.random.Generator) -> int:
    """Draw a comparison label: 1 with probability ``F(margin)``.

    Exactly one uniform is consumed per call; a zero margin under zero noise
    is therefore a fair coin.
    """
    return int(rng.random() < nm.cdf(margin))


def _is_standard(nm: NoiseModel) -> bool:
    return nm.kind in ("logistic", "gaussian") and nm.scale == 1.0


def inverse_poly_bound(nm: NoiseModel, x):
    """Tangent line of ``F^-1`` at 1/2: ``4x - 2`` (logit), ``sqrt(2 pi)(x - 1/2)`` (probit)."""
    x = np.asarray(x, dtype=float)
    if nm.kind == "logistic":
        return 4 * x - 2
    return math.sqrt(2 * math.pi) * x - math.sqrt(2 * math.pi) / 2


@dataclass(frozen=True)
class BoundReport:
    model: str
    x: np.ndarray
    inverse: np.ndarray
    bound: np.ndarray
    slack: np.ndarray

    @property
    def max_slack(self) -> float:
        return float(self.slack.max())

    def holds(self, tol: float = 1e-12) -> bool:
        return self.max_slack <= tol

    def rows(self):
        return zip(self.x.tolist(), self.inverse.tolist(), self.bound.tolist(), self.slack.tolist())


def check_inverse_poly_bound(nm: NoiseModel, grid) -> BoundReport:
    """Evaluate ``F^-1(x) - bound(x)`` over ``grid`` in ``(0, 1/2]``.

    Concavity of ``F^-1`` on ``(0, 1/2]`` puts it under its tangent at 1/2,
    so every slack should be nonpositive.
    """
    if not _is_standard(nm):
        raise UnsupportedNoiseError("bound check needs logistic(scale=1) or gaussian(sigma=1)")
    x = np.asarray(grid, dtype=float)
    if np.any((x <= 0) | (x > 0.5)):
        raise DomainError("grid points must lie in (0, 1/2]")
    inverse = np.atleast_1d(nm.inv_cdf(x))
    bound = np.atleast_1d(inverse_poly_bound(nm, x))
    return BoundReport(nm.kind, x, inverse, bound, inverse - bound)


def convexity_margin(nm: NoiseModel, z):
    """``F'(z)^2 - F''(z) F(z)``; positive values make the likelihood strongly convex."""
    return nm.pdf(z) ** 2 - nm.pdf_prime(z) * nm.cdf(z)


def strong_convexity_gamma(nm: NoiseModel, B: float = 1.0, points: int = 20001) -> float:
    """Minimum of :func:`convexity_margin` over a dense grid of ``[-B, B]``."""
    if not nm.has_density:
        raise UnsupportedNoiseError("strong convexity constant needs a density")
    if not B > 0:
        raise DomainError("margin bound B must be positive")
    z = np.linspace(-B, B, points)
    return float(np.min(convexity_margin(nm, z)))
