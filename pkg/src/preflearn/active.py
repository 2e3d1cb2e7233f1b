"""Active learning of simplex weights by synthesized comparison queries.

Both learners binary-search the version space one frame axis at a time. The
query for a cut at coordinate ``c`` on axis ``i`` has an embedded difference
parallel to ``b_i - c * 1``, so a noise-free label reveals on which side of
the cut the hidden weights lie.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import WeightVector
from .errors import LearnerAbort, UsageError
from .geometry import SimplexFrame, VersionSpace, build_query, initial_version_space, project_to_simplex
from .noise import NoiseModel
from .oracle import Oracle

MAX_REPETITIONS = 10**8
DEGENERATE_GAP = 1e-12


@dataclass
class AxisRecord:
    axis: int
    cuts_made: int = 0
    stopped_early: bool = False
    recorded_hyperplane_coordinate: Optional[float] = None


@dataclass
class Vote:
    axis: int
    cut: float
    repetitions: int
    ones: int
    threshold: float


@dataclass
class ActiveRunReport:
    w_hat: WeightVector
    queries_used: int
    per_axis: list[AxisRecord]
    votes: list[Vote] = field(default_factory=list)
    coords: np.ndarray | None = None


Observer = Callable[[int, VersionSpace], None]


def target_width(m: int, eps: float) -> float:
    """Side length ``2 eps / sqrt(m - 1)`` of a cube whose half-diagonal is ``eps``."""
    return 2 * eps / math.sqrt(m - 1)


def query_budget(m: int, eps: float) -> int:
    """``(m - 1) * ceil(log2(W0 sqrt(m - 1) / (2 eps)))``, W0 the widest initial axis."""
    w0 = float(initial_version_space(m).widths.max())
    ratio = w0 / target_width(m, eps)
    return (m - 1) * max(0, math.ceil(math.log2(ratio)))


def _check_eps(eps: float) -> None:
    if not 0 < eps < 1:
        raise UsageError("eps must lie in (0, 1)")


def _finish(frame: SimplexFrame, coords: np.ndarray) -> WeightVector:
    return project_to_simplex(frame.point_from_coords(coords))


def active_noise_free(o: Oracle, eps: float, observer: Observer | None = None) -> ActiveRunReport:
    """Per-axis binary search until every interval is at most ``2 eps / sqrt(m - 1)`` wide.

    The returned point is the projected box center, within ``eps`` of the
    hidden weights in l2.
    """
    _check_eps(eps)
    if o.noise.kind != "zero":
        raise UsageError("noise-free active learning needs a zero-noise oracle")
    m = o.m
    frame = SimplexFrame(m)
    vs = initial_version_space(m, frame)
    target = target_width(m, eps)
    start = o.query_count
    records = []
    for axis in range(frame.dim):
        rec = AxisRecord(axis)
        while vs.width(axis) > target:
            c = vs.midpoint(axis)
            pair, _ = build_query(frame, o.embedding, frame.cut_normal(axis, c))
            if o.query(pair) == 1:
                vs.keep_upper(axis, c)
            else:
                vs.keep_lower(axis, c)
            rec.cuts_made += 1
            if observer is not None:
                observer(axis, vs)
        records.append(rec)
    coords = vs.midpoints
    return ActiveRunReport(_finish(frame, coords), o.query_count - start, records, coords=coords)


def repetitions(gap: float, failure: float) -> int:
    """Smallest ``T`` with ``exp(-T gap^2 / 4) <= failure``."""
    return math.ceil(4.0 / gap**2 * math.log(1.0 / failure))


def per_vote_failure(delta: float, rounds: int) -> float:
    """``1 - q`` with ``q = (1 - delta)^(1 / rounds)``, computed without cancellation."""
    return -math.expm1(math.log1p(-delta) / rounds)


def active_noisy(
    o: Oracle,
    eps: float,
    delta: float,
    nm: NoiseModel | None = None,
    observer: Observer | None = None,
) -> ActiveRunReport:
    """Binary search with repeated queries and a majority vote per cut.

    Each cut is asked ``T`` times. A clear majority (``|S - T/2|`` above
    ``T (p0 - 1/2) / 2``) halves the interval; otherwise the hidden weights
    sit near the cut, the axis stops, and the cut coordinate is kept.
    ``p0 = F(eps')`` with ``eps' = alpha eps / (sqrt(m - 1) ||v||)`` is the
    label probability of a query whose cut is ``eps / sqrt(m - 1)`` away
    from the hidden weights along the axis.
    """
    _check_eps(eps)
    if not 0 < delta < 1:
        raise UsageError("delta must lie in (0, 1)")
    nm = nm if nm is not None else o.noise
    if not nm.has_density:
        raise UsageError("noisy active learning needs a noise model with a density")
    m = o.m
    frame = SimplexFrame(m)
    vs = initial_version_space(m, frame)
    target = target_width(m, eps)
    failure = per_vote_failure(delta, max(1, query_budget(m, eps)))
    start = o.query_count
    records, votes = [], []
    coords = np.empty(frame.dim)
    for axis in range(frame.dim):
        rec = AxisRecord(axis)
        while vs.width(axis) > target:
            c = vs.midpoint(axis)
            v = frame.cut_normal(axis, c)
            pair, alpha = build_query(frame, o.embedding, v)
            margin = alpha * eps / (math.sqrt(m - 1) * float(np.linalg.norm(v)))
            gap = float(nm.cdf(margin)) - 0.5
            if gap <= DEGENERATE_GAP:
                raise LearnerAbort(f"noise c.d.f. is flat near zero: F({margin:.3g}) - 1/2 = {gap:.3g}")
            T = repetitions(gap, failure)
            if T > MAX_REPETITIONS:
                raise LearnerAbort(f"vote needs {T} repetitions, above the cap of {MAX_REPETITIONS}")
            ones = o.repeated_query(pair, T)
            threshold = T * gap / 2
            votes.append(Vote(axis, c, T, ones, threshold))
            if abs(ones - T / 2) > threshold:
                if ones > T / 2:
                    vs.keep_upper(axis, c)
                else:
                    vs.keep_lower(axis, c)
                rec.cuts_made += 1
                if observer is not None:
                    observer(axis, vs)
            else:
                rec.stopped_early = True
                rec.recorded_hyperplane_coordinate = c
                break
        coords[axis] = rec.recorded_hyperplane_coordinate if rec.stopped_early else vs.midpoint(axis)
        records.append(rec)
    return ActiveRunReport(_finish(frame, coords), o.query_count - start, records, votes, coords)
