"""Pair distributions, seeded trials, sweeps and the counterexample demos."""

from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np
from scipy import stats

from .active import active_noise_free, active_noisy
from .core import Dataset, Embedding, QueryPair, WeightVector, make_pair
from .errors import LearnerAbort, NoPreimageError, UsageError
from .metrics import CovarianceMatrix, covariance_seminorm, e2_distance, estimate_e1, min_eigenvalue
from .noise import NoiseModel
from .oracle import Oracle
from .passive import MleSettings, fit_erm_noise_free, fit_mle

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One output of the SplitMix64 generator whose state is ``x``."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def trial_seed(master_seed: int, trial_index: int) -> int:
    """64-bit per-trial seed: ``splitmix64(splitmix64(master) ^ index)``."""
    return splitmix64(splitmix64(master_seed & MASK64) ^ (trial_index & MASK64))


# ---------------------------------------------------------------------------
# pair distributions

DISTRIBUTION_KINDS = ("uniform_box", "gaussian_truncated", "small_margin", "coordinate_dominant", "aligned_line")


@dataclass(frozen=True, eq=False)
class PairDistribution:
    """Distribution of comparison pairs ``(x, x')`` over an embedding's input box.

    ``small_margin`` always returns ``pair``; ``coordinate_dominant`` makes
    every coordinate of ``x' - x`` strictly positive, moving along
    ``direction``; ``aligned_line`` draws both points on the ray
    ``x = t * slopes``.
    """

    kind: str
    embedding: Embedding
    sigma: float = 0.25
    pair: Optional[QueryPair] = None
    direction: Optional[np.ndarray] = None
    slopes: Optional[np.ndarray] = None

    def __post_init__(self):
        d = self.embedding.input_dim
        if self.kind not in DISTRIBUTION_KINDS:
            raise UsageError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "gaussian_truncated" and not self.sigma > 0:
            raise UsageError("gaussian_truncated needs sigma > 0")
        if self.kind == "small_margin" and self.pair is None:
            raise UsageError("small_margin needs a fixed pair")
        if self.kind == "coordinate_dominant":
            direction = np.ones(d) if self.direction is None else np.asarray(self.direction, float)
            if direction.shape != (d,) or np.any(direction <= 0):
                raise UsageError("coordinate_dominant direction must be a positive d-vector")
            object.__setattr__(self, "direction", direction)
        if self.kind == "aligned_line":
            slopes = np.ones(d) if self.slopes is None else np.asarray(self.slopes, float)
            if slopes.shape != (d,) or np.any(slopes < 0) or slopes.max() <= 0:
                raise UsageError("aligned_line slopes must be a nonnegative, nonzero d-vector")
            object.__setattr__(self, "slopes", slopes)
        if self.kind in ("coordinate_dominant", "aligned_line") and self.embedding.kind != "identity":
            raise UsageError(f"{self.kind} is defined for the identity embedding only")

    @property
    def d(self) -> int:
        return self.embedding.input_dim

    @classmethod
    def from_spec(cls, spec: dict | str | None, embedding: Embedding) -> "PairDistribution":
        spec = {"kind": spec} if isinstance(spec, str) else dict(spec or {"kind": "uniform_box"})
        kind = spec.pop("kind", "uniform_box")
        if kind == "small_margin":
            if "pair" in spec:
                x, xp = spec["pair"]
                return cls(kind, embedding, pair=make_pair(embedding, x, xp))
            raise UsageError("small_margin spec needs 'pair': [x, x_prime]")
        return cls(
            kind,
            embedding,
            sigma=float(spec.get("sigma", 0.25)),
            direction=spec.get("direction"),
            slopes=spec.get("slopes"),
        )

    def to_spec(self) -> dict:
        spec: dict[str, Any] = {"kind": self.kind}
        if self.kind == "gaussian_truncated":
            spec["sigma"] = self.sigma
        elif self.kind == "small_margin":
            spec["pair"] = [self.pair.x.tolist(), self.pair.x_prime.tolist()]
        elif self.kind == "coordinate_dominant":
            spec["direction"] = self.direction.tolist()
        elif self.kind == "aligned_line":
            spec["slopes"] = self.slopes.tolist()
        return spec

    def sample_inputs(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        e = self.embedding
        lo, hi = e.lower, e.upper
        d = self.d
        if self.kind == "uniform_box":
            x = lo + (hi - lo) * rng.random((n, d))
            xp = lo + (hi - lo) * rng.random((n, d))
        elif self.kind == "gaussian_truncated":
            center, scale = (lo + hi) / 2, self.sigma * (hi - lo)
            a, b = (lo - center) / scale, (hi - center) / scale
            draw = stats.truncnorm.rvs(a, b, loc=center, scale=scale, size=(2, n, d), random_state=rng)
            x, xp = np.clip(draw[0], lo, hi), np.clip(draw[1], lo, hi)
        elif self.kind == "small_margin":
            x = np.broadcast_to(self.pair.x, (n, d)).copy()
            xp = np.broadcast_to(self.pair.x_prime, (n, d)).copy()
        elif self.kind == "coordinate_dominant":
            # x strictly below the upper face, then a strictly positive step along direction
            x = lo + (hi - lo) * rng.random((n, d))
            room = np.min((hi - x) / self.direction, axis=1)
            step = room * (1.0 - rng.random(n))
            xp = np.minimum(x + step[:, None] * self.direction, hi)
        else:
            active = self.slopes > 0
            t_max = float(np.min(hi[active] / self.slopes[active]))
            t = t_max * rng.random((2, n))
            x, xp = np.outer(t[0], self.slopes), np.outer(t[1], self.slopes)
            x, xp = np.clip(x, lo, hi), np.clip(xp, lo, hi)
        return x, xp

    def sample_deltas(self, rng: np.random.Generator, n: int) -> np.ndarray:
        x, xp = self.sample_inputs(rng, n)
        return self.embedding.embed(xp) - self.embedding.embed(x)

    def sample_pair(self, rng: np.random.Generator) -> QueryPair:
        if self.kind == "small_margin":
            return self.pair
        x, xp = self.sample_inputs(rng, 1)
        return QueryPair(x[0], xp[0], self.embedding.embed(xp[0]) - self.embedding.embed(x[0]))


def sample_pair(pd: PairDistribution, rng: np.random.Generator) -> QueryPair:
    return pd.sample_pair(rng)


def small_margin_pair(w_star, margin: float) -> QueryPair:
    """Identity-embedding pair centred at 1/2 whose margin under ``w_star`` is ``margin``."""
    w = np.asarray(w_star.w if isinstance(w_star, WeightVector) else w_star, dtype=float)
    delta = margin * w / float(w @ w)
    if np.any(np.abs(delta) > 1):
        raise UsageError("margin too large for a pair inside the unit box")
    x = 0.5 - delta / 2
    return QueryPair(x, x + delta, delta)


# ---------------------------------------------------------------------------
# configuration and records

MODES = ("passive_erm", "passive_mle", "active_noise_free", "active_noisy", "impossibility_demo")


@dataclass
class ExperimentConfig:
    mode: str
    m: int
    d: Optional[int] = None
    eps: Optional[float] = None
    delta: float = 0.1
    noise: Any = "zero"
    distribution: Any = "uniform_box"
    embedding: Optional[dict] = None
    n: Optional[int] = None
    grid: Optional[dict] = None
    trials: int = 1
    master_seed: int = 0
    output: Optional[str] = None
    jsonl: Optional[str] = None
    n_mc: int = 10_000
    c_geo: float = 2.0
    w_star: Optional[list] = None
    record_wall_time: bool = True
    workers: int = 1
    mle: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise UsageError(f"mode must be one of {', '.join(MODES)}")
        if not isinstance(self.m, int) or self.m < 2:
            raise UsageError("m must be an integer >= 2")
        if self.d is None:
            self.d = self.m
        if self.trials < 1:
            raise UsageError("trials must be at least 1")
        if self.n_mc < 1:
            raise UsageError("n_mc must be at least 1")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        if self.eps is not None and not 0 < self.eps < 1:
            raise UsageError("eps must lie in (0, 1)")
        if not 0 < self.delta < 1:
            raise UsageError("delta must lie in (0, 1)")
        if self.n is not None and self.n < 0:
            raise UsageError("n must be nonnegative")
        if self.w_star is not None and len(self.w_star) != self.m:
            raise UsageError("w_star must have m components")
        if self.grid is not None:
            if len(self.grid) != 1 or next(iter(self.grid)) not in ("n", "eps"):
                raise UsageError("grid must have exactly one key, 'n' or 'eps'")
            if not list(self.grid.values())[0]:
                raise UsageError("sweep grid is empty")
        # parse eagerly so malformed specs fail before any trial
        self.noise_model()
        self.pair_distribution()
        MleSettings(**self.mle)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise UsageError(f"unknown config fields: {', '.join(sorted(unknown))}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise UsageError(str(exc)) from exc

    @classmethod
    def from_json(cls, path: str | Path) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return asdict(self)

    def noise_model(self) -> NoiseModel:
        return NoiseModel.from_spec(self.noise)

    def embedding_obj(self) -> Embedding:
        if self.embedding is None:
            return Embedding.identity(self.m)
        e = Embedding.from_config(self.embedding, self.m)
        if e.output_dim != self.m or e.input_dim != self.d:
            raise UsageError("embedding dimensions do not match m and d")
        return e

    def pair_distribution(self) -> PairDistribution:
        return PairDistribution.from_spec(self.distribution, self.embedding_obj())

    def with_value(self, key: str, value) -> "ExperimentConfig":
        raw = self.to_dict()
        raw[key] = value
        raw["grid"] = None
        return ExperimentConfig.from_dict(raw)


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    n_or_queries: int
    e1_estimate: float
    e1_stderr: float
    e2: float
    seminorm_e2: float
    lambda_min: float
    wall_seconds: float
    success_flag: bool
    detail: dict = field(default_factory=dict, repr=False, compare=False)


CSV_COLUMNS = [f.name for f in fields(TrialRecord) if f.name != "detail"]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _dirichlet(rng: np.random.Generator, m: int) -> WeightVector:
    return WeightVector(rng.dirichlet(np.ones(m)))


def run_trial(cfg: ExperimentConfig, trial_index: int) -> TrialRecord:
    """Run one seeded trial of the configured learner and score it against the hidden weights.

    The trial seed feeds four independent streams: hidden weights, training
    pairs, oracle labels and Monte Carlo evaluation. In ``impossibility_demo``
    the pair stream is keyed by the master seed alone and the hidden weights
    alternate between the first two vertices, so trials differ only in
    ``w_star``.
    """
    seed = trial_seed(cfg.master_seed, trial_index)
    w_rng, data_rng, oracle_rng, mc_rng = (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(4))
    mode = cfg.mode
    passive = mode in ("passive_erm", "passive_mle", "impossibility_demo")
    if passive and not cfg.n:
        raise UsageError(f"{mode} needs n >= 1 training pairs")
    if mode.startswith("active") and cfg.eps is None:
        raise UsageError(f"{mode} needs eps")

    noise = cfg.noise_model()
    dist = cfg.pair_distribution()
    embedding = dist.embedding
    if mode == "impossibility_demo":
        w_star = WeightVector(np.eye(cfg.m)[trial_index % 2])
        data_rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed).spawn(2)[1])
        noise = NoiseModel.zero()
    elif cfg.w_star is not None:
        w_star = WeightVector(cfg.w_star)
    else:
        w_star = _dirichlet(w_rng, cfg.m)
    oracle = Oracle(w_star, noise, embedding, oracle_rng)

    detail: dict[str, Any] = {"mode": mode, "w_star": w_star.w.tolist()}
    t0 = time.perf_counter()
    sigma = None
    success = True
    try:
        if passive:
            x, xp = dist.sample_inputs(data_rng, cfg.n)
            delta = embedding.embed(xp) - embedding.embed(x)
            data = Dataset(x, xp, delta, oracle.query_many(delta), {"distribution": dist.kind, "seed": seed})
            if mode == "passive_mle":
                fit = fit_mle(data, noise, MleSettings(**cfg.mle))
                w_hat = fit.w
                detail.update(converged=fit.converged, iterations=fit.iterations, floored=fit.floored)
            else:
                fit = fit_erm_noise_free(data)
                w_hat = fit.w
                detail.update(min_slack=fit.min_slack, consistent=fit.consistent)
            count = cfg.n
            sigma = CovarianceMatrix.from_dataset(data)
        elif mode == "active_noise_free":
            report = active_noise_free(oracle, cfg.eps)
            w_hat, count = report.w_hat, report.queries_used
            success = e2_distance(w_hat, w_star) <= cfg.eps
        else:
            report = active_noisy(oracle, cfg.eps, cfg.delta, noise)
            w_hat, count = report.w_hat, report.queries_used
            success = e2_distance(w_hat, w_star) <= cfg.c_geo * cfg.eps
            detail["stopped_early"] = [r.stopped_early for r in report.per_axis]
        if count != oracle.query_count:
            raise AssertionError("reported sample size differs from the oracle's query count")
    except (LearnerAbort, NoPreimageError) as exc:
        elapsed = time.perf_counter() - t0
        detail["abort"] = str(exc)
        log.warning("trial %d aborted: %s", trial_index, exc)
        nan = float("nan")
        return TrialRecord(
            trial_index, seed, oracle.query_count, nan, nan, nan, nan, nan,
            elapsed if cfg.record_wall_time else 0.0, False, detail,
        )
    elapsed = time.perf_counter() - t0

    e1, e1_se = estimate_e1(w_hat, w_star, dist, cfg.n_mc, mc_rng)
    if sigma is None:
        sigma = CovarianceMatrix.from_deltas(dist.sample_deltas(mc_rng, cfg.n_mc))
    diff = w_hat.w - w_star.w
    detail["w_hat"] = w_hat.w.tolist()
    return TrialRecord(
        trial_index=trial_index,
        seed=seed,
        n_or_queries=int(count),
        e1_estimate=e1,
        e1_stderr=e1_se,
        e2=e2_distance(w_hat, w_star),
        seminorm_e2=covariance_seminorm(diff, sigma),
        lambda_min=min_eigenvalue(sigma),
        wall_seconds=elapsed if cfg.record_wall_time else 0.0,
        success_flag=bool(success),
        detail=detail,
    )


def _run_one(args):
    cfg, i = args
    return run_trial(cfg, i)


def run_trials(cfg: ExperimentConfig, indices=None) -> list[TrialRecord]:
    """All trials of ``cfg``, ordered by trial index whatever the completion order."""
    indices = list(range(cfg.trials)) if indices is None else list(indices)
    if cfg.workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_run_one, [(cfg, i) for i in indices]))
    else:
        records = [run_trial(cfg, i) for i in indices]
    return sorted(records, key=lambda r: r.trial_index)


def write_csv(path: str | Path, records: list[TrialRecord], grid_values=None) -> None:
    columns = (["grid_value"] if grid_values is not None else []) + CSV_COLUMNS
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for k, rec in enumerate(records):
            row = [_fmt(getattr(rec, c)) for c in CSV_COLUMNS]
            if grid_values is not None:
                row.insert(0, _fmt(grid_values[k]))
            writer.writerow(row)


def write_jsonl(path: str | Path, records: list[TrialRecord], grid_values=None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for k, rec in enumerate(records):
            row = {c: getattr(rec, c) for c in CSV_COLUMNS}
            if grid_values is not None:
                row["grid_value"] = grid_values[k]
            row.update(rec.detail)
            fh.write(json.dumps(row, sort_keys=True, default=float) + "\n")


def run_experiment(cfg: ExperimentConfig) -> list[TrialRecord]:
    records = run_trials(cfg)
    if cfg.output:
        write_csv(cfg.output, records)
    if cfg.jsonl:
        write_jsonl(cfg.jsonl, records)
    return records


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class GridSummary:
    grid_value: float
    trials: int
    median_e2: float
    iqr_e2: float
    median_seminorm_e2: float
    iqr_seminorm_e2: float
    median_n_or_queries: float
    success_rate: float


@dataclass
class SweepResult:
    key: str
    records: dict
    summaries: list[GridSummary]
    slope: float

    def flat(self) -> tuple[list, list[TrialRecord]]:
        values, rows = [], []
        for g, recs in self.records.items():
            values += [g] * len(recs)
            rows += recs
        return values, rows


def _iqr(x) -> float:
    q1, q3 = np.nanpercentile(x, [25, 75])
    return float(q3 - q1)


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Run every grid point and summarise it.

    For an ``n`` grid the slope is the log-log slope of the median
    seminorm error against ``n``. For an ``eps`` grid it is the growth of
    the median query count per doubling of ``1/eps``.
    """
    if not cfg.grid:
        raise UsageError("sweep needs a non-empty grid")
    (key, values), = cfg.grid.items()
    if not values:
        raise UsageError("sweep grid is empty")
    if key == "n" and cfg.mode not in ("passive_erm", "passive_mle", "impossibility_demo"):
        raise UsageError("an n grid needs a passive mode")
    if key == "eps" and not cfg.mode.startswith("active"):
        raise UsageError("an eps grid needs an active mode")

    records, summaries = {}, []
    for value in values:
        value = int(value) if key == "n" else float(value)
        recs = run_trials(cfg.with_value(key, value))
        records[value] = recs
        e2 = [r.e2 for r in recs]
        semi = [r.seminorm_e2 for r in recs]
        counts = [r.n_or_queries for r in recs]
        summaries.append(
            GridSummary(
                value, len(recs), float(np.nanmedian(e2)), _iqr(e2), float(np.nanmedian(semi)), _iqr(semi),
                float(np.median(counts)), float(np.mean([r.success_flag for r in recs])),
            )
        )
    grid = [s.grid_value for s in summaries]
    if len(grid) < 2:
        slope = float("nan")
    elif key == "n":
        slope = loglog_slope(grid, [s.median_seminorm_e2 for s in summaries])
    else:
        slope = float(np.polyfit(np.log2(1 / np.asarray(grid)), [s.median_n_or_queries for s in summaries], 1)[0])
    result = SweepResult(key, records, summaries, slope)
    if cfg.output:
        write_sweep(cfg.output, result)
    if cfg.jsonl:
        write_jsonl(cfg.jsonl, result.flat()[1], result.flat()[0])
    return result


def summary_path(path: str | Path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".summary" + (path.suffix or ".csv"))


def write_sweep(path: str | Path, result: SweepResult) -> None:
    """Trial rows to ``path``; per-grid summary rows and the slope to ``<stem>.summary.csv``."""
    values, rows = result.flat()
    write_csv(path, rows, values)
    columns = [f.name for f in fields(GridSummary)]
    with open(summary_path(path), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for s in result.summaries:
            writer.writerow([_fmt(getattr(s, c)) for c in columns])
        writer.writerow([f"slope_{result.key}", _fmt(result.slope)] + [""] * (len(columns) - 2))


# ---------------------------------------------------------------------------
# counterexample demonstrations


@dataclass
class CoordinateDominantDemo:
    w_stars: list[WeightVector]
    w_hats: list[WeightVector]
    labels_identical: bool
    outputs_identical: bool
    e2: list[float]

    @property
    def max_e2(self) -> float:
        return max(self.e2)


def coordinate_dominant_demo(m: int = 3, n: int = 500, seed: int = 0) -> CoordinateDominantDemo:
    """Train noise-free ERM on coordinate-dominant pairs for two far-apart vertices.

    Every pair has ``x' > x`` coordinatewise, so both vertices label all
    pairs 1 and the learner cannot tell them apart.
    """
    cfg = ExperimentConfig(mode="impossibility_demo", m=m, n=n, trials=2, master_seed=seed,
                           distribution="coordinate_dominant", n_mc=2000)
    dist = cfg.pair_distribution()
    w_stars, w_hats, labels = [], [], []
    for k in range(2):
        w_star = WeightVector(np.eye(m)[k])
        rng = np.random.default_rng(seed)
        x, xp = dist.sample_inputs(rng, n)
        oracle = Oracle(w_star, NoiseModel.zero(), dist.embedding, rng)
        delta = dist.embedding.embed(xp) - dist.embedding.embed(x)
        y = oracle.query_many(delta)
        data = Dataset(x, xp, delta, y, {"distribution": dist.kind, "seed": seed})
        w_stars.append(w_star)
        w_hats.append(fit_erm_noise_free(data).w)
        labels.append(y)
    return CoordinateDominantDemo(
        w_stars,
        w_hats,
        bool(np.array_equal(labels[0], labels[1])),
        bool(np.array_equal(w_hats[0].w, w_hats[1].w)),
        [e2_distance(h, s) for h, s in zip(w_hats, w_stars)],
    )


def majority_success_rate(oracle: Oracle, pair: QueryPair, T: int, replicates: int, rng) -> float:
    """Fraction of ``replicates`` blocks of ``T`` labels whose majority is the true sign."""
    truth = oracle.margin(pair) > 0
    p = oracle.prob_one(pair)
    ones = rng.binomial(T, p, size=replicates)
    oracle.query_count += T * replicates
    correct = ones > T / 2 if truth else ones < T / 2
    ties = ones * 2 == T
    return float(np.mean(correct + 0.5 * ties))


def sign_identification_need(
    margin: float,
    noise: NoiseModel | None = None,
    confidence: float = 0.9,
    replicates: int = 2000,
    seed: int = 0,
) -> int:
    """Labels a majority vote needs to name the true sign of a fixed small-margin pair.

    Smallest odd ``T`` on a bisection search whose simulated success rate
    over ``replicates`` blocks reaches ``confidence``. Each candidate ``T``
    gets its own stream seeded by ``(seed, T)``.
    """
    noise = noise or NoiseModel.logistic()
    w_star = WeightVector([0.5, 0.5])
    pair = small_margin_pair(w_star, margin)
    oracle = Oracle(w_star, noise, Embedding.identity(2), seed)

    def ok(T: int) -> bool:
        rng = np.random.default_rng([seed, T])
        return majority_success_rate(oracle, pair, T, replicates, rng) >= confidence

    hi = 1
    while not ok(hi):
        hi = 2 * hi + 1
        if hi > 10**12:
            raise LearnerAbort("sign identification did not succeed within 1e12 labels")
    lo = (hi - 1) // 2
    # invariant: ok(hi), and lo is the last odd size that failed (or 0)
    while hi - lo > 2:
        mid = (lo + hi) // 2
        mid += (mid % 2 == 0)
        if mid >= hi:
            break
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def small_margin_demo(margins=(1e-1, 1e-2, 1e-3), noise: NoiseModel | None = None, seed: int = 0) -> dict:
    needs = {mu: sign_identification_need(mu, noise, seed=seed) for mu in margins}
    ms = list(margins)
    ratios = [needs[b] / needs[a] for a, b in zip(ms, ms[1:])]
    expected = [(a / b) ** 2 for a, b in zip(ms, ms[1:])]
    return {"needs": needs, "ratios": ratios, "quadratic_ratios": expected}
