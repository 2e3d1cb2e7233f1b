"""Learners that consume a fixed dataset of labelled comparisons."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .core import Dataset, WeightVector
from .errors import LearnerAbort, UnsupportedNoiseError, UsageError
from .geometry import project_to_simplex
from .noise import NoiseModel

log = logging.getLogger(__name__)

PROB_FLOOR = 1e-300
CONSISTENCY_TOL = 1e-12


def _signs(data: Dataset) -> np.ndarray:
    return 2.0 * data.y - 1.0


@dataclass(frozen=True, eq=False)
class ErmResult:
    """Max-margin simplex point for noise-free comparisons.

    ``min_slack`` is the optimal ``min_i s_i w . delta_i`` with
    ``s_i = +1`` for ``y = 1`` and ``-1`` for ``y = 0``. ``consistent`` is
    False when no simplex point separates the labels with positive slack,
    in which case ``w`` is the point of least worst-case violation.
    """

    w: WeightVector
    min_slack: float
    consistent: bool


def fit_erm_noise_free(data: Dataset) -> ErmResult:
    """Empirical risk minimiser for noise-free labels, as a linear program.

    Solves ``max t`` subject to ``s_i delta_i . w >= t``, ``w >= 0`` and
    ``sum(w) = 1``; variables are ``(w, t)`` with ``t`` free.
    """
    if data is None or len(data) == 0:
        raise UsageError("ERM needs a non-empty dataset")
    m = data.m
    signed = _signs(data)[:, None] * data.delta
    cost = np.zeros(m + 1)
    cost[-1] = -1.0
    a_ub = np.hstack([-signed, np.ones((len(data), 1))])
    b_ub = np.zeros(len(data))
    a_eq = np.append(np.ones(m), 0.0)[None, :]
    bounds = [(0, None)] * m + [(None, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=bounds, method="highs")
    if res.status != 0:
        raise LearnerAbort(f"ERM linear program failed: {res.message}")
    w = project_to_simplex(res.x[:m])
    min_slack = float(np.min(signed @ w.w))
    return ErmResult(w, min_slack, min_slack > CONSISTENCY_TOL)


@dataclass(frozen=True)
class MleSettings:
    max_iterations: int = 5000
    gradient_tolerance: float = 1e-8
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4

    def __post_init__(self):
        for name in ("max_iterations", "gradient_tolerance", "initial_step", "sufficient_decrease"):
            if not getattr(self, name) > 0:
                raise UsageError(f"MleSettings.{name} must be positive")
        if not 0 < self.shrink < 1:
            raise UsageError("MleSettings.shrink must lie in (0, 1)")


@dataclass
class LossEval:
    loss: float
    grad: np.ndarray
    floored: bool = False


def loss_and_gradient(w, data: Dataset, nm: NoiseModel) -> LossEval:
    """Average negative log-likelihood of the labels and its gradient in ``w``.

    With ``s = +1`` for ``y = 1`` and ``-1`` for ``y = 0`` the loss is
    ``-(1/n) sum log F(s z)`` where ``z = w . delta``, and the gradient is
    ``-(1/n) sum s F'(s z) / F(s z) delta``. Probabilities below 1e-300
    are floored and reported through ``floored``.
    """
    if not nm.has_density:
        raise UnsupportedNoiseError("likelihood needs a noise model with a density")
    w = np.asarray(w.w if isinstance(w, WeightVector) else w, dtype=float)
    s = _signs(data)
    sz = s * (data.delta @ w)
    logp = np.asarray(nm.logcdf(sz), dtype=float)
    floored = bool(np.any(~(logp >= np.log(PROB_FLOOR))))
    if floored:
        logp = np.maximum(np.nan_to_num(logp, nan=-np.inf), np.log(PROB_FLOOR))
    loss = float(-np.mean(logp))
    grad = -(s * np.asarray(nm.hazard(sz))) @ data.delta / len(data)
    return LossEval(loss, grad, floored)


@dataclass(frozen=True, eq=False)
class MleResult:
    w: WeightVector
    loss: float
    iterations: int
    converged: bool
    gradient_mapping_norm: float
    floored: bool
    loss_history: list = field(default_factory=list, repr=False)


def fit_mle(data: Dataset, nm: NoiseModel, s: MleSettings | None = None, w0=None) -> MleResult:
    """Maximum-likelihood weights on the simplex by projected gradient descent.

    Each iteration backtracks from ``initial_step`` until the Armijo-type
    condition ``L(w+) <= L(w) - c ||w+ - w||^2 / step`` holds, so accepted
    losses never increase. Stops when the gradient mapping
    ``||w - P(w - g)|| / step`` at the initial step falls under tolerance.
    """
    if data is None or len(data) == 0:
        raise UsageError("MLE needs a non-empty dataset")
    if not nm.has_density:
        raise UnsupportedNoiseError("MLE needs a noise model with a density")
    s = s or MleSettings()
    w = project_to_simplex(np.full(data.m, 1.0 / data.m) if w0 is None else w0).w
    cur = loss_and_gradient(w, data, nm)
    history = [cur.loss]
    floored = cur.floored
    converged = False
    gm_norm = np.inf
    it = 0
    for it in range(1, s.max_iterations + 1):
        step = s.initial_step
        gm_norm = float(np.linalg.norm(w - project_to_simplex(w - step * cur.grad).w) / step)
        if gm_norm <= s.gradient_tolerance:
            converged = True
            break
        while True:
            cand = project_to_simplex(w - step * cur.grad).w
            nxt = loss_and_gradient(cand, data, nm)
            moved = float(np.sum((cand - w) ** 2))
            if nxt.loss <= cur.loss - s.sufficient_decrease * moved / step:
                break
            step *= s.shrink
            if step < 1e-16:
                break
        if step < 1e-16:
            # no descent possible at machine precision: already stationary
            converged = True
            break
        w, cur = cand, nxt
        floored |= cur.floored
        history.append(cur.loss)
    else:
        log.debug("MLE hit max_iterations=%d (gradient mapping %.3g)", s.max_iterations, gm_norm)
    return MleResult(WeightVector(w), cur.loss, it, converged, gm_norm, floored, history)
