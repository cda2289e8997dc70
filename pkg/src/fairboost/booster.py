"""Constrained gradient boosting as a two-player game.

Each round the model player fits one tree to the gradient of the
proxy-Lagrangian

    mean BCE(f) + sum_j lam_j * proxy_violation_j(f)

and the multiplier player then takes a projected ascent step on the original
step-wise violations measured at the same scores. Without constraints (or with
all multipliers at zero) this is ordinary second-order GBDT on log-loss.

Per-row gradients are scaled by the row count so that the loss term matches
the familiar per-row log-loss gradient ``sigmoid(f) - y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import constraints as cons
from ._random import consumer_rng
from .dataset import BinMapper, BinnedDataset, RawDataset
from .errors import DataError, FairBoostError, NumericError, RangeError
from .objective import bce_gradient_hessian, bce_loss
from .tree import RegressionTree, TreeParams, grow

DRIFT_CHECK_EVERY = 50
DRIFT_TOL = 1e-9


@dataclass(frozen=True)
class BoostConfig:
    num_rounds: int = 100
    learning_rate: float = 0.1
    multiplier_lr: float = 0.05
    tree: TreeParams = field(default_factory=TreeParams)
    second_order: bool = True
    constraint_start_round: int = 0
    seed: int = 0
    # scale the argmax-group gradient coefficient by (m - 1)
    compat_argmax_factor: bool = False

    def __post_init__(self):
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be positive")
        if not (self.learning_rate > 0 and self.multiplier_lr > 0):
            raise ValueError("learning rates must be positive")
        if self.constraint_start_round < 0:
            raise ValueError("constraint_start_round must be nonnegative")


@dataclass
class RoundRecord:
    round: int
    loss: float
    proxy_violations: np.ndarray
    violations: np.ndarray
    multipliers: np.ndarray
    argmax_group: int | None


@dataclass
class BoostedModel:
    base_score: float
    trees: list[RegressionTree]
    learning_rates: list[float]
    mapper: BinMapper
    spec: cons.ConstraintSpec | None = None
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    trace: list[RoundRecord] = field(default_factory=list)
    config: BoostConfig = field(default_factory=BoostConfig)
    feature_names: tuple[str, ...] = ()
    group_names: tuple[str, ...] = ()

    @property
    def n_rounds(self) -> int:
        return len(self.trees)

    def predict_raw(self, rows, upto=None):
        return predict_raw(self, rows, upto)

    def predict_randomized(self, rows, seed):
        return predict_randomized(self, rows, seed)


def init_base_score(labels) -> float:
    """Constant log-odds minimizing mean cross-entropy: log(p / (1 - p))."""
    y = np.asarray(labels, dtype=np.float64)
    p = float(y.mean()) if y.size else math.nan
    if not 0.0 < p < 1.0:
        raise DataError("labels must contain both classes to fit a base score")
    return math.log(p / (1.0 - p))


def train(data: BinnedDataset, spec: cons.ConstraintSpec | None = None,
          cfg: BoostConfig = BoostConfig(), callback=None) -> BoostedModel:
    n = data.n_rows
    base = init_base_score(data.labels)
    m = spec.n_constraints(data.n_groups) if spec is not None else 0
    lam = np.zeros(m)
    scores = np.full(n, base)
    model = BoostedModel(base, [], [], data.mapper, spec, lam, [], cfg,
                         tuple(data.feature_names), tuple(data.group_names))
    ones = np.ones(n)

    for t in range(1, cfg.num_rounds + 1):
        try:
            scores, lam = _round(t, model, data, spec, cfg, scores, lam, ones)
        except FairBoostError as exc:
            if f"round {t}" in str(exc):
                raise
            raise type(exc)(f"round {t}: {exc}") from exc
        if callback is not None:
            callback(t, model)

    model.multipliers = lam
    return model


def _round(t, model, data, spec, cfg, scores, lam, ones):
    """One boosting round: fit a tree at the current scores, then step the multipliers."""
    n, y = data.n_rows, data.labels
    grad, hess = bce_gradient_hessian(y, scores)
    loss = bce_loss(y, scores)
    report = cons.evaluate(spec, data, scores) if spec is not None else None
    active = spec is not None and t > cfg.constraint_start_round
    if active:
        grad = grad + n * cons.descent_gradient(spec, lam, data, scores, report,
                                                 cfg.compat_argmax_factor)
        if cfg.second_order:
            curv = cons.descent_hessian(spec, lam, data, scores, report, cfg.compat_argmax_factor)
            hess = np.maximum(hess + n * curv, 0.0)
    if not cfg.second_order:
        hess = ones
    if not (np.all(np.isfinite(grad)) and np.all(np.isfinite(hess))):
        raise NumericError(f"non-finite gradient or hessian in round {t}")

    tree = grow(data, grad, hess, cfg.tree)
    model.trees.append(tree)
    model.learning_rates.append(cfg.learning_rate)
    scores = scores + cfg.learning_rate * tree.predict_binned(data.bins)

    if active:
        lam = cons.ascent_step(lam, report, cfg.multiplier_lr)
    model.trace.append(RoundRecord(
        t, loss,
        report.proxy_violations if report else np.zeros(0),
        report.violations if report else np.zeros(0),
        lam.copy(),
        report.argmax_group if report else None,
    ))
    if t % DRIFT_CHECK_EVERY == 0:
        full = predict_raw(model, data.bins)
        drift = float(np.max(np.abs(full - scores)))
        if drift > DRIFT_TOL:
            raise NumericError(f"score cache drifted by {drift:.3g} at round {t}")
    return scores, lam


def _as_bins(model: BoostedModel, rows) -> np.ndarray:
    if isinstance(rows, BinnedDataset):
        return rows.bins
    if isinstance(rows, RawDataset):
        return model.mapper.transform(rows.features)
    rows = np.asarray(rows)
    if np.issubdtype(rows.dtype, np.integer):
        return rows
    return model.mapper.transform(rows)


def predict_raw(model: BoostedModel, rows, upto: int | None = None) -> np.ndarray:
    """Log-odds of the ensemble prefix holding the first ``upto`` trees (default all)."""
    T = model.n_rounds
    t = T if upto is None else int(upto)
    if not 0 <= t <= T:
        raise RangeError(f"iterate {t} outside [0, {T}]")
    bins = _as_bins(model, rows)
    out = np.full(bins.shape[0], model.base_score)
    for tree, lr in zip(model.trees[:t], model.learning_rates[:t]):
        out = out + lr * tree.predict_binned(bins)
    return out


def predict_randomized(model: BoostedModel, rows, seed: int) -> np.ndarray:
    """Per row, draw an iterate t uniformly from 1..T and score with that prefix."""
    T = model.n_rounds
    if T < 1:
        raise RangeError("randomized prediction needs at least one tree")
    bins = _as_bins(model, rows)
    draws = consumer_rng(seed, "randomized_predict").integers(1, T + 1, size=bins.shape[0])
    out = np.empty(bins.shape[0])
    acc = np.full(bins.shape[0], model.base_score)
    for k, (tree, lr) in enumerate(zip(model.trees, model.learning_rates), start=1):
        acc = acc + lr * tree.predict_binned(bins)
        hit = draws == k
        out[hit] = acc[hit]
    return out


def iterate_draws(model: BoostedModel, n_rows: int, seed: int) -> np.ndarray:
    """The iterate indices predict_randomized would draw for ``n_rows`` rows."""
    return consumer_rng(seed, "randomized_predict").integers(1, model.n_rounds + 1, size=n_rows)
