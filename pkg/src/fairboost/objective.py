"""Binary cross-entropy and cross-entropy-based rate proxies on log-odds scores.

The proxies are softplus functions evaluated at a shifted score so that they
upper-bound the matching 0/1 step function and touch it (value 1) at the
decision boundary f = 0. With the default shift log(e - 1):

    FalsePositive      1[y=0] * log(1 + exp( f + shift))
    FalseNegative      1[y=1] * log(1 + exp(-f + shift))
    PredictedPositive           log(1 + exp( f + shift))
    PredictedNegative           log(1 + exp(-f + shift))

Scores exactly at 0 predict negative.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import DegenerateGroupError, ShapeError


def _boundary_shift() -> float:
    # log(e - 1), nudged up by an ulp if needed so softplus(shift) >= 1 holds in floats
    s = math.log(math.expm1(1.0))
    while np.logaddexp(0.0, s) < 1.0:
        s = float(np.nextafter(s, np.inf))
    return s


DEFAULT_SHIFT = _boundary_shift()


class ProxyKind(enum.Enum):
    FALSE_POSITIVE = "fp"
    FALSE_NEGATIVE = "fn"
    PREDICTED_POSITIVE = "pp"
    PREDICTED_NEGATIVE = "pn"

    @property
    def conditioned_label(self) -> int | None:
        """Label the rate is conditioned on (FPR over negatives, FNR over positives)."""
        if self is ProxyKind.FALSE_POSITIVE:
            return 0
        if self is ProxyKind.FALSE_NEGATIVE:
            return 1
        return None

    @property
    def positive_side(self) -> bool:
        return self in (ProxyKind.FALSE_POSITIVE, ProxyKind.PREDICTED_POSITIVE)


@dataclass(frozen=True)
class ProxyConfig:
    shift: float = DEFAULT_SHIFT

    def __post_init__(self):
        if not math.isfinite(self.shift):
            raise ValueError("proxy shift must be finite")


DEFAULT_PROXY = ProxyConfig()


def sigmoid(x):
    return expit(x)


def bce_loss(labels, scores) -> float:
    """Mean binary cross-entropy of log-odds scores."""
    y = np.asarray(labels, dtype=np.float64)
    f = np.asarray(scores, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, f) - y * f))


def bce_gradient_hessian(labels, scores):
    y = np.asarray(labels, dtype=np.float64)
    f = np.asarray(scores, dtype=np.float64)
    if y.shape != f.shape:
        raise ShapeError(f"labels {y.shape} and scores {f.shape} differ in shape")
    p = expit(f)
    return p - y, p * (1.0 - p)


def _gate(kind: ProxyKind, y):
    lab = kind.conditioned_label
    if lab is None:
        return 1.0
    return (np.asarray(y) == lab).astype(np.float64)


def _signed_arg(kind: ProxyKind, f, shift: float):
    f = np.asarray(f, dtype=np.float64)
    return f + shift if kind.positive_side else -f + shift


def proxy_value(kind: ProxyKind, y, f, cfg: ProxyConfig = DEFAULT_PROXY):
    # logaddexp(0, z) is the overflow-safe softplus
    out = _gate(kind, y) * np.logaddexp(0.0, _signed_arg(kind, f, cfg.shift))
    return out if np.ndim(out) else float(out)


def proxy_gradient(kind: ProxyKind, y, f, cfg: ProxyConfig = DEFAULT_PROXY):
    """d proxy_value / d f."""
    f = np.asarray(f, dtype=np.float64)
    if kind.positive_side:
        d = expit(f + cfg.shift)
    else:
        d = expit(f - cfg.shift) - 1.0
    out = _gate(kind, y) * d
    return out if np.ndim(out) else float(out)


def proxy_hessian(kind: ProxyKind, y, f, cfg: ProxyConfig = DEFAULT_PROXY):
    """Second derivative of proxy_value; nonnegative since every proxy is convex."""
    f = np.asarray(f, dtype=np.float64)
    p = expit(f + cfg.shift if kind.positive_side else f - cfg.shift)
    out = _gate(kind, y) * p * (1.0 - p)
    return out if np.ndim(out) else float(out)


def step_value(kind: ProxyKind, y, f):
    f = np.asarray(f, dtype=np.float64)
    pred_pos = f > 0
    hit = pred_pos if kind.positive_side else ~pred_pos
    out = _gate(kind, y) * hit
    return out if np.ndim(out) else float(out)


def rate_mask(kind: ProxyKind, labels, groups=None, g: int | None = None) -> np.ndarray:
    """Rows forming the denominator of a rate: a group (or all rows), label-conditioned for FP/FN."""
    labels = np.asarray(labels)
    mask = np.ones(labels.shape, dtype=bool) if g is None else (np.asarray(groups) == g)
    lab = kind.conditioned_label
    if lab is not None:
        mask &= labels == lab
    return mask


def group_rate(kind: ProxyKind, data, scores, g: int | None, proxy: bool,
               cfg: ProxyConfig = DEFAULT_PROXY) -> float:
    """Mean proxy (or step) value over group ``g``'s rate denominator.

    ``g=None`` measures over the whole dataset.
    """
    mask = rate_mask(kind, data.labels, data.groups, g)
    if not mask.any():
        where = "dataset" if g is None else f"group {_group_label(data, g)}"
        raise DegenerateGroupError(f"{where} has no rows in the denominator of {kind.name} rate")
    y = data.labels[mask]
    f = np.asarray(scores, dtype=np.float64)[mask]
    vals = proxy_value(kind, y, f, cfg) if proxy else step_value(kind, y, f)
    return float(np.mean(vals))


def _group_label(data, g: int) -> str:
    names = getattr(data, "group_names", ())
    return f"{g} ({names[g]!r})" if g < len(names) else str(g)
