"""Post-hoc evaluation: group confusion matrices, parity scores, ROC operating points.

A row is predicted positive iff its score is strictly greater than the
threshold. Fairness is reported as the min/max ratio of a group rate, so 1.0
means perfect parity.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateGroupError, RangeError, ShapeError

FAIRNESS_DEFINITIONS = {
    "predictive_equality": "fpr",
    "equal_opportunity": "fnr",
    "demographic_parity": "ppr",
}


class Confusion(NamedTuple):
    tp: np.ndarray
    fp: np.ndarray
    tn: np.ndarray
    fn: np.ndarray

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def group_confusion(labels, scores, groups, threshold: float = 0.0,
                    n_groups: int | None = None) -> Confusion:
    y = np.asarray(labels).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    g = np.asarray(groups, dtype=np.int64)
    if not (y.shape == s.shape == g.shape):
        raise ShapeError("labels, scores and groups must have equal shapes")
    if n_groups is None:
        n_groups = int(g.max()) + 1 if g.size else 0
    pred = s > threshold

    def count(mask):
        return np.bincount(g[mask], minlength=n_groups)

    return Confusion(count(pred & y), count(pred & ~y), count(~pred & ~y), count(~pred & y))


def _ratio(num, den):
    num = np.asarray(num, dtype=np.float64)
    den = np.asarray(den, dtype=np.float64)
    out = np.full(num.shape, np.nan)
    np.divide(num, den, out=out, where=den > 0)
    return out


def group_rates(cm: Confusion) -> dict[str, np.ndarray]:
    """Per-group rates; NaN where the denominator is empty."""
    pos = cm.tp + cm.fn
    neg = cm.fp + cm.tn
    n = cm.total
    return {
        "fpr": _ratio(cm.fp, neg),
        "fnr": _ratio(cm.fn, pos),
        "tpr": _ratio(cm.tp, pos),
        "ppr": _ratio(cm.tp + cm.fp, n),
        "prevalence": _ratio(pos, n),
        "count": n.astype(np.float64),
    }


def fairness_score(rates: Sequence[float], definition: str = "predictive_equality",
                   group_names: Sequence[str] = ()) -> float:
    """min(rate) / max(rate) across groups; 1.0 when every rate is zero."""
    r = np.asarray(rates, dtype=np.float64)
    if r.size < 2:
        raise ValueError(f"{definition}: need at least 2 groups, got {r.size}")
    bad = np.flatnonzero(~np.isfinite(r))
    if bad.size:
        g = int(bad[0])
        name = f" ({group_names[g]!r})" if g < len(group_names) else ""
        raise DegenerateGroupError(f"{definition}: rate undefined for group {g}{name}")
    top = r.max()
    if top == 0:
        return 1.0
    return float(r.min() / top)


def threshold_at_fpr(labels, scores, target_fpr: float) -> tuple[float, float, float]:
    """Most permissive threshold whose FPR does not exceed ``target_fpr``.

    Returns (threshold, recall, achieved FPR). A target of 1.0 yields a
    threshold just below the lowest score.
    """
    if not 0.0 < target_fpr <= 1.0:
        raise RangeError(f"target FPR must be in (0, 1], got {target_fpr}")
    y = np.asarray(labels).astype(bool)
    s = np.asarray(scores, dtype=np.float64)
    neg = np.sort(s[~y])[::-1]
    n_neg, n_pos = neg.size, int(y.sum())
    if n_neg == 0 or n_pos == 0:
        raise DegenerateGroupError("threshold selection needs both positives and negatives")
    # largest false-positive count k with k / n_neg <= target, exact in rationals
    k = min(int(math.floor(target_fpr * n_neg)), n_neg)
    while k < n_neg and (k + 1) / n_neg <= target_fpr:
        k += 1
    while k > 0 and k / n_neg > target_fpr:
        k -= 1
    if k >= n_neg:
        thr = float(np.nextafter(s.min(), -np.inf))
    else:
        thr = float(neg[k])
    recall = float(np.mean(s[y] > thr))
    fpr = float(np.mean(s[~y] > thr))
    return thr, recall, fpr


@dataclass
class EvalReport:
    accuracy: float
    group_names: tuple[str, ...]
    group_metrics: dict[str, np.ndarray]
    fairness: dict[str, float]
    threshold: float
    target_fpr: float | None = None
    recall_at_target: float | None = None
    fpr_at_target: float | None = None
    extra: dict[str, float] = field(default_factory=dict)

    def rows(self) -> list[tuple[str, str, float]]:
        out = [("fairness_form", "all", "min_over_max_ratio"),
               ("threshold", "all", self.threshold),
               ("accuracy", "all", self.accuracy)]
        for name, val in self.fairness.items():
            out.append((f"fairness_{name}", "all", val))
        if self.target_fpr is not None:
            out += [("target_fpr", "all", self.target_fpr),
                    ("recall_at_target_fpr", "all", self.recall_at_target),
                    ("achieved_fpr", "all", self.fpr_at_target)]
        for name, val in self.extra.items():
            out.append((name, "all", val))
        for metric, vals in self.group_metrics.items():
            for gname, v in zip(self.group_names, vals):
                out.append((metric, gname, v))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["metric", "group", "value"])
            for metric, group, value in self.rows():
                w.writerow([metric, group, _fmt(value)])

    def to_text(self) -> str:
        lines = ["fairness scores are min/max ratios of group rates (1.0 = parity)"]
        width = max(len(m) for m, _, _ in self.rows())
        for metric, group, value in self.rows():
            lines.append(f"{metric:<{width}}  {group:<12} {_fmt(value)}")
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) or (isinstance(v, float) and v.is_integer() and abs(v) < 1e15):
        return str(int(v))
    return repr(float(v))


def evaluate_predictions(labels, scores, groups, group_names: Sequence[str] = (),
                         threshold: float = 0.0, target_fpr: float | None = None,
                         calibration: tuple | None = None) -> EvalReport:
    """Group rates and parity scores at ``threshold``.

    With ``target_fpr`` the threshold is instead chosen to meet that global
    FPR, on ``calibration=(labels, scores)`` if given, otherwise on the
    evaluated data itself.
    """
    y = np.asarray(labels)
    s = np.asarray(scores, dtype=np.float64)
    g = np.asarray(groups, dtype=np.int64)
    n_groups = max(len(group_names), int(g.max()) + 1)
    names = tuple(group_names) or tuple(str(i) for i in range(n_groups))
    recall = fpr = None
    if target_fpr is not None:
        cy, cs = calibration if calibration is not None else (y, s)
        threshold, _, _ = threshold_at_fpr(cy, cs, target_fpr)
        recall = float(np.mean(s[y == 1] > threshold))
        fpr = float(np.mean(s[y == 0] > threshold))
    cm = group_confusion(y, s, g, threshold, n_groups)
    gm = group_rates(cm)
    fairness = {}
    for name, key in FAIRNESS_DEFINITIONS.items():
        try:
            fairness[name] = fairness_score(gm[key], name, names)
        except (DegenerateGroupError, ValueError):
            fairness[name] = math.nan
    accuracy = float(np.mean((s > threshold) == (y == 1)))
    return EvalReport(accuracy, names, gm, fairness, float(threshold), target_fpr, recall, fpr)
