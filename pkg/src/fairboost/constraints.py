"""Rate constraints for the two-player proxy-Lagrangian game.

Parity over groups a, b is encoded as one inequality per group b,

    c_b(f) = max_a L_a(f) - L_b(f) - epsilon <= 0,

where L_a is the group's rate. The model player descends on the proxy
(smooth) version of these constraints; the multiplier player ascends on the
original step-wise ones. Global budgets add ``L_D(f) - target <= 0``.

Multiplier layout: ``n_groups`` parity entries (in group order, only when a
parity kind is set) followed by one entry per global budget.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateGroupError, ShapeError
from .objective import (
    ProxyConfig,
    ProxyKind,
    proxy_gradient,
    proxy_hessian,
    proxy_value,
    rate_mask,
    step_value,
)


@dataclass(frozen=True)
class ConstraintSpec:
    parity_kind: ProxyKind | None = None
    epsilon: float = 0.0
    global_budgets: tuple[tuple[ProxyKind, float], ...] = ()
    proxy_config: ProxyConfig = field(default_factory=ProxyConfig)

    def __post_init__(self):
        budgets = tuple((ProxyKind(k), float(t)) for k, t in self.global_budgets)
        object.__setattr__(self, "global_budgets", budgets)
        if self.parity_kind is None and not budgets:
            raise ValueError("constraint spec needs a parity kind or at least one global budget")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        for kind, target in budgets:
            if not 0.0 <= target <= 1.0:
                raise ValueError(f"budget target for {kind.name} must be in [0, 1], got {target}")

    def n_constraints(self, n_groups: int) -> int:
        return (n_groups if self.parity_kind is not None else 0) + len(self.global_budgets)

    def labels(self, group_names) -> list[str]:
        """Human-readable name for each multiplier slot."""
        out = []
        if self.parity_kind is not None:
            out += [f"{self.parity_kind.value}_parity[{g}]" for g in group_names]
        out += [f"global_{k.value}<={t:g}" for k, t in self.global_budgets]
        return out


@dataclass(frozen=True)
class ConstraintReport:
    proxy_violations: np.ndarray
    violations: np.ndarray
    argmax_group: int | None
    group_proxy_rates: np.ndarray
    group_rates: np.ndarray
    global_proxy_rates: np.ndarray
    global_rates: np.ndarray

    @property
    def max_violation(self) -> float:
        return float(self.violations.max())


def _denominators(kind: ProxyKind, labels, groups, n_groups, group_names=()):
    masks = [rate_mask(kind, labels, groups, g) for g in range(n_groups)]
    counts = np.array([m.sum() for m in masks], dtype=np.int64)
    if np.any(counts == 0):
        g = int(np.flatnonzero(counts == 0)[0])
        name = f" ({group_names[g]!r})" if g < len(group_names) else ""
        raise DegenerateGroupError(f"group {g}{name} has no rows in the denominator of {kind.name} rate")
    return masks, counts


def evaluate(spec: ConstraintSpec, data, scores) -> ConstraintReport:
    """Proxy and original violations of every constraint at ``scores``."""
    f = np.asarray(scores, dtype=np.float64)
    y, groups = data.labels, data.groups
    n_groups = data.n_groups
    cfg = spec.proxy_config
    gp = np.empty(0)
    gr = np.empty(0)
    argmax = None
    pv, ov = [], []
    if spec.parity_kind is not None:
        kind = spec.parity_kind
        masks, _ = _denominators(kind, y, groups, n_groups, getattr(data, "group_names", ()))
        gp = np.array([np.mean(proxy_value(kind, y[m], f[m], cfg)) for m in masks])
        gr = np.array([np.mean(step_value(kind, y[m], f[m])) for m in masks])
        argmax = int(np.argmax(gp))  # first maximum: lowest index wins ties
        pv.append(gp.max() - gp - spec.epsilon)
        ov.append(gr.max() - gr - spec.epsilon)
    bp, br = [], []
    for kind, target in spec.global_budgets:
        m = rate_mask(kind, y)
        if not m.any():
            raise DegenerateGroupError(f"dataset has no rows in the denominator of {kind.name} rate")
        bp.append(float(np.mean(proxy_value(kind, y[m], f[m], cfg))))
        br.append(float(np.mean(step_value(kind, y[m], f[m]))))
    bp, br = np.array(bp), np.array(br)
    targets = np.array([t for _, t in spec.global_budgets])
    pv.append(bp - targets)
    ov.append(br - targets)
    return ConstraintReport(
        proxy_violations=np.concatenate(pv),
        violations=np.concatenate(ov),
        argmax_group=argmax,
        group_proxy_rates=gp,
        group_rates=gr,
        global_proxy_rates=bp,
        global_rates=br,
    )


def _parity_coefficients(lam_parity: np.ndarray, j: int, compat_argmax_factor: bool) -> np.ndarray:
    # d/dL_j of sum_b lam_b (L_j - L_b) is sum_{b != j} lam_b; d/dL_k is -lam_k
    coef = -lam_parity.astype(np.float64).copy()
    rest = lam_parity.sum() - lam_parity[j]
    if compat_argmax_factor:
        rest *= lam_parity.size - 1
    coef[j] = rest
    return coef


def _row_terms(spec, lam, data, scores, report, curvature: bool, compat_argmax_factor: bool):
    lam = np.asarray(lam, dtype=np.float64)
    n_groups = data.n_groups
    m = spec.n_constraints(n_groups)
    if lam.shape != (m,):
        raise ShapeError(f"expected {m} multipliers, got shape {lam.shape}")
    f = np.asarray(scores, dtype=np.float64)
    if f.shape != (data.n_rows,):
        raise ShapeError(f"expected {data.n_rows} scores, got shape {f.shape}")
    y, groups = data.labels, data.groups
    cfg = spec.proxy_config
    deriv = proxy_hessian if curvature else proxy_gradient
    out = np.zeros(data.n_rows)
    offset = 0
    if spec.parity_kind is not None:
        kind = spec.parity_kind
        lam_p = lam[:n_groups]
        offset = n_groups
        if n_groups > 1 and np.any(lam_p != 0):
            _, counts = _denominators(kind, y, groups, n_groups)
            coef = _parity_coefficients(lam_p, report.argmax_group, compat_argmax_factor)
            # gate inside deriv zeroes rows outside the label-conditioned subset
            out += (coef / counts)[groups] * deriv(kind, y, f, cfg)
    for b, (kind, _) in enumerate(spec.global_budgets):
        lb = lam[offset + b]
        if lb == 0:
            continue
        denom = rate_mask(kind, y).sum()
        out += (lb / denom) * deriv(kind, y, f, cfg)
    return out


def descent_gradient(spec: ConstraintSpec, lam, data, scores, report: ConstraintReport,
                     compat_argmax_factor: bool = False) -> np.ndarray:
    """Per-row derivative of ``sum_j lam_j * proxy_violation_j`` w.r.t. each score.

    Rows in the argmax group carry ``sum_{k != j} lam_k`` times their proxy
    derivative; rows in any other group k carry ``-lam_k``. Each group term is
    normalized by that group's rate denominator. ``compat_argmax_factor`` scales the
    argmax-group coefficient by (m - 1), which is not the true derivative but
    reproduces the coefficient as it appears in the original write-up.
    """
    return _row_terms(spec, lam, data, scores, report, False, compat_argmax_factor)


def descent_hessian(spec: ConstraintSpec, lam, data, scores, report: ConstraintReport,
                    compat_argmax_factor: bool = False) -> np.ndarray:
    """Diagonal curvature of the constraint term; may be negative per row."""
    return _row_terms(spec, lam, data, scores, report, True, compat_argmax_factor)


def ascent_step(lam, report: ConstraintReport, lr: float) -> np.ndarray:
    """Projected gradient ascent on the original (step-wise) violations."""
    if not lr > 0:
        raise ValueError(f"multiplier learning rate must be positive, got {lr}")
    return np.maximum(0.0, np.asarray(lam, dtype=np.float64) + lr * report.violations)
