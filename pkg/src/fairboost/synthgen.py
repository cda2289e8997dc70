"""Seeded synthetic tabular data with a controllable group false-positive bias.

Rows are assigned to groups, features are standard Gaussians with a
group-dependent mean shift on feature 0, and clean labels come from a
logistic model whose intercept is solved to hit the requested prevalence.
Bias is then injected by flipping a group-specific fraction of negatives to
positive. A model fit to such labels scores the noisier group's true negatives
higher, which produces a false-positive-rate gap between groups.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from ._random import consumer_rng
from .dataset import RawDataset


@dataclass(frozen=True)
class SynthSpec:
    n_rows: int = 20_000
    n_features: int = 8
    n_groups: int = 2
    prevalence: float = 0.2
    shifts: tuple[float, ...] = (0.0, 0.0)
    noise_rates: tuple[float, ...] = (0.05, 0.05)
    seed: int = 0
    group_proportions: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_groups < 2:
            raise ValueError("n_groups must be at least 2")
        if self.n_rows < 2 or self.n_features < 1:
            raise ValueError("need n_rows >= 2 and n_features >= 1")
        if not 0 < self.prevalence < 1:
            raise ValueError("prevalence must be in (0, 1)")
        if len(self.shifts) != self.n_groups or len(self.noise_rates) != self.n_groups:
            raise ValueError("shifts and noise_rates need one entry per group")
        if any(not 0 <= r < 1 for r in self.noise_rates):
            raise ValueError("noise rates must be in [0, 1)")
        if self.group_proportions is not None:
            p = np.asarray(self.group_proportions, dtype=float)
            if p.size != self.n_groups or np.any(p <= 0) or not np.isclose(p.sum(), 1.0):
                raise ValueError("group_proportions must be positive and sum to 1")

    def replace(self, **changes) -> SynthSpec:
        return replace(self, **changes)


# Calibrated so an unconstrained model shows a holdout FPR ratio well below 0.5
# between the two groups (see tests/test_synthgen.py).
BIASED_DEFAULT = SynthSpec(
    n_rows=20_000,
    n_features=8,
    n_groups=2,
    prevalence=0.3,
    shifts=(0.0, 2.0),
    noise_rates=(0.0, 0.35),
    seed=0,
)


def label_weights(n_features: int) -> np.ndarray:
    """Ground-truth logistic weights: feature 0 mildly informative, the rest decaying."""
    w = 1.6 / np.sqrt(np.arange(1, n_features + 1))
    w[0] = 0.3
    return w


def generate(spec: SynthSpec) -> RawDataset:
    rng = consumer_rng(spec.seed, "synthgen")
    n, k = spec.n_rows, spec.n_groups
    props = (np.full(k, 1.0 / k) if spec.group_proportions is None
             else np.asarray(spec.group_proportions, dtype=float))
    groups = rng.choice(k, size=n, p=props)
    x = rng.standard_normal((n, spec.n_features))
    x[:, 0] += np.asarray(spec.shifts, dtype=float)[groups]

    z = x @ label_weights(spec.n_features)
    intercept = brentq(lambda b: expit(z + b).mean() - spec.prevalence, -50.0, 50.0, xtol=1e-12)
    y = rng.random(n) < expit(z + intercept)

    flip = rng.random(n) < np.asarray(spec.noise_rates, dtype=float)[groups]
    y = y | flip

    return RawDataset(
        x, y.astype(np.int8), groups,
        tuple(f"x{i}" for i in range(spec.n_features)),
        tuple(f"g{i}" for i in range(k)),
    )
