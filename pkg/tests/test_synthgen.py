import numpy as np
import pytest

from fairboost.booster import BoostConfig, predict_raw, train
from fairboost.dataset import apply_bins, fit_bins
from fairboost.metrics import fairness_score, group_confusion, group_rates
from fairboost.synthgen import BIASED_DEFAULT, SynthSpec, generate
from fairboost.tree import TreeParams


def test_deterministic():
    spec = SynthSpec(n_rows=500, seed=4)
    a, b = generate(spec), generate(spec)
    np.testing.assert_array_equal(a.features, b.features)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert not np.array_equal(a.features, generate(spec.replace(seed=5)).features)


def test_group_proportions():
    spec = SynthSpec(n_rows=10_000, n_groups=3, shifts=(0, 0, 0), noise_rates=(0, 0, 0),
                     group_proportions=(0.5, 0.3, 0.2))
    counts = np.bincount(generate(spec).groups) / 10_000
    np.testing.assert_allclose(counts, [0.5, 0.3, 0.2], atol=0.05)


def test_prevalence_before_noise():
    spec = SynthSpec(n_rows=20_000, prevalence=0.2, noise_rates=(0.0, 0.0))
    assert generate(spec).labels.mean() == pytest.approx(0.2, abs=0.02)


def test_spec_validation():
    with pytest.raises(ValueError):
        SynthSpec(n_groups=1, shifts=(0,), noise_rates=(0,))
    with pytest.raises(ValueError):
        SynthSpec(noise_rates=(0.1, 1.0))
    with pytest.raises(ValueError):
        SynthSpec(prevalence=0.0)


def _holdout_fpr(spec, seed=0):
    raw = generate(spec)
    perm = np.random.default_rng(seed).permutation(raw.n_rows)
    half = raw.n_rows // 2
    tr, ho = raw.subset(perm[:half]), raw.subset(perm[half:])
    mapper = fit_bins(tr, 64)
    cfg = BoostConfig(num_rounds=100, tree=TreeParams(max_depth=3, min_samples_leaf=100))
    model = train(apply_bins(tr, mapper), None, cfg)
    s = predict_raw(model, apply_bins(ho, mapper))
    return group_rates(group_confusion(ho.labels, s, ho.groups, 0.0, 2))["fpr"]


@pytest.mark.slow
def test_neutral_spec_has_no_fpr_gap():
    spec = SynthSpec(n_rows=10_000, prevalence=0.3, shifts=(0.0, 0.0), noise_rates=(0.1, 0.1))
    fpr = _holdout_fpr(spec)
    assert abs(fpr[0] - fpr[1]) < 0.03


@pytest.mark.slow
def test_biased_default_is_biased():
    assert fairness_score(_holdout_fpr(BIASED_DEFAULT)) <= 0.5
