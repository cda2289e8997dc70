"""
Training under FPR parity
=========================

A synthetic dataset where one group's negatives are partly mislabelled as
positive. A plain boosted model learns to flag that group's true negatives,
and its false-positive rates drift apart. Adding an FPR-parity constraint
closes the gap at a small cost in recall.
"""

# %%
import numpy as np

from fairboost import BoostConfig, ConstraintSpec, ProxyKind, TreeParams, apply_bins, fit_bins, train
from fairboost.booster import predict_raw
from fairboost.metrics import evaluate_predictions, threshold_at_fpr
from fairboost.synthgen import BIASED_DEFAULT, generate

raw = generate(BIASED_DEFAULT)
perm = np.random.default_rng(0).permutation(raw.n_rows)
train_raw, test_raw = raw.subset(perm[:10_000]), raw.subset(perm[10_000:])
mapper = fit_bins(train_raw)
train_data, test_data = apply_bins(train_raw, mapper), apply_bins(test_raw, mapper)
print(f"{train_raw.n_rows} training rows, groups {train_raw.group_names}")

# %%
# Same hyperparameters for both models; only the constraint differs.
cfg = BoostConfig(num_rounds=200, learning_rate=0.1, multiplier_lr=0.05,
                  tree=TreeParams(max_depth=3, min_samples_leaf=100))
plain = train(train_data, None, cfg)
fair = train(train_data, ConstraintSpec(ProxyKind.FALSE_POSITIVE, epsilon=0.01), cfg)

# %%
# Per-group FPR at log-odds 0 and recall at a 5% global FPR.
for name, model in (("unconstrained", plain), ("fpr parity", fair)):
    s = predict_raw(model, test_data)
    rep = evaluate_predictions(test_raw.labels, s, test_raw.groups, test_raw.group_names)
    _, recall, _ = threshold_at_fpr(test_raw.labels, s, 0.05)
    fpr = rep.group_metrics["fpr"]
    print(f"{name:<14} FPR by group {np.round(fpr, 3)}  "
          f"fairness {rep.fairness['predictive_equality']:.3f}  recall@5%FPR {recall:.3f}")

# %%
# The multipliers grow while a group's FPR sits above the worst group's by
# more than epsilon, then level off once the gap closes.
for rec in fair.trace[::40] + [fair.trace[-1]]:
    print(f"round {rec.round:>3}  violation {np.round(rec.violations, 4)}  lambda {np.round(rec.multipliers, 3)}")
