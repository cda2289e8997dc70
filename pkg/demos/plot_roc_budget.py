"""
Pinning an operating point with a global FPR budget
===================================================

Deployed fraud models usually run at a fixed false-positive rate. Instead of
choosing a threshold after training, a global budget constraint asks the
booster to land that rate at the default log-odds-0 threshold.
"""

# %%
import numpy as np

from fairboost import BoostConfig, ConstraintSpec, ProxyKind, TreeParams, apply_bins, fit_bins, train
from fairboost.booster import predict_raw
from fairboost.synthgen import BIASED_DEFAULT, generate

raw = generate(BIASED_DEFAULT)
data = apply_bins(raw, fit_bins(raw))
negatives = raw.labels == 0

# %%
# A budget-only constraint needs no groups. A larger multiplier step lets
# the single multiplier catch up within 200 rounds.
tree = TreeParams(max_depth=3, min_samples_leaf=100)
spec = ConstraintSpec(global_budgets=((ProxyKind.FALSE_POSITIVE, 0.05),))
for lr in (0.05, 0.5):
    model = train(data, spec, BoostConfig(num_rounds=200, multiplier_lr=lr, tree=tree))
    s = predict_raw(model, data)
    print(f"multiplier lr {lr:<4}  FPR at 0: {np.mean(s[negatives] > 0):.4f}  "
          f"recall at 0: {np.mean(s[~negatives] > 0):.4f}  lambda {model.multipliers[0]:.3f}")

plain = predict_raw(train(data, None, BoostConfig(num_rounds=200, tree=tree)), data)
print(f"unconstrained          FPR at 0: {np.mean(plain[negatives] > 0):.4f}")
