"""
Randomized classifier versus last iterate
=========================================

The two-player game only guarantees its constraints for the randomized
classifier, which scores each row with a uniformly drawn prefix of the
ensemble. In practice the last iterate behaves almost the same and is
deterministic, which is what most deployments want.
"""

# %%
import numpy as np

from fairboost import BoostConfig, ConstraintSpec, ProxyKind, TreeParams, apply_bins, fit_bins, train
from fairboost.booster import iterate_draws, predict_randomized, predict_raw
from fairboost.metrics import evaluate_predictions
from fairboost.synthgen import BIASED_DEFAULT, generate

raw = generate(BIASED_DEFAULT)
perm = np.random.default_rng(0).permutation(raw.n_rows)
tr, ho = raw.subset(perm[:10_000]), raw.subset(perm[10_000:])
mapper = fit_bins(tr)
model = train(apply_bins(tr, mapper), ConstraintSpec(ProxyKind.FALSE_POSITIVE, 0.01),
              BoostConfig(num_rounds=200, tree=TreeParams(max_depth=3, min_samples_leaf=100)))
holdout = apply_bins(ho, mapper)

# %%
# Draws are reproducible from the seed alone.
draws = iterate_draws(model, ho.n_rows, seed=7)
print("first draws:", draws[:8], " mean iterate", draws.mean().round(1))

# %%
for name, s in (("last", predict_raw(model, holdout)),
                ("randomized", predict_randomized(model, holdout, seed=7))):
    rep = evaluate_predictions(ho.labels, s, ho.groups, ho.group_names)
    print(f"{name:<11} accuracy {rep.accuracy:.3f}  FPR parity {rep.fairness['predictive_equality']:.3f}")
