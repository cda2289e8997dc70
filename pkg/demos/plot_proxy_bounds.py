"""
Rate proxies that upper-bound the step function
===============================================

Rate constraints count mistakes, so they are piecewise constant in the
scores and useless for gradient descent. fairboost replaces each count with
a shifted softplus. The shift log(e - 1) makes the proxy equal 1 exactly at
the decision boundary, so it never underestimates the true rate.
"""

# %%
import numpy as np

from fairboost.objective import DEFAULT_SHIFT, ProxyKind, proxy_gradient, proxy_value, step_value

print(f"shift = {DEFAULT_SHIFT!r}  (log(e - 1) = {np.log(np.e - 1)!r})")

# %%
# A false positive only counts for label-0 rows. Compare the proxy with the
# step function on a grid of log-odds scores.
f = np.linspace(-4, 4, 9)
y = np.zeros_like(f)
fp_step = step_value(ProxyKind.FALSE_POSITIVE, y, f)
fp_proxy = proxy_value(ProxyKind.FALSE_POSITIVE, y, f)
for fi, s, p in zip(f, fp_step, fp_proxy):
    print(f"f={fi:+.1f}  step={s:.0f}  proxy={p:.4f}")

# %%
# The proxy touches the step at f = 0 and stays above it everywhere else.
# The negative-side proxies mirror this: a score of 0 predicts negative, so
# a false negative at f = 0 costs exactly 1.
for kind in ProxyKind:
    label = kind.conditioned_label if kind.conditioned_label is not None else 0
    grid = np.linspace(-20, 20, 4001)
    gap = proxy_value(kind, np.full(grid.size, label), grid) - step_value(
        kind, np.full(grid.size, label), grid)
    print(f"{kind.name:<20} proxy(0)={proxy_value(kind, label, 0.0):.6f}  min gap={gap.min():.3g}")

# %%
# The gradient is a shifted sigmoid. Rows far on the correct side of the
# boundary barely move the constraint, while rows near it dominate.
print(np.round(proxy_gradient(ProxyKind.FALSE_POSITIVE, np.zeros(5), np.array([-6, -2, 0, 2, 6.0])), 4))
