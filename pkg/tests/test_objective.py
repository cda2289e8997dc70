import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fairboost.errors import DegenerateGroupError
from fairboost.objective import (
    DEFAULT_SHIFT,
    ProxyConfig,
    ProxyKind,
    bce_gradient_hessian,
    group_rate,
    proxy_gradient,
    proxy_value,
    step_value,
)

KINDS = list(ProxyKind)
GRID = np.linspace(-20, 20, 4001)


class _Data:
    def __init__(self, labels, groups):
        self.labels = np.asarray(labels)
        self.groups = np.asarray(groups)


def _bce(y, f):
    # independent oracle: -log sigma(f) for y=1, -log(1 - sigma(f)) for y=0
    p = 1.0 / (1.0 + math.exp(-f))
    return -math.log(p) if y == 1 else -math.log(1.0 - p)


def test_bce_at_zero():
    g, h = bce_gradient_hessian([1], [0.0])
    assert g[0] == -0.5 and h[0] == 0.25


def test_bce_saturation():
    g, h = bce_gradient_hessian([0], [50.0])
    assert g[0] == pytest.approx(1.0)
    assert h[0] == pytest.approx(0.0, abs=1e-20)


def test_bce_gradient_matches_finite_difference():
    step = 1e-5
    fd = (_bce(1, 1.5 + step) - _bce(1, 1.5 - step)) / (2 * step)
    g, _ = bce_gradient_hessian([1], [1.5])
    assert abs(g[0] - fd) < 1e-6


def test_default_shift_value():
    assert DEFAULT_SHIFT == pytest.approx(0.5413248546129181, abs=1e-15)


def test_fp_proxy_is_one_at_boundary():
    assert proxy_value(ProxyKind.FALSE_POSITIVE, 0, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert proxy_value(ProxyKind.FALSE_NEGATIVE, 1, 0.0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("f", [-30.0, -1.0, 0.0, 2.0, 40.0])
def test_fp_proxy_gated_on_positives(f):
    assert proxy_value(ProxyKind.FALSE_POSITIVE, 1, f) == 0.0
    assert proxy_gradient(ProxyKind.FALSE_POSITIVE, 1, f) == 0.0


@pytest.mark.parametrize("f", [-3.0, 0.0, 5.0])
def test_fn_gradient_gated_on_negatives(f):
    assert proxy_gradient(ProxyKind.FALSE_NEGATIVE, 0, f) == 0.0


def test_unshifted_fp_gradient_is_sigmoid():
    assert proxy_gradient(ProxyKind.FALSE_POSITIVE, 0, 0.0, ProxyConfig(0.0)) == 0.5


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("y", [0, 1])
def test_gradient_matches_finite_difference(kind, y):
    step = 1e-6
    for f in (2.3, -1.7, 0.0, 8.0):
        fd = (proxy_value(kind, y, f + step) - proxy_value(kind, y, f - step)) / (2 * step)
        assert abs(proxy_gradient(kind, y, f) - fd) < 1e-6


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("y", [0, 1])
def test_gradient_relative_error_on_grid(kind, y):
    f = np.linspace(-15, 15, 301)
    step = 1e-5
    fd = (proxy_value(kind, y, f + step) - proxy_value(kind, y, f - step)) / (2 * step)
    g = proxy_gradient(kind, y, f)
    scale = np.maximum(np.abs(fd), 1e-6)
    mask = np.abs(fd) > 1e-9
    assert np.all(np.abs(g - fd)[mask] / scale[mask] <= 1e-5)


def test_step_values_and_tie_rule():
    assert step_value(ProxyKind.FALSE_POSITIVE, 0, 0.1) == 1
    assert step_value(ProxyKind.FALSE_POSITIVE, 0, 0.0) == 0
    assert step_value(ProxyKind.FALSE_NEGATIVE, 1, -3.0) == 1
    assert step_value(ProxyKind.PREDICTED_NEGATIVE, 0, 0.0) == 1
    assert step_value(ProxyKind.PREDICTED_POSITIVE, 1, 0.0) == 0


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("y", [0, 1])
def test_proxy_upper_bounds_step(kind, y):
    assert np.all(proxy_value(kind, y, GRID) >= step_value(kind, y, GRID))


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("y", [0, 1])
def test_proxy_convex(kind, y):
    v = proxy_value(kind, y, GRID)
    assert np.all(v[2:] - 2 * v[1:-1] + v[:-2] >= -1e-12)


@given(st.floats(-50, 50))
def test_fp_fn_mirror(f):
    assert proxy_value(ProxyKind.FALSE_POSITIVE, 0, f) == proxy_value(ProxyKind.FALSE_NEGATIVE, 1, -f)


def test_no_overflow_for_large_scores():
    v = proxy_value(ProxyKind.PREDICTED_POSITIVE, 0, np.array([800.0, -800.0]))
    assert np.all(np.isfinite(v))
    assert v[0] == pytest.approx(800.0 + DEFAULT_SHIFT)


def test_group_rate_step_fp():
    data = _Data([0, 0, 0, 1], [0, 0, 0, 0])
    assert group_rate(ProxyKind.FALSE_POSITIVE, data, [-1, -1, 1, 5], 0, proxy=False) == pytest.approx(1 / 3)


def test_group_rate_proxy_limit():
    data = _Data([0, 1], [0, 0])
    r = group_rate(ProxyKind.PREDICTED_POSITIVE, data, [-1e4, -1e4], 0, proxy=True)
    assert r == pytest.approx(0.0, abs=1e-300)


def test_group_rate_matches_loop():
    rng = np.random.default_rng(3)
    n = 120
    labels = rng.integers(0, 2, n)
    groups = rng.integers(0, 2, n)
    scores = rng.normal(size=n) * 3
    data = _Data(labels, groups)
    shift = DEFAULT_SHIFT
    for kind in KINDS:
        rows = [i for i in range(n) if groups[i] == 1 and
                (kind.conditioned_label is None or labels[i] == kind.conditioned_label)]
        sign = 1 if kind.positive_side else -1
        brute = sum(math.log1p(math.exp(sign * scores[i] + shift)) for i in rows) / len(rows)
        assert group_rate(kind, data, scores, 1, proxy=True) == pytest.approx(brute, rel=1e-12)


def test_group_rate_degenerate_names_group():
    data = _Data([1, 1, 0], [0, 0, 1])
    with pytest.raises(DegenerateGroupError, match="group 0"):
        group_rate(ProxyKind.FALSE_POSITIVE, data, [0, 0, 0], 0, proxy=False)
