"""Histogram-based regression trees fitted to gradient/hessian pairs.

Growth is best-first: the leaf with the largest split gain is split next,
until no leaf has a valid split or the leaf budget (2 ** max_depth) is used.
For a candidate split of a node with totals (G, H) into (G_L, H_L) and
(G_R, H_R) the gain is

    0.5 * [G_L^2 / d(H_L) + G_R^2 / d(H_R) - G^2 / d(H)],  d(H) = max(H, floor) + l2

and each leaf predicts -G / d(H).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError

# gains within this relative distance of zero are rounding noise, not signal
_GAIN_RTOL = 1e-12


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 6
    min_samples_leaf: int = 20
    l2_reg: float = 1.0
    min_gain: float = 0.0
    hessian_floor: float = 1e-6

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be positive")
        if self.l2_reg < 0 or self.min_gain < 0:
            raise ValueError("l2_reg and min_gain must be nonnegative")
        if not self.hessian_floor > 0:
            raise ValueError("hessian_floor must be positive")

    @property
    def max_leaves(self) -> int:
        return 2 ** self.max_depth


@dataclass
class Histogram:
    """Per (feature, bin) sums of gradient, hessian and row count."""

    grad: np.ndarray
    hess: np.ndarray
    count: np.ndarray

    @property
    def shape(self):
        return self.grad.shape


def build_histogram(data, rows: np.ndarray, gradients, hessians) -> Histogram:
    flat = data.flat_bins()
    n_features = flat.shape[0]
    stride = int(data.mapper.n_bins.max())
    size = n_features * stride
    codes = flat[:, rows].ravel()
    g = np.tile(gradients[rows], n_features)
    h = np.tile(hessians[rows], n_features)
    shape = (n_features, stride)
    return Histogram(
        np.bincount(codes, weights=g, minlength=size).reshape(shape),
        np.bincount(codes, weights=h, minlength=size).reshape(shape),
        np.bincount(codes, minlength=size).reshape(shape),
    )


def sibling_histogram(parent: Histogram, child: Histogram) -> Histogram:
    if parent.shape != child.shape:
        raise ShapeError(f"histogram shapes differ: {parent.shape} vs {child.shape}")
    return Histogram(parent.grad - child.grad, parent.hess - child.hess,
                     parent.count - child.count)


def _denom(h, params: TreeParams):
    return np.maximum(h, params.hessian_floor) + params.l2_reg


def leaf_value(G: float, H: float, params: TreeParams) -> float:
    return float(-G / _denom(H, params))


def split_gain(GL, HL, GR, HR, params: TreeParams):
    """Gain of splitting (GL+GR, HL+HR) into the two given halves."""
    G, H = GL + GR, HL + HR
    left = GL * GL / _denom(HL, params)
    right = GR * GR / _denom(HR, params)
    return 0.5 * (left + right - G * G / _denom(H, params)), left + right


def is_split_valid(gain, scale, n_left, n_right, params: TreeParams):
    return ((n_left >= params.min_samples_leaf) & (n_right >= params.min_samples_leaf)
            & (gain > params.min_gain + _GAIN_RTOL * np.abs(scale)))


@dataclass(frozen=True)
class SplitCandidate:
    gain: float
    feature: int
    bin: int


def find_best_split(hist: Histogram, G: float, H: float, n: int, missing_bins: np.ndarray,
                    params: TreeParams) -> SplitCandidate | None:
    """Scan every (feature, bin) boundary; missing rows join the left child.

    Ties resolve to the lowest feature, then the lowest bin.
    """
    n_features, stride = hist.shape
    rows = np.arange(n_features)
    g_mis = hist.grad[rows, missing_bins]
    h_mis = hist.hess[rows, missing_bins]
    c_mis = hist.count[rows, missing_bins]
    gv, hv, cv = hist.grad.copy(), hist.hess.copy(), hist.count.copy()
    gv[rows, missing_bins] = 0.0
    hv[rows, missing_bins] = 0.0
    cv[rows, missing_bins] = 0
    GL = np.cumsum(gv, axis=1) + g_mis[:, None]
    HL = np.cumsum(hv, axis=1) + h_mis[:, None]
    CL = np.cumsum(cv, axis=1) + c_mis[:, None]
    GR, HR, CR = G - GL, H - HL, n - CL
    gain, scale = split_gain(GL, HL, GR, HR, params)
    # the last value bin would leave no value bins on the right
    usable = np.arange(stride)[None, :] < (missing_bins - 1)[:, None]
    valid = usable & is_split_valid(gain, scale, CL, CR, params)
    if not valid.any():
        return None
    gain = np.where(valid, gain, -np.inf)
    best = int(np.argmax(gain))
    f, b = divmod(best, stride)
    return SplitCandidate(float(gain[f, b]), f, b)


class RegressionTree:
    """Flat node arrays; ``feature[i] < 0`` marks a leaf.

    A row goes left at an internal node when its bin is <= the node's
    threshold bin, or when it sits in the missing bin and ``missing_left``.
    """

    def __init__(self, feature, threshold, left, right, missing_left, value,
                 missing_bins, gain=None, n_samples=None):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.int64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.missing_left = np.asarray(missing_left, dtype=bool)
        self.value = np.asarray(value, dtype=np.float64)
        self.missing_bins = np.asarray(missing_bins, dtype=np.int64)
        n = self.feature.size
        self.gain = np.zeros(n) if gain is None else np.asarray(gain, dtype=np.float64)
        self.n_samples = (np.zeros(n, dtype=np.int64) if n_samples is None
                          else np.asarray(n_samples, dtype=np.int64))
        self._check()

    def _check(self):
        n = self.feature.size
        arrays = (self.threshold, self.left, self.right, self.missing_left, self.value)
        if n == 0 or any(a.shape != (n,) for a in arrays):
            raise ShapeError("tree node arrays must be nonempty and equally sized")
        internal = self.feature >= 0
        children = np.concatenate([self.left[internal], self.right[internal]])
        if np.any(children <= 0) or np.any(children >= n) or np.unique(children).size != children.size:
            raise ShapeError("tree children must be distinct non-root nodes")
        if children.size != n - 1:
            raise ShapeError("every non-root node must have exactly one parent")

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def is_leaf(self) -> np.ndarray:
        return self.feature < 0

    @property
    def n_leaves(self) -> int:
        return int(self.is_leaf.sum())

    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depth[self.left[i]] = depth[self.right[i]] = depth[i] + 1
        return int(depth.max())

    def predict_binned(self, bins: np.ndarray) -> np.ndarray:
        bins = np.asarray(bins)
        node = np.zeros(bins.shape[0], dtype=np.int64)
        active = np.arange(bins.shape[0])
        while active.size:
            nd = node[active]
            feat = self.feature[nd]
            inner = feat >= 0
            active, nd, feat = active[inner], nd[inner], feat[inner]
            if not active.size:
                break
            b = bins[active, feat]
            go_left = (b <= self.threshold[nd]) | (
                (b == self.missing_bins[feat]) & self.missing_left[nd])
            node[active] = np.where(go_left, self.left[nd], self.right[nd])
        return self.value[node]

    def __eq__(self, other):
        if not isinstance(other, RegressionTree):
            return NotImplemented
        return all(np.array_equal(getattr(self, a), getattr(other, a)) for a in
                   ("feature", "threshold", "left", "right", "missing_left", "value"))

    def __repr__(self):
        return f"RegressionTree(n_nodes={self.n_nodes}, n_leaves={self.n_leaves})"


def predict_tree(tree: RegressionTree, row) -> float:
    """Walk a single binned row down the tree."""
    i = 0
    while tree.feature[i] >= 0:
        f = tree.feature[i]
        b = row[f]
        if b == tree.missing_bins[f]:
            go_left = bool(tree.missing_left[i])
        else:
            go_left = b <= tree.threshold[i]
        i = tree.left[i] if go_left else tree.right[i]
    return float(tree.value[i])


def grow(data, gradients, hessians, params: TreeParams = TreeParams()) -> RegressionTree:
    """Greedy best-first tree on (gradient, hessian) pairs.

    ``data`` is a BinnedDataset. Pass ``hessians=np.ones(n)`` for the
    first-order (squared-error fit) variant.
    """
    g = np.asarray(gradients, dtype=np.float64)
    h = np.asarray(hessians, dtype=np.float64)
    n = data.n_rows
    if g.shape != (n,) or h.shape != (n,):
        raise ShapeError(f"gradients/hessians must have shape ({n},)")
    bins = data.bins
    missing_bins = data.missing_bins

    feature, threshold, left, right, value, gain, n_samples = [], [], [], [], [], [], []

    def new_node(rows):
        G, H = float(g[rows].sum()), float(h[rows].sum())
        feature.append(-1)
        threshold.append(-1)
        left.append(-1)
        right.append(-1)
        value.append(leaf_value(G, H, params))
        gain.append(0.0)
        n_samples.append(rows.size)
        return len(feature) - 1, G, H

    # node id -> (candidate, rows, hist, depth)
    frontier: dict[int, tuple] = {}

    def consider(node, rows, hist, G, H, depth):
        if depth >= params.max_depth or rows.size < 2 * params.min_samples_leaf:
            return
        cand = find_best_split(hist, G, H, rows.size, missing_bins, params)
        if cand is not None:
            frontier[node] = (cand, rows, hist, depth)

    root_rows = np.arange(n)
    root, G0, H0 = new_node(root_rows)
    consider(root, root_rows, build_histogram(data, root_rows, g, h), G0, H0, 0)
    n_leaves = 1
    while frontier and n_leaves < params.max_leaves:
        node = max(frontier, key=lambda k: (frontier[k][0].gain, -k))
        cand, rows, hist, depth = frontier.pop(node)
        col = bins[rows, cand.feature]
        goes_left = (col <= cand.bin) | (col == missing_bins[cand.feature])
        lrows, rrows = rows[goes_left], rows[~goes_left]
        small, large = (lrows, rrows) if lrows.size <= rrows.size else (rrows, lrows)
        small_hist = build_histogram(data, small, g, h)
        large_hist = sibling_histogram(hist, small_hist)
        hists = {id(small): small_hist, id(large): large_hist}

        feature[node], threshold[node], gain[node] = cand.feature, cand.bin, cand.gain
        value[node] = 0.0
        lnode, GL, HL = new_node(lrows)
        rnode, GR, HR = new_node(rrows)
        left[node], right[node] = lnode, rnode
        n_leaves += 1
        consider(lnode, lrows, hists[id(lrows)], GL, HL, depth + 1)
        consider(rnode, rrows, hists[id(rrows)], GR, HR, depth + 1)

    return RegressionTree(feature, threshold, left, right, np.ones(len(feature), dtype=bool),
                          value, missing_bins, gain, n_samples)
