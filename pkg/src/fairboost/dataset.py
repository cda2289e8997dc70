"""Tabular data loading and quantile binning.

Features are quantized once into integer bins so that tree growth only ever
touches histograms. Each feature owns ``n_value_bins`` ordinary bins plus one
trailing missing bin (index ``n_value_bins``).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError, SchemaError, ShapeError

BIN_DTYPE = np.uint16
MAX_BINS_LIMIT = int(np.iinfo(BIN_DTYPE).max)


@dataclass(frozen=True)
class RawDataset:
    features: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    feature_names: tuple[str, ...]
    group_names: tuple[str, ...]

    def __post_init__(self):
        features = np.ascontiguousarray(self.features, dtype=np.float64)
        if features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {features.shape}")
        labels = np.asarray(self.labels)
        groups = np.asarray(self.groups)
        n_rows, n_features = features.shape
        if n_rows < 2:
            raise DataError(f"need at least 2 rows, got {n_rows}")
        if n_features < 1:
            raise DataError("need at least 1 feature")
        if labels.shape != (n_rows,) or groups.shape != (n_rows,):
            raise ShapeError("labels and groups must be 1-D with one entry per row")
        if not np.all((labels == 0) | (labels == 1)):
            raise DataError("labels must be exactly 0 or 1")
        n_groups = len(self.group_names)
        if n_groups < 1 or np.any(groups < 0) or np.any(groups >= n_groups):
            raise DataError(f"group indices must lie in [0, {n_groups})")
        counts = np.bincount(groups.astype(np.int64), minlength=n_groups)
        if np.any(counts == 0):
            empty = [self.group_names[g] for g in np.flatnonzero(counts == 0)]
            raise DataError(f"groups with no rows: {empty}")
        if len(self.feature_names) != n_features:
            raise ShapeError("feature_names length does not match feature count")
        features.flags.writeable = False
        labels = labels.astype(np.int8)
        labels.flags.writeable = False
        groups = groups.astype(np.int64)
        groups.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "group_names", tuple(self.group_names))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def n_groups(self) -> int:
        return len(self.group_names)

    def subset(self, rows) -> RawDataset:
        rows = np.asarray(rows)
        return RawDataset(self.features[rows], self.labels[rows], self.groups[rows],
                          self.feature_names, self.group_names)


@dataclass(frozen=True)
class BinMapper:
    """Per-feature ascending bin upper bounds.

    ``thresholds[f][k]`` is the inclusive upper bound of bin ``k``; the last
    entry is the largest value seen during fitting, anything larger clamps
    into the last bin.
    """

    thresholds: tuple[np.ndarray, ...]
    has_missing: tuple[bool, ...]
    max_bins: int = 255

    def __post_init__(self):
        cleaned = []
        for f, t in enumerate(self.thresholds):
            t = np.asarray(t, dtype=np.float64).copy()
            if t.ndim != 1 or t.size < 1 or t.size > self.max_bins:
                raise ShapeError(f"feature {f}: need 1..{self.max_bins} thresholds, got {t.size}")
            if np.any(np.diff(t) <= 0):
                raise DataError(f"feature {f}: thresholds must be strictly increasing")
            t.flags.writeable = False
            cleaned.append(t)
        if len(self.has_missing) != len(cleaned):
            raise ShapeError("has_missing length does not match feature count")
        object.__setattr__(self, "thresholds", tuple(cleaned))
        object.__setattr__(self, "has_missing", tuple(bool(m) for m in self.has_missing))

    @property
    def n_features(self) -> int:
        return len(self.thresholds)

    @property
    def n_value_bins(self) -> np.ndarray:
        """Number of non-missing bins per feature; also the missing-bin index."""
        return np.array([t.size for t in self.thresholds], dtype=np.int64)

    @property
    def n_bins(self) -> np.ndarray:
        """Total bins per feature, missing bin included."""
        return self.n_value_bins + 1

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.n_features:
            raise ShapeError(
                f"expected {self.n_features} features, got array of shape {features.shape}")
        out = np.empty(features.shape, dtype=BIN_DTYPE)
        for f, t in enumerate(self.thresholds):
            col = features[:, f]
            idx = np.searchsorted(t, col, side="left")
            np.minimum(idx, t.size - 1, out=idx)
            idx[np.isnan(col)] = t.size
            out[:, f] = idx
        return out


@dataclass(frozen=True)
class BinnedDataset:
    bins: np.ndarray
    labels: np.ndarray
    groups: np.ndarray
    mapper: BinMapper
    group_counts: np.ndarray
    feature_names: tuple[str, ...] = ()
    group_names: tuple[str, ...] = ()
    _flat: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n_rows(self) -> int:
        return self.bins.shape[0]

    @property
    def n_features(self) -> int:
        return self.bins.shape[1]

    @property
    def n_groups(self) -> int:
        return self.group_counts.size

    @property
    def missing_bins(self) -> np.ndarray:
        return self.mapper.n_value_bins

    def flat_bins(self) -> np.ndarray:
        """Feature-major bin codes offset so every (feature, bin) pair is unique.

        Shape (n_features, n_rows); code = feature * stride + bin where stride
        is the widest feature's total bin count.
        """
        if self._flat is None:
            stride = int(self.mapper.n_bins.max())
            offsets = np.arange(self.n_features, dtype=np.int64)[:, None] * stride
            flat = np.ascontiguousarray(self.bins.T.astype(np.int64) + offsets)
            flat.flags.writeable = False
            object.__setattr__(self, "_flat", flat)
        return self._flat

    def group_rows(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.groups == g)


def load_csv(path, label_column: str, group_column: str | None) -> RawDataset:
    """Read a headered CSV; every column except label and group is a feature.

    Empty cells are missing values. Groups are indexed in order of first
    appearance. Without a group column every row lands in one group, "all".
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        for col in (label_column, group_column):
            if col is not None and col not in header:
                raise SchemaError(f"{path}: missing column {col!r}")
        li = header.index(label_column)
        gi = header.index(group_column) if group_column is not None else -1
        feat_idx = [i for i in range(len(header)) if i not in (li, gi)]
        feature_names = tuple(header[i] for i in feat_idx)

        group_index: dict[str, int] = {}
        rows, labels, groups = [], [], []
        for rowno, rec in enumerate(reader, start=1):
            if not rec:
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}: row {rowno} has {len(rec)} fields, expected {len(header)}")
            lab = rec[li].strip()
            if lab not in ("0", "1"):
                raise DataError(f"{path}: row {rowno}: label {lab!r} is not 0 or 1")
            labels.append(int(lab))
            grp = rec[gi].strip() if gi >= 0 else "all"
            groups.append(group_index.setdefault(grp, len(group_index)))
            vals = []
            for i in feat_idx:
                cell = rec[i].strip()
                if cell == "":
                    vals.append(math.nan)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: row {rowno}: column {header[i]!r} value {cell!r} is not numeric"
                    ) from None
            rows.append(vals)

    features = np.array(rows, dtype=np.float64).reshape(len(rows), len(feat_idx))
    return RawDataset(features, np.array(labels), np.array(groups, dtype=np.int64),
                      feature_names, tuple(group_index))


def load_feature_csv(path, feature_names: Sequence[str]) -> np.ndarray:
    """Read only the named feature columns, in the given order."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path}: empty file, header row required") from None
        missing = [n for n in feature_names if n not in header]
        if missing:
            raise SchemaError(f"{path}: missing feature column {missing[0]!r}")
        idx = [header.index(n) for n in feature_names]
        rows = []
        for rowno, rec in enumerate(reader, start=1):
            if not rec:
                continue
            try:
                rows.append([float(rec[i]) if rec[i].strip() else math.nan for i in idx])
            except ValueError:
                raise DataError(f"{path}: row {rowno}: non-numeric feature value") from None
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(idx))


def write_csv(data: RawDataset, path, label_column: str = "label",
              group_column: str = "group") -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*data.feature_names, label_column, group_column])
        for x, y, g in zip(data.features, data.labels, data.groups):
            w.writerow([*("" if np.isnan(v) else repr(float(v)) for v in x),
                        int(y), data.group_names[g]])


def _feature_thresholds(col: np.ndarray, max_bins: int) -> np.ndarray:
    values = col[~np.isnan(col)]
    if values.size == 0:
        return np.array([0.0])
    distinct = np.unique(values)
    if distinct.size <= max_bins:
        mids = (distinct[:-1] + distinct[1:]) / 2.0
        return np.append(mids, distinct[-1])
    qs = np.arange(1, max_bins) / max_bins
    cuts = np.unique(np.quantile(values, qs, method="inverted_cdf"))
    cuts = cuts[cuts < distinct[-1]]
    return np.append(cuts, distinct[-1])


def fit_bins(data: RawDataset, max_bins: int = 255) -> BinMapper:
    """Equal-frequency bin boundaries per feature.

    Features with at most ``max_bins`` distinct values get one bin per value,
    with boundaries at the midpoints between neighbours.
    """
    if not 2 <= max_bins <= MAX_BINS_LIMIT - 1:
        raise DataError(f"max_bins must be in [2, {MAX_BINS_LIMIT - 1}], got {max_bins}")
    features = data.features if isinstance(data, RawDataset) else np.asarray(data, float)
    thresholds = tuple(_feature_thresholds(features[:, f], max_bins)
                       for f in range(features.shape[1]))
    has_missing = tuple(bool(np.isnan(features[:, f]).any()) for f in range(features.shape[1]))
    return BinMapper(thresholds, has_missing, max_bins)


def apply_bins(data: RawDataset, mapper: BinMapper) -> BinnedDataset:
    if data.n_features != mapper.n_features:
        raise ShapeError(f"mapper fitted on {mapper.n_features} features, data has {data.n_features}")
    bins = mapper.transform(data.features)
    bins.flags.writeable = False
    counts = np.bincount(data.groups, minlength=data.n_groups)
    return BinnedDataset(bins, data.labels, data.groups, mapper, counts,
                         data.feature_names, data.group_names)
