"""Plain-text model files.

Layout (one record per line, floats written with ``repr`` so they round-trip
exactly)::

    FAIRGBM-MODEL v1
    base_score <float>
    shift <float>
    feature_names <json list>
    group_names <json list>
    mapper <n_features> <max_bins>
    bins <feature> <has_missing 0|1> <n_thresholds> <t_0> ... <t_k>
    trees <T>
    tree <index> <learning_rate> <n_nodes>
    split <feature> <bin> <left> <right> <missing_left 0|1>
    leaf <value>
    multipliers <m> <lam_0> ... <lam_m>
    constraint <json object or null>
    config <json object>
    run_config <json object>
    end
"""
from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .booster import BoostConfig, BoostedModel
from .constraints import ConstraintSpec
from .dataset import BinMapper
from .errors import ModelFormatError
from .objective import DEFAULT_SHIFT, ProxyConfig, ProxyKind
from .tree import RegressionTree, TreeParams

MAGIC = "FAIRGBM-MODEL v1"


def _f(x) -> str:
    return repr(float(x))


def spec_to_dict(spec: ConstraintSpec | None):
    if spec is None:
        return None
    return {
        "parity_kind": spec.parity_kind.value if spec.parity_kind else None,
        "epsilon": spec.epsilon,
        "global_budgets": [[k.value, t] for k, t in spec.global_budgets],
        "shift": spec.proxy_config.shift,
    }


def spec_from_dict(d) -> ConstraintSpec | None:
    if d is None:
        return None
    return ConstraintSpec(
        parity_kind=ProxyKind(d["parity_kind"]) if d["parity_kind"] else None,
        epsilon=d["epsilon"],
        global_budgets=tuple((ProxyKind(k), t) for k, t in d["global_budgets"]),
        proxy_config=ProxyConfig(d["shift"]),
    )


def config_from_dict(d) -> BoostConfig:
    d = dict(d)
    d["tree"] = TreeParams(**d["tree"])
    return BoostConfig(**d)


def dumps(model: BoostedModel, run_config: dict | None = None) -> str:
    shift = model.spec.proxy_config.shift if model.spec else DEFAULT_SHIFT
    out = [
        MAGIC,
        f"base_score {_f(model.base_score)}",
        f"shift {_f(shift)}",
        f"feature_names {json.dumps(list(model.feature_names))}",
        f"group_names {json.dumps(list(model.group_names))}",
        f"mapper {model.mapper.n_features} {model.mapper.max_bins}",
    ]
    for f, (t, miss) in enumerate(zip(model.mapper.thresholds, model.mapper.has_missing)):
        out.append(f"bins {f} {int(miss)} {t.size} " + " ".join(_f(v) for v in t))
    out.append(f"trees {model.n_rounds}")
    for i, (tree, lr) in enumerate(zip(model.trees, model.learning_rates)):
        out.append(f"tree {i} {_f(lr)} {tree.n_nodes}")
        for k in range(tree.n_nodes):
            if tree.feature[k] >= 0:
                out.append(f"split {tree.feature[k]} {tree.threshold[k]} {tree.left[k]} "
                           f"{tree.right[k]} {int(tree.missing_left[k])}")
            else:
                out.append(f"leaf {_f(tree.value[k])}")
    lam = np.asarray(model.multipliers, dtype=np.float64)
    out.append(" ".join(["multipliers", str(lam.size), *(_f(v) for v in lam)]))
    out.append(f"constraint {json.dumps(spec_to_dict(model.spec))}")
    out.append(f"config {json.dumps(dataclasses.asdict(model.config))}")
    out.append(f"run_config {json.dumps(run_config or {}, sort_keys=True)}")
    out.append("end")
    return "\n".join(out) + "\n"


def save_model(model: BoostedModel, path, run_config: dict | None = None) -> None:
    Path(path).write_text(dumps(model, run_config), encoding="utf-8")


class _Lines:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.pos = 0

    def take(self, key: str) -> list[str]:
        if self.pos >= len(self.lines):
            raise ModelFormatError(f"unexpected end of model file, expected {key!r}")
        line = self.lines[self.pos]
        self.pos += 1
        head, _, rest = line.partition(" ")
        if head != key:
            raise ModelFormatError(f"line {self.pos}: expected {key!r}, got {head!r}")
        return rest

    def fields(self, key: str) -> list[str]:
        return self.take(key).split()


def loads(text: str) -> tuple[BoostedModel, dict]:
    lines = _Lines(text)
    if not lines.lines or lines.lines[0] != MAGIC:
        raise ModelFormatError(f"not a model file: header must be {MAGIC!r}")
    lines.pos = 1
    try:
        base = float(lines.take("base_score"))
        float(lines.take("shift"))
        feature_names = tuple(json.loads(lines.take("feature_names")))
        group_names = tuple(json.loads(lines.take("group_names")))
        n_features, max_bins = map(int, lines.fields("mapper"))
        thresholds, has_missing = [], []
        for f in range(n_features):
            parts = lines.fields("bins")
            if int(parts[0]) != f:
                raise ModelFormatError(f"bins record out of order at feature {f}")
            has_missing.append(bool(int(parts[1])))
            k = int(parts[2])
            thresholds.append(np.array([float(v) for v in parts[3:3 + k]]))
        mapper = BinMapper(tuple(thresholds), tuple(has_missing), max_bins)
        missing_bins = mapper.n_value_bins

        n_trees = int(lines.take("trees"))
        trees, lrs = [], []
        for i in range(n_trees):
            idx, lr, n_nodes = lines.fields("tree")
            if int(idx) != i:
                raise ModelFormatError(f"tree record out of order at tree {i}")
            lrs.append(float(lr))
            cols = {k: [] for k in ("feature", "threshold", "left", "right", "ml", "value")}
            for _ in range(int(n_nodes)):
                line = lines.lines[lines.pos] if lines.pos < len(lines.lines) else ""
                if line.startswith("split "):
                    f, b, lft, rgt, ml = map(int, lines.fields("split"))
                    vals = (f, b, lft, rgt, bool(ml), 0.0)
                else:
                    vals = (-1, -1, -1, -1, True, float(lines.take("leaf")))
                for key, v in zip(cols, vals):
                    cols[key].append(v)
            trees.append(RegressionTree(cols["feature"], cols["threshold"], cols["left"],
                                        cols["right"], cols["ml"], cols["value"], missing_bins))
        parts = lines.fields("multipliers")
        lam = np.array([float(v) for v in parts[1:1 + int(parts[0])]])
        spec = spec_from_dict(json.loads(lines.take("constraint")))
        config = config_from_dict(json.loads(lines.take("config")))
        run_config = json.loads(lines.take("run_config"))
        lines.take("end")
    except ModelFormatError:
        raise
    except (ValueError, KeyError, TypeError, IndexError) as exc:
        raise ModelFormatError(f"malformed model file near line {lines.pos}: {exc}") from exc
    model = BoostedModel(base, trees, lrs, mapper, spec, lam, [], config,
                         feature_names, group_names)
    return model, run_config


def load_model(path) -> BoostedModel:
    return loads(Path(path).read_text(encoding="utf-8"))[0]
