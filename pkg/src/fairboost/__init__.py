"""Gradient-boosted trees trained under group-fairness rate constraints."""
from .booster import BoostConfig, BoostedModel, init_base_score, predict_randomized, predict_raw, train
from .constraints import ConstraintReport, ConstraintSpec
from .dataset import BinMapper, BinnedDataset, RawDataset, apply_bins, fit_bins, load_csv
from .metrics import evaluate_predictions, fairness_score, threshold_at_fpr
from .model_io import load_model, save_model
from .objective import DEFAULT_SHIFT, ProxyConfig, ProxyKind
from .tree import RegressionTree, TreeParams

__all__ = [
    "BinMapper", "BinnedDataset", "BoostConfig", "BoostedModel", "ConstraintReport",
    "ConstraintSpec", "DEFAULT_SHIFT", "ProxyConfig", "ProxyKind", "RawDataset",
    "RegressionTree", "TreeParams", "apply_bins", "evaluate_predictions", "fairness_score",
    "fit_bins", "init_base_score", "load_csv", "load_model", "predict_randomized",
    "predict_raw", "save_model", "threshold_at_fpr", "train",
]

__version__ = "0.1.0"
