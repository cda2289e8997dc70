import numpy as np
import pytest

from fairboost.booster import BoostConfig, predict_randomized, predict_raw, train
from fairboost.constraints import ConstraintSpec
from fairboost.errors import ModelFormatError
from fairboost.model_io import dumps, load_model, loads, save_model
from fairboost.objective import ProxyKind
from fairboost.tree import TreeParams

from conftest import make_binned, make_raw


@pytest.fixture(scope="module")
def model():
    data = make_binned(n=300, seed=2, missing_frac=0.1)
    spec = ConstraintSpec(ProxyKind.FALSE_POSITIVE, 0.01, ((ProxyKind.FALSE_POSITIVE, 0.1),))
    cfg = BoostConfig(num_rounds=10, tree=TreeParams(max_depth=3, min_samples_leaf=5))
    return train(data, spec, cfg)


def test_round_trip_bit_exact(model, tmp_path):
    path = tmp_path / "m.txt"
    save_model(model, path, {"seed": 3})
    back = load_model(path)
    raw = make_raw(n=1000, seed=9, missing_frac=0.1)
    np.testing.assert_array_equal(predict_raw(back, raw), predict_raw(model, raw))
    np.testing.assert_array_equal(predict_randomized(back, raw, 5),
                                  predict_randomized(model, raw, 5))
    assert back.trees == model.trees
    assert back.spec == model.spec and back.config == model.config
    np.testing.assert_array_equal(back.multipliers, model.multipliers)
    assert loads(dumps(back, {"seed": 3}))[1] == {"seed": 3}
    assert dumps(back, {"seed": 3}) == dumps(model, {"seed": 3})


def test_bad_header(tmp_path):
    with pytest.raises(ModelFormatError, match="header"):
        loads("NOT-A-MODEL\n")


def test_truncated_file(model):
    text = dumps(model)
    with pytest.raises(ModelFormatError):
        loads(text[: len(text) // 2])


def test_corrupt_number(model):
    text = dumps(model).replace("base_score ", "base_score x", 1)
    with pytest.raises(ModelFormatError):
        loads(text)
