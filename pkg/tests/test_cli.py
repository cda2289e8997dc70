import csv
import subprocess
import sys

import numpy as np
import pytest

from fairboost.booster import predict_raw
from fairboost.cli import main
from fairboost.dataset import load_csv
from fairboost.model_io import load_model

FAST = ["--num-rounds", "8", "--max-depth", "3", "--min-samples-leaf", "10", "--max-bins", "32"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["synthgen", "--out", str(d / "data.csv"), "--rows", "600", "--features", "4",
                 "--seed", "3"]) == 0
    return d


@pytest.fixture(scope="module")
def trained(workdir):
    out = workdir / "m.txt"
    rc = main(["train", "--data", str(workdir / "data.csv"), "--label-col", "label",
               "--group-col", "group", "--constraint", "fpr_parity", "--epsilon", "0.01",
               "--out", str(out), *FAST])
    assert rc == 0
    return out


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_synthgen_deterministic(workdir):
    again = workdir / "again.csv"
    assert main(["synthgen", "--out", str(again), "--rows", "600", "--features", "4",
                 "--seed", "3"]) == 0
    assert again.read_bytes() == (workdir / "data.csv").read_bytes()
    raw = load_csv(again, "label", "group")
    assert raw.n_rows == 600 and raw.n_features == 4 and set(raw.group_names) == {"g0", "g1"}


def test_train_writes_model_and_trace(workdir, trained):
    assert trained.read_text().startswith("FAIRGBM-MODEL v1\n")
    trace = read_rows(f"{trained}.trace.csv")
    assert [int(r["round"]) for r in trace] == list(range(1, 9))
    cols = set(trace[0])
    for prefix in ("proxy_violation:", "violation:", "multiplier:"):
        assert sum(c.startswith(prefix) for c in cols) == 2
    assert "loss" in cols
    assert all(float(v) >= 0 for r in trace for k, v in r.items() if k.startswith("multiplier:"))


def test_model_echoes_flags(trained):
    text = trained.read_text()
    run = text.splitlines()[-2]
    assert run.startswith("run_config ") and '"constraint": "fpr_parity"' in run


def test_parity_without_group_col_is_usage_error(workdir, capsys):
    rc = main(["train", "--data", str(workdir / "data.csv"), "--label-col", "label",
               "--constraint", "fpr_parity", "--out", str(workdir / "x.txt"), *FAST])
    assert rc == 2
    assert "--group-col" in capsys.readouterr().err


def test_budget_only_run(workdir):
    out = workdir / "budget.txt"
    rc = main(["train", "--data", str(workdir / "data.csv"), "--label-col", "label",
               "--group-col", "group", "--global-fpr", "0.05", "--out", str(out), *FAST])
    assert rc == 0
    model = load_model(out)
    assert model.spec.parity_kind is None and model.multipliers.shape == (1,)


@pytest.mark.parametrize("mode", [["--mode", "last"], ["--mode", "randomized", "--seed", "7"]])
def test_predict_byte_identical(workdir, trained, mode):
    outs = []
    for k in range(2):
        out = workdir / f"pred{k}.csv"
        assert main(["predict", "--model", str(trained), "--data", str(workdir / "data.csv"),
                     "--out", str(out), *mode]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_predict_columns_and_round_trip(workdir, trained):
    out = workdir / "pred.csv"
    assert main(["predict", "--model", str(trained), "--data", str(workdir / "data.csv"),
                 "--out", str(out)]) == 0
    rows = read_rows(out)
    raw = np.array([float(r["raw"]) for r in rows])
    prob = np.array([float(r["probability"]) for r in rows])
    np.testing.assert_allclose(prob, 1 / (1 + np.exp(-raw)), rtol=1e-12)
    assert [int(r["row_id"]) for r in rows] == list(range(600))
    data = load_csv(workdir / "data.csv", "label", "group")
    np.testing.assert_array_equal(raw, predict_raw(load_model(trained), data))


def test_predict_schema_mismatch(workdir, trained, capsys):
    bad = workdir / "bad.csv"
    bad.write_text("x0,x1,x2\n1,2,3\n")
    rc = main(["predict", "--model", str(trained), "--data", str(bad), "--out",
               str(workdir / "p.csv")])
    assert rc == 3
    assert "'x3'" in capsys.readouterr().err


def test_evaluate_report(workdir, trained, capsys):
    scores = workdir / "pred_eval.csv"
    main(["predict", "--model", str(trained), "--data", str(workdir / "data.csv"),
          "--out", str(scores)])
    reports = []
    for k in range(2):
        out = workdir / f"report{k}.csv"
        assert main(["evaluate", "--scores", str(scores), "--data", str(workdir / "data.csv"),
                     "--label-col", "label", "--group-col", "group", "--target-fpr", "0.05",
                     "--out", str(out)]) == 0
        reports.append(out.read_bytes())
    assert reports[0] == reports[1]
    rows = read_rows(workdir / "report0.csv")
    metrics = {r["metric"] for r in rows}
    assert {"threshold", "recall_at_target_fpr", "fairness_predictive_equality"} <= metrics
    assert sum(int(r["value"]) for r in rows if r["metric"] == "count") == 600
    assert "min/max" in capsys.readouterr().out


def test_evaluate_without_labels_is_usage_error(workdir):
    assert main(["evaluate", "--scores", "s.csv", "--data", str(workdir / "data.csv"),
                 "--out", str(workdir / "r.csv")]) == 2


def test_config_file_merge(workdir):
    cfg = workdir / "train.cfg"
    cfg.write_text("# defaults\nlabel-col = label\ngroup_col=group\nnum-rounds=3\n"
                   "max-depth=2\nmin-samples-leaf=10\n")
    out = workdir / "cfg.txt"
    assert main(["train", "--config", str(cfg), "--data", str(workdir / "data.csv"),
                 "--num-rounds", "4", "--out", str(out)]) == 0
    model = load_model(out)
    assert model.n_rounds == 4  # the flag wins over the file
    assert model.config.tree.max_depth == 2


def test_required_flag_still_enforced(workdir):
    assert main(["train", "--data", str(workdir / "data.csv"), "--out", "x.txt"]) == 2


def test_config_unknown_key(workdir):
    cfg = workdir / "bad.cfg"
    cfg.write_text("bogus=1\n")
    assert main(["synthgen", "--config", str(cfg), "--out", str(workdir / "s.csv")]) == 2


def test_bad_model_file_is_io_error(workdir, capsys):
    bad = workdir / "notamodel.txt"
    bad.write_text("hello\n")
    rc = main(["predict", "--model", str(bad), "--data", str(workdir / "data.csv"),
               "--out", str(workdir / "p.csv")])
    assert rc == 5
    assert "ModelFormatError" in capsys.readouterr().err


def test_data_error_names_round_and_module(workdir, capsys):
    one_group_fpr = workdir / "allpos.csv"
    one_group_fpr.write_text("x,label,group\n1,1,a\n2,1,a\n3,0,b\n4,1,b\n")
    rc = main(["train", "--data", str(one_group_fpr), "--label-col", "label",
               "--group-col", "group", "--constraint", "fpr_parity", "--out",
               str(workdir / "e.txt"), "--min-samples-leaf", "1"])
    err = capsys.readouterr().err
    assert rc == 3
    assert "round 1" in err and "[constraints]" in err and "'a'" in err


def test_module_entry_point(workdir):
    res = subprocess.run([sys.executable, "-m", "fairboost", "synthgen", "--out",
                          str(workdir / "m.csv"), "--rows", "50", "--preset", "neutral"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
