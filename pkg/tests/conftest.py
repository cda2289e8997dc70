import numpy as np
import pytest

from fairboost.dataset import RawDataset, apply_bins, fit_bins

ACCEPTANCE_LINES: list[str] = []


def make_raw(n=200, n_features=3, n_groups=2, seed=0, missing_frac=0.0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n_features))
    if missing_frac:
        x[rng.random(x.shape) < missing_frac] = np.nan
    groups = np.arange(n) % n_groups
    rng.shuffle(groups)
    logit = np.nan_to_num(x[:, 0]) + 0.5 * groups
    y = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(int)
    # both labels in every group so every rate is defined
    for g in range(n_groups):
        rows = np.flatnonzero(groups == g)
        y[rows[0]], y[rows[1]] = 0, 1
    return RawDataset(x, y, groups, tuple(f"f{i}" for i in range(n_features)),
                      tuple(f"g{i}" for i in range(n_groups)))


def make_binned(max_bins=255, **kw):
    raw = make_raw(**kw)
    return apply_bins(raw, fit_bins(raw, max_bins))


@pytest.fixture
def small_binned():
    return make_binned(n=200, n_features=3, seed=1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
