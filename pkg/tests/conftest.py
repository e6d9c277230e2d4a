from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from swarmfs.preprocess import DataTable, load_csv, prepare

ROOT = Path(__file__).resolve().parents[1]
WDBC = ROOT / "data" / "wdbc.csv"
CONFIG = ROOT / "configs" / "wdbc.yaml"

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session")
def wdbc():
    return load_csv(WDBC, "diagnosis", "M", drop_columns=("id",))


@pytest.fixture(scope="session")
def wdbc_split(wdbc):
    return prepare(wdbc, 0.2, 42)


def blobs(n=60, d=4, gap=3.0, seed=0):
    """Two Gaussian clusters separated along every axis."""
    rng = np.random.default_rng(seed)
    y = np.repeat([0, 1], n // 2)
    X = rng.normal(size=(n, d)) + gap * y[:, None]
    return X, y


def table(X, y, names=None):
    names = names or tuple(f"f{j}" for j in range(np.asarray(X).shape[1]))
    return DataTable(tuple(names), X, y)


# one line per acceptance criterion, filled in by test_acceptance.py and echoed after the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
