import csv
import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from sentistock.table import FeatureTable

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def minicorpus_config() -> Path:
    return FIXTURES / "minicorpus" / "config.json"


@pytest.fixture
def sentiment_corpus() -> list[tuple[str, str]]:
    """The 20-document hand-labeled (text, label) fixture."""
    with open(FIXTURES / "sentiment_20docs.csv", newline="", encoding="utf-8") as fh:
        return [(rec["text"], rec["label"]) for rec in csv.DictReader(fh)]


def make_table(X, labels, feature_names=None, companies=None, dates=None) -> FeatureTable:
    """Small helper: wrap arrays in a FeatureTable with sequential dates."""
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    names = feature_names or [f"f{j}" for j in range(X.shape[1])]
    companies = companies or ["TST"] * n
    dates = dates or [dt.date(2024, 1, 1) + dt.timedelta(days=i) for i in range(n)]
    return FeatureTable(names, companies, dates, X, np.asarray(labels))
