"""Feature table: the (company, day) matrix every downstream stage consumes.

Labels are stored as small ints (1 = Increase, 0 = Decrease).  Every row
carries an origin tag ("raw", "train", "test", "synthetic") so that the
evaluation stage can prove no test row ever reaches a fitting step.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingColumnError

INCREASE = 1
DECREASE = 0

LABEL_NAMES = {INCREASE: "Increase", DECREASE: "Decrease"}
LABEL_VALUES = {"Increase": INCREASE, "Decrease": DECREASE}


@dataclass
class FeatureTable:
    feature_names: list[str]
    companies: list[str]
    dates: list[dt.date]
    X: np.ndarray
    labels: np.ndarray
    origins: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim == 1:
            self.X = self.X.reshape(0, len(self.feature_names))
        self.labels = np.asarray(self.labels, dtype=np.int64)
        n = self.X.shape[0]
        if not self.origins:
            self.origins = ["raw"] * n
        if self.X.shape[1] != len(self.feature_names):
            raise ValueError("feature matrix width does not match feature_names")
        if not (len(self.companies) == len(self.dates) == len(self.labels) == len(self.origins) == n):
            raise ValueError("per-row fields have inconsistent lengths")

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.feature_names.index(name)]

    def take(self, indices) -> "FeatureTable":
        idx = np.asarray(indices, dtype=np.intp)
        return FeatureTable(
            feature_names=list(self.feature_names),
            companies=[self.companies[i] for i in idx],
            dates=[self.dates[i] for i in idx],
            X=self.X[idx].copy(),
            labels=self.labels[idx].copy(),
            origins=[self.origins[i] for i in idx],
        )

    def copy(self) -> "FeatureTable":
        return self.take(np.arange(len(self)))

    def with_origin(self, origin: str) -> "FeatureTable":
        out = self.copy()
        out.origins = [origin] * len(out)
        return out

    def class_counts(self) -> dict[str, int]:
        return {
            LABEL_NAMES[INCREASE]: int(np.sum(self.labels == INCREASE)),
            LABEL_NAMES[DECREASE]: int(np.sum(self.labels == DECREASE)),
        }

    def to_csv(self, path) -> None:
        """Write `company,date,<features...>,label` with full-precision floats."""
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["company", "date"] + self.feature_names + ["label"])
            for i in range(len(self)):
                row = [self.companies[i], self.dates[i].isoformat()]
                row += [repr(float(v)) for v in self.X[i]]
                row.append(LABEL_NAMES[int(self.labels[i])])
                writer.writerow(row)

    @classmethod
    def from_csv(cls, path) -> "FeatureTable":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or len(header) < 3 or header[0] != "company" or header[1] != "date" or header[-1] != "label":
                missing = "company" if not header or "company" not in header else "label"
                raise MissingColumnError(str(path), missing)
            names = header[2:-1]
            companies, dates, rows, labels = [], [], [], []
            for rec in reader:
                companies.append(rec[0])
                dates.append(dt.date.fromisoformat(rec[1]))
                rows.append([float(v) for v in rec[2:-1]])
                labels.append(LABEL_VALUES[rec[-1]])
        X = np.asarray(rows, dtype=np.float64) if rows else np.empty((0, len(names)))
        return cls(names, companies, dates, X, np.asarray(labels, dtype=np.int64))


def concat(first: FeatureTable, second: FeatureTable) -> FeatureTable:
    """Stack two tables with identical feature sets, preserving row order."""
    if first.feature_names != second.feature_names:
        raise ValueError("cannot concatenate tables with different feature sets")
    return FeatureTable(
        feature_names=list(first.feature_names),
        companies=first.companies + second.companies,
        dates=first.dates + second.dates,
        X=np.vstack([first.X, second.X]) if len(second) else first.X.copy(),
        labels=np.concatenate([first.labels, second.labels]),
        origins=first.origins + second.origins,
    )
