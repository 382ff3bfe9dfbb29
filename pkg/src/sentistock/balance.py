"""SMOTE oversampling for the minority direction class.

Operates on scaled features (Euclidean neighborhoods are meaningless across
raw heterogeneous units) and only ever on training rows; the evaluation
stage enforces that contract.  Neighbor search is exact brute force, which
is plenty at desk scale.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import TooFewMinorityError
from .table import DECREASE, INCREASE, FeatureTable, concat


class DegenerateKWarning(UserWarning):
    """k_neighbors exceeded what the minority class can support."""


@dataclass
class SmoteConfig:
    k_neighbors: int = 5
    target_ratio: float = 1.0  # minority/majority after augmentation
    seed: int = 0


def smote(table: FeatureTable, cfg: SmoteConfig) -> FeatureTable:
    """Append synthetic minority rows interpolated between minority neighbors.

    Each synthetic point is r + lambda*(n - r) for a uniformly chosen
    minority row r, one of its k nearest minority neighbors n, and one
    lambda drawn uniformly from [0, 1).  Original rows come through
    verbatim and first; synthetics carry the "synthetic" origin tag and
    their seed row's company/date.
    """
    if cfg.k_neighbors < 1:
        raise ValueError(f"k_neighbors must be >= 1, got {cfg.k_neighbors}")
    if not 0.0 < cfg.target_ratio <= 1.0:
        raise ValueError(f"target_ratio must be in (0, 1], got {cfg.target_ratio}")

    n_inc = int(np.sum(table.labels == INCREASE))
    n_dec = len(table) - n_inc
    minority_label = DECREASE if n_dec <= n_inc else INCREASE
    n_minority = min(n_inc, n_dec)
    n_majority = max(n_inc, n_dec)
    if n_minority < 2:
        raise TooFewMinorityError(f"need >= 2 minority rows, have {n_minority}")

    n_synthetic = max(0, math.ceil(cfg.target_ratio * n_majority) - n_minority)
    if n_synthetic == 0:
        return table.copy()

    k = cfg.k_neighbors
    if k >= n_minority:
        warnings.warn(f"k_neighbors={k} >= minority count {n_minority}; "
                      f"clamping to {n_minority - 1}", DegenerateKWarning)
        k = n_minority - 1

    minority_idx = np.flatnonzero(table.labels == minority_label)
    points = table.X[minority_idx]
    # k nearest minority neighbors per minority row; ties go to the lower index
    diffs = points[:, None, :] - points[None, :, :]
    dists = np.sqrt((diffs ** 2).sum(axis=2))
    np.fill_diagonal(dists, np.inf)
    neighbor_ids = np.argsort(dists, axis=1, kind="stable")[:, :k]

    rng = np.random.default_rng(cfg.seed)
    synth_rows = np.empty((n_synthetic, table.X.shape[1]))
    parents = []
    for s in range(n_synthetic):
        r = int(rng.integers(n_minority))
        n = int(neighbor_ids[r, int(rng.integers(k))])
        lam = rng.random()
        synth_rows[s] = points[r] + lam * (points[n] - points[r])
        parents.append(minority_idx[r])

    synthetic = FeatureTable(
        feature_names=list(table.feature_names),
        companies=[table.companies[p] for p in parents],
        dates=[table.dates[p] for p in parents],
        X=synth_rows,
        labels=np.full(n_synthetic, minority_label, dtype=np.int64),
        origins=["synthetic"] * n_synthetic,
    )
    return concat(table.copy(), synthetic)
