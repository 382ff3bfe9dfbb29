"""SMOTE contract tests: counts, geometry, determinism, and originals
passing through untouched."""

import math

import numpy as np
import pytest

from conftest import make_table
from sentistock.balance import DegenerateKWarning, SmoteConfig, smote
from sentistock.errors import TooFewMinorityError
from sentistock.table import DECREASE, INCREASE


def _imbalanced(n_major=10, n_minor=4, d=3, seed=2):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 1, (n_major, d)), rng.normal(3, 1, (n_minor, d))])
    labels = np.array([INCREASE] * n_major + [DECREASE] * n_minor)
    return make_table(X, labels)


def _on_segment(point, a, b, tol=1e-9):
    """point lies on [a, b): collinear and each coordinate inside the box."""
    d_ab = b - a
    d_ap = point - a
    cross_norm = np.linalg.norm(np.outer(d_ap, d_ab) - np.outer(d_ab, d_ap))
    if cross_norm > tol * max(1.0, np.linalg.norm(d_ab) ** 2):
        return False
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return bool(np.all(point >= lo - tol) and np.all(point <= hi + tol))


def test_two_point_minority_interpolates_on_segment():
    table = make_table([[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0], [7.0, 7.0]],
                       [DECREASE, DECREASE, INCREASE, INCREASE, INCREASE])
    out = smote(table, SmoteConfig(k_neighbors=1, target_ratio=1.0, seed=9))
    synth = out.X[len(table):]
    assert len(synth) == 1
    lam = synth[0, 0]
    assert 0.0 <= lam < 1.0
    assert synth[0, 1] == pytest.approx(lam)  # point is (lam, lam)


def test_synthetic_count_formula():
    table = _imbalanced(n_major=10, n_minor=4)
    out = smote(table, SmoteConfig(k_neighbors=3, target_ratio=1.0, seed=0))
    counts = out.class_counts()
    assert len(out) == len(table) + 6
    assert counts["Increase"] == 10 and counts["Decrease"] == 10


@pytest.mark.parametrize("ratio,expected_minority", [(1.0, 12), (0.75, 9), (0.5, 6)])
def test_target_ratio_formula_exact(ratio, expected_minority):
    table = _imbalanced(n_major=12, n_minor=5)
    out = smote(table, SmoteConfig(k_neighbors=2, target_ratio=ratio, seed=1))
    assert out.class_counts()["Decrease"] == max(5, math.ceil(ratio * 12))
    assert out.class_counts()["Decrease"] == max(5, expected_minority)


def test_already_balanced_is_noop():
    table = _imbalanced(n_major=5, n_minor=5)
    out = smote(table, SmoteConfig(seed=4))
    assert len(out) == len(table)
    np.testing.assert_array_equal(out.X, table.X)


def test_originals_verbatim_and_first():
    table = _imbalanced()
    out = smote(table, SmoteConfig(k_neighbors=3, seed=5))
    assert out.X[:len(table)].tobytes() == table.X.tobytes()
    assert out.origins[:len(table)] == table.origins
    assert all(origin == "synthetic" for origin in out.origins[len(table):])


def test_same_seed_identical_different_seed_differs():
    table = _imbalanced()
    a = smote(table, SmoteConfig(k_neighbors=3, seed=42))
    b = smote(table, SmoteConfig(k_neighbors=3, seed=42))
    c = smote(table, SmoteConfig(k_neighbors=3, seed=43))
    assert a.X.tobytes() == b.X.tobytes()
    assert a.X.tobytes() != c.X.tobytes()


def test_synthetics_lie_between_minority_parents():
    table = _imbalanced(n_major=14, n_minor=6, d=4, seed=12)
    out = smote(table, SmoteConfig(k_neighbors=3, seed=7))
    minority = table.X[table.labels == DECREASE]
    for s in out.X[len(table):]:
        pairs = [(a, b) for i, a in enumerate(minority) for b in minority[i + 1:]]
        assert any(_on_segment(s, a, b) for a, b in pairs), s


def test_synthetic_labels_are_minority():
    table = _imbalanced()
    out = smote(table, SmoteConfig(k_neighbors=3, seed=5))
    assert np.all(out.labels[len(table):] == DECREASE)


def test_too_few_minority():
    table = make_table([[0.0], [1.0], [2.0]], [INCREASE, INCREASE, DECREASE])
    with pytest.raises(TooFewMinorityError):
        smote(table, SmoteConfig(seed=0))


def test_degenerate_k_clamped_with_warning():
    table = _imbalanced(n_major=8, n_minor=3)
    with pytest.warns(DegenerateKWarning):
        out = smote(table, SmoteConfig(k_neighbors=5, seed=0))
    assert out.class_counts()["Decrease"] == 8


def test_invalid_config_values_rejected():
    table = _imbalanced()
    with pytest.raises(ValueError):
        smote(table, SmoteConfig(k_neighbors=0, seed=0))
    with pytest.raises(ValueError):
        smote(table, SmoteConfig(target_ratio=0.0, seed=0))
    with pytest.raises(ValueError):
        smote(table, SmoteConfig(target_ratio=1.2, seed=0))
