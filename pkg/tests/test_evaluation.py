"""Temporal split, metrics, and experiment-runner tests, including the
leakage evidence carried in origin tags."""

import datetime as dt
import random

import numpy as np
import pytest

import oracles
from conftest import make_table
from sentistock.balance import SmoteConfig
from sentistock.errors import (
    DegenerateSplitError,
    EmptyInputError,
    EmptyTableError,
    LengthMismatchError,
)
from sentistock.evaluation import (
    REFERENCE_ACCURACIES,
    ExperimentConfig,
    compute_metrics,
    run_experiment,
    temporal_split,
)
from sentistock.table import DECREASE, INCREASE


def _dated_table(n=10, companies=None, dates=None, seed=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(0, 1, (n, 2))
    labels = rng.integers(0, 2, n)
    if labels.min() == labels.max():  # keep both classes present
        labels[0] = 1 - labels[0]
    return make_table(X, labels, companies=companies, dates=dates)


class TestTemporalSplit:
    def test_ten_distinct_dates_split_seven_three(self):
        table = _dated_table(10)
        train, test = temporal_split(table, 0.7)
        assert len(train) == 7 and len(test) == 3

    def test_all_rows_share_one_date_degenerate(self):
        table = _dated_table(10, dates=[dt.date(2024, 1, 1)] * 10)
        with pytest.raises(DegenerateSplitError):
            temporal_split(table, 0.7)

    def test_boundary_date_rows_all_go_to_train(self):
        dates = [dt.date(2024, 1, 1) + dt.timedelta(days=i) for i in range(7)]
        dates += [dates[-1]] + [dt.date(2024, 1, 20), dt.date(2024, 1, 21)]  # rows 7,8 share
        table = _dated_table(10, dates=dates)
        train, test = temporal_split(table, 0.7)
        assert len(train) == 8 and len(test) == 2
        assert max(train.dates) < min(test.dates)

    def test_no_date_straddles_the_split(self):
        rng = random.Random(5)
        pool = [dt.date(2024, 1, 1) + dt.timedelta(days=rng.randint(0, 6)) for _ in range(30)]
        table = _dated_table(30, dates=pool)
        train, test = temporal_split(table, 0.5)
        assert set(train.dates).isdisjoint(set(test.dates))
        assert max(train.dates) < min(test.dates)

    def test_origin_tags_assigned(self):
        train, test = temporal_split(_dated_table(10), 0.7)
        assert set(train.origins) == {"train"} and set(test.origins) == {"test"}

    def test_empty_and_bad_fraction(self):
        with pytest.raises(EmptyTableError):
            temporal_split(make_table(np.empty((0, 1)), []), 0.7)
        with pytest.raises(ValueError):
            temporal_split(_dated_table(5), 1.0)

    def test_rows_ordered_by_date_then_company(self):
        dates = [dt.date(2024, 1, 2), dt.date(2024, 1, 1), dt.date(2024, 1, 1),
                 dt.date(2024, 1, 3), dt.date(2024, 1, 2)]
        table = _dated_table(5, companies=["B", "B", "A", "A", "A"], dates=dates)
        train, test = temporal_split(table, 0.7)
        combined = list(zip(train.dates + test.dates, train.companies + test.companies))
        assert combined == sorted(combined)


class TestComputeMetrics:
    def test_hand_worked_confusion_matrix(self):
        # TP=3, FP=1, FN=2, TN=4
        truth = [1, 1, 1, 1, 1, 0, 0, 0, 0, 0]
        labels = [1, 1, 1, 0, 0, 1, 0, 0, 0, 0]
        preds = [(float(lab), lab) for lab in labels]
        m = compute_metrics(preds, truth)
        assert (m.tp, m.fp, m.fn, m.tn) == (3, 1, 2, 4)
        assert m.accuracy == pytest.approx(0.7)
        assert m.precision["Increase"] == pytest.approx(0.75)
        assert m.recall["Increase"] == pytest.approx(0.6)
        assert m.f1["Increase"] == pytest.approx(2 / 3, abs=1e-5)

    def test_all_correct_hard_probabilities(self):
        truth = [1, 0, 1]
        preds = [(1.0, 1), (0.0, 0), (1.0, 1)]
        m = compute_metrics(preds, truth)
        assert m.accuracy == 1.0 and m.mse == 0.0

    def test_soft_probabilities_give_nonzero_mse(self):
        m = compute_metrics([(0.8, 1), (0.3, 0)], [1, 0])
        assert m.accuracy == 1.0
        assert m.mse == pytest.approx((0.2 ** 2 + 0.3 ** 2) / 2)

    def test_no_predicted_positives_precision_zero(self):
        m = compute_metrics([(0.1, 0), (0.2, 0)], [1, 0])
        assert m.precision["Increase"] == 0.0

    def test_counts_cover_all_rows(self):
        rng = np.random.default_rng(71)
        truth = list(rng.integers(0, 2, 50))
        preds = [(float(rng.random()), int(rng.integers(0, 2))) for _ in range(50)]
        m = compute_metrics(preds, truth)
        assert m.tp + m.fp + m.fn + m.tn == 50

    def test_matches_naive_counting_oracle_exactly(self):
        rng = np.random.default_rng(73)
        truth = list(rng.integers(0, 2, 200))
        preds = [(float(rng.random()), int(rng.integers(0, 2))) for _ in range(200)]
        m = compute_metrics(preds, truth)
        expected = oracles.naive_counting_metrics(preds, truth)
        assert (m.tp, m.fp, m.fn, m.tn) == (expected["tp"], expected["fp"],
                                            expected["fn"], expected["tn"])
        assert m.accuracy == expected["accuracy"]
        assert m.precision["Increase"] == expected["precision_increase"]
        assert m.recall["Decrease"] == expected["recall_decrease"]
        assert m.f1["Increase"] == expected["f1_increase"]
        assert m.macro_f1 == expected["macro_f1"]
        assert m.mse == pytest.approx(expected["mse"], abs=1e-12)

    def test_shuffling_rows_leaves_metrics_unchanged(self):
        rng = np.random.default_rng(79)
        truth = list(rng.integers(0, 2, 60))
        preds = [(float(rng.random()), int(rng.integers(0, 2))) for _ in range(60)]
        base = compute_metrics(preds, truth)
        order = list(range(60))
        rng.shuffle(order)
        shuffled = compute_metrics([preds[i] for i in order], [truth[i] for i in order])
        assert shuffled == base

    def test_empty_and_mismatched_inputs(self):
        with pytest.raises(EmptyInputError):
            compute_metrics([], [])
        with pytest.raises(LengthMismatchError):
            compute_metrics([(0.5, 1)], [1, 0])


def _experiment_table(n=60, seed=11):
    rng = np.random.default_rng(seed)
    signal = rng.uniform(-1, 1, n)
    X = np.column_stack([signal, rng.normal(0, 1, n), rng.normal(5, 2, n)])
    labels = (signal > 0).astype(int)
    flip = rng.random(n) < 0.15
    labels[flip] = 1 - labels[flip]
    return make_table(X, labels, feature_names=["signal", "noise", "shift"])


class TestRunExperiment:
    def test_scaler_fit_on_train_only_leaves_test_uncentered(self):
        table = _experiment_table()
        report = run_experiment(table, ExperimentConfig(models={"gbdt": {}}, seed=1))
        assert report.stage_origins["scaler_fit"] and \
            set(report.stage_origins["scaler_fit"]) == {"train"}
        # recompute what the runner did: test-side means are generally off zero
        from sentistock.features import apply_scaler, fit_scaler
        train, test = temporal_split(table, 0.7)
        scaled_test = apply_scaler(fit_scaler(train), test)
        assert np.any(np.abs(scaled_test.X.mean(axis=0)) > 1e-3)

    def test_smote_runs_after_split_test_counts_untouched(self):
        table = _experiment_table()
        _, test = temporal_split(table, 0.7)
        report = run_experiment(table, ExperimentConfig(
            models={"gbdt": {}}, smote=SmoteConfig(seed=5), seed=5))
        assert report.test_counts == test.class_counts()
        after = report.train_counts_after_smote
        assert after["Increase"] == after["Decrease"]
        assert set(report.stage_origins["smote"]) == {"train"}
        assert set(report.stage_origins["model_fit"]) <= {"train", "synthetic"}

    def test_identical_config_and_seed_reproduce_report(self):
        table = _experiment_table()
        cfg = ExperimentConfig(seed=42, smote=SmoteConfig(seed=42))
        a = run_experiment(table, cfg)
        b = run_experiment(table, cfg)
        assert a.to_text() == b.to_text()
        assert a.to_dict() == b.to_dict()

    def test_all_configured_models_scored(self):
        report = run_experiment(_experiment_table(), ExperimentConfig(
            models={"gbdt": {"n_estimators": 5}, "random_forest": {"n_trees": 5},
                    "knn": {"k": 3, "kind": "lorentzian"}},
            seed=2))
        assert set(report.metrics) == {"gbdt", "random_forest", "knn"}
        assert "gbdt" in report.importances

    def test_reference_numbers_marked_nonreproducible(self):
        report = run_experiment(_experiment_table(), ExperimentConfig(
            models={"gbdt": {}}, seed=3))
        block = report.to_dict()["reference_accuracies"]
        assert block["values"] == REFERENCE_ACCURACIES
        assert block["reproducible"] is False
        assert "not reproducible" in report.to_text()

    def test_pca_stage_recorded_when_enabled(self):
        report = run_experiment(_experiment_table(), ExperimentConfig(
            models={"gbdt": {}}, pca=2, seed=4))
        assert set(report.stage_origins["pca_fit"]) == {"train"}

    def test_leakage_guard_trips_on_test_rows(self):
        from sentistock.evaluation import _require_train_only
        _, test = temporal_split(_experiment_table(), 0.7)
        with pytest.raises(RuntimeError, match="leakage"):
            _require_train_only(test, "scaler fitting")
