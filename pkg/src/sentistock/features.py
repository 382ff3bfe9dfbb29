"""Feature engineering: daily sentiment aggregation, stock and calendar
features, source alignment by (company, date), gap filling, standardization,
and an optional PCA projection.

The merge emits one row per (company, trading day) that has a next-day
direction label and a full rolling window.  Days without chatter from a
source get zeros plus a per-source has_data indicator of 0, so "no data"
stays distinguishable from "neutral data".
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np

from . import textprep
from .errors import BadKError, EmptySeriesError, EmptyTableError, NoOverlapError
from .ingest import Document, OhlcvBar
from .sentiment import NEGATIVE, NEUTRAL, POSITIVE, SentimentScore
from .table import DECREASE, INCREASE, FeatureTable

SOURCE_PREFIXES = ("reddit", "news", "headline")

DEFAULT_KEYWORDS = ["earnings", "beat", "miss", "guidance", "call", "put"]
DEFAULT_ROLLING_WINDOW = 5


@dataclass
class SentimentDayAggregate:
    company: str
    date: dt.date
    n_docs: int
    mean_polarity: float
    weighted_polarity: float
    pos_frac: float
    neg_frac: float
    neu_frac: float
    mean_doc_length: float
    keyword_hits: dict[str, int]


@dataclass
class StockDayFeatures:
    company: str
    date: dt.date
    open: float
    close: float
    volume: int
    daily_change: float
    rolling_mean_close: float | None
    label_next: int | None = None


def engagement_weight(engagement: int) -> float:
    """Log-damped upvote weight, 1 + ln(1 + upvotes).

    A zero-engagement document still counts with weight 1; a single viral
    comment cannot drown out the rest of the day.
    """
    return 1.0 + math.log1p(engagement)


def aggregate_daily_sentiment(scored_docs: list[tuple[Document, SentimentScore]],
                              keywords: list[str]) -> list[SentimentDayAggregate]:
    """Roll per-document scores up to (company, date) granularity.

    weighted_polarity is the engagement-weighted mean of polarities;
    keyword_hits counts exact token matches in the cleaned text.
    """
    keywords = [k.lower() for k in keywords]
    groups: dict[tuple[str, dt.date], list[tuple[Document, SentimentScore]]] = {}
    for doc, score in scored_docs:
        groups.setdefault((doc.company, doc.date), []).append((doc, score))
    out = []
    for (company, date) in sorted(groups):
        members = groups[(company, date)]
        n = len(members)
        polarities = [s.polarity for _, s in members]
        weights = [engagement_weight(d.engagement) for d, _ in members]
        weighted = sum(w * p for w, p in zip(weights, polarities)) / sum(weights)
        labels = [s.label for _, s in members]
        hits = dict.fromkeys(keywords, 0)
        lengths = []
        for doc, _ in members:
            tokens = textprep.tokenize(doc.combined_text)
            lengths.append(len(tokens))
            for token in tokens:
                if token in hits:
                    hits[token] += 1
        out.append(SentimentDayAggregate(
            company=company,
            date=date,
            n_docs=n,
            mean_polarity=sum(polarities) / n,
            weighted_polarity=weighted,
            pos_frac=labels.count(POSITIVE) / n,
            neg_frac=labels.count(NEGATIVE) / n,
            neu_frac=labels.count(NEUTRAL) / n,
            mean_doc_length=sum(lengths) / n,
            keyword_hits=hits,
        ))
    return out


def stock_features(bars: list[OhlcvBar], window: int = DEFAULT_ROLLING_WINDOW,
                   company: str = "") -> list[StockDayFeatures]:
    """Daily change (close - open) and a trailing rolling mean of closes.

    The rolling mean covers the current bar and the window-1 preceding
    ones, so the first window-1 days have none.
    """
    if not bars:
        raise EmptySeriesError("no bars")
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    for prev, cur in zip(bars, bars[1:]):
        if cur.date <= prev.date:
            raise ValueError("bars must be sorted ascending with unique dates")
    closes = [b.close for b in bars]
    out = []
    for i, bar in enumerate(bars):
        rolling = None
        if i + 1 >= window:
            rolling = sum(closes[i + 1 - window:i + 1]) / window
        out.append(StockDayFeatures(company, bar.date, bar.open, bar.close, bar.volume,
                                    bar.close - bar.open, rolling))
    return out


def make_labels(bars: list[OhlcvBar]) -> dict[dt.date, int]:
    """Next-trading-day direction: Increase iff the next close is strictly
    higher.  The last bar has no successor and gets no label.
    """
    if not bars:
        raise EmptySeriesError("no bars")
    labels = {}
    for cur, nxt in zip(bars, bars[1:]):
        labels[cur.date] = INCREASE if nxt.close > cur.close else DECREASE
    return labels


def time_features(date: dt.date, earnings_dates: list[dt.date]) -> tuple[int, int, int]:
    """(day_of_week Monday=0, calendar days to next earnings, missing flag).

    With no upcoming earnings the distance is 0 and the flag is 1; the flag
    lets models tell "earnings today" apart from "no earnings known".
    """
    for e in earnings_dates:
        if e >= date:
            return date.weekday(), (e - date).days, 0
    return date.weekday(), 0, 1


def feature_columns(keywords: list[str]) -> list[str]:
    """Canonical merged-table column order for a keyword list."""
    cols = []
    for src in SOURCE_PREFIXES:
        cols += [f"{src}_n_docs", f"{src}_mean_polarity", f"{src}_weighted_polarity",
                 f"{src}_pos_frac", f"{src}_neg_frac", f"{src}_neu_frac",
                 f"{src}_mean_doc_length"]
        cols += [f"{src}_kw_{k.lower()}" for k in keywords]
        cols.append(f"{src}_has_data")
    cols += ["open", "close", "volume", "daily_change", "rolling_mean_close"]
    cols += ["day_of_week", "days_to_earnings", "no_upcoming_earnings"]
    return cols


def align_and_merge(aggregates: dict[str, list[SentimentDayAggregate]],
                    stock: list[StockDayFeatures],
                    earnings: dict[str, list[dt.date]],
                    keywords: list[str] | None = None) -> FeatureTable:
    """Join sentiment aggregates onto labeled trading days by (company, date).

    Keeps only stock rows that have both a direction label and a full
    rolling window; sentiment gaps become zeros with has_data = 0.  Rows
    are sorted by date then company.
    """
    keywords = DEFAULT_KEYWORDS if keywords is None else keywords
    names = feature_columns(keywords)
    lookup: dict[str, dict[tuple[str, dt.date], SentimentDayAggregate]] = {}
    for src in SOURCE_PREFIXES:
        lookup[src] = {(a.company, a.date): a for a in aggregates.get(src, [])}

    usable = [s for s in stock if s.label_next is not None and s.rolling_mean_close is not None]
    usable.sort(key=lambda s: (s.date, s.company))
    if not usable:
        raise NoOverlapError("no (company, date) rows with both stock data and a label")

    rows, companies, dates, labels = [], [], [], []
    for s in usable:
        row: list[float] = []
        for src in SOURCE_PREFIXES:
            agg = lookup[src].get((s.company, s.date))
            if agg is None:
                row += [0.0] * (7 + len(keywords)) + [0.0]
            else:
                row += [agg.n_docs, agg.mean_polarity, agg.weighted_polarity,
                        agg.pos_frac, agg.neg_frac, agg.neu_frac, agg.mean_doc_length]
                row += [float(agg.keyword_hits.get(k.lower(), 0)) for k in keywords]
                row.append(1.0)
        row += [s.open, s.close, float(s.volume), s.daily_change, s.rolling_mean_close]
        dow, days_to, missing = time_features(s.date, sorted(earnings.get(s.company, [])))
        row += [float(dow), float(days_to), float(missing)]
        rows.append(row)
        companies.append(s.company)
        dates.append(s.date)
        labels.append(s.label_next)

    X = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError("merged table contains non-finite values")
    return FeatureTable(names, companies, dates, X, np.asarray(labels))


@dataclass
class ScalerParams:
    feature_names: list[str]
    mean: np.ndarray
    std: np.ndarray
    frozen: np.ndarray  # zero-variance columns, passed through unscaled


def fit_scaler(table: FeatureTable, features: list[str] | None = None) -> ScalerParams:
    """Per-column mean and population standard deviation on the given rows.

    Must be fitted on training rows only; the evaluation stage owns the
    split and enforces that.
    """
    if len(table) == 0:
        raise EmptyTableError("cannot fit scaler on an empty table")
    names = list(table.feature_names) if features is None else list(features)
    idx = [table.feature_names.index(n) for n in names]
    sub = table.X[:, idx]
    mean = sub.mean(axis=0)
    std = sub.std(axis=0)  # population (ddof=0): fitted data maps to mean 0, std 1
    return ScalerParams(names, mean, std, std == 0.0)


def apply_scaler(params: ScalerParams, table: FeatureTable) -> FeatureTable:
    out = table.copy()
    for j, name in enumerate(params.feature_names):
        if params.frozen[j]:
            continue
        col = out.feature_names.index(name)
        out.X[:, col] = (out.X[:, col] - params.mean[j]) / params.std[j]
    return out


@dataclass
class PcaModel:
    components: np.ndarray  # (k, d), orthonormal rows
    explained_variance_fractions: np.ndarray
    center: np.ndarray
    feature_names: list[str]


def fit_pca(table: FeatureTable, k: int | float) -> PcaModel:
    """Principal components of the (population) covariance matrix.

    Integer k = component count; float k in (0, 1] = smallest count whose
    explained-variance fractions reach that target.  Each component's
    largest-magnitude entry is made positive so signs are reproducible.
    """
    n, d = table.X.shape
    if n == 0:
        raise EmptyTableError("cannot fit PCA on an empty table")
    if isinstance(k, bool) or (isinstance(k, int) and not 1 <= k <= d):
        raise BadKError(f"component count {k} outside [1, {d}]")
    if isinstance(k, float) and not 0.0 < k <= 1.0:
        raise BadKError(f"variance target {k} outside (0, 1]")

    center = table.X.mean(axis=0)
    centered = table.X - center
    cov = (centered.T @ centered) / n
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, None)
    components = eigvecs[:, order].T
    trace = eigvals.sum()
    fractions = eigvals / trace if trace > 0 else np.zeros_like(eigvals)

    if isinstance(k, float):
        cum = np.cumsum(fractions)
        k = int(np.searchsorted(cum, k - 1e-12) + 1)
        k = min(k, d)
    components = components[:k]
    for row in components:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return PcaModel(components, fractions[:k], center, list(table.feature_names))


def apply_pca(model: PcaModel, table: FeatureTable) -> FeatureTable:
    if table.feature_names != model.feature_names:
        raise ValueError("table features do not match the fitted PCA model")
    Y = (table.X - model.center) @ model.components.T
    names = [f"pc{i + 1}" for i in range(model.components.shape[0])]
    return FeatureTable(names, list(table.companies), list(table.dates), Y,
                        table.labels.copy(), list(table.origins))


def pca_reconstruct(model: PcaModel, projected: np.ndarray) -> np.ndarray:
    """Map projected rows back to the original feature space."""
    return projected @ model.components + model.center
