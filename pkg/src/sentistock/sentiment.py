"""Per-document sentiment: a from-scratch multinomial Naive Bayes baseline,
a weighted lexicon scorer, and a loader for precomputed external scores.

All three paths emit the same SentimentScore shape so the aggregation stage
does not care where a score came from.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

from .errors import (
    BadThresholdsError,
    DuplicateDocIdError,
    EmptyTrainingSetError,
)
from .ingest import BadRow, _open_csv

POSITIVE = "Positive"
NEUTRAL = "Neutral"
NEGATIVE = "Negative"
# Fixed order; argmax ties resolve to the earliest entry.
LABELS = (POSITIVE, NEUTRAL, NEGATIVE)


@dataclass
class SentimentScore:
    polarity: float
    probs: dict[str, float]
    label: str


@dataclass
class NbModel:
    class_log_priors: dict[str, float]
    token_log_likelihoods: dict[str, dict[str, float]]
    vocabulary: set[str]
    alpha: float


@dataclass
class Lexicon:
    weights: dict[str, float] = field(default_factory=dict)


def _argmax_label(scores: dict[str, float]) -> str:
    best = LABELS[0]
    for label in LABELS[1:]:
        if scores[label] > scores[best]:
            best = label
    return best


def train_naive_bayes(labeled: list[tuple[list[str], str]], alpha: float = 1.0) -> NbModel:
    """Multinomial Naive Bayes with Laplace smoothing over token counts.

    P(t|c) = (count(t,c) + alpha) / (total_tokens(c) + alpha*|V|) and
    priors (docs(c) + alpha) / (N + alpha*3), so classes absent from the
    training set still get nonzero mass.
    """
    if not labeled:
        raise EmptyTrainingSetError("cannot train on an empty corpus")
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    doc_counts = {label: 0 for label in LABELS}
    token_counts: dict[str, dict[str, int]] = {label: {} for label in LABELS}
    totals = {label: 0 for label in LABELS}
    vocabulary: set[str] = set()
    for tokens, label in labeled:
        if label not in doc_counts:
            raise ValueError(f"unknown label {label!r}")
        doc_counts[label] += 1
        counts = token_counts[label]
        for token in tokens:
            vocabulary.add(token)
            counts[token] = counts.get(token, 0) + 1
            totals[label] += 1
    n_docs = len(labeled)
    priors = {
        label: math.log((doc_counts[label] + alpha) / (n_docs + alpha * len(LABELS)))
        for label in LABELS
    }
    likelihoods: dict[str, dict[str, float]] = {}
    v_size = len(vocabulary)
    for label in LABELS:
        denom = totals[label] + alpha * v_size
        counts = token_counts[label]
        likelihoods[label] = {
            token: math.log((counts.get(token, 0) + alpha) / denom) for token in vocabulary
        }
    return NbModel(priors, likelihoods, vocabulary, alpha)


def nb_predict(model: NbModel, tokens: list[str]) -> SentimentScore:
    """Posterior over the three classes via log-sum-exp.

    Tokens outside the vocabulary are ignored; with no usable tokens the
    posterior is just the prior.
    """
    log_scores = {}
    for label in LABELS:
        s = model.class_log_priors[label]
        lk = model.token_log_likelihoods[label]
        for token in tokens:
            if token in model.vocabulary:
                s += lk[token]
        log_scores[label] = s
    peak = max(log_scores.values())
    exps = {label: math.exp(s - peak) for label, s in log_scores.items()}
    norm = sum(exps.values())
    probs = {label: exps[label] / norm for label in LABELS}
    label = _argmax_label(probs)
    return SentimentScore(probs[POSITIVE] - probs[NEGATIVE], probs, label)


def label_from_polarity(polarity: float, pos_threshold: float = 0.05,
                        neg_threshold: float = -0.05) -> str:
    if neg_threshold >= pos_threshold:
        raise BadThresholdsError(
            f"neg_threshold {neg_threshold} must be below pos_threshold {pos_threshold}")
    if polarity > pos_threshold:
        return POSITIVE
    if polarity < neg_threshold:
        return NEGATIVE
    return NEUTRAL


def lexicon_score(tokens: list[str], lexicon: Lexicon, pos_threshold: float = 0.05,
                  neg_threshold: float = -0.05) -> SentimentScore:
    """Average the signed weights of matched tokens, clamped to [-1, 1]."""
    matched = [lexicon.weights[t] for t in tokens if t in lexicon.weights]
    polarity = sum(matched) / max(1, len(matched))
    polarity = max(-1.0, min(1.0, polarity))
    label = label_from_polarity(polarity, pos_threshold, neg_threshold)
    probs = {lab: 1.0 if lab == label else 0.0 for lab in LABELS}
    return SentimentScore(polarity, probs, label)


def load_lexicon(path=None) -> Lexicon:
    """Load `token weight` lines ('#' comments allowed); default is packaged."""
    if path is None:
        from importlib import resources

        text = resources.files("sentistock.data").joinpath("lexicon.txt").read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    weights: dict[str, float] = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        token, value = line.split()
        weight = float(value)
        if not math.isfinite(weight):
            raise ValueError(f"non-finite lexicon weight for {token!r}")
        weights[token.lower()] = weight
    return Lexicon(weights)


def load_external_scores(path) -> tuple[dict[str, SentimentScore], list[BadRow]]:
    """Load precomputed per-document class probabilities.

    Expects `doc_id,p_positive,p_neutral,p_negative`.  Probability triples
    within 1e-6 of summing to one are renormalized; anything else is a bad
    row and is skipped with a diagnostic.  Duplicate doc ids abort.
    """
    fh, reader = _open_csv(path, ["doc_id", "p_positive", "p_neutral", "p_negative"])
    scores: dict[str, SentimentScore] = {}
    skipped: list[BadRow] = []
    with fh:
        for rec in reader:
            try:
                p = [float(rec["p_positive"]), float(rec["p_neutral"]), float(rec["p_negative"])]
                if min(p) < 0:
                    raise ValueError("negative probability")
                total = sum(p)
                if abs(total - 1.0) > 1e-6:
                    raise ValueError(f"probabilities sum to {total}, not 1")
                p = [v / total for v in p]
            except (ValueError, TypeError) as exc:
                bad = BadRow(str(path), reader.line_num, str(exc))
                skipped.append(bad)
                print(str(bad), file=sys.stderr)
                continue
            doc_id = rec["doc_id"]
            if doc_id in scores:
                raise DuplicateDocIdError(str(path), doc_id)
            probs = dict(zip(LABELS, p))
            scores[doc_id] = SentimentScore(probs[POSITIVE] - probs[NEGATIVE], probs,
                                            _argmax_label(probs))
    return scores, skipped
