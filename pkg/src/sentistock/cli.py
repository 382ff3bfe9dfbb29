"""Command-line pipeline: ingest -> featurize -> train -> evaluate / predict.

One JSON config file drives every command; paths inside it resolve against
the config file's directory.  Outputs are deterministic for a fixed config
and seed (no timestamps anywhere), so re-running a command reproduces its
artifacts byte for byte.

Exit codes: 0 success, 2 input/IO error, 3 data-contract error,
4 artifact/version error.
"""

from __future__ import annotations

import argparse
import datetime as dt
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, features, ingest, sentiment, textprep
from .balance import SmoteConfig
from .errors import ArtifactError, InputError, PipelineError
from .evaluation import ExperimentConfig, run_experiment, temporal_split
from .features import ScalerParams, apply_scaler, fit_scaler
from .models import (
    GbdtModel,
    GbdtParams,
    RfModel,
    TreeNode,
    gbdt_predict_table,
    rf_vote_fraction,
    train_gbdt,
    train_random_forest,
)
from .table import DECREASE, INCREASE, LABEL_NAMES, FeatureTable

MODEL_MAGIC = "sentistock-model"
MODEL_FORMAT_VERSION = 1

DEFAULT_CONFIG = {
    "seed": 0,
    "out_dir": "out",
    "inputs": {
        "reddit": [],
        "news": [],
        "headlines": [],
        "snapshots": [],  # {"path", "selector", "date", "company"}
        "ohlcv": {},      # ticker -> csv path
        "earnings": None,  # csv with header company,earnings_date
    },
    "stoplist": None,   # null: packaged default
    "lexicon": None,    # null: packaged default
    "external_scores": [],
    "sentiment": {
        "method": "lexicon",  # "lexicon" or "external"
        "pos_threshold": 0.05,
        "neg_threshold": -0.05,
        "remove_stopwords": False,  # lexicon scoring keeps negation cues by default
    },
    "keywords": features.DEFAULT_KEYWORDS,
    "rolling_window": features.DEFAULT_ROLLING_WINDOW,
    "split_fraction": 0.7,
    "smote": {"enabled": True, "k_neighbors": 5, "target_ratio": 1.0},
    "pca": None,
    "models": {"gbdt": {}, "random_forest": {}, "knn": {"k": 5, "kind": "euclidean"}},
    "train_model": "gbdt",
}


def _merge_defaults(defaults, overrides):
    if isinstance(defaults, dict) and isinstance(overrides, dict):
        merged = dict(defaults)
        for key, value in overrides.items():
            merged[key] = _merge_defaults(defaults.get(key), value)
        return merged
    return overrides


def load_config(path, seed=None, out_dir=None) -> dict:
    """Read a config file, merge defaults, resolve paths, and validate.

    Every input path named in the config must exist; `--seed`/`--out`
    flag values override the file.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    cfg = _merge_defaults(DEFAULT_CONFIG, raw)
    if seed is not None:
        cfg["seed"] = seed
    if out_dir is not None:
        cfg["out_dir"] = str(out_dir)
    else:
        cfg["out_dir"] = str((path.parent / cfg["out_dir"]).resolve())

    base = path.parent

    def _resolve(p):
        p = Path(p)
        return str(p if p.is_absolute() else (base / p).resolve())

    inputs = cfg["inputs"]
    inputs["reddit"] = [_resolve(p) for p in inputs["reddit"]]
    inputs["news"] = [_resolve(p) for p in inputs["news"]]
    inputs["headlines"] = [_resolve(p) for p in inputs["headlines"]]
    inputs["ohlcv"] = {t: _resolve(p) for t, p in inputs["ohlcv"].items()}
    for snap in inputs["snapshots"]:
        snap["path"] = _resolve(snap["path"])
    if inputs["earnings"]:
        inputs["earnings"] = _resolve(inputs["earnings"])
    for key in ("stoplist", "lexicon"):
        if cfg[key]:
            cfg[key] = _resolve(cfg[key])
    cfg["external_scores"] = [_resolve(p) for p in cfg["external_scores"]]

    referenced = (inputs["reddit"] + inputs["news"] + inputs["headlines"]
                  + list(inputs["ohlcv"].values())
                  + [s["path"] for s in inputs["snapshots"]]
                  + ([inputs["earnings"]] if inputs["earnings"] else [])
                  + ([cfg["stoplist"]] if cfg["stoplist"] else [])
                  + ([cfg["lexicon"]] if cfg["lexicon"] else [])
                  + cfg["external_scores"])
    for p in referenced:
        if not Path(p).exists():
            raise InputError(f"input path does not exist: {p}")
    return cfg


def config_hash(cfg: dict) -> str:
    """Hash of the resolved config minus the output directory, so the same
    inputs and parameters hash identically wherever the results land."""
    hashed = {k: v for k, v in cfg.items() if k != "out_dir"}
    canonical = json.dumps(hashed, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def _out_dir(cfg) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- ingest -------------------------------------------------------------------


def cmd_ingest(cfg: dict) -> int:
    out = _out_dir(cfg)
    inputs = cfg["inputs"]
    skips = {"reddit": 0, "news": 0, "headlines": 0, "ohlcv": 0}

    comments = []
    for p in inputs["reddit"]:
        rows, skipped = ingest.read_reddit_csv(p)
        comments += rows
        skips["reddit"] += len(skipped)
    news = []
    for p in inputs["news"]:
        rows, skipped = ingest.read_news_csv(p)
        news += rows
        skips["news"] += len(skipped)
    headlines = []
    for p in inputs["headlines"]:
        rows, skipped = ingest.read_headlines_csv(p)
        headlines += rows
        skips["headlines"] += len(skipped)
    for snap in inputs["snapshots"]:
        html = Path(snap["path"]).read_text(encoding="utf-8")
        headlines += ingest.parse_headline_snapshot(
            html, snap["selector"], dt.date.fromisoformat(snap["date"]), snap["company"])

    docs = ingest.to_documents(comments, news, headlines)
    by_source = {src: [d for d in docs if d.source == src] for src in ingest.SOURCES}
    ingest.write_documents_csv(out / "documents_reddit.csv", by_source[ingest.SOURCE_REDDIT])
    ingest.write_documents_csv(out / "documents_news.csv", by_source[ingest.SOURCE_NEWS])
    ingest.write_documents_csv(out / "documents_headlines.csv",
                               by_source[ingest.SOURCE_HEADLINE])

    bar_counts = {}
    for ticker in sorted(inputs["ohlcv"]):
        bars, skipped = ingest.read_ohlcv_csv(inputs["ohlcv"][ticker])
        skips["ohlcv"] += len(skipped)
        ingest.write_ohlcv_csv(out / f"bars_{ticker}.csv", bars)
        bar_counts[ticker] = len(bars)

    summary = {
        "documents": {src.lower(): len(by_source[src]) for src in ingest.SOURCES},
        "bars": bar_counts,
        "skipped_rows": skips,
    }
    _write_json(out / "ingest_summary.json", summary)
    print(f"ingest: {len(docs)} documents, "
          f"{sum(bar_counts.values())} bars, {sum(skips.values())} rows skipped")
    return 0


# --- featurize ----------------------------------------------------------------


def _score_documents(cfg: dict, docs: list[ingest.Document]):
    method = cfg["sentiment"]["method"]
    pos_t = cfg["sentiment"]["pos_threshold"]
    neg_t = cfg["sentiment"]["neg_threshold"]
    if method == "lexicon":
        lexicon = sentiment.load_lexicon(cfg["lexicon"])
        stoplist = textprep.load_stoplist(cfg["stoplist"]) \
            if cfg["sentiment"]["remove_stopwords"] else None
        scored = []
        for doc in docs:
            tokens = textprep.tokenize(doc.combined_text)
            if stoplist is not None:
                tokens = textprep.remove_stopwords(tokens, stoplist)
            scored.append((doc, sentiment.lexicon_score(tokens, lexicon, pos_t, neg_t)))
        return scored
    if method == "external":
        scores: dict[str, sentiment.SentimentScore] = {}
        for p in cfg["external_scores"]:
            loaded, _ = sentiment.load_external_scores(p)
            for doc_id in loaded:
                if doc_id in scores:
                    raise InputError(f"doc_id {doc_id!r} scored by more than one file")
            scores.update(loaded)
        neutral = sentiment.SentimentScore(
            0.0, {sentiment.POSITIVE: 0.0, sentiment.NEUTRAL: 1.0, sentiment.NEGATIVE: 0.0},
            sentiment.NEUTRAL)
        return [(doc, scores.get(doc.id, neutral)) for doc in docs]
    raise InputError(f"unknown sentiment method {method!r}")


def read_earnings_csv(path) -> dict[str, list[dt.date]]:
    """Read the `company,earnings_date` calendar into sorted per-company lists."""
    fh, reader = ingest._open_csv(path, ["company", "earnings_date"])
    calendar: dict[str, list[dt.date]] = {}
    with fh:
        for rec in reader:
            calendar.setdefault(rec["company"].strip(), []).append(
                dt.date.fromisoformat(rec["earnings_date"].strip()))
    for dates in calendar.values():
        dates.sort()
    return calendar


def cmd_featurize(cfg: dict) -> int:
    out = _out_dir(cfg)
    docs = []
    for name in ("documents_reddit.csv", "documents_news.csv", "documents_headlines.csv"):
        store = out / name
        if not store.exists():
            raise InputError(f"missing ingest output {store}; run `ingest` first")
        loaded, _ = ingest.read_documents_csv(store)
        docs += loaded
    scored = _score_documents(cfg, docs)
    source_key = {ingest.SOURCE_REDDIT: "reddit", ingest.SOURCE_NEWS: "news",
                  ingest.SOURCE_HEADLINE: "headline"}
    aggregates = {}
    for src, key in source_key.items():
        subset = [(d, s) for d, s in scored if d.source == src]
        aggregates[key] = features.aggregate_daily_sentiment(subset, cfg["keywords"])

    stock = []
    for ticker in sorted(cfg["inputs"]["ohlcv"]):
        store = out / f"bars_{ticker}.csv"
        if not store.exists():
            raise InputError(f"missing ingest output {store}; run `ingest` first")
        bars, _ = ingest.read_ohlcv_csv(store)
        day_features = features.stock_features(bars, cfg["rolling_window"], ticker)
        labels = features.make_labels(bars)
        for f in day_features:
            f.label_next = labels.get(f.date)
        stock += day_features

    earnings = read_earnings_csv(cfg["inputs"]["earnings"]) \
        if cfg["inputs"]["earnings"] else {}
    table = features.align_and_merge(aggregates, stock, earnings, cfg["keywords"])
    table.to_csv(out / "features.csv")
    print(f"featurize: {len(table)} rows x {table.n_features} features -> "
          f"{out / 'features.csv'}")
    return 0


# --- model persistence ---------------------------------------------------------


def _tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf():
        return {"value": node.value}
    return {"feature": node.feature, "threshold": node.threshold,
            "left": _tree_to_dict(node.left), "right": _tree_to_dict(node.right)}


def _tree_from_dict(obj: dict) -> TreeNode:
    if "value" in obj:
        return TreeNode(value=float(obj["value"]))
    return TreeNode(feature=int(obj["feature"]), threshold=float(obj["threshold"]),
                    left=_tree_from_dict(obj["left"]), right=_tree_from_dict(obj["right"]))


def save_model_artifact(path, model, scaler: ScalerParams | None, seed: int,
                        cfg_hash: str) -> None:
    """Write the versioned, self-describing model file (JSON text)."""
    if isinstance(model, GbdtModel):
        kind = "gbdt"
        payload = {
            "base_score": model.base_score,
            "params": {
                "n_estimators": model.params.n_estimators,
                "max_depth": model.params.max_depth,
                "min_samples_split": model.params.min_samples_split,
                "min_samples_leaf": model.params.min_samples_leaf,
                "learning_rate": model.params.learning_rate,
                "seed": model.params.seed,
            },
            "trees": [_tree_to_dict(t) for t in model.trees],
            "feature_gains": list(map(float, model.feature_gains)),
            "train_loss_curve": model.train_loss_curve,
        }
        names = model.feature_names
    elif isinstance(model, RfModel):
        kind = "random_forest"
        payload = {
            "n_trees": model.n_trees,
            "max_depth": model.max_depth,
            "seed": model.seed,
            "trees": [_tree_to_dict(t) for t in model.trees],
        }
        names = model.feature_names
    else:
        raise ArtifactError(f"cannot persist model of type {type(model).__name__}")
    artifact = {
        "magic": MODEL_MAGIC,
        "format_version": MODEL_FORMAT_VERSION,
        "kind": kind,
        "feature_names": names,
        "scaler": None if scaler is None else {
            "feature_names": scaler.feature_names,
            "mean": list(map(float, scaler.mean)),
            "std": list(map(float, scaler.std)),
        },
        "metadata": {"seed": seed, "config_hash": cfg_hash, "tool_version": __version__},
        "payload": payload,
    }
    _write_json(path, artifact)


def load_model_artifact(path):
    """Load and validate a model file; returns (model, scaler, metadata)."""
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read model file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: not a valid model file: {exc}") from exc
    if obj.get("magic") != MODEL_MAGIC:
        raise ArtifactError(f"{path}: bad magic {obj.get('magic')!r}")
    if obj.get("format_version") != MODEL_FORMAT_VERSION:
        raise ArtifactError(f"{path}: unsupported format version "
                            f"{obj.get('format_version')!r}")
    payload = obj["payload"]
    if obj["kind"] == "gbdt":
        params = GbdtParams(**payload["params"])
        model = GbdtModel(
            base_score=float(payload["base_score"]),
            trees=[_tree_from_dict(t) for t in payload["trees"]],
            params=params,
            feature_names=list(obj["feature_names"]),
            feature_gains=np.asarray(payload["feature_gains"], dtype=np.float64),
            train_loss_curve=list(payload["train_loss_curve"]),
        )
    elif obj["kind"] == "random_forest":
        model = RfModel(
            trees=[_tree_from_dict(t) for t in payload["trees"]],
            feature_names=list(obj["feature_names"]),
            n_trees=int(payload["n_trees"]),
            max_depth=payload["max_depth"],
            seed=int(payload["seed"]),
        )
    else:
        raise ArtifactError(f"{path}: unknown model kind {obj['kind']!r}")
    scaler = None
    if obj.get("scaler") is not None:
        s = obj["scaler"]
        std = np.asarray(s["std"], dtype=np.float64)
        scaler = ScalerParams(list(s["feature_names"]),
                              np.asarray(s["mean"], dtype=np.float64), std, std == 0.0)
    return model, scaler, obj["metadata"]


# --- train / evaluate / predict -------------------------------------------------


def _load_features(cfg: dict) -> FeatureTable:
    path = _out_dir(cfg) / "features.csv"
    if not path.exists():
        raise InputError(f"missing feature table {path}; run `featurize` first")
    return FeatureTable.from_csv(path)


def _smote_config(cfg: dict) -> SmoteConfig | None:
    if not cfg["smote"]["enabled"]:
        return None
    return SmoteConfig(k_neighbors=cfg["smote"]["k_neighbors"],
                       target_ratio=cfg["smote"]["target_ratio"], seed=cfg["seed"])


def cmd_train(cfg: dict) -> int:
    from .balance import smote as run_smote

    out = _out_dir(cfg)
    table = _load_features(cfg)
    train, _ = temporal_split(table, cfg["split_fraction"])
    scaler = fit_scaler(train)
    train = apply_scaler(scaler, train)
    smote_cfg = _smote_config(cfg)
    if smote_cfg is not None:
        train = run_smote(train, smote_cfg)

    kind = cfg["train_model"]
    model_params = dict(cfg["models"].get(kind, {}))
    if kind == "gbdt":
        model_params.setdefault("seed", cfg["seed"])
        model = train_gbdt(train, GbdtParams(**model_params))
    elif kind == "random_forest":
        model_params.setdefault("seed", cfg["seed"])
        model = train_random_forest(train, **model_params)
    else:
        raise InputError(f"train_model must be 'gbdt' or 'random_forest', got {kind!r}")
    save_model_artifact(out / "model.json", model, scaler, cfg["seed"], config_hash(cfg))
    print(f"train: {kind} fitted on {len(train)} rows -> {out / 'model.json'}")
    return 0


def cmd_evaluate(cfg: dict) -> int:
    out = _out_dir(cfg)
    table = _load_features(cfg)
    exp = ExperimentConfig(
        split_fraction=cfg["split_fraction"],
        scale=True,
        smote=_smote_config(cfg),
        pca=cfg["pca"],
        models=cfg["models"],
        seed=cfg["seed"],
    )
    report = run_experiment(table, exp)
    cfg_hash = config_hash(cfg)
    report_dict = report.to_dict()
    # echo exactly what the hash covers: the config minus the output location
    report_dict["run_config"] = {k: v for k, v in cfg.items() if k != "out_dir"}
    report_dict["config_hash"] = cfg_hash
    _write_json(out / "report.json", report_dict)
    text = f"config hash: {cfg_hash}\n" + report.to_text()
    (out / "report.txt").write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def cmd_predict(cfg: dict, model_path=None, table_path=None) -> int:
    out = _out_dir(cfg)
    model_path = Path(model_path) if model_path else out / "model.json"
    table = FeatureTable.from_csv(table_path) if table_path else _load_features(cfg)
    model, scaler, _ = load_model_artifact(model_path)
    if model.feature_names != table.feature_names:
        raise ArtifactError("model feature names do not match the prediction table")
    if scaler is not None:
        table = apply_scaler(scaler, table)
    if isinstance(model, GbdtModel):
        probs, labels = gbdt_predict_table(model, table)
    else:
        probs = np.array([rf_vote_fraction(model, table.X[i]) for i in range(len(table))])
        labels = np.where(probs >= 0.5, INCREASE, DECREASE)
    dest = out / "predictions.csv"
    with open(dest, "w", encoding="utf-8", newline="") as fh:
        fh.write("company,date,p_increase,label\n")
        for i in range(len(table)):
            fh.write(f"{table.companies[i]},{table.dates[i].isoformat()},"
                     f"{float(probs[i])!r},{LABEL_NAMES[int(labels[i])]}\n")
    print(f"predict: {len(table)} rows -> {dest}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sentistock",
        description="Sentiment-driven daily stock direction pipeline")
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="override the config output directory")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ingest", help="normalize raw CSV/HTML inputs into document stores")
    sub.add_parser("featurize", help="build the labeled (company, day) feature table")
    sub.add_parser("train", help="fit the configured model and save the artifact")
    sub.add_parser("evaluate", help="run the leakage-free experiment and write reports")
    predict = sub.add_parser("predict", help="score a feature table with a saved model")
    predict.add_argument("--model", default=None, help="model file (default: <out>/model.json)")
    predict.add_argument("--table", default=None,
                         help="feature CSV (default: <out>/features.csv)")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, seed=args.seed, out_dir=args.out)
        if args.command == "ingest":
            return cmd_ingest(cfg)
        if args.command == "featurize":
            return cmd_featurize(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg)
        if args.command == "predict":
            return cmd_predict(cfg, args.model, args.table)
        raise InputError(f"unknown command {args.command!r}")
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
