"""sentistock: social-media and news sentiment features for daily stock
direction prediction, with from-scratch classifiers and leakage-free
evaluation."""

__version__ = "0.1.0"

from .table import DECREASE, INCREASE, FeatureTable  # noqa: F401
from .ingest import (  # noqa: F401
    Document,
    HeadlineItem,
    NewsItem,
    OhlcvBar,
    RawComment,
    parse_headline_snapshot,
    read_headlines_csv,
    read_news_csv,
    read_ohlcv_csv,
    read_reddit_csv,
    to_documents,
)
from .textprep import clean_text, load_stoplist, remove_stopwords, tokenize  # noqa: F401
from .sentiment import (  # noqa: F401
    Lexicon,
    NbModel,
    SentimentScore,
    label_from_polarity,
    lexicon_score,
    load_external_scores,
    load_lexicon,
    nb_predict,
    train_naive_bayes,
)
from .features import (  # noqa: F401
    PcaModel,
    ScalerParams,
    SentimentDayAggregate,
    StockDayFeatures,
    aggregate_daily_sentiment,
    align_and_merge,
    apply_pca,
    apply_scaler,
    fit_pca,
    fit_scaler,
    make_labels,
    stock_features,
    time_features,
)
from .balance import SmoteConfig, smote  # noqa: F401
from .models import (  # noqa: F401
    COSINE,
    EUCLIDEAN,
    LORENTZIAN,
    GbdtModel,
    GbdtParams,
    RfModel,
    distance,
    feature_importance,
    gbdt_predict,
    knn_predict,
    rf_predict,
    train_gbdt,
    train_random_forest,
)
from .evaluation import (  # noqa: F401
    ExperimentConfig,
    Metrics,
    compute_metrics,
    run_experiment,
    temporal_split,
)
