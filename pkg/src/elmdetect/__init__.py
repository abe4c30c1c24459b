"""elmdetect: health misinformation detection with dual-route text features
and a from-scratch CNN-LSTM classifier, plus the comparison harness around it."""

from .corpus import (
    Document,
    DocumentSet,
    FoldPlan,
    clean_text,
    load_dataset,
    stratified_folds,
)
from .features import (
    FEATURE_NAMES,
    CentralVector,
    ElmVector,
    FeatureExtractor,
    FeatureScaler,
    PeripheralVector,
    central_features,
    elm_vector,
    fit_scaler,
    peripheral_features,
    transform,
)
from .evaluation import (
    ComparisonReport,
    ConfusionMatrix,
    MetricSet,
    RocCurve,
    auc,
    confusion,
    cross_validate,
    metrics,
    roc_curve,
)
from .significance import (
    PairedSample,
    TTestResult,
    WilcoxonResult,
    paired_t_test,
    wilcoxon_signed_rank,
)
from .textstats import (
    Lexicon,
    TokenList,
    count_syllables,
    load_lexicon,
    split_sentences,
    tokenize,
)
from .training import (
    TrainConfig,
    TrainedModel,
    adam_step,
    bce_loss,
    load_model,
    predict,
    save_model,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "Document", "DocumentSet", "FoldPlan", "clean_text", "load_dataset", "stratified_folds",
    "FEATURE_NAMES", "CentralVector", "PeripheralVector", "ElmVector", "FeatureExtractor",
    "FeatureScaler", "central_features", "peripheral_features", "elm_vector", "fit_scaler",
    "transform",
    "ConfusionMatrix", "MetricSet", "RocCurve", "ComparisonReport", "confusion", "metrics",
    "roc_curve", "auc", "cross_validate",
    "PairedSample", "WilcoxonResult", "TTestResult", "wilcoxon_signed_rank", "paired_t_test",
    "Lexicon", "TokenList", "tokenize", "split_sentences", "count_syllables", "load_lexicon",
    "TrainConfig", "TrainedModel", "train", "predict", "bce_loss", "adam_step",
    "save_model", "load_model",
]
