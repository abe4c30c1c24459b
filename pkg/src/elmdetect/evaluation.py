"""Confusion matrices, classification metrics, ROC/AUC, and the
cross-validation driver that produces the model-comparison report.

The positive class is fake news (label 1); a score >= threshold predicts
fake.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .corpus import DocumentSet, FoldPlan
from .errors import (
    EmptyEvaluationError,
    LengthMismatchError,
    SingleClassLabelsError,
)
from .features import FeatureExtractor
from .significance import (
    PairedSample,
    paired_t_test,
    wilcoxon_signed_rank,
)
from .errors import ElmDetectError
from .training import TrainConfig, predict_scores, train

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "roc_auc")

# Published reference metrics on the COVID19-FNIR benchmark, used for
# side-by-side display in the run report (fractions, not percent).
FNIR_REFERENCE_RESULTS = {
    "base": {"accuracy": 0.9490, "precision": 0.9367, "recall": 0.9633, "f1": 0.9497, "roc_auc": 0.9843},
    "features_only": {"accuracy": 0.9005, "precision": 0.9081, "recall": 0.8913, "f1": 0.8996, "roc_auc": 0.9662},
    "enhanced": {"accuracy": 0.9737, "precision": 0.9688, "recall": 0.9850, "f1": 0.9741, "roc_auc": 0.9950},
    "combined": {"accuracy": 0.9937, "precision": 0.9888, "recall": 0.9980, "f1": 0.9941, "roc_auc": 0.9980},
}


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_auc: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


@dataclass(frozen=True)
class RocCurve:
    """(fpr, tpr) points sorted by fpr, from (0,0) to (1,1); thresholds[i] is
    the score cut that produces points[i] under the >= rule."""

    points: tuple[tuple[float, float], ...]
    thresholds: tuple[float, ...]


def confusion(scores: Sequence[float], labels: Sequence[int], threshold: float = 0.5) -> ConfusionMatrix:
    """Count tp/tn/fp/fn with fake (1) as the positive class."""
    if len(scores) != len(labels):
        raise LengthMismatchError(f"{len(scores)} scores vs {len(labels)} labels")
    if len(scores) == 0:
        raise EmptyEvaluationError("cannot build a confusion matrix from zero documents")
    tp = tn = fp = fn = 0
    for s, y in zip(scores, labels):
        predicted = 1 if s >= threshold else 0
        if predicted == 1 and y == 1:
            tp += 1
        elif predicted == 0 and y == 0:
            tn += 1
        elif predicted == 1 and y == 0:
            fp += 1
        else:
            fn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def metrics(cm: ConfusionMatrix, auc_value: float) -> MetricSet:
    """Accuracy, precision, recall, F1 from counts; degenerate cases are 0."""
    if cm.total == 0:
        raise EmptyEvaluationError("empty confusion matrix")
    precision = cm.tp / (cm.tp + cm.fp) if (cm.tp + cm.fp) > 0 else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if (cm.tp + cm.fn) > 0 else 0.0
    f1 = 2.0 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return MetricSet(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        recall=recall,
        f1=f1,
        roc_auc=auc_value,
    )


def roc_curve(scores: Sequence[float], labels: Sequence[int]) -> RocCurve:
    """Threshold sweep over the distinct scores, descending; tied scores
    share one point."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = int((labels == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabelsError("ROC needs both classes present")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    points = [(0.0, 0.0)]
    thresholds = [np.inf]
    tp = fp = 0
    i = 0
    n = len(scores)
    while i < n:
        cut = sorted_scores[i]
        while i < n and sorted_scores[i] == cut:
            if sorted_labels[i] == 1:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((fp / n_neg, tp / n_pos))
        thresholds.append(float(cut))
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))
        thresholds.append(-np.inf)
    return RocCurve(points=tuple(points), thresholds=tuple(thresholds))


def auc(curve: RocCurve) -> float:
    """Trapezoidal area under the curve; equals the normalized rank statistic
    with ties counted one half."""
    pts = np.asarray(curve.points)
    return float(np.trapezoid(pts[:, 1], pts[:, 0]))


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    return auc(roc_curve(scores, labels))


@dataclass
class FoldResult:
    """Everything recorded for one (fold, variant) evaluation."""

    fold_index: int
    variant: str
    doc_ids: tuple[str, ...]
    scores: tuple[float, ...]
    labels: tuple[int, ...]
    confusion: ConfusionMatrix
    metric_set: MetricSet


def evaluate_fold(
    fold_index: int,
    variant: str,
    doc_ids: Sequence[str],
    scores: Sequence[float],
    labels: Sequence[int],
) -> FoldResult:
    cm = confusion(scores, labels)
    return FoldResult(
        fold_index=fold_index,
        variant=variant,
        doc_ids=tuple(doc_ids),
        scores=tuple(float(s) for s in scores),
        labels=tuple(int(y) for y in labels),
        confusion=cm,
        metric_set=metrics(cm, roc_auc(scores, labels)),
    )


@dataclass
class ComparisonReport:
    """Per-variant aggregate metrics, deltas against the base model, and the
    paired significance tests over per-fold accuracies."""

    k: int
    variants: tuple[str, ...]
    fold_results: list[FoldResult]
    mean_metrics: dict[str, MetricSet]
    deltas: dict[str, dict[str, float]]
    fold_accuracies: dict[str, list[float]]
    significance: dict[str, dict]


def build_report(fold_results: Sequence[FoldResult], k: int) -> ComparisonReport:
    """Aggregate fold results into a report; pure, so a report can be rebuilt
    from persisted results without retraining."""
    variants = tuple(dict.fromkeys(r.variant for r in fold_results))
    mean_metrics: dict[str, MetricSet] = {}
    fold_accuracies: dict[str, list[float]] = {}
    for variant in variants:
        rows = sorted(
            (r for r in fold_results if r.variant == variant), key=lambda r: r.fold_index
        )
        means = {
            name: float(np.mean([getattr(r.metric_set, name) for r in rows]))
            for name in METRIC_NAMES
        }
        mean_metrics[variant] = MetricSet(**means)
        fold_accuracies[variant] = [r.metric_set.accuracy for r in rows]
    deltas: dict[str, dict[str, float]] = {}
    significance: dict[str, dict] = {}
    if "base" in variants:
        base_metrics = mean_metrics["base"]
        for variant in variants:
            if variant == "base":
                continue
            deltas[variant] = {
                name: getattr(mean_metrics[variant], name) - getattr(base_metrics, name)
                for name in METRIC_NAMES
            }
            significance[variant] = _significance(
                fold_accuracies["base"], fold_accuracies[variant]
            )
    return ComparisonReport(
        k=k,
        variants=variants,
        fold_results=list(fold_results),
        mean_metrics=mean_metrics,
        deltas=deltas,
        fold_accuracies=fold_accuracies,
        significance=significance,
    )


def _significance(base_acc: list[float], variant_acc: list[float]) -> dict:
    sample = PairedSample(base=tuple(base_acc), enhanced=tuple(variant_acc))
    out: dict = {}
    try:
        w = wilcoxon_signed_rank(sample)
        out.update(
            w_plus=w.w_plus,
            w_minus=w.w_minus,
            w=w.w_statistic,
            n_eff=w.n_effective,
            p_exact_two_sided=w.p_value,
            p_one_sided=w.p_one_sided,
        )
    except ElmDetectError as exc:
        out["wilcoxon_error"] = str(exc)
    try:
        t = paired_t_test(sample, direction="enhanced_greater")
        out.update(t=t.t_statistic, df=t.degrees_of_freedom, p_t_one_sided=t.p_one_sided)
    except ElmDetectError as exc:
        out["t_test_error"] = str(exc)
    return out


def cross_validate(
    corpus: DocumentSet,
    fold_plan: FoldPlan,
    configs: Sequence[TrainConfig],
    extractor: FeatureExtractor | None = None,
    jobs: int = 1,
) -> ComparisonReport:
    """Train and evaluate every (fold, variant) pair.

    Each task gets its own model and an RNG seeded from (global seed, fold,
    variant), so results do not depend on scheduling; a failed fold aborts
    the run with its fold index.
    """
    if len(fold_plan.assignments) != len(corpus):
        raise ValueError("fold plan does not cover the corpus")
    if not configs:
        raise ValueError("at least one variant config is required")
    extractor = extractor or FeatureExtractor()
    docs = list(corpus)

    tasks = []
    for fold in range(fold_plan.k):
        train_docs = [docs[i] for i in fold_plan.train_indices(fold)]
        test_docs = [docs[i] for i in fold_plan.test_indices(fold)]
        for vi, config in enumerate(configs):
            seed = int(
                np.random.SeedSequence([config.seed, fold, vi]).generate_state(1)[0]
            )
            tasks.append((fold, replace(config, seed=seed), train_docs, test_docs))

    def run_task(task):
        fold, config, train_docs, test_docs = task
        try:
            model = train(train_docs, config, extractor=extractor)
            scores = predict_scores(model, test_docs)
        except Exception as exc:
            raise RuntimeError(f"fold {fold} variant {config.variant} failed: {exc}") from exc
        _audit_no_leakage(model.fit_doc_ids, train_docs, test_docs)
        return evaluate_fold(
            fold,
            config.variant,
            [d.id for d in test_docs],
            scores.tolist(),
            [d.label for d in test_docs],
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            fold_results = list(pool.map(run_task, tasks))
    else:
        fold_results = [run_task(t) for t in tasks]
    return build_report(fold_results, fold_plan.k)


def _audit_no_leakage(fit_ids, train_docs, test_docs) -> None:
    fit = set(fit_ids)
    if not fit.issubset({d.id for d in train_docs}):
        raise RuntimeError("model was fitted on documents outside the training fold")
    if fit & {d.id for d in test_docs}:
        raise RuntimeError("model fitting leaked test-fold documents")
