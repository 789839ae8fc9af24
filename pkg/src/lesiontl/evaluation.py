"""Confusion-matrix metrics and K-fold cross-validation.

Melanoma is the positive class throughout: sensitivity is melanoma recall,
specificity is benign recall. Metrics are computed in exact rational
arithmetic and rendered as floats.
"""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .data.datasets import ArrayDataset
from .data.manifest import LABEL_TO_INDEX, LABELS, POSITIVE_LABEL
from .errors import DivergenceError, SchemaError, UndefinedMetricError
from .models import build_model
from .training import predict_classes, train

log = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "sensitivity", "specificity")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self):
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


@dataclass(frozen=True)
class MetricSet:
    accuracy: float
    sensitivity: float
    specificity: float

    def to_dict(self):
        return {
            "accuracy": self.accuracy,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(d["accuracy"], d["sensitivity"], d["specificity"])


@dataclass(frozen=True)
class FoldResult:
    fold_index: int
    metrics: MetricSet
    confusion: ConfusionMatrix
    history_ref: str

    def to_dict(self):
        return {
            "fold_index": self.fold_index,
            "metrics": self.metrics.to_dict(),
            "confusion": self.confusion.to_dict(),
            "history_ref": self.history_ref,
        }


@dataclass
class EvaluationReport:
    per_fold: list
    mean_metrics: MetricSet
    std_metrics: dict
    test_metrics: MetricSet
    config_digest: str
    failed_folds: tuple = ()

    def to_dict(self):
        return {
            "per_fold": [f.to_dict() for f in self.per_fold],
            "mean_metrics": self.mean_metrics.to_dict() if self.mean_metrics else None,
            "std_metrics": dict(self.std_metrics) if self.std_metrics else None,
            "test_metrics": self.test_metrics.to_dict() if self.test_metrics else None,
            "config_digest": self.config_digest,
            "failed_folds": list(self.failed_folds),
        }


def _as_positive_flags(values):
    """Normalize labels/predictions to boolean melanoma flags."""
    flags = []
    for v in values:
        if isinstance(v, str):
            if v not in LABELS:
                raise ValueError(f"unknown class label {v!r}")
            flags.append(v == POSITIVE_LABEL)
        else:
            flags.append(int(v) == LABEL_TO_INDEX[POSITIVE_LABEL])
    return np.asarray(flags, dtype=bool)


def confusion_from_predictions(labels, predicted):
    """Count (label, prediction) pairs with melanoma positive.

    Accepts class names ("melanoma"/"benign") or class indices.
    """
    labels = list(labels)
    predicted = list(predicted)
    if len(labels) != len(predicted):
        raise ValueError(f"length mismatch: {len(labels)} labels vs {len(predicted)} predictions")
    if not labels:
        raise ValueError("cannot build a confusion matrix from zero samples")
    truth = _as_positive_flags(labels)
    pred = _as_positive_flags(predicted)
    return ConfusionMatrix(
        tp=int(np.sum(truth & pred)),
        fp=int(np.sum(~truth & pred)),
        tn=int(np.sum(~truth & ~pred)),
        fn=int(np.sum(truth & ~pred)),
    )


def metrics_from_confusion(cm):
    """Accuracy, sensitivity, specificity as exact ratios rendered to float."""
    if cm.tp + cm.fn == 0:
        raise UndefinedMetricError("sensitivity")
    if cm.tn + cm.fp == 0:
        raise UndefinedMetricError("specificity")
    return MetricSet(
        accuracy=float(Fraction(cm.tp + cm.tn, cm.total)),
        sensitivity=float(Fraction(cm.tp, cm.tp + cm.fn)),
        specificity=float(Fraction(cm.tn, cm.tn + cm.fp)),
    )


def aggregate_fold_metrics(fold_results):
    """Mean and population standard deviation per metric."""
    means = {}
    stds = {}
    for name in METRIC_NAMES:
        values = [getattr(f.metrics, name) for f in fold_results]
        mean = sum(values) / len(values)
        var = sum((v - mean) ** 2 for v in values) / len(values)
        means[name] = mean
        stds[name] = var**0.5
    return MetricSet(**means), stds


def kfold_cross_validate(
    sample_bank,
    fold_plan,
    model_spec,
    training_config,
    *,
    val_fraction=0.15,
    out_dir=None,
    config_digest="",
    build_fn=None,
    train_fn=None,
):
    """Train one fresh model per fold and aggregate held-out-fold metrics.

    `sample_bank` maps positions to samples: it must expose `ids`, `labels`
    (class indices aligned with ids), and `load(indices)`. Each fold f
    trains on everything outside f (with a stratified validation carve for
    early stopping), seeded as base_seed + f, and evaluates on fold f.
    Diverged folds are excluded from aggregation with a warning.
    """
    from .data.splits import split_labeled_ids
    from .training import write_history_csv

    build_fn = build_fn or (lambda spec, seed: build_model(spec, seed=seed)[0])
    train_fn = train_fn or train

    ids = list(sample_bank.ids)
    pos = {sample_id: i for i, sample_id in enumerate(ids)}
    labels = np.asarray(sample_bank.labels)
    index_labels = {sample_id: LABELS[labels[pos[sample_id]]] for sample_id in ids}

    fold_results = []
    failed = []
    for fold in range(fold_plan.k):
        eval_ids = fold_plan.fold_ids(fold)
        rest_ids = sorted(set(ids) - set(eval_ids))
        fold_seed = training_config.seed + fold
        fold_config = replace(training_config, seed=fold_seed)
        train_ids, val_ids = split_labeled_ids(
            rest_ids, index_labels, val_fraction, True, fold_seed
        )
        train_data = _take(sample_bank, sorted(train_ids), pos)
        val_data = _take(sample_bank, sorted(val_ids), pos)
        eval_data = _take(sample_bank, eval_ids, pos)
        model = build_fn(model_spec, fold_seed)
        history_ref = ""
        try:
            trained = train_fn(model, train_data, val_data, fold_config)
        except DivergenceError as exc:
            log.warning("fold %d diverged: %s", fold, exc)
            failed.append(fold)
            continue
        if out_dir is not None:
            fold_dir = out_dir / f"fold_{fold}"
            fold_dir.mkdir(parents=True, exist_ok=True)
            write_history_csv(trained.history, fold_dir / "history.csv")
            history_ref = f"fold_{fold}/history.csv"
        preds = predict_classes(trained.model, eval_data, training_config.batch_size)
        cm = confusion_from_predictions(eval_data.labels, preds)
        fold_results.append(
            FoldResult(fold, metrics_from_confusion(cm), cm, history_ref)
        )
    if failed:
        log.warning("%d of %d folds failed and were excluded", len(failed), fold_plan.k)
    mean_metrics, std_metrics = (
        aggregate_fold_metrics(fold_results) if fold_results else (None, None)
    )
    return EvaluationReport(
        per_fold=fold_results,
        mean_metrics=mean_metrics,
        std_metrics=std_metrics,
        test_metrics=None,
        config_digest=config_digest,
        failed_folds=tuple(failed),
    )


def _take(bank, ids, pos):
    idx = np.asarray([pos[i] for i in ids], dtype=np.int64)
    if len(idx) == 0:
        return ArrayDataset(np.empty((0,)), np.empty((0,), dtype=np.int64), ids=[])
    x, y = bank.load(idx)
    return ArrayDataset(x, y, ids=list(ids))


# ---- cross-architecture comparison table --------------------------------------

COMPARISON_COLUMNS = (
    "architecture",
    "train_accuracy",
    "val_accuracy",
    "test_accuracy",
    "kfold_accuracy",
    "test_sensitivity",
    "test_specificity",
)


def _pct(value):
    return "" if value is None else f"{100.0 * value:.2f}"


def aggregate_reports(reports):
    """One comparison row per architecture from run-report dicts.

    Percentages are rendered to two decimals; missing k-fold results leave
    the column blank.
    """
    if not reports:
        raise SchemaError("no reports to aggregate")
    rows = []
    for report in reports:
        if not isinstance(report, dict) or report.get("schema_version") != 1:
            raise SchemaError(f"unsupported report schema: {report.get('schema_version')!r}")
        missing = [k for k in ("architecture", "test_metrics", "train_accuracy", "val_accuracy") if k not in report]
        if missing:
            raise SchemaError(f"report is missing fields: {', '.join(missing)}")
        test = report["test_metrics"]
        kfold = report.get("kfold") or {}
        mean = kfold.get("mean_metrics") or {}
        rows.append(
            {
                "architecture": report["architecture"],
                "train_accuracy": _pct(report["train_accuracy"]),
                "val_accuracy": _pct(report["val_accuracy"]),
                "test_accuracy": _pct(test["accuracy"]),
                "kfold_accuracy": _pct(mean.get("accuracy")),
                "test_sensitivity": _pct(test["sensitivity"]),
                "test_specificity": _pct(test["specificity"]),
            }
        )
    return rows


def write_comparison_csv(rows, path):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=COMPARISON_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def render_comparison_text(rows):
    """Aligned plain-text rendering of the comparison table."""
    headers = COMPARISON_COLUMNS
    table = [headers] + [[row[c] for c in headers] for row in rows]
    widths = [max(len(r[i]) for r in table) for i in range(len(headers))]
    lines = []
    for r, row in enumerate(table):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if r == 0:
            lines.append("  ".join("-" * widths[i] for i in range(len(headers))))
    return "\n".join(lines) + "\n"
