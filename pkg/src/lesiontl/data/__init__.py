"""Dataset pipeline: ingestion, splits, folds, and preprocessing."""

from .datasets import ArrayDataset, ImageDataset, subset_dataset
from .manifest import (
    DEFAULT_BALANCING_RATIO,
    LABEL_TO_INDEX,
    LABELS,
    POSITIVE_LABEL,
    DatasetManifest,
    LesionSample,
    Reject,
    build_manifest,
    read_manifest_samples,
    write_manifest_csv,
    write_rejects_csv,
)
from .preprocess import (
    GENERIC_CHANNEL_MEANS,
    GENERIC_CHANNEL_STDS,
    PreprocessSpec,
    default_preprocess_spec,
    load_rgb,
    preprocess_image,
    resize_bilinear,
)
from .splits import FoldPlan, SplitPlan, make_folds, split_labeled_ids, split_train_test

__all__ = [
    "ArrayDataset",
    "ImageDataset",
    "subset_dataset",
    "DEFAULT_BALANCING_RATIO",
    "LABELS",
    "LABEL_TO_INDEX",
    "POSITIVE_LABEL",
    "DatasetManifest",
    "LesionSample",
    "Reject",
    "build_manifest",
    "read_manifest_samples",
    "write_manifest_csv",
    "write_rejects_csv",
    "GENERIC_CHANNEL_MEANS",
    "GENERIC_CHANNEL_STDS",
    "PreprocessSpec",
    "default_preprocess_spec",
    "load_rgb",
    "preprocess_image",
    "resize_bilinear",
    "FoldPlan",
    "SplitPlan",
    "make_folds",
    "split_labeled_ids",
    "split_train_test",
]
