"""Dataset ingestion: scan the two-class layout, balance, and serialize.

Layout contract: `<root>/melanoma/*.{jpg,png}` and `<root>/benign/*.{jpg,png}`.
Sample ids are content hashes, so re-scanning the same corpus always yields
the same manifest; duplicated image content (within or across source
datasets) is rejected with a warning.
"""

import csv
import hashlib
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import DatasetLayoutError, EmptyClassError

log = logging.getLogger(__name__)

# class index order: benign = 0 (negative), melanoma = 1 (positive)
LABELS = ("benign", "melanoma")
LABEL_TO_INDEX = {name: i for i, name in enumerate(LABELS)}
POSITIVE_LABEL = "melanoma"

SOURCES = ("isic", "mednode", "other")
IMAGE_EXTENSIONS = (".jpg", ".jpeg", ".png")

# reproduces the reference corpus counts (1341 benign vs 1200 melanoma kept)
DEFAULT_BALANCING_RATIO = 1.12


@dataclass(frozen=True)
class LesionSample:
    id: str
    image_path: str
    label: str
    source: str


@dataclass(frozen=True)
class Reject:
    path: str
    reason: str


@dataclass(frozen=True)
class DatasetManifest:
    samples: tuple
    class_counts: dict
    seed: int
    balancing_ratio: float

    def __post_init__(self):
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique within a manifest")
        recount = {label: 0 for label in LABELS}
        for s in self.samples:
            recount[s.label] += 1
        if recount != dict(self.class_counts):
            raise ValueError(f"class_counts {self.class_counts} do not match samples {recount}")

    def __len__(self):
        return len(self.samples)

    @property
    def ids(self):
        return [s.id for s in self.samples]

    def labels_by_id(self):
        return {s.id: s.label for s in self.samples}

    def samples_by_id(self):
        return {s.id: s for s in self.samples}


def _exact_ratio(ratio):
    """Interpret a float ratio by its decimal rendering (1.12 -> 28/25)."""
    if isinstance(ratio, Fraction):
        return ratio
    if isinstance(ratio, int):
        return Fraction(ratio)
    return Fraction(str(ratio))


def infer_source(filename):
    stem = Path(filename).name.lower()
    if stem.startswith("isic"):
        return "isic"
    if stem.startswith(("mednode", "med-node", "med_node")):
        return "mednode"
    return "other"


def _content_id(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()[:16]


def _decodable(path):
    try:
        with Image.open(path) as img:
            img.load()
        return None
    except Exception as exc:  # PIL raises a mixed bag of types here
        return f"undecodable: {exc}"


def build_manifest(root, seed=0, balancing_ratio=DEFAULT_BALANCING_RATIO):
    """Scan `root`, validate images, balance classes; returns (manifest, rejects).

    The majority class is downsampled uniformly at random (seeded) until
    its count is at most ceil(balancing_ratio * minority count). The kept
    subset depends only on the seed and the scanned id set.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetLayoutError(f"dataset root {root} is not a directory")
    missing = [label for label in LABELS if not (root / _class_dir(label)).is_dir()]
    if missing:
        raise DatasetLayoutError(
            f"dataset root {root} is missing class directories: {', '.join(sorted(_class_dir(l) for l in missing))}"
        )
    ratio = _exact_ratio(balancing_ratio)
    if ratio < 1:
        raise ValueError(f"balancing_ratio must be >= 1, got {balancing_ratio}")

    rejects = []
    by_label = {label: [] for label in LABELS}
    seen = {}
    for label in LABELS:  # scan order: benign, melanoma; first occurrence wins
        class_dir = root / _class_dir(label)
        for path in sorted(class_dir.iterdir()):
            if not path.is_file() or path.suffix.lower() not in IMAGE_EXTENSIONS:
                continue
            problem = _decodable(path)
            if problem:
                rejects.append(Reject(str(path), problem))
                continue
            sample_id = _content_id(path)
            if sample_id in seen:
                log.warning("duplicate image content: %s duplicates %s", path, seen[sample_id])
                rejects.append(Reject(str(path), f"duplicate of {seen[sample_id]}"))
                continue
            seen[sample_id] = str(path)
            by_label[label].append(
                LesionSample(sample_id, str(path), label, infer_source(path.name))
            )

    empty = [label for label in LABELS if not by_label[label]]
    if empty:
        raise EmptyClassError(f"no usable images for class(es): {', '.join(empty)}")

    counts = {label: len(by_label[label]) for label in LABELS}
    majority = max(LABELS, key=lambda l: counts[l])
    minority = min(LABELS, key=lambda l: counts[l])
    allowed = math.ceil(ratio * counts[minority])
    if counts[majority] > allowed:
        pool = sorted(by_label[majority], key=lambda s: s.id)
        rng = np.random.default_rng(seed)
        keep = rng.choice(len(pool), size=allowed, replace=False)
        by_label[majority] = [pool[i] for i in sorted(keep)]

    samples = tuple(sorted((s for group in by_label.values() for s in group), key=lambda s: s.id))
    counts = {label: sum(1 for s in samples if s.label == label) for label in LABELS}
    manifest = DatasetManifest(
        samples=samples, class_counts=counts, seed=seed, balancing_ratio=float(ratio)
    )
    return manifest, rejects


def _class_dir(label):
    return label


def write_manifest_csv(manifest, path):
    """UTF-8, LF line endings, rows sorted by id."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "image_path", "label", "source"])
        for s in sorted(manifest.samples, key=lambda s: s.id):
            writer.writerow([s.id, s.image_path, s.label, s.source])


def read_manifest_samples(path):
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            LesionSample(row["id"], row["image_path"], row["label"], row["source"])
            for row in reader
        ]


def write_rejects_csv(rejects, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["path", "reason"])
        for r in rejects:
            writer.writerow([r.path, r.reason])
