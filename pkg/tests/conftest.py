import json

import numpy as np
import pytest
from PIL import Image

from lesiontl.data.manifest import DatasetManifest, LesionSample


def write_noise_corpus(root, n_melanoma, n_benign, size=(24, 24), seed=0):
    """Random-noise PNGs (unique content hashes) under the documented layout."""
    rng = np.random.default_rng(seed)
    for label, count in (("melanoma", n_melanoma), ("benign", n_benign)):
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        for i in range(count):
            arr = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
            Image.fromarray(arr).save(d / f"{label}_{i:04d}.png")
    return root


def write_separable_corpus(root, n_per_class=32, size=48, seed=7):
    """Red (melanoma) vs blue (benign) images plus small noise: linearly
    separable on channel means."""
    rng = np.random.default_rng(seed)
    for label, channel in (("benign", 2), ("melanoma", 0)):
        d = root / label
        d.mkdir(parents=True, exist_ok=True)
        for i in range(n_per_class):
            img = np.full((size, size, 3), 16, dtype=np.int16)
            img[:, :, channel] = 200
            img += rng.integers(-12, 13, img.shape, dtype=np.int16)
            Image.fromarray(np.clip(img, 0, 255).astype(np.uint8)).save(d / f"{label}_{i:03d}.png")
    return root


def fake_manifest(n_melanoma, n_benign, seed=0, ratio=1.12):
    """Manifest of synthetic samples (no files on disk) for split/fold tests."""
    samples = []
    for label, count in (("benign", n_benign), ("melanoma", n_melanoma)):
        for i in range(count):
            sid = f"{label[:3]}{i:06d}"
            samples.append(LesionSample(sid, f"/nonexistent/{sid}.png", label, "other"))
    samples.sort(key=lambda s: s.id)
    return DatasetManifest(
        samples=tuple(samples),
        class_counts={"benign": n_benign, "melanoma": n_melanoma},
        seed=seed,
        balancing_ratio=ratio,
    )


@pytest.fixture(scope="session")
def noise_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return write_noise_corpus(root, n_melanoma=8, n_benign=12, seed=1)


@pytest.fixture(scope="session")
def separable_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("separable")
    return write_separable_corpus(root, n_per_class=10, size=48, seed=7)


def base_config(dataset_root, output_dir, **overrides):
    """A small, fast experiment config; overrides merge shallowly per section."""
    config = {
        "dataset_root": str(dataset_root),
        "output_dir": str(output_dir),
        "seed": 11,
        "suite": "single",
        "model": {
            "backbone_id": "alexnet_modified",
            "pretrained": False,
            "num_classes": 2,
            "dropout_rate": 0.25,
            "head_widths": [16],
            "freeze": {"freeze_first_n": 0, "freeze_backbone_rest": False},
        },
        "training": {
            "optimizer_kind": "adam",
            "learning_rate": 0.001,
            "max_epochs": 2,
            "batch_size": 8,
            "early_stopping": {
                "monitor": "val_accuracy",
                "patience": 5,
                "min_delta": 0.0,
                "restore_best": True,
            },
        },
        "split": {"test_fraction": 0.3, "stratified": True},
        "kfold": {"enabled": False, "k": 10, "on_train_only": True},
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(config.get(key), dict):
            config[key].update(value)
        else:
            config[key] = value
    return config


def write_config(path, config):
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return str(path)
