"""Model factory: pretrained convolutional backbones joined to a
fully-connected classifier head with dropout and a softmax output.

One backbone is built per run (vgg16, vgg19, or the five-conv
alexnet_modified stack); the head replaces the backbone's native
classifier. Freezing applies to the earliest weight-bearing backbone
layers.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import FreezePolicyError, SpecError, WeightLoadError
from .nn import Conv2D, Dense, Dropout, Flatten, MaxPool2D, Network, ReLU

INPUT_SIZE = 224
# also the row order of the architecture-comparison table
BACKBONE_IDS = ("alexnet_modified", "vgg16", "vgg19")

SUMMARY_KINDS = ("conv", "maxpool", "flatten", "dense")

_VGG_BLOCKS = {
    "vgg16": (2, 2, 3, 3, 3),
    "vgg19": (2, 2, 4, 4, 4),
}
_VGG_WIDTHS = (64, 128, 256, 512, 512)

# (name, c_out, kernel, stride, pad) for the conv entries; pools interleaved
_ALEXNET_CONVS = (
    ("conv1", 64, 11, 4, 2),
    ("conv2", 192, 5, 1, 2),
    ("conv3", 384, 3, 1, 1),
    ("conv4", 256, 3, 1, 1),
    ("conv5", 256, 3, 1, 1),
)


@dataclass(frozen=True)
class FreezePolicy:
    freeze_first_n: int = 3
    freeze_backbone_rest: bool = False

    def to_dict(self):
        return {
            "freeze_first_n": self.freeze_first_n,
            "freeze_backbone_rest": self.freeze_backbone_rest,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class ModelSpec:
    backbone_id: str
    pretrained: bool = False
    num_classes: int = 2
    dropout_rate: float = 0.5
    head_widths: tuple = (4096, 4096)
    freeze: FreezePolicy = field(default_factory=FreezePolicy)

    def __post_init__(self):
        object.__setattr__(self, "head_widths", tuple(self.head_widths))

    def to_dict(self):
        return {
            "backbone_id": self.backbone_id,
            "pretrained": self.pretrained,
            "num_classes": self.num_classes,
            "dropout_rate": self.dropout_rate,
            "head_widths": list(self.head_widths),
            "freeze": self.freeze.to_dict(),
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["freeze"] = FreezePolicy.from_dict(d.get("freeze", {}))
        d["head_widths"] = tuple(d.get("head_widths", (4096, 4096)))
        return cls(**d)


@dataclass(frozen=True)
class LayerInfo:
    name: str
    kind: str
    output_shape: tuple
    params: int
    trainable: bool


@dataclass(frozen=True)
class ModelSummary:
    layers: tuple
    total_params: int
    trainable_params: int


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def validate_model_spec(spec):
    problems = []
    if spec.backbone_id not in BACKBONE_IDS:
        problems.append(f"backbone_id must be one of {BACKBONE_IDS}, got {spec.backbone_id!r}")
    if not _is_int(spec.num_classes) or spec.num_classes < 2:
        problems.append(f"num_classes must be an integer >= 2, got {spec.num_classes!r}")
    if not isinstance(spec.dropout_rate, (int, float)) or isinstance(spec.dropout_rate, bool) or not 0.0 <= spec.dropout_rate < 1.0:
        problems.append(f"dropout_rate must be in [0, 1), got {spec.dropout_rate!r}")
    if len(spec.head_widths) == 0:
        problems.append("head_widths must not be empty")
    elif not all(_is_int(w) and w >= 1 for w in spec.head_widths):
        problems.append(f"head_widths must be positive integers, got {spec.head_widths}")
    if not _is_int(spec.freeze.freeze_first_n) or spec.freeze.freeze_first_n < 0:
        problems.append(f"freeze_first_n must be an integer >= 0, got {spec.freeze.freeze_first_n!r}")
    return problems


def _backbone_layers(backbone_id, rng, dtype):
    layers = []
    if backbone_id in _VGG_BLOCKS:
        c_in = 3
        for block, n_convs in enumerate(_VGG_BLOCKS[backbone_id], start=1):
            width = _VGG_WIDTHS[block - 1]
            for i in range(1, n_convs + 1):
                layers.append(
                    Conv2D(f"conv{block}_{i}", c_in, width, 3, stride=1, pad=1, rng=rng, dtype=dtype)
                )
                layers.append(ReLU(f"relu{block}_{i}"))
                c_in = width
            layers.append(MaxPool2D(f"pool{block}", 2, 2))
    else:
        c_in = 3
        pool_after = {"conv1": "pool1", "conv2": "pool2", "conv5": "pool3"}
        for name, c_out, kernel, stride, pad in _ALEXNET_CONVS:
            layers.append(Conv2D(name, c_in, c_out, kernel, stride=stride, pad=pad, rng=rng, dtype=dtype))
            layers.append(ReLU(f"relu_{name}"))
            if name in pool_after:
                layers.append(MaxPool2D(pool_after[name], 3, 2))
            c_in = c_out
    return layers


def _head_layers(spec, feature_dim, rng, dtype):
    layers = [Flatten("flatten")]
    n_in = feature_dim
    for i, width in enumerate(spec.head_widths, start=1):
        layers.append(Dense(f"fc{i}", n_in, width, rng=rng, dtype=dtype, init="he"))
        layers.append(ReLU(f"relu_fc{i}"))
        if spec.dropout_rate > 0:
            layers.append(Dropout(f"dropout{i}", spec.dropout_rate))
        n_in = width
    # near-zero init keeps the untrained cross-entropy at ln(num_classes)
    layers.append(Dense("output", n_in, spec.num_classes, rng=rng, dtype=dtype, init="small"))
    return layers


def summarize(model):
    """Summary over the shape-defining layers (conv/pool/flatten/dense).

    Activations and dropout are parameter-free and shape-preserving; they
    are recorded in the ModelSpec rather than listed per row.
    """
    rows = []
    for layer, shape in model.shapes():
        if layer.kind in SUMMARY_KINDS:
            rows.append(
                LayerInfo(layer.name, layer.kind, tuple(shape), layer.param_count, layer.trainable)
            )
    total = sum(l.param_count for l in model.layers)
    trainable = sum(l.param_count for l in model.layers if l.trainable)
    return ModelSummary(layers=tuple(rows), total_params=total, trainable_params=trainable)


def build_model(spec, seed=0, dtype=np.float32):
    """Assemble the network for `spec`; returns (model, summary).

    Weight init is a pure function of `seed`. With spec.pretrained, the
    backbone weights are loaded from the local weight cache (see
    `weight_cache_dir`); the head is always freshly initialized.
    """
    problems = validate_model_spec(spec)
    if problems:
        raise SpecError("; ".join(problems))
    rng = np.random.default_rng(seed)
    backbone = _backbone_layers(spec.backbone_id, rng, dtype)
    feat_shape = (INPUT_SIZE, INPUT_SIZE, 3)
    for layer in backbone:
        feat_shape = layer.out_shape(feat_shape)
    feature_dim = int(np.prod(feat_shape))
    layers = backbone + _head_layers(spec, feature_dim, rng, dtype)
    model = Network(layers, (INPUT_SIZE, INPUT_SIZE, 3), dtype=dtype)
    model.backbone_param_layers = tuple(l.name for l in backbone if l.params)
    model.pretrained_provenance = None
    if spec.pretrained:
        model.pretrained_provenance = load_pretrained_backbone(model, spec.backbone_id)
    apply_freeze_policy(model, spec.freeze)
    return model, summarize(model)


def apply_freeze_policy(model, policy):
    """Mark the first `freeze_first_n` weight-bearing backbone layers (and
    optionally the whole backbone) non-trainable; returns a fresh summary."""
    backbone_names = tuple(model.backbone_param_layers)
    if not 0 <= policy.freeze_first_n <= len(backbone_names):
        raise FreezePolicyError(
            f"freeze_first_n={policy.freeze_first_n} exceeds the backbone's "
            f"{len(backbone_names)} weight-bearing layers"
        )
    frozen = set(backbone_names if policy.freeze_backbone_rest else backbone_names[: policy.freeze_first_n])
    for layer in model.layers:
        if layer.params:
            layer.trainable = layer.name not in frozen
    return summarize(model)


def list_removable_head_layers(spec):
    """Names of the head layers an ablation may drop (output excluded)."""
    problems = validate_model_spec(spec)
    if problems:
        raise SpecError("; ".join(problems))
    return [f"fc{i}" for i in range(1, len(spec.head_widths) + 1)]


def ablated_spec(spec, layer_name):
    """Spec with one removable head layer dropped."""
    removable = list_removable_head_layers(spec)
    if layer_name not in removable:
        raise SpecError(f"{layer_name!r} is not a removable head layer (have {removable})")
    idx = removable.index(layer_name)
    widths = spec.head_widths[:idx] + spec.head_widths[idx + 1 :]
    return replace(spec, head_widths=widths)


# ---- weight cache and serialization -----------------------------------------


def weight_cache_dir():
    return Path(os.environ.get("LESIONTL_CACHE", Path.home() / ".cache" / "lesiontl"))


def load_pretrained_backbone(model, backbone_id):
    """Load backbone weights from `<cache>/<backbone_id>.npz`.

    Arrays are keyed `<layer>.<param>` in our NHWC layout; see
    scripts/export_pretrained_weights.py for populating the cache.
    """
    path = weight_cache_dir() / f"{backbone_id}.npz"
    if not path.is_file():
        raise WeightLoadError(
            f"pretrained weights for {backbone_id!r} not found at {path}; "
            "populate the cache or build with pretrained=False"
        )
    with np.load(path) as archive:
        for name in model.backbone_param_layers:
            layer = model.get_layer(name)
            for pname, current in layer.params.items():
                key = f"{name}.{pname}"
                if key not in archive:
                    raise WeightLoadError(f"{path} is missing array {key!r}")
                arr = archive[key]
                if arr.shape != current.shape:
                    raise WeightLoadError(
                        f"{path} array {key!r} has shape {arr.shape}, expected {current.shape}"
                    )
                layer.params[pname] = arr.astype(current.dtype)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return {"path": str(path), "sha256": digest}


def weights_digest(model):
    """Content hash of all parameters (independent of file container)."""
    digest = hashlib.sha256()
    for key, layer, pname in model.parameters():
        arr = layer.params[pname]
        digest.update(key.encode())
        digest.update(str(arr.dtype).encode())
        digest.update(str(arr.shape).encode())
        digest.update(np.ascontiguousarray(arr).tobytes())
    return digest.hexdigest()


def save_weights(model, path):
    arrays = {key: layer.params[pname] for key, layer, pname in model.parameters()}
    np.savez(path, **arrays)


def load_weights(model, path):
    with np.load(path) as archive:
        snap = {key: archive[key] for key in archive.files}
    model.load_snapshot(snap)


def export_model(model, spec, directory):
    """Write `weights.npz` + `model_spec.json`; returns paths and digest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    weights_path = directory / "weights.npz"
    save_weights(model, weights_path)
    spec_path = directory / "model_spec.json"
    payload = {"schema_version": 1, "model_spec": spec.to_dict()}
    spec_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return {
        "weights_path": str(weights_path),
        "spec_path": str(spec_path),
        "weights_digest": weights_digest(model),
    }


def load_model(directory, dtype=np.float32):
    """Rebuild an exported model; returns (model, spec)."""
    directory = Path(directory)
    payload = json.loads((directory / "model_spec.json").read_text(encoding="utf-8"))
    spec = ModelSpec.from_dict(payload["model_spec"])
    model, _ = build_model(replace(spec, pretrained=False), seed=0, dtype=dtype)
    load_weights(model, directory / "weights.npz")
    apply_freeze_policy(model, spec.freeze)
    return model, spec


def write_summary_csv(summary, path):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "kind", "output_shape", "params", "trainable"])
        for row in summary.layers:
            shape = "x".join(str(d) for d in row.output_shape)
            writer.writerow([row.name, row.kind, shape, row.params, str(row.trainable).lower()])
