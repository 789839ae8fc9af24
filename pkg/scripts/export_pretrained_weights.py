#!/usr/bin/env python3
"""Populate the pretrained-weight cache from torchvision checkpoints.

Requires torch + torchvision and network access to download the generic
ImageNet checkpoints (neither is a package dependency; this is a one-time
provisioning step for machines that will run pretrained experiments).

Writes `<cache>/<backbone_id>.npz` with arrays keyed `<layer>.<param>` in
the NHWC layout the model factory expects. The cache directory is taken
from LESIONTL_CACHE (default ~/.cache/lesiontl).

Usage:
    python scripts/export_pretrained_weights.py vgg16 vgg19 alexnet_modified
"""

import argparse
import sys
from pathlib import Path

import numpy as np

# our conv layer names, in the order torchvision stores the conv weights
BACKBONE_CONV_NAMES = {
    "vgg16": [
        "conv1_1", "conv1_2",
        "conv2_1", "conv2_2",
        "conv3_1", "conv3_2", "conv3_3",
        "conv4_1", "conv4_2", "conv4_3",
        "conv5_1", "conv5_2", "conv5_3",
    ],
    "vgg19": [
        "conv1_1", "conv1_2",
        "conv2_1", "conv2_2",
        "conv3_1", "conv3_2", "conv3_3", "conv3_4",
        "conv4_1", "conv4_2", "conv4_3", "conv4_4",
        "conv5_1", "conv5_2", "conv5_3", "conv5_4",
    ],
    "alexnet_modified": ["conv1", "conv2", "conv3", "conv4", "conv5"],
}

TORCHVISION_BUILDERS = {
    "vgg16": ("vgg16", "VGG16_Weights"),
    "vgg19": ("vgg19", "VGG19_Weights"),
    "alexnet_modified": ("alexnet", "AlexNet_Weights"),
}


def export(backbone_id, cache_dir):
    import torchvision.models as tvm

    builder_name, weights_enum = TORCHVISION_BUILDERS[backbone_id]
    weights = getattr(tvm, weights_enum).IMAGENET1K_V1
    model = getattr(tvm, builder_name)(weights=weights)

    conv_layers = [m for m in model.features if m.__class__.__name__ == "Conv2d"]
    names = BACKBONE_CONV_NAMES[backbone_id]
    if len(conv_layers) != len(names):
        raise SystemExit(
            f"{backbone_id}: expected {len(names)} conv layers, found {len(conv_layers)}"
        )
    arrays = {}
    for name, conv in zip(names, conv_layers):
        # torch stores (c_out, c_in, kh, kw); we use (kh, kw, c_in, c_out)
        arrays[f"{name}.W"] = conv.weight.detach().numpy().transpose(2, 3, 1, 0).copy()
        arrays[f"{name}.b"] = conv.bias.detach().numpy().copy()

    cache_dir.mkdir(parents=True, exist_ok=True)
    out = cache_dir / f"{backbone_id}.npz"
    np.savez(out, **arrays)
    print(f"wrote {out} ({len(arrays)} arrays)")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("backbones", nargs="+", choices=sorted(BACKBONE_CONV_NAMES))
    args = parser.parse_args()
    try:
        import torchvision  # noqa: F401
    except ImportError:
        sys.exit("torchvision is required: pip install torch torchvision")
    from lesiontl.models import weight_cache_dir

    for backbone_id in args.backbones:
        export(backbone_id, Path(weight_cache_dir()))


if __name__ == "__main__":
    main()
