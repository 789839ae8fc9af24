"""Backbone-specific image preprocessing.

Decoding goes through Pillow; resizing is our own bilinear (half-pixel
centers, edge clamp) so the output is a deterministic function of the
pixel data alone. Same-size inputs pass through bit-exactly, and constant
images stay constant under resampling.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image

from ..errors import DecodeError

# generic-pretraining channel statistics used by all shipped backbones,
# applied to pixel values scaled to [0, 1]
GENERIC_CHANNEL_MEANS = (0.485, 0.456, 0.406)
GENERIC_CHANNEL_STDS = (0.229, 0.224, 0.225)

TARGET_SIZE = 224

BACKBONE_IDS = ("alexnet_modified", "vgg16", "vgg19")


@dataclass(frozen=True)
class PreprocessSpec:
    backbone_id: str
    channel_means: tuple = GENERIC_CHANNEL_MEANS
    channel_stds: tuple = GENERIC_CHANNEL_STDS
    target_height: int = TARGET_SIZE
    target_width: int = TARGET_SIZE
    resize_mode: str = "bilinear"

    def __post_init__(self):
        if self.backbone_id not in BACKBONE_IDS:
            raise ValueError(f"unknown backbone_id {self.backbone_id!r}")
        if (self.target_height, self.target_width) != (TARGET_SIZE, TARGET_SIZE):
            raise ValueError("target dimensions must be exactly 224x224")
        if self.resize_mode != "bilinear":
            raise ValueError(f"unsupported resize_mode {self.resize_mode!r}")
        if len(self.channel_means) != 3 or len(self.channel_stds) != 3:
            raise ValueError("channel statistics must have 3 entries")
        if any(s <= 0 for s in self.channel_stds):
            raise ValueError("channel_stds must be strictly positive")
        object.__setattr__(self, "channel_means", tuple(float(m) for m in self.channel_means))
        object.__setattr__(self, "channel_stds", tuple(float(s) for s in self.channel_stds))


def default_preprocess_spec(backbone_id):
    return PreprocessSpec(backbone_id=backbone_id)


def load_rgb(path):
    """Decode an image file to an (H, W, 3) uint8 array; grayscale promotes."""
    try:
        with Image.open(path) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except DecodeError:
        raise
    except Exception as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def _axis_coords(n_in, n_out):
    """Half-pixel-center source coordinates; returns (lo, hi, frac)."""
    src = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    raw = np.floor(src)
    frac = src - raw
    lo = np.clip(raw, 0, n_in - 1).astype(np.intp)
    hi = np.clip(raw + 1, 0, n_in - 1).astype(np.intp)
    return lo, hi, frac


def resize_bilinear(img, out_h, out_w):
    """Bilinear resample of an (H, W, C) float array to (out_h, out_w, C)."""
    h, w = img.shape[:2]
    y0, y1, fy = _axis_coords(h, out_h)
    x0, x1, fx = _axis_coords(w, out_w)
    fy = fy.astype(img.dtype)[:, None, None]
    fx = fx.astype(img.dtype)[None, :, None]
    v00 = img[np.ix_(y0, x0)]
    v01 = img[np.ix_(y0, x1)]
    v10 = img[np.ix_(y1, x0)]
    v11 = img[np.ix_(y1, x1)]
    # lerp rows then columns: constant inputs (and zero fractions) stay exact
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    return top + fy * (bot - top)


def preprocess_image(path, spec):
    """Decode, resize to 224x224, and normalize: (pixel/255 - mean) / std."""
    raw = load_rgb(path).astype(np.float32)
    if raw.shape[:2] != (spec.target_height, spec.target_width):
        raw = resize_bilinear(raw, spec.target_height, spec.target_width)
    scaled = raw / np.float32(255.0)
    means = np.asarray(spec.channel_means, dtype=np.float32)
    stds = np.asarray(spec.channel_stds, dtype=np.float32)
    return (scaled - means) / stds
