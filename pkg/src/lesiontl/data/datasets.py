"""Batch providers consumed by the training loop.

Both providers expose the same tiny protocol: `len()`, an integer `labels`
array aligned with positions, optional `ids`, and `load(indices)` returning
an (X, y) batch.
"""

import numpy as np

from .manifest import LABEL_TO_INDEX
from .preprocess import preprocess_image

# in-memory cache ceiling for lazily decoded datasets (bytes)
_CACHE_BUDGET = 512 * 1024 * 1024


class ArrayDataset:
    """Fully materialized samples."""

    def __init__(self, x, y, ids=None):
        if len(x) != len(y):
            raise ValueError("x and y lengths differ")
        self.x = np.asarray(x)
        self.labels = np.asarray(y, dtype=np.int64)
        self.ids = list(ids) if ids is not None else None

    def __len__(self):
        return len(self.labels)

    def load(self, indices):
        indices = np.asarray(indices)
        return self.x[indices], self.labels[indices]


class ImageDataset:
    """Decodes and preprocesses manifest samples on demand.

    Small datasets are cached in memory after first decode; large ones are
    re-decoded per epoch to bound memory.
    """

    def __init__(self, samples, spec, cache=None):
        self.samples = list(samples)
        self.spec = spec
        self.labels = np.asarray([LABEL_TO_INDEX[s.label] for s in self.samples], dtype=np.int64)
        self.ids = [s.id for s in self.samples]
        if cache is None:
            nbytes = len(self.samples) * spec.target_height * spec.target_width * 3 * 4
            cache = nbytes <= _CACHE_BUDGET
        self._cache = {} if cache else None

    def __len__(self):
        return len(self.samples)

    def _array(self, i):
        if self._cache is not None and i in self._cache:
            return self._cache[i]
        arr = preprocess_image(self.samples[i].image_path, self.spec)
        if self._cache is not None:
            self._cache[i] = arr
        return arr

    def load(self, indices):
        xs = np.stack([self._array(int(i)) for i in indices])
        return xs, self.labels[np.asarray(indices)]


def subset_dataset(manifest, ids, spec, cache=None):
    """ImageDataset over the given manifest ids, ordered by id."""
    by_id = manifest.samples_by_id()
    ordered = [by_id[i] for i in sorted(ids)]
    return ImageDataset(ordered, spec, cache=cache)
