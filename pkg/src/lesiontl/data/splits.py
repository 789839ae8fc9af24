"""Deterministic train/test splitting and stratified K-fold planning."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..errors import InsufficientDataError, StratificationError
from .manifest import LABELS


@dataclass(frozen=True)
class SplitPlan:
    train_ids: frozenset
    test_ids: frozenset
    test_fraction: float
    stratified: bool
    seed: int


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: dict  # id -> fold index in [0, k)

    def fold_ids(self, fold):
        return sorted(i for i, f in self.assignment.items() if f == fold)

    def sizes(self):
        counts = [0] * self.k
        for f in self.assignment.values():
            counts[f] += 1
        return counts


def _quotas(counts, n_take):
    """Per-class take counts via exact largest-remainder apportionment."""
    total = sum(counts.values())
    shares = {c: Fraction(n_take * counts[c], total) for c in counts}
    quotas = {c: math.floor(shares[c]) for c in counts}
    leftover = n_take - sum(quotas.values())
    order = sorted(counts, key=lambda c: (shares[c] - quotas[c], c), reverse=True)
    for c in order[:leftover]:
        quotas[c] += 1
    return quotas


def split_labeled_ids(ids, labels_by_id, fraction, stratified, seed):
    """Split an id collection into (rest, taken); taken has round(fraction*N) ids."""
    ids = sorted(ids)
    n_take = round(fraction * len(ids))
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(len(ids))
        taken = {ids[i] for i in perm[:n_take]}
    else:
        by_class = {label: [] for label in LABELS}
        for i in ids:
            by_class[labels_by_id[i]].append(i)
        counts = {c: len(v) for c, v in by_class.items()}
        if n_take > 0 and any(v == 0 for v in counts.values()):
            empty = sorted(c for c, v in counts.items() if v == 0)
            raise StratificationError(
                f"stratified split impossible: class(es) {', '.join(empty)} have no samples"
            )
        quotas = _quotas(counts, n_take)
        if any(quotas[c] > counts[c] for c in counts):
            raise StratificationError(f"stratified split impossible: quotas {quotas} exceed counts {counts}")
        taken = set()
        for label in LABELS:
            pool = by_class[label]
            perm = rng.permutation(len(pool))
            taken.update(pool[i] for i in perm[: quotas[label]])
    rest = set(ids) - taken
    return rest, taken


def split_train_test(manifest, test_fraction, stratified, seed):
    """Deterministic 70/30-style split of a manifest.

    |test| = round(test_fraction * N) (banker's rounding); when stratified,
    per-class test counts stay within 1 of test_fraction * class count.
    """
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError(f"test_fraction must be in [0, 1], got {test_fraction}")
    if len(manifest) == 0:
        raise ValueError("cannot split an empty manifest")
    train, test = split_labeled_ids(
        manifest.ids, manifest.labels_by_id(), test_fraction, stratified, seed
    )
    return SplitPlan(
        train_ids=frozenset(train),
        test_ids=frozenset(test),
        test_fraction=test_fraction,
        stratified=stratified,
        seed=seed,
    )


def make_folds(labeled_ids, k, stratified, seed):
    """Partition ids into k folds with sizes within 1 of each other.

    `labeled_ids` maps id -> label (any mapping or iterable of pairs).
    Stratified plans also keep per-class fold counts within 1. Ids are
    dealt round-robin with a single global cursor across the per-class
    (seeded) permutations, which enforces both balance invariants at once.
    """
    labeled = dict(labeled_ids)
    if k < 2:
        raise ValueError(f"k must be >= 2, got {k}")
    if len(labeled) < k:
        raise InsufficientDataError(f"need at least {k} ids for {k} folds, got {len(labeled)}")
    rng = np.random.default_rng(seed)
    if stratified:
        groups = []
        for label in LABELS:
            pool = sorted(i for i, lab in labeled.items() if lab == label)
            if pool:
                groups.append(pool)
    else:
        groups = [sorted(labeled)]
    assignment = {}
    cursor = 0
    for pool in groups:
        perm = rng.permutation(len(pool))
        for j in perm:
            assignment[pool[j]] = cursor % k
            cursor += 1
    return FoldPlan(k=k, assignment=assignment)
