"""Deterministic train/test splits over manifest entries.

Two policies:

* ``random_stratified`` — per-class shuffling, preserving class proportions
  within one sample;
* ``subject_disjoint`` — whole subjects assigned to one side only, so no
  identity leaks across the partition.

Both are deterministic for a fixed seed (PCG64) and tie-break by stable
sort on entry path.
"""

from __future__ import annotations

import numpy as np

from .errors import InfeasibleSplitError, RangeError
from .manifest import ImageSample


def _check_fraction(fraction):
    if not 0.0 <= fraction < 1.0:
        raise RangeError(f"test fraction must be in [0, 1), got {fraction}")


def random_stratified(entries: list[ImageSample], test_size: float, seed: int):
    """Split preserving per-class proportions within one sample.

    Returns (train, test) lists in original manifest order.
    """
    _check_fraction(test_size)
    by_class: dict[int, list[int]] = {}
    for idx, sample in enumerate(entries):
        by_class.setdefault(sample.label, []).append(idx)

    rng = np.random.default_rng(seed)
    test_idx: set[int] = set()
    for label in sorted(by_class):
        idxs = sorted(by_class[label], key=lambda i: entries[i].path)
        order = rng.permutation(len(idxs))
        n_test = int(np.floor(len(idxs) * test_size + 0.5))
        test_idx.update(idxs[order[i]] for i in range(n_test))

    train = [s for i, s in enumerate(entries) if i not in test_idx]
    test = [s for i, s in enumerate(entries) if i in test_idx]
    return train, test


def subject_disjoint(entries: list[ImageSample], test_fraction: float, seed: int):
    """Split whole subjects so that no subject_id appears on both sides.

    Subjects are shuffled deterministically and accumulated into the test
    side until its sample count reaches ``test_fraction`` of the total.
    Raises InfeasibleSplitError when a class is covered by fewer than two
    subjects (the class could not appear on both sides).
    """
    _check_fraction(test_fraction)
    if not entries:
        return [], []

    subjects_by_class: dict[int, set[str]] = {}
    counts_by_subject: dict[str, int] = {}
    for sample in entries:
        subjects_by_class.setdefault(sample.label, set()).add(sample.subject_id)
        counts_by_subject[sample.subject_id] = counts_by_subject.get(sample.subject_id, 0) + 1

    for label, subjects in sorted(subjects_by_class.items()):
        if len(subjects) < 2:
            raise InfeasibleSplitError(
                f"class index {label} has a single subject; a subject-disjoint split "
                "cannot cover it on both sides"
            )

    if test_fraction == 0.0:
        return list(entries), []

    subjects = sorted(counts_by_subject)
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(subjects))
    target = test_fraction * len(entries)
    test_subjects: set[str] = set()
    accumulated = 0
    for pos in order:
        if accumulated >= target or len(test_subjects) == len(subjects) - 1:
            break
        subject = subjects[pos]
        test_subjects.add(subject)
        accumulated += counts_by_subject[subject]

    train = [s for s in entries if s.subject_id not in test_subjects]
    test = [s for s in entries if s.subject_id in test_subjects]
    return train, test


def split(entries, policy: str, fraction: float, seed: int):
    """Dispatch on policy name: 'random_stratified' or 'subject_disjoint'."""
    if policy == "random_stratified":
        return random_stratified(entries, fraction, seed)
    if policy == "subject_disjoint":
        return subject_disjoint(entries, fraction, seed)
    raise RangeError(f"unknown split policy {policy!r}")
