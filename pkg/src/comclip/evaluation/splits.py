"""Seeded re-splitting and subsampling of benchmark instances."""

from collections import defaultdict
from collections.abc import Callable, Sequence

import numpy as np

from comclip.evaluation.models import EvalReport

SVO_SPLIT_SEEDS = (42, 11, 2)


def split_instances[T](instances: Sequence[T], seed: int, n_splits: int = 3) -> list[list[T]]:
    """Shuffle with ``seed`` and partition into ``n_splits`` near-equal folds.

    Raises:
        ValueError: If ``n_splits`` < 1.
    """
    if n_splits < 1:
        raise ValueError(f"n_splits must be >= 1, got {n_splits}")
    order = np.random.default_rng(seed).permutation(len(instances))
    return [[instances[int(i)] for i in fold] for fold in np.array_split(order, n_splits)]


def seeded_subsets[T](
    instances: Sequence[T],
    seeds: Sequence[int] = SVO_SPLIT_SEEDS,
    fraction: float = 1 / 3,
) -> list[list[T]]:
    """One random subset of ``fraction`` of the instances per seed, in original order."""
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    size = max(1, round(len(instances) * fraction)) if instances else 0
    subsets = []
    for seed in seeds:
        picked = np.sort(np.random.default_rng(seed).choice(len(instances), size, replace=False))
        subsets.append([instances[int(i)] for i in picked])
    return subsets


def balanced_subset[T](
    instances: Sequence[T], n: int, seed: int, key: Callable[[T], str]
) -> list[T]:
    """About ``n`` instances drawn evenly across ``key`` groups, in original order.

    Groups smaller than their share contribute everything they have.
    """
    groups: dict[str, list[int]] = defaultdict(list)
    for i, inst in enumerate(instances):
        groups[key(inst)].append(i)
    if not groups:
        return []

    rng = np.random.default_rng(seed)
    share = n // len(groups)
    picked: list[int] = []
    for name in sorted(groups):
        members = groups[name]
        take = min(share, len(members))
        picked += [int(i) for i in rng.choice(members, take, replace=False)]
    return [instances[i] for i in sorted(picked)]


def mean_accuracy(reports: Sequence[EvalReport]) -> float:
    """Mean overall accuracy across split reports."""
    values = [r.overall for r in reports if r.overall is not None]
    return float(np.mean(values)) if values else 0.0
