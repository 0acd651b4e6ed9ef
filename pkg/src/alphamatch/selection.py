"""Partition-based template selection and class discrimination.

A labeled series is cut into contiguous blocks.  Each block is tried as a
template source against the whole series; the block whose match curve has
the largest area (sum of counts over the length grid) is taken as the class
template.  Class templates are then matched against every class's data, and
the shortest template length beyond which a class only matches itself is
reported.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import TimeSeries
from .errors import ContractError
from .matcher import DEFAULT_THRESHOLD, MatchCurve, match_curve

__all__ = [
    "PartitionSet",
    "SelectedTemplate",
    "DiscriminationReport",
    "partition",
    "select_template",
    "minimal_discriminative_length",
    "discriminate",
    "default_max_len",
]


def default_max_len(partition_len: int) -> int:
    return min(partition_len, 200)


def _map(fn, items, threads: int):
    if threads and threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


@dataclass(frozen=True)
class PartitionSet:
    partitions: tuple[np.ndarray, ...]
    source_label: str = "data"

    def __len__(self) -> int:
        return len(self.partitions)

    @property
    def partition_len(self) -> int:
        return self.partitions[0].size

    __hash__ = None


@dataclass(frozen=True)
class SelectedTemplate:
    samples: np.ndarray
    partition_index: int
    score: int
    source_label: str = "data"
    scores: tuple[int, ...] = ()

    __hash__ = None


@dataclass(frozen=True)
class DiscriminationReport:
    self_curve: MatchCurve
    cross_curves: tuple[MatchCurve, ...]
    minimal_length: Optional[int]
    threshold: float
    cross_tolerance: int = 0

    def to_dict(self) -> dict:
        return {
            "source": self.self_curve.source_label,
            "threshold": self.threshold,
            "cross_tolerance": self.cross_tolerance,
            "minimal_length": self.minimal_length,
            "self_curve": self.self_curve.to_dict(),
            "cross_curves": [c.to_dict() for c in self.cross_curves],
        }


def partition(data: TimeSeries, num_partitions: int = 5, partition_len: int = 1000, label: str = "data") -> PartitionSet:
    """Cut the first ``num_partitions * partition_len`` samples into blocks."""
    if num_partitions < 1 or partition_len < 1:
        raise ContractError("num_partitions and partition_len must be positive")
    m = data.samples
    need = num_partitions * partition_len
    if need > m.size:
        raise ContractError(
            f"{num_partitions} partitions of {partition_len} need {need} samples, data has {m.size}"
        )
    blocks = tuple(m[i * partition_len : (i + 1) * partition_len] for i in range(num_partitions))
    return PartitionSet(partitions=blocks, source_label=label)


def select_template(
    data: TimeSeries,
    partitions: PartitionSet,
    min_len: int = 10,
    max_len: Optional[int] = None,
    step: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    threads: int = 1,
) -> SelectedTemplate:
    """Pick the partition whose match curve against ``data`` has the most matches.

    The score of a partition is the sum of its match counts over the length
    grid; ties go to the lowest index.
    """
    if len(partitions) == 0:
        raise ContractError("no partitions to select from")
    if max_len is None:
        max_len = default_max_len(partitions.partition_len)
    if max_len > partitions.partition_len:
        raise ContractError(f"max_len {max_len} exceeds partition length {partitions.partition_len}")

    def score(block):
        curve = match_curve(block, data, min_len, max_len, step, threshold)
        return sum(curve.counts)

    scores = _map(score, list(partitions.partitions), threads)
    best = int(np.argmax(scores))  # first maximum
    return SelectedTemplate(
        samples=partitions.partitions[best],
        partition_index=best,
        score=scores[best],
        source_label=partitions.source_label,
        scores=tuple(scores),
    )


def minimal_discriminative_length(
    self_curve: MatchCurve,
    cross_curves: Sequence[MatchCurve],
    cross_tolerance: int = 0,
) -> Optional[int]:
    """Smallest grid length from which on the template only matches its own class.

    Returns the smallest ``k*`` such that at every grid length ``k >= k*``
    the self count is at least 1 and every cross count is at most
    ``cross_tolerance``; ``None`` if even the last grid length fails.
    """
    if cross_tolerance < 0:
        raise ContractError("cross_tolerance must be non-negative")
    grid = self_curve.lengths
    for c in cross_curves:
        if c.lengths != grid:
            raise ContractError(f"curve {c.label} uses a different length grid")
        if c.threshold != self_curve.threshold:
            raise ContractError(f"curve {c.label} uses a different threshold")

    answer = None
    for i in range(len(grid) - 1, -1, -1):
        ok = self_curve.counts[i] >= 1 and all(c.counts[i] <= cross_tolerance for c in cross_curves)
        if not ok:
            break
        answer = grid[i]
    return answer


def discriminate(
    classes: Mapping[str, TimeSeries],
    num_partitions: int = 5,
    partition_len: int = 1000,
    min_len: int = 10,
    max_len: Optional[int] = None,
    step: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    cross_tolerance: int = 0,
    threads: int = 1,
) -> tuple[dict[str, SelectedTemplate], dict[str, DiscriminationReport]]:
    """Select a template per class and test it against every class.

    Returns the selections and one :class:`DiscriminationReport` per class,
    both keyed by class label in input order.
    """
    if len(classes) < 2:
        raise ContractError("discrimination needs at least two classes")
    if max_len is None:
        max_len = default_max_len(partition_len)
    labels = list(classes)

    def pick(label):
        parts = partition(classes[label], num_partitions, partition_len, label=label)
        return select_template(classes[label], parts, min_len, max_len, step, threshold)

    selected = dict(zip(labels, _map(pick, labels, threads)))

    pairs = [(src, dst) for src in labels for dst in labels]

    def curve(pair):
        src, dst = pair
        return match_curve(
            selected[src].samples, classes[dst], min_len, max_len, step, threshold,
            source_label=src, data_label=dst,
        )

    curves = dict(zip(pairs, _map(curve, pairs, threads)))
    reports = {}
    for src in labels:
        own = curves[(src, src)]
        others = tuple(curves[(src, dst)] for dst in labels if dst != src)
        reports[src] = DiscriminationReport(
            self_curve=own,
            cross_curves=others,
            minimal_length=minimal_discriminative_length(own, others, cross_tolerance),
            threshold=own.threshold,
            cross_tolerance=cross_tolerance,
        )
    return selected, reports
