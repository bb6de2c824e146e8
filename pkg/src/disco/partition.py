"""Split a feature-by-sample data matrix across m nodes.

Two layouts:

* sample partition -- node j stores a contiguous group of columns (all d
  features of its samples) plus the matching labels;
* feature partition -- node i stores a contiguous group of rows (its feature
  slice of *all* n samples) and every node keeps the full label vector,
  which it needs to turn exchanged margins into loss coefficients.

Splits are contiguous and balanced (sizes differ by at most one, larger
shards first) so partitioning is deterministic and reassembly is a plain
concatenation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import SparseBlock, as_vec

__all__ = [
    "SamplePartition",
    "FeaturePartition",
    "balanced_sizes",
    "partition_by_samples",
    "partition_by_features",
]


def balanced_sizes(total: int, m: int) -> list:
    """Contiguous balanced split sizes: ceil for the first total % m shards."""
    if m < 1:
        raise ValueError(f"need at least one shard, got m={m}")
    q, r = divmod(total, m)
    return [q + 1] * r + [q] * (m - r)


@dataclass(frozen=True)
class SamplePartition:
    """Column shards: shard j is d x n_j with its own label slice."""

    shards: tuple          # SparseBlock, all d rows, n_j columns
    labels: tuple          # per-shard label vectors
    sizes: tuple
    offsets: tuple
    d: int
    n: int


@dataclass(frozen=True)
class FeaturePartition:
    """Row shards: shard i is d_i x n; labels are replicated to every node."""

    shards: tuple          # SparseBlock, d_i rows, all n columns
    y: np.ndarray
    sizes: tuple
    offsets: tuple
    d: int
    n: int


def partition_by_samples(X: SparseBlock, y: np.ndarray, m: int) -> SamplePartition:
    y = as_vec(y)
    d, n = X.rows, X.cols
    if y.shape[0] != n:
        raise ValueError(f"labels have length {y.shape[0]}, data has {n} samples")
    if m > n:
        raise ValueError(f"cannot split {n} samples over {m} nodes: empty shard")
    sizes = balanced_sizes(n, m)
    shards, labels, offsets = [], [], []
    start = 0
    for nj in sizes:
        shards.append(X.column_slice(start, start + nj))
        labels.append(y[start:start + nj].copy())
        offsets.append(start)
        start += nj
    return SamplePartition(tuple(shards), tuple(labels), tuple(sizes), tuple(offsets), d, n)


def partition_by_features(X: SparseBlock, y: np.ndarray, m: int) -> FeaturePartition:
    y = as_vec(y)
    d, n = X.rows, X.cols
    if y.shape[0] != n:
        raise ValueError(f"labels have length {y.shape[0]}, data has {n} samples")
    if m > d:
        raise ValueError(f"cannot split {d} features over {m} nodes: empty shard")
    sizes = balanced_sizes(d, m)
    shards, offsets = [], []
    start = 0
    for di in sizes:
        shards.append(X.row_slice(start, start + di))
        offsets.append(start)
        start += di
    return FeaturePartition(tuple(shards), y.copy(), tuple(sizes), tuple(offsets), d, n)
