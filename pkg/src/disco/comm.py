"""Simulated collective communication over m lockstep workers, with metering.

The cluster models a barrier-synchronized machine group: a compute phase maps
a function over all node ids, then a collective moves data between nodes.
Collectives are *logical* single-round operations -- one round and
8 bytes/element regardless of the node count -- because the cost model counts
collective invocations and payload volume, not transport-level hops. Counters
never reset on their own; ``reset_stats``/``snapshot_stats`` bracket the
region being measured.

Three collectives exist and they are the only way data crosses nodes:

* ``broadcast``   -- copy one node's payload to every node.
* ``reduce_all``  -- element-wise sum of per-node payloads, result replicated.
* ``reduce_concat`` -- concatenate per-node blocks onto one node.

Reductions always sum in ascending node order, so a sequential scheduler and
a thread-pool scheduler produce bit-identical results.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .linalg import PartitionedVec

__all__ = ["CommStats", "Cluster", "BYTES_PER_ELEMENT"]

BYTES_PER_ELEMENT = 8  # float64 payloads


@dataclass
class CommStats:
    """Cumulative collective rounds and payload bytes, by collective type."""

    broadcast_rounds: int = 0
    reduce_rounds: int = 0
    reduceall_rounds: int = 0
    broadcast_bytes: int = 0
    reduce_bytes: int = 0
    reduceall_bytes: int = 0

    @property
    def total_rounds(self) -> int:
        return self.broadcast_rounds + self.reduce_rounds + self.reduceall_rounds

    @property
    def total_bytes(self) -> int:
        return self.broadcast_bytes + self.reduce_bytes + self.reduceall_bytes

    def copy(self) -> "CommStats":
        return CommStats(
            self.broadcast_rounds,
            self.reduce_rounds,
            self.reduceall_rounds,
            self.broadcast_bytes,
            self.reduce_bytes,
            self.reduceall_bytes,
        )


class Cluster:
    """m simulated workers plus the collectives connecting them.

    ``scheduler`` selects how compute phases run: ``"sequential"`` executes
    node closures one by one in node order, ``"parallel"`` uses a thread
    pool. Results are required (and tested) to be identical, which holds
    because per-node work is independent and reductions are ordered.
    """

    def __init__(self, m: int, master: int = 0, scheduler: str = "sequential"):
        if m < 1:
            raise ValueError(f"node count must be >= 1, got {m}")
        if not 0 <= master < m:
            raise ValueError(f"master id {master} out of range for {m} nodes")
        if scheduler not in ("sequential", "parallel"):
            raise ValueError(f"unknown scheduler {scheduler!r}")
        self.m = m
        self.master = master
        self.scheduler = scheduler
        self._stats = CommStats()
        self._pool = None

    # -- compute phases ----------------------------------------------------

    def map_nodes(self, fn) -> list:
        """Run ``fn(node_id)`` on every node; barrier before returning."""
        if self.scheduler == "parallel" and self.m > 1:
            if self._pool is None:
                self._pool = ThreadPoolExecutor(max_workers=self.m)
            return list(self._pool.map(fn, range(self.m)))
        return [fn(i) for i in range(self.m)]

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    # -- collectives --------------------------------------------------------

    def _check_node(self, idx: int):
        if not 0 <= idx < self.m:
            raise ValueError(f"node index {idx} out of range for {self.m} nodes")

    def broadcast(self, from_node: int, payload: np.ndarray) -> list:
        """Copy ``payload`` (owned by ``from_node``) to every node."""
        self._check_node(from_node)
        payload = np.asarray(payload, dtype=np.float64)
        self._stats.broadcast_rounds += 1
        self._stats.broadcast_bytes += BYTES_PER_ELEMENT * payload.size
        return [payload.copy() for _ in range(self.m)]

    def reduce_all(self, contributions: list) -> list:
        """Sum per-node vectors in ascending node order; replicate the sum."""
        if len(contributions) != self.m:
            raise ValueError(f"expected {self.m} contributions, got {len(contributions)}")
        arrays = [np.asarray(c, dtype=np.float64) for c in contributions]
        length = arrays[0].shape[0]
        for i, a in enumerate(arrays):
            if a.ndim != 1 or a.shape[0] != length:
                raise ValueError(
                    f"reduce_all length mismatch: node 0 has {length}, node {i} has {a.shape}"
                )
        total = arrays[0].copy()
        for a in arrays[1:]:
            total += a
        self._stats.reduceall_rounds += 1
        self._stats.reduceall_bytes += BYTES_PER_ELEMENT * length
        return [total.copy() for _ in range(self.m)]

    def reduce_concat(self, blocks: list, to: int | None = None) -> PartitionedVec:
        """Assemble per-node blocks, in node order, on node ``to``."""
        if to is None:
            to = self.master
        self._check_node(to)
        if len(blocks) != self.m:
            raise ValueError(f"expected {self.m} blocks, got {len(blocks)}")
        arrays = [np.asarray(b, dtype=np.float64).copy() for b in blocks]
        sizes = [a.shape[0] for a in arrays]
        offsets = [0] * self.m
        for i in range(1, self.m):
            offsets[i] = offsets[i - 1] + sizes[i - 1]
        total = sum(sizes)
        self._stats.reduce_rounds += 1
        self._stats.reduce_bytes += BYTES_PER_ELEMENT * total
        return PartitionedVec(tuple(arrays), tuple(offsets), total)

    # -- metering -----------------------------------------------------------

    def snapshot_stats(self) -> CommStats:
        return self._stats.copy()

    def reset_stats(self):
        self._stats = CommStats()
