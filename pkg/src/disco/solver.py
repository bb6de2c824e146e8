"""Damped inexact-Newton outer loop with two distributed PCG inner solvers.

The outer loop repeats: evaluate the gradient, solve the Newton system
H v = grad approximately with preconditioned conjugate gradient, then apply
the damped update w <- w - v / (1 + delta) with delta = sqrt(v'Hv). The inner
tolerance follows the relative rule eps_k = theta * ||grad||.

Two inner solvers implement the same mathematics over different data
layouts:

* ``pcg_samples`` (sample partition): the master owns every full-length PCG
  vector; each inner iteration broadcasts the search direction (R^d) and
  reduce-alls the per-node Hessian-product contributions (R^d).
* ``pcg_features`` (feature partition): every PCG vector lives as per-node
  coordinate blocks; each inner iteration costs one length-n reduce_all (the
  sample-space product X'u) plus two scalar reduce_alls, and a final
  concatenating reduce assembles the direction on the master.

Both use the same preconditioner: a feature-block-diagonal curvature matrix
estimated from the first tau samples,

    P_b = (1/tau) * sum_{j<tau} h_j x_j^(b) (x_j^(b))' + mu * I

per feature block b, Cholesky-factored once per build (the blocks are exactly
the diagonal blocks of the subsampled curvature matrix; with one node there
is a single block covering all features). Keeping the preconditioner
identical across layouts makes the two solvers produce the same iterate
sequence up to roundoff, so layout only changes communication cost, not the
optimization path. In feature layout each node factors and applies only its
own block, which keeps every preconditioner application communication-free.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .comm import Cluster
from .linalg import SparseBlock, spmv, spmv_transpose
from .losses import LossKind, Objective, grad_coeffs, hess_coeffs
from .partition import (
    FeaturePartition,
    SamplePartition,
    balanced_sizes,
    partition_by_features,
    partition_by_samples,
)

__all__ = [
    "PartitionMode",
    "SolverConfig",
    "NewtonStepResult",
    "PcgIterate",
    "TraceRecord",
    "DiscoResult",
    "BlockPreconditioner",
    "build_preconditioner",
    "build_preconditioner_features",
    "apply_pinv",
    "feature_margins",
    "hessian_vec_samples",
    "hessian_vec_features",
    "pcg_samples",
    "pcg_features",
    "damped_update",
    "disco_outer",
]


class PartitionMode(str, Enum):
    SAMPLES = "samples"
    FEATURES = "features"


@dataclass
class SolverConfig:
    """Solver parameters. ``tau``/``max_inner`` of None mean "pick the default
    at solve time": tau = min(1000, available samples), max_inner =
    min(5d, 10000). ``rho`` is accepted for interface compatibility but no
    update consumes it; a warning is emitted when it is nonzero."""

    lam: float
    mu: float = 1e-4
    tau: int | None = None
    rho: float = 0.0
    loss: LossKind = LossKind.SQUARE
    theta: float = 1e-4
    outer_tol: float = 1e-8
    max_outer: int = 50
    max_inner: int | None = None
    partition_mode: PartitionMode = PartitionMode.SAMPLES

    def validate(self):
        if self.lam <= 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if self.mu < 0:
            raise ValueError(f"mu must be non-negative, got {self.mu}")
        if self.rho < 0:
            raise ValueError(f"rho must be non-negative, got {self.rho}")
        if self.tau is not None and self.tau < 1:
            raise ValueError(f"tau must be >= 1, got {self.tau}")
        if self.theta <= 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if self.outer_tol <= 0:
            raise ValueError(f"outer_tol must be positive, got {self.outer_tol}")
        if self.max_outer < 0:
            raise ValueError(f"max_outer must be >= 0, got {self.max_outer}")
        if self.max_inner is not None and self.max_inner < 1:
            raise ValueError(f"max_inner must be >= 1, got {self.max_inner}")

    def resolved_tau(self, available: int) -> int:
        tau = min(1000, available) if self.tau is None else self.tau
        if tau > available:
            raise ValueError(f"tau={tau} exceeds the {available} samples available for the preconditioner")
        return tau

    def resolved_max_inner(self, d: int) -> int:
        return min(5 * d, 10000) if self.max_inner is None else self.max_inner


class PcgIterate(NamedTuple):
    """One inner iterate, recorded only on request (test instrumentation)."""

    direction: np.ndarray
    residual: np.ndarray
    residual_norm: float
    hessian_direction: np.ndarray


@dataclass
class NewtonStepResult:
    """Inexact Newton direction and its damping certificate."""

    direction: np.ndarray
    delta: float
    inner_iters: int
    residual_norm: float
    converged: bool
    direction_blocks: list | None = None
    history: list | None = None


@dataclass(frozen=True)
class TraceRecord:
    """Per-outer-iteration telemetry; cumulative fields cover all work done
    before this iteration's inner solve."""

    outer_iter: int
    grad_norm: float
    inner_iters_cum: int
    rounds_cum: int
    bytes_cum: int
    wall_ms: float


@dataclass
class DiscoResult:
    w: np.ndarray
    trace: list
    converged: bool
    updates: int
    grad_evals: int
    inner_iters_total: int
    steps: list | None = None
    iterates: list | None = None


# ---------------------------------------------------------------------------
# Preconditioner
# ---------------------------------------------------------------------------


@dataclass
class BlockPreconditioner:
    """Cholesky factors of the per-feature-block subsampled curvature matrix."""

    factors: tuple
    sizes: tuple
    offsets: tuple
    mu: float

    @property
    def dim(self) -> int:
        return sum(self.sizes)

    def apply_block(self, i: int, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if r.shape[0] != self.sizes[i]:
            raise ValueError(f"block {i} solve: vector has length {r.shape[0]}, block is {self.sizes[i]}")
        return cho_solve(self.factors[i], r)

    def apply(self, r: np.ndarray) -> np.ndarray:
        r = np.asarray(r, dtype=np.float64)
        if r.shape[0] != self.dim:
            raise ValueError(f"P solve: vector has length {r.shape[0]}, P is {self.dim}x{self.dim}")
        out = np.empty_like(r)
        for i, (off, size) in enumerate(zip(self.offsets, self.sizes)):
            out[off:off + size] = cho_solve(self.factors[i], r[off:off + size])
        return out


def apply_pinv(precond: BlockPreconditioner, r: np.ndarray) -> np.ndarray:
    """Solve P s = r with the stored factorization."""
    return precond.apply(r)


def _factor_curvature_block(i: int, dense_block: np.ndarray, h_tau: np.ndarray, mu: float):
    """Cholesky of (1/tau) * Xb diag(h) Xb' + mu*I for one feature block."""
    tau = dense_block.shape[1]
    gram = (dense_block * h_tau) @ dense_block.T / tau
    gram[np.diag_indices_from(gram)] += mu
    try:
        return cho_factor(gram, lower=True)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"preconditioner block {i} is not positive definite; "
            f"increase mu (currently mu={mu})"
        ) from exc


def _preconditioner_hess_coeffs(obj: Objective, margins_tau: np.ndarray | None, labels_tau: np.ndarray) -> np.ndarray:
    if obj.loss is LossKind.SQUARE:
        return np.full(labels_tau.shape[0], 2.0)
    if margins_tau is None:
        raise ValueError("logistic preconditioner needs margins of the subsample")
    return hess_coeffs(obj, margins_tau, labels_tau)


def build_preconditioner(
    obj: Objective,
    config: SolverConfig,
    shard: SparseBlock,
    labels: np.ndarray,
    w: np.ndarray | None,
    block_sizes: list | None = None,
) -> BlockPreconditioner:
    """Master-side build for the sample layout.

    ``shard`` is the master's block (all d features, its n_1 samples); the
    first tau of those samples feed the estimate. ``block_sizes`` fixes the
    feature-block structure and defaults to the balanced single-block split
    (i.e. the full matrix) when omitted.
    """
    tau = config.resolved_tau(shard.cols)
    sub = shard.column_slice(0, tau)
    if obj.loss is LossKind.SQUARE:
        margins_tau = None
    else:
        if w is None:
            raise ValueError("logistic preconditioner needs the current iterate")
        margins_tau = spmv_transpose(sub, np.asarray(w, dtype=np.float64))
    h_tau = _preconditioner_hess_coeffs(obj, margins_tau, np.asarray(labels[:tau], dtype=np.float64))
    if block_sizes is None:
        block_sizes = [shard.rows]
    sizes = [int(s) for s in block_sizes]
    if sum(sizes) != shard.rows:
        raise ValueError(f"block sizes {sizes} do not cover {shard.rows} features")
    factors, offsets = [], []
    start = 0
    for i, di in enumerate(sizes):
        dense = sub.matrix[start:start + di, :].toarray()
        factors.append(_factor_curvature_block(i, dense, h_tau, config.mu))
        offsets.append(start)
        start += di
    return BlockPreconditioner(tuple(factors), tuple(sizes), tuple(offsets), config.mu)


def build_preconditioner_features(
    obj: Objective,
    config: SolverConfig,
    fpart: FeaturePartition,
    w_margins: np.ndarray | None,
) -> BlockPreconditioner:
    """Feature-layout build: node i factors its own d_i x d_i block from the
    first tau columns of its feature slice. ``w_margins`` are the replicated
    sample margins of the current iterate (any value for the square loss)."""
    tau = config.resolved_tau(fpart.n)
    margins_tau = None if obj.loss is LossKind.SQUARE else np.asarray(w_margins, dtype=np.float64)[:tau]
    h_tau = _preconditioner_hess_coeffs(obj, margins_tau, fpart.y[:tau])
    factors = []
    for i, shard in enumerate(fpart.shards):
        dense = shard.matrix[:, :tau].toarray()
        factors.append(_factor_curvature_block(i, dense, h_tau, config.mu))
    return BlockPreconditioner(tuple(factors), tuple(fpart.sizes), tuple(fpart.offsets), config.mu)


# ---------------------------------------------------------------------------
# Distributed gradient and Hessian-vector products
# ---------------------------------------------------------------------------


def _sample_hess_coeff_lists(spart: SamplePartition, obj: Objective, w: np.ndarray) -> list:
    """Per-node Hessian coefficients at w; local work only (nodes hold w
    from the gradient broadcast)."""
    if obj.loss is LossKind.SQUARE:
        return [np.full(nj, 2.0) for nj in spart.sizes]
    return [
        hess_coeffs(obj, spmv_transpose(shard, w), y_j)
        for shard, y_j in zip(spart.shards, spart.labels)
    ]


def _sample_gradient(cluster: Cluster, spart: SamplePartition, obj: Objective, w: np.ndarray) -> np.ndarray:
    """Broadcast w, reduce-all the per-node data terms, add lam*w."""
    w_reps = cluster.broadcast(cluster.master, w)

    def local_term(j):
        margins = spmv_transpose(spart.shards[j], w_reps[j])
        coeffs = grad_coeffs(obj, margins, spart.labels[j])
        return spmv(spart.shards[j], coeffs) / obj.n

    parts = cluster.map_nodes(local_term)
    reps = cluster.reduce_all(parts)
    return reps[cluster.master] + obj.lam * w_reps[cluster.master]


def _hess_vec_samples(
    cluster: Cluster,
    spart: SamplePartition,
    obj: Objective,
    u: np.ndarray,
    h_lists: list,
) -> np.ndarray:
    """One metered Hu: broadcast u, reduce-all the data terms, add lam*u."""
    u_reps = cluster.broadcast(cluster.master, u)

    def local_term(j):
        z = spmv_transpose(spart.shards[j], u_reps[j])
        return spmv(spart.shards[j], h_lists[j] * z) / obj.n

    parts = cluster.map_nodes(local_term)
    reps = cluster.reduce_all(parts)
    return reps[cluster.master] + obj.lam * u_reps[cluster.master]


def hessian_vec_samples(
    cluster: Cluster,
    spart: SamplePartition,
    obj: Objective,
    w: np.ndarray,
    u: np.ndarray,
) -> np.ndarray:
    """Hessian-vector product over the sample partition (2 rounds: one
    broadcast of u, one reduce_all of the partial products)."""
    w = np.asarray(w, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    h_lists = _sample_hess_coeff_lists(spart, obj, w)
    return _hess_vec_samples(cluster, spart, obj, u, h_lists)


def feature_margins(cluster: Cluster, fpart: FeaturePartition, w_blocks: list) -> list:
    """Sample margins X'w assembled from per-node feature blocks: one
    length-n reduce_all. Returns the per-node replicas."""
    parts = cluster.map_nodes(lambda i: spmv_transpose(fpart.shards[i], w_blocks[i]))
    return cluster.reduce_all(parts)


def _feature_grad_blocks(
    cluster: Cluster,
    fpart: FeaturePartition,
    obj: Objective,
    w_blocks: list,
    margin_reps: list,
) -> list:
    """Per-node gradient blocks from replicated margins; local work only."""

    def local_block(i):
        coeffs = grad_coeffs(obj, margin_reps[i], fpart.y)
        return spmv(fpart.shards[i], coeffs) / obj.n + obj.lam * w_blocks[i]

    return cluster.map_nodes(local_block)


def _feature_hess_coeff_reps(cluster: Cluster, fpart: FeaturePartition, obj: Objective, margin_reps: list) -> list:
    if obj.loss is LossKind.SQUARE:
        return cluster.map_nodes(lambda i: np.full(fpart.n, 2.0))
    return cluster.map_nodes(lambda i: hess_coeffs(obj, margin_reps[i], fpart.y))


def _hess_vec_features(
    cluster: Cluster,
    fpart: FeaturePartition,
    obj: Objective,
    u_blocks: list,
    h_reps: list,
) -> list:
    """One metered Hu in feature layout: a single length-n reduce_all of the
    partial products X_i'u_i, then local block work."""
    parts = cluster.map_nodes(lambda i: spmv_transpose(fpart.shards[i], u_blocks[i]))
    z_reps = cluster.reduce_all(parts)

    def local_block(i):
        return spmv(fpart.shards[i], h_reps[i] * z_reps[i]) / obj.n + obj.lam * u_blocks[i]

    return cluster.map_nodes(local_block)


def hessian_vec_features(
    cluster: Cluster,
    fpart: FeaturePartition,
    obj: Objective,
    u_blocks: list,
    w_margins: list | np.ndarray | None = None,
) -> list:
    """Hessian-vector product over the feature partition (1 length-n round).

    ``w_margins`` are the replicated margins of the current iterate (one
    array, or the per-node replica list from :func:`feature_margins`); they
    are only consulted for the logistic loss.
    """
    if obj.loss is LossKind.SQUARE:
        margin_reps = [None] * cluster.m
    elif w_margins is None:
        raise ValueError("logistic Hessian products need the iterate margins")
    elif isinstance(w_margins, np.ndarray):
        margin_reps = [w_margins] * cluster.m
    else:
        margin_reps = list(w_margins)
    h_reps = _feature_hess_coeff_reps(cluster, fpart, obj, margin_reps)
    return _hess_vec_features(cluster, fpart, obj, u_blocks, h_reps)


# ---------------------------------------------------------------------------
# Inner solvers
# ---------------------------------------------------------------------------


def _zero_step(d: int, resnorm: float, blocks_sizes=None) -> NewtonStepResult:
    blocks = None
    if blocks_sizes is not None:
        blocks = [np.zeros(s) for s in blocks_sizes]
    return NewtonStepResult(
        direction=np.zeros(d),
        delta=0.0,
        inner_iters=0,
        residual_norm=resnorm,
        converged=True,
        direction_blocks=blocks,
    )


def pcg_samples(
    cluster: Cluster,
    spart: SamplePartition,
    obj: Objective,
    w: np.ndarray,
    eps_k: float,
    config: SolverConfig,
    *,
    grad: np.ndarray | None = None,
    precond: BlockPreconditioner | None = None,
    record_history: bool = False,
) -> NewtonStepResult:
    """PCG on the sample partition; the master owns all full-length vectors.

    When ``grad`` is omitted the initial exchange (broadcast w, reduce_all of
    local gradient terms) runs here; the outer loop normally performs it
    itself and passes the result in, which costs the same rounds either way.
    """
    if eps_k <= 0:
        raise ValueError(f"eps_k must be positive, got {eps_k}")
    w = np.asarray(w, dtype=np.float64)
    d = spart.d
    if grad is None:
        grad = _sample_gradient(cluster, spart, obj, w)
    if precond is None:
        precond = build_preconditioner(
            obj, config, spart.shards[0], spart.labels[0], w, balanced_sizes(d, cluster.m)
        )
    max_inner = config.resolved_max_inner(d)
    h_lists = _sample_hess_coeff_lists(spart, obj, w)

    r = np.asarray(grad, dtype=np.float64).copy()
    resnorm = math.sqrt(float(np.dot(r, r)))
    if resnorm <= eps_k:
        return _zero_step(d, resnorm)
    s = precond.apply(r)
    u = s.copy()
    v = np.zeros(d)
    Hv = np.zeros(d)
    rs = float(np.dot(r, s))
    history: list = []
    converged = False
    inner = max_inner
    for t in range(max_inner):
        Hu = _hess_vec_samples(cluster, spart, obj, u, h_lists)
        uHu = float(np.dot(u, Hu))
        if uHu <= 0:
            raise RuntimeError(f"PCG breakdown at inner iteration {t}: u'Hu = {uHu} <= 0")
        alpha = rs / uHu
        v = v + alpha * u
        Hv = Hv + alpha * Hu
        r = r - alpha * Hu
        resnorm = math.sqrt(float(np.dot(r, r)))
        if record_history:
            history.append(PcgIterate(v.copy(), r.copy(), resnorm, Hv.copy()))
        if resnorm <= eps_k:
            converged = True
            inner = t + 1
            break
        s = precond.apply(r)
        rs_next = float(np.dot(r, s))
        beta = rs_next / rs
        u = s + beta * u
        rs = rs_next
    delta = math.sqrt(max(float(np.dot(v, Hv)), 0.0))
    return NewtonStepResult(
        direction=v,
        delta=delta,
        inner_iters=inner,
        residual_norm=resnorm,
        converged=converged,
        history=history if record_history else None,
    )


def pcg_features(
    cluster: Cluster,
    fpart: FeaturePartition,
    obj: Objective,
    w_blocks: list,
    eps_k: float,
    config: SolverConfig,
    *,
    grad_blocks: list | None = None,
    margins: list | np.ndarray | None = None,
    precond: BlockPreconditioner | None = None,
    record_history: bool = False,
) -> NewtonStepResult:
    """PCG on the feature partition; every vector lives as per-node blocks.

    Per inner iteration: one length-n reduce_all (for Hu), one scalar
    reduce_all for the u'Hu curvature term (widened to carry r's at t=0, the
    only iteration where it is not already known from the previous beta
    round), and one scalar reduce_all carrying (r's, ||r||^2, v'Hv) -- the
    beta numerator, the stopping test and the damping certificate ride one
    round. A final concatenating reduce assembles the direction on master.

    When ``grad_blocks``/``margins`` are omitted, the margin exchange (one
    length-n reduce_all) runs here and the gradient blocks are formed
    locally; the outer loop normally passes both in.
    """
    if eps_k <= 0:
        raise ValueError(f"eps_k must be positive, got {eps_k}")
    d = fpart.d
    if margins is None:
        margins = feature_margins(cluster, fpart, w_blocks)
    elif isinstance(margins, np.ndarray):
        margins = [margins] * cluster.m
    if grad_blocks is None:
        grad_blocks = _feature_grad_blocks(cluster, fpart, obj, w_blocks, margins)
    if precond is None:
        precond = build_preconditioner_features(obj, config, fpart, margins[0])
    max_inner = config.resolved_max_inner(d)
    h_reps = _feature_hess_coeff_reps(cluster, fpart, obj, margins)

    r = cluster.map_nodes(lambda i: grad_blocks[i].copy())
    # Driver-side control scalar; the metered path learns ||r|| from the
    # first beta round below.
    r0norm = math.sqrt(sum(float(np.dot(ri, ri)) for ri in r))
    if r0norm <= eps_k:
        return _zero_step(d, r0norm, blocks_sizes=fpart.sizes)
    s = cluster.map_nodes(lambda i: precond.apply_block(i, r[i]))
    u = cluster.map_nodes(lambda i: s[i].copy())
    v = cluster.map_nodes(lambda i: np.zeros(fpart.sizes[i]))
    Hv = cluster.map_nodes(lambda i: np.zeros(fpart.sizes[i]))

    history: list = []
    converged = False
    inner = max_inner
    rs = None  # global <r, s>; first learned in the t=0 curvature round
    resnorm = r0norm
    vHv = 0.0
    for t in range(max_inner):
        Hu = _hess_vec_features(cluster, fpart, obj, u, h_reps)
        local_uHu = cluster.map_nodes(lambda i: float(np.dot(u[i], Hu[i])))
        if t == 0:
            local_rs = cluster.map_nodes(lambda i: float(np.dot(r[i], s[i])))
            reps = cluster.reduce_all(
                [np.array([local_uHu[i], local_rs[i]]) for i in range(cluster.m)]
            )
            uHu, rs = float(reps[0][0]), float(reps[0][1])
        else:
            reps = cluster.reduce_all([np.array([local_uHu[i]]) for i in range(cluster.m)])
            uHu = float(reps[0][0])
        if uHu <= 0:
            raise RuntimeError(f"PCG breakdown at inner iteration {t}: u'Hu = {uHu} <= 0")
        alpha = rs / uHu
        v = cluster.map_nodes(lambda i: v[i] + alpha * u[i])
        Hv = cluster.map_nodes(lambda i: Hv[i] + alpha * Hu[i])
        r = cluster.map_nodes(lambda i: r[i] - alpha * Hu[i])
        s = cluster.map_nodes(lambda i: precond.apply_block(i, r[i]))
        local_sums = cluster.map_nodes(
            lambda i: np.array(
                [float(np.dot(r[i], s[i])), float(np.dot(r[i], r[i])), float(np.dot(v[i], Hv[i]))]
            )
        )
        reps = cluster.reduce_all(local_sums)
        rs_next, rnorm2, vHv = (float(x) for x in reps[0])
        resnorm = math.sqrt(max(rnorm2, 0.0))
        if record_history:
            history.append(PcgIterate(np.concatenate(v), np.concatenate(r), resnorm, np.concatenate(Hv)))
        if resnorm <= eps_k:
            converged = True
            inner = t + 1
            break
        beta = rs_next / rs
        u = cluster.map_nodes(lambda i: s[i] + beta * u[i])
        rs = rs_next
    delta = math.sqrt(max(vHv, 0.0))
    assembled = cluster.reduce_concat(v, to=cluster.master)
    return NewtonStepResult(
        direction=assembled.to_array(),
        delta=delta,
        inner_iters=inner,
        residual_norm=resnorm,
        converged=converged,
        direction_blocks=v,
        history=history if record_history else None,
    )


# ---------------------------------------------------------------------------
# Outer loop
# ---------------------------------------------------------------------------


def damped_update(w: np.ndarray, direction: np.ndarray, delta: float) -> np.ndarray:
    """w - direction / (1 + delta).

    Written as a multiply by the reciprocal so that the full-vector update
    (sample layout) and the per-block update (feature layout) perform
    bit-identical arithmetic.
    """
    return w - (1.0 / (1.0 + delta)) * direction


def disco_outer(
    cluster: Cluster,
    dataset,
    config: SolverConfig,
    *,
    record_iterates: bool = False,
    meter_setup: bool = False,
) -> DiscoResult:
    """Run the damped inexact-Newton loop on ``dataset`` over ``cluster``.

    Partitions the data per ``config.partition_mode``, starts from w = 0 and
    iterates until the gradient norm drops to ``outer_tol`` or ``max_outer``
    updates have been applied. Each outer iteration evaluates the gradient
    (metered), records a trace row, then runs the layout's PCG solver with
    eps_k = theta * ||grad||. ``meter_setup`` additionally charges the one-off
    label replication of the feature layout (8n bytes) to the broadcast
    counters.

    Control scalars (the gradient norm used for the stopping test and
    eps_k) are aggregated by the driver; in the feature layout this stands in
    for a piggybacked scalar and is deliberately not metered as a round.
    """
    config.validate()
    if config.rho != 0.0:
        warnings.warn("SolverConfig.rho is accepted but unused by the solver", stacklevel=2)
    obj = Objective(loss=config.loss, lam=config.lam, n=dataset.n, d=dataset.d)
    samples_mode = config.partition_mode is PartitionMode.SAMPLES
    d = dataset.d

    if samples_mode:
        spart = partition_by_samples(dataset.X, dataset.y, cluster.m)
        config.resolved_tau(spart.sizes[0])  # fail fast on an impossible tau
        w = np.zeros(d)
    else:
        fpart = partition_by_features(dataset.X, dataset.y, cluster.m)
        config.resolved_tau(fpart.n)
        if meter_setup:
            cluster.broadcast(cluster.master, fpart.y)
        w_blocks = [np.zeros(di) for di in fpart.sizes]

    precond: BlockPreconditioner | None = None
    trace: list = []
    steps: list = []
    iterates: list = []
    inner_cum = 0
    updates = 0
    converged = False
    start = time.perf_counter()

    for k in range(config.max_outer + 1):
        if samples_mode:
            grad = _sample_gradient(cluster, spart, obj, w)
            gnorm = math.sqrt(float(np.dot(grad, grad)))
        else:
            margins = feature_margins(cluster, fpart, w_blocks)
            grad_blocks = _feature_grad_blocks(cluster, fpart, obj, w_blocks, margins)
            gnorm = math.sqrt(sum(float(np.dot(g, g)) for g in grad_blocks))
        if not math.isfinite(gnorm):
            w_now = w if samples_mode else np.concatenate(w_blocks)
            raise FloatingPointError(
                f"non-finite gradient at outer iteration {k}; iterate head: {w_now[:8]}"
            )
        stats = cluster.snapshot_stats()
        trace.append(
            TraceRecord(
                outer_iter=k,
                grad_norm=gnorm,
                inner_iters_cum=inner_cum,
                rounds_cum=stats.total_rounds,
                bytes_cum=stats.total_bytes,
                wall_ms=(time.perf_counter() - start) * 1e3,
            )
        )
        if gnorm <= config.outer_tol:
            converged = True
            break
        if k == config.max_outer:
            break
        eps_k = config.theta * gnorm
        if precond is None or config.loss is LossKind.LOGISTIC:
            if samples_mode:
                precond = build_preconditioner(
                    obj, config, spart.shards[0], spart.labels[0], w, balanced_sizes(d, cluster.m)
                )
            else:
                precond = build_preconditioner_features(obj, config, fpart, margins[0])
        if samples_mode:
            step = pcg_samples(cluster, spart, obj, w, eps_k, config, grad=grad, precond=precond)
            w = damped_update(w, step.direction, step.delta)
        else:
            step = pcg_features(
                cluster, fpart, obj, w_blocks, eps_k, config,
                grad_blocks=grad_blocks, margins=margins, precond=precond,
            )
            scale = 1.0 / (1.0 + step.delta)
            w_blocks = cluster.map_nodes(lambda i: w_blocks[i] - scale * step.direction_blocks[i])
        inner_cum += step.inner_iters
        updates += 1
        if record_iterates:
            steps.append(step)
            iterates.append(w.copy() if samples_mode else np.concatenate(w_blocks))

    w_final = w if samples_mode else np.concatenate(w_blocks)
    return DiscoResult(
        w=w_final,
        trace=trace,
        converged=converged,
        updates=updates,
        grad_evals=len(trace),
        inner_iters_total=inner_cum,
        steps=steps if record_iterates else None,
        iterates=iterates if record_iterates else None,
    )
