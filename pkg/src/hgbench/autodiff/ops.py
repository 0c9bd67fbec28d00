"""Differentiable operations over :class:`Tensor`.

Sparse matrices are structural constants: ``spmm`` backpropagates only into
its dense operand (hypergraph structure is never learned). All reductions
run in a fixed order, so results are reproducible bit for bit given the
same inputs and seed.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionError, HgBenchError
from ..kernels import CsrMatrix
from .tensor import Tensor, record


def _shapes(*tensors):
    return " vs ".join(str(t.shape) for t in tensors)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.values.ndim != 2 or b.values.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"matmul shape mismatch: {_shapes(a, b)}")
    out = Tensor(a.values @ b.values)

    def bwd(g, needs):
        ga = g @ b.values.T if needs[0] else None
        gb = a.values.T @ g if needs[1] else None
        return ga, gb

    return record(out, (a, b), bwd)


def spmm(mat: CsrMatrix, dense: Tensor) -> Tensor:
    """Sparse @ dense. The sparse side is constant; grad flows to ``dense``."""
    if dense.values.ndim != 2 or mat.shape[1] != dense.shape[0]:
        raise DimensionError(
            f"spmm shape mismatch: {mat.shape} vs {dense.shape}"
        )
    out = Tensor(mat.matmul_dense(dense.values))

    def bwd(g, needs):
        return (mat.transpose().matmul_dense(g),)

    return record(out, (dense,), bwd)


def add(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise sum; ``b`` may be a (1, n) row bias broadcast over rows."""
    broadcast = (
        a.values.ndim == 2
        and b.values.ndim == 2
        and b.shape == (1, a.shape[1])
        and a.shape[0] != 1
    )
    if a.shape != b.shape and not broadcast:
        raise DimensionError(f"add shape mismatch: {_shapes(a, b)}")
    out = Tensor(a.values + b.values)

    def bwd(g, needs):
        ga = g if needs[0] else None
        if not needs[1]:
            gb = None
        elif broadcast:
            gb = g.sum(axis=0, keepdims=True)
        else:
            gb = g
        return ga, gb

    return record(out, (a, b), bwd)


def scale(x: Tensor, c: float) -> Tensor:
    c = float(c)
    out = Tensor(x.values * c)
    return record(out, (x,), lambda g, needs: (g * c,))


def relu(x: Tensor) -> Tensor:
    mask = x.values > 0
    out = Tensor(np.where(mask, x.values, 0.0))
    return record(out, (x,), lambda g, needs: (g * mask,))


def leaky_relu(x: Tensor, negative_slope: float = 0.01) -> Tensor:
    mask = x.values > 0
    out = Tensor(np.where(mask, x.values, negative_slope * x.values))
    return record(
        out, (x,), lambda g, needs: (g * np.where(mask, 1.0, negative_slope),)
    )


def sigmoid(x: Tensor) -> Tensor:
    s = _sigmoid_vals(x.values)
    out = Tensor(s)
    return record(out, (x,), lambda g, needs: (g * s * (1.0 - s),))


def _sigmoid_vals(v):
    out = np.empty_like(v, dtype=np.float64)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def dropout(x: Tensor, p: float, rng, train: bool) -> Tensor:
    """Inverted dropout. Identity in eval mode; ``rng`` drives the mask."""
    if not 0.0 <= p < 1.0:
        raise HgBenchError(f"dropout rate must be in [0, 1), got {p}")
    if not train or p == 0.0:
        return x
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    keep = rng.random(x.shape) >= p
    factor = 1.0 / (1.0 - p)
    out = Tensor(np.where(keep, x.values * factor, 0.0))
    return record(out, (x,), lambda g, needs: (np.where(keep, g * factor, 0.0),))


def concat_rows(tensors) -> Tensor:
    """Stack 2-D blocks vertically (shared column count)."""
    tensors = list(tensors)
    width = tensors[0].shape[1]
    if any(t.values.ndim != 2 or t.shape[1] != width for t in tensors):
        raise DimensionError(f"concat_rows width mismatch: {_shapes(*tensors)}")
    out = Tensor(np.concatenate([t.values for t in tensors], axis=0))
    sizes = [t.shape[0] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bwd(g, needs):
        parts = np.split(g, splits, axis=0)
        return tuple(p if need else None for p, need in zip(parts, needs))

    return record(out, tuple(tensors), bwd)


def concat_cols(tensors) -> Tensor:
    """Stack 2-D blocks side by side (shared row count)."""
    tensors = list(tensors)
    height = tensors[0].shape[0]
    if any(t.values.ndim != 2 or t.shape[0] != height for t in tensors):
        raise DimensionError(f"concat_cols height mismatch: {_shapes(*tensors)}")
    out = Tensor(np.concatenate([t.values for t in tensors], axis=1))
    splits = np.cumsum([t.shape[1] for t in tensors])[:-1]

    def bwd(g, needs):
        parts = np.split(g, splits, axis=1)
        return tuple(p if need else None for p, need in zip(parts, needs))

    return record(out, tuple(tensors), bwd)


def row_gather(x: Tensor, index) -> Tensor:
    index = np.asarray(index, dtype=np.int64)
    if index.ndim != 1:
        raise DimensionError(f"row_gather needs a 1-D index, got shape {index.shape}")
    if len(index) and (index.min() < 0 or index.max() >= x.shape[0]):
        raise DimensionError(
            f"row_gather index out of range for {x.shape[0]} rows"
        )
    out = Tensor(x.values[index])

    def bwd(g, needs):
        gx = np.zeros_like(x.values)
        np.add.at(gx, index, g)
        return (gx,)

    return record(out, (x,), bwd)


def mean_rows(x: Tensor) -> Tensor:
    if x.values.ndim != 2 or x.shape[0] == 0:
        raise DimensionError(f"mean_rows needs a nonempty 2-D input, got {x.shape}")
    n = x.shape[0]
    out = Tensor(x.values.mean(axis=0, keepdims=True))

    def bwd(g, needs):
        return (np.repeat(g / n, n, axis=0),)

    return record(out, (x,), bwd)


def max_rows(x: Tensor) -> Tensor:
    """Columnwise max over rows; ties route gradient to the lowest row index."""
    if x.values.ndim != 2 or x.shape[0] == 0:
        raise DimensionError(f"max_rows needs a nonempty 2-D input, got {x.shape}")
    winners = x.values.argmax(axis=0)  # first occurrence = lowest index
    out = Tensor(x.values.max(axis=0, keepdims=True))

    def bwd(g, needs):
        gx = np.zeros_like(x.values)
        gx[winners, np.arange(x.shape[1])] = g[0]
        return (gx,)

    return record(out, (x,), bwd)


def min_rows(x: Tensor) -> Tensor:
    """Columnwise min over rows; same tie rule as :func:`max_rows`."""
    if x.values.ndim != 2 or x.shape[0] == 0:
        raise DimensionError(f"min_rows needs a nonempty 2-D input, got {x.shape}")
    winners = x.values.argmin(axis=0)
    out = Tensor(x.values.min(axis=0, keepdims=True))

    def bwd(g, needs):
        gx = np.zeros_like(x.values)
        gx[winners, np.arange(x.shape[1])] = g[0]
        return (gx,)

    return record(out, (x,), bwd)


def pool_rows(x: Tensor, groups, mode: str) -> Tensor:
    """Pool row subsets in one tape node: one output row per group.

    ``mode`` is ``mean`` (empty group pools to zero), ``max`` or ``max_min``
    (columnwise max concatenated with columnwise min; groups must be
    nonempty for the max modes).
    """
    if mode not in ("mean", "max", "max_min"):
        raise HgBenchError(f"unknown pooling mode {mode!r}")
    groups = [np.asarray(g, dtype=np.int64) for g in groups]
    n, d = x.shape
    for g in groups:
        if len(g) == 0 and mode != "mean":
            raise HgBenchError(f"{mode} pooling over an empty group")
        if len(g) and (g.min() < 0 or g.max() >= n):
            raise DimensionError(f"pooling index out of range for {n} rows")
    width = 2 * d if mode == "max_min" else d
    vals = np.zeros((len(groups), width))
    max_pos = np.zeros((len(groups), d), dtype=np.int64) if mode != "mean" else None
    min_pos = np.zeros((len(groups), d), dtype=np.int64) if mode == "max_min" else None
    for gi, g in enumerate(groups):
        if len(g) == 0:
            continue
        block = x.values[g]
        if mode == "mean":
            vals[gi] = block.mean(axis=0)
        else:
            am = block.argmax(axis=0)
            max_pos[gi] = g[am]
            vals[gi, :d] = block[am, np.arange(d)]
            if mode == "max_min":
                an = block.argmin(axis=0)
                min_pos[gi] = g[an]
                vals[gi, d:] = block[an, np.arange(d)]
    out = Tensor(vals)

    def bwd(g_out, needs):
        gx = np.zeros_like(x.values)
        cols = np.arange(d)
        for gi, g in enumerate(groups):
            if len(g) == 0:
                continue
            if mode == "mean":
                gx[g] += g_out[gi] / len(g)
            else:
                np.add.at(gx, (max_pos[gi], cols), g_out[gi, :d])
                if mode == "max_min":
                    np.add.at(gx, (min_pos[gi], cols), g_out[gi, d:])
        return (gx,)

    return record(out, (x,), bwd)


def log_softmax_rows(x: Tensor) -> Tensor:
    if x.values.ndim != 2:
        raise DimensionError(f"log_softmax_rows needs 2-D input, got {x.shape}")
    shifted = x.values - x.values.max(axis=1, keepdims=True)
    lsm = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    out = Tensor(lsm)

    def bwd(g, needs):
        return (g - np.exp(lsm) * g.sum(axis=1, keepdims=True),)

    return record(out, (x,), bwd)


def sum_all(x: Tensor) -> Tensor:
    out = Tensor(x.values.sum())
    return record(out, (x,), lambda g, needs: (np.broadcast_to(g, x.shape).copy(),))


def nll_from_log_probs(log_probs: Tensor, labels) -> Tensor:
    """Mean negative log-likelihood of the given class per row."""
    labels = np.asarray(labels, dtype=np.int64)
    n, c = log_probs.shape
    if labels.shape != (n,):
        raise DimensionError(f"labels shape {labels.shape} != ({n},)")
    if len(labels) == 0:
        raise HgBenchError("nll over zero rows")
    if labels.min() < 0 or labels.max() >= c:
        raise HgBenchError(f"label outside [0, {c})")
    picked = log_probs.values[np.arange(n), labels]
    out = Tensor(-picked.mean())

    def bwd(g, needs):
        gx = np.zeros_like(log_probs.values)
        gx[np.arange(n), labels] = -float(g) / n
        return (gx,)

    return record(out, (log_probs,), bwd)


def cross_entropy_loss(logits: Tensor, labels, mask) -> Tensor:
    """Mean NLL over the masked rows, computed through log-softmax."""
    mask = np.asarray(mask, dtype=np.int64)
    if len(mask) == 0:
        raise HgBenchError("cross_entropy_loss over an empty mask")
    labels = np.asarray(labels, dtype=np.int64)
    picked = row_gather(logits, mask)
    return nll_from_log_probs(log_softmax_rows(picked), labels[mask])


def binary_logistic_loss(scores: Tensor, targets) -> Tensor:
    """Mean sigmoid cross-entropy of logits against 0/1 targets."""
    targets = np.asarray(targets, dtype=np.float64)
    v = scores.values.reshape(-1)
    if targets.shape != v.shape:
        raise DimensionError(
            f"targets shape {targets.shape} != scores shape {v.shape}"
        )
    if v.size == 0:
        raise HgBenchError("binary_logistic_loss over zero items")
    per_item = np.maximum(v, 0.0) - v * targets + np.log1p(np.exp(-np.abs(v)))
    out = Tensor(per_item.mean())

    def bwd(g, needs):
        gs = (_sigmoid_vals(v) - targets) * (float(g) / v.size)
        return (gs.reshape(scores.shape),)

    return record(out, (scores,), bwd)


ACTIVATIONS = {
    "relu": relu,
    "leaky_relu": leaky_relu,
    "sigmoid": sigmoid,
    "identity": lambda x: x,
}


def activation_fn(name: str):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise HgBenchError(
            f"unknown activation {name!r}; known: {sorted(ACTIVATIONS)}"
        ) from None
