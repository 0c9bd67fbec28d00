"""Dataset container and the deterministic split engine."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import HgBenchError
from ..hypergraph import Hypergraph


@dataclass
class Dataset:
    """Hypergraph(s) plus features and labels at node, edge, or graph level.

    Node- and edge-level datasets hold exactly one hypergraph; graph-level
    datasets hold one hypergraph and one feature matrix per sample. The
    optional per-node ``sensitive`` 0/1 vector marks a fairness dataset.
    """

    level: str
    name: str
    hypergraphs: list[Hypergraph]
    features: list[np.ndarray]
    labels: np.ndarray
    num_classes: int
    sensitive: np.ndarray | None = None

    def __post_init__(self):
        if self.level not in ("node", "edge", "graph"):
            raise HgBenchError(f"unknown dataset level {self.level!r}")
        if len(self.hypergraphs) != len(self.features):
            raise HgBenchError("one feature matrix per hypergraph required")
        for hg, x in zip(self.hypergraphs, self.features):
            if x.shape[0] != hg.num_nodes:
                raise HgBenchError(
                    f"{self.name}: feature rows {x.shape[0]} != "
                    f"num_nodes {hg.num_nodes}"
                )
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.labels) and (
            self.labels.min() < 0 or self.labels.max() >= self.num_classes
        ):
            raise HgBenchError(f"{self.name}: label outside [0, {self.num_classes})")
        if self.sensitive is not None:
            self.sensitive = np.asarray(self.sensitive, dtype=np.int64)
            if self.sensitive.shape[0] != self.hypergraphs[0].num_nodes:
                raise HgBenchError(f"{self.name}: sensitive length mismatch")

    @property
    def hypergraph(self) -> Hypergraph:
        if self.level == "graph":
            raise HgBenchError("graph-level dataset holds many hypergraphs")
        return self.hypergraphs[0]

    @property
    def feature_matrix(self) -> np.ndarray:
        if self.level == "graph":
            raise HgBenchError("graph-level dataset holds many feature matrices")
        return self.features[0]

    def num_units(self, task: str) -> int:
        """Count of the splittable unit for a task."""
        if task == "node":
            return self.hypergraphs[0].num_nodes
        if task == "edge":
            return self.hypergraphs[0].num_edges
        if task == "graph":
            return len(self.hypergraphs)
        raise HgBenchError(f"unknown task {task!r}")


@dataclass
class SplitAssignment:
    """Disjoint, exhaustive train/val/test index sets over a unit range."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int
    ratios: tuple = (0.5, 0.25, 0.25)

    def validate(self, n: int):
        parts = [self.train, self.val, self.test]
        combined = np.concatenate(parts)
        if len(combined) != n or len(np.unique(combined)) != n:
            raise HgBenchError("split is not a disjoint cover of the index set")

    def to_json(self) -> dict:
        return {
            "train": self.train.tolist(),
            "val": self.val.tolist(),
            "test": self.test.tolist(),
            "seed": self.seed,
            "ratios": list(self.ratios),
        }


def _cut_counts(n: int, ratios) -> tuple[int, int, int]:
    # floor/floor/remainder; epsilon absorbs float noise like 10*0.8=7.999...
    n_train = int(math.floor(ratios[0] * n + 1e-9))
    n_val = int(math.floor(ratios[1] * n + 1e-9))
    return n_train, n_val, n - n_train - n_val


def split_indices(n: int, ratios, seed: int, labels=None) -> SplitAssignment:
    """Seeded shuffle, then a contiguous floor/floor/remainder cut.

    With ``labels`` the cut is applied per class and merged (stratified).
    Raises if any of the three splits would be empty.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or abs(sum(ratios) - 1.0) > 1e-9:
        raise HgBenchError(f"ratios must sum to 1, got {ratios}")
    rng = np.random.default_rng(seed)
    buckets = [[], [], []]
    if labels is None:
        perm = rng.permutation(n)
        n_tr, n_va, n_te = _cut_counts(n, ratios)
        buckets[0].append(perm[:n_tr])
        buckets[1].append(perm[n_tr : n_tr + n_va])
        buckets[2].append(perm[n_tr + n_va :])
    else:
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise HgBenchError(f"labels shape {labels.shape} != ({n},)")
        for c in np.unique(labels):
            idx = np.flatnonzero(labels == c)
            idx = idx[rng.permutation(len(idx))]
            n_tr, n_va, n_te = _cut_counts(len(idx), ratios)
            buckets[0].append(idx[:n_tr])
            buckets[1].append(idx[n_tr : n_tr + n_va])
            buckets[2].append(idx[n_tr + n_va :])
    train, val, test = (
        np.sort(np.concatenate(b)).astype(np.int64) if b else np.empty(0, np.int64)
        for b in buckets
    )
    for part, name in ((train, "train"), (val, "val"), (test, "test")):
        if len(part) == 0:
            raise HgBenchError(f"{name} split received zero items (n={n})")
    out = SplitAssignment(train, val, test, seed=seed, ratios=ratios)
    out.validate(n)
    return out


def split(dataset: Dataset, ratios, seed: int, stratified: bool = False,
          task: str | None = None) -> SplitAssignment:
    """Split a dataset over the unit of ``task`` (defaults to its level)."""
    task = task or dataset.level
    n = dataset.num_units(task)
    labels = None
    if stratified:
        if task == "edge":
            raise HgBenchError("stratified split undefined for hyperedges")
        labels = dataset.labels
    return split_indices(n, ratios, seed, labels=labels)


def standardize_features(x: np.ndarray, train_idx) -> np.ndarray:
    """Zero-mean unit-variance per column, statistics from the train rows.

    Zero-variance columns are centered only. Used for tabular/fairness
    datasets; bag-of-words features stay raw.
    """
    mu = x[train_idx].mean(axis=0)
    sd = x[train_idx].std(axis=0)
    sd = np.where(sd > 0, sd, 1.0)
    return (x - mu) / sd
