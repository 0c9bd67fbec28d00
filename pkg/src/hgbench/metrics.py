"""Task metrics, group-fairness metrics, and multi-seed aggregation.

AUROC uses average ranks for ties, so it equals the probability that a
positive outscores a negative plus half the tie probability. Average
precision walks descending-score prefixes with ties broken by item index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import HgBenchError


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise HgBenchError(f"accuracy shape mismatch: {pred.shape} vs {truth.shape}")
    if len(pred) == 0:
        raise HgBenchError("accuracy of zero predictions")
    return float((pred == truth).mean())


def macro_f1(pred, truth, num_classes: int) -> float:
    """Unweighted mean of per-class F1; a class absent from both sides
    contributes F1 = 0."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    scores = []
    for c in range(num_classes):
        tp = int(np.sum((pred == c) & (truth == c)))
        fp = int(np.sum((pred == c) & (truth != c)))
        fn = int(np.sum((pred != c) & (truth == c)))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def auroc(scores, labels) -> float:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos + n_neg != len(labels):
        raise HgBenchError("labels must be 0/1")
    if n_pos == 0 or n_neg == 0:
        raise HgBenchError("AUROC undefined without both classes")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0  # average rank, 1-based
        i = j + 1
    pos_rank_sum = ranks[labels == 1].sum()
    return float((pos_rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def average_precision(scores, labels) -> float:
    """AP = sum over prefixes of (recall step) * precision; index order
    breaks score ties.

    Accumulated in exact rational arithmetic (prefix precisions are ratios
    of small integers), then rounded once, so the result is independent of
    summation order.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int(np.sum(labels == 1))
    if n_pos == 0:
        raise HgBenchError("AP undefined without positives")
    order = np.lexsort((np.arange(len(scores)), -scores))
    hits = 0
    ap = Fraction(0)
    for k, idx in enumerate(order, start=1):
        if labels[idx] == 1:
            hits += 1
            ap += Fraction(hits, k)
    return float(ap / n_pos)


def _group_rate(mask_value, pred, sensitive, select=None):
    grp = np.asarray(sensitive) == mask_value
    if select is not None:
        grp = grp & select
    if not grp.any():
        return None
    return float(np.mean(np.asarray(pred)[grp] == 1))


def demographic_parity(pred_binary, sensitive) -> float:
    """|P(pred=1 | s=0) - P(pred=1 | s=1)|."""
    r0 = _group_rate(0, pred_binary, sensitive)
    r1 = _group_rate(1, pred_binary, sensitive)
    if r0 is None or r1 is None:
        raise HgBenchError("demographic parity needs both sensitive groups")
    return abs(r0 - r1)


def equalized_odds(pred_binary, truth_binary, sensitive) -> float:
    """True-positive-rate gap: |P(pred=1 | y=1, s=0) - P(pred=1 | y=1, s=1)|."""
    positive = np.asarray(truth_binary) == 1
    r0 = _group_rate(0, pred_binary, sensitive, select=positive)
    r1 = _group_rate(1, pred_binary, sensitive, select=positive)
    if r0 is None or r1 is None:
        raise HgBenchError("equalized odds needs positives in both groups")
    return abs(r0 - r1)


@dataclass
class MetricReport:
    """Per-seed metric values with mean and (n-1) standard deviation."""

    task: str
    seeds: list = field(default_factory=list)
    per_seed: dict = field(default_factory=dict)
    mean: dict = field(default_factory=dict)
    std: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "seeds": list(self.seeds),
            "per_seed": {k: list(map(float, v)) for k, v in self.per_seed.items()},
            "mean": {k: float(v) for k, v in self.mean.items()},
            "std": {k: float(v) for k, v in self.std.items()},
        }


def aggregate(task: str, seeds, per_seed_values: dict) -> MetricReport:
    """Fold per-seed metric dicts into mean +- sample std (order-invariant)."""
    report = MetricReport(task=task, seeds=list(seeds))
    for name, values in per_seed_values.items():
        values = [float(v) for v in values]
        if len(values) != len(report.seeds):
            raise HgBenchError(
                f"metric {name!r} has {len(values)} values for "
                f"{len(report.seeds)} seeds"
            )
        report.per_seed[name] = values
        report.mean[name] = float(np.mean(values))
        if len(values) <= 1 or min(values) == max(values):
            report.std[name] = 0.0
        else:
            report.std[name] = float(np.std(values, ddof=1))
    return report
