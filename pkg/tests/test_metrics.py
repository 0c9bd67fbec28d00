import math
from fractions import Fraction

import numpy as np
import pytest

from hgbench.errors import HgBenchError
from hgbench.metrics import (
    accuracy,
    aggregate,
    auroc,
    average_precision,
    demographic_parity,
    equalized_odds,
    macro_f1,
)


def auroc_bruteforce(scores, labels):
    """Oracle: concordant-pair count over all positive-negative pairs."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def ap_bruteforce(scores, labels):
    """Oracle: full prefix scan of (recall step) x precision, exact."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    n_pos = sum(1 for y in labels if y == 1)
    ap = Fraction(0)
    prev_recall = Fraction(0)
    hits = 0
    for k, idx in enumerate(order, start=1):
        if labels[idx] == 1:
            hits += 1
        recall = Fraction(hits, n_pos)
        precision = Fraction(hits, k)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
    return float(ap)


class TestAccuracy:
    def test_identical(self):
        assert accuracy([0, 1, 2], [0, 1, 2]) == 1.0

    def test_all_wrong(self):
        assert accuracy([0, 1], [1, 0]) == 0.0

    def test_three_of_four(self):
        assert accuracy([0, 1, 1, 0], [0, 1, 1, 1]) == 0.75

    def test_complements_error_rate(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(1, 40))
            pred = rng.integers(0, 3, n)
            truth = rng.integers(0, 3, n)
            err = float(np.mean(pred != truth))
            assert accuracy(pred, truth) + err == pytest.approx(1.0)


class TestMacroF1:
    def test_perfect_binary(self):
        assert macro_f1([0, 1, 0, 1], [0, 1, 0, 1], 2) == 1.0

    def test_all_one_class_prediction(self):
        # truth balanced binary, predict all 0: F1_0 = 2/3, F1_1 = 0
        got = macro_f1([0, 0, 0, 0], [0, 0, 1, 1], 2)
        assert got == pytest.approx((2 / 3 + 0) / 2)

    def test_invariant_under_class_relabeling(self):
        rng = np.random.default_rng(1)
        for _ in range(25):
            c = int(rng.integers(2, 6))
            n = int(rng.integers(4, 30))
            pred = rng.integers(0, c, n)
            truth = rng.integers(0, c, n)
            relabel = rng.permutation(c)
            assert macro_f1(pred, truth, c) == pytest.approx(
                macro_f1(relabel[pred], relabel[truth], c)
            )


class TestRankingMetrics:
    def test_auroc_hand_case(self):
        # brute force over pos-neg pairs: concordant 3 of 4 -> 0.75
        assert auroc([0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0]) == 0.75

    def test_auroc_separated(self):
        assert auroc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_auroc_all_ties(self):
        assert auroc([0.5, 0.5, 0.5, 0.5], [1, 0, 1, 0]) == 0.5

    def test_auroc_degenerate_labels_error(self):
        with pytest.raises(HgBenchError):
            auroc([0.1, 0.2], [1, 1])

    def test_ap_perfect(self):
        assert average_precision([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_ap_hand_case(self):
        got = average_precision([0.9, 0.8, 0.7], [0, 1, 1])
        assert got == pytest.approx((1 / 2 + 2 / 3) / 2)

    def test_ap_single_positive_ranked_last(self):
        n = 7
        scores = np.arange(n, 0, -1, dtype=float)
        labels = np.zeros(n, dtype=int)
        labels[-1] = 1
        assert average_precision(scores, labels) == pytest.approx(1 / n)

    def test_against_bruteforce_oracles_1000_instances(self):
        rng = np.random.default_rng(42)
        for trial in range(1000):
            n = int(rng.integers(2, 51))
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[rng.integers(0, n)] = 1 - labels[0]
            if trial % 2 == 0:
                scores = rng.choice([0.1, 0.25, 0.5, 0.75], size=n)  # heavy ties
            else:
                scores = rng.standard_normal(n)
            assert auroc(scores, labels) == auroc_bruteforce(scores, labels)
            assert average_precision(scores, labels) == ap_bruteforce(scores, labels)


class TestFairness:
    def test_equal_rates_zero(self):
        assert demographic_parity([1, 0, 1, 0], [0, 0, 1, 1]) == 0.0

    def test_rate_gap_half(self):
        # group 0 accepts 3/4, group 1 accepts 1/4
        pred = [1, 1, 1, 0, 1, 0, 0, 0]
        sens = [0, 0, 0, 0, 1, 1, 1, 1]
        assert demographic_parity(pred, sens) == pytest.approx(0.5)

    def test_all_accepted_zero(self):
        assert demographic_parity([1, 1, 1, 1], [0, 0, 1, 1]) == 0.0

    def test_eo_equal_tpr_zero(self):
        pred = [1, 0, 1, 0]
        truth = [1, 1, 1, 1]
        sens = [0, 0, 1, 1]
        assert equalized_odds(pred, truth, sens) == 0.0

    def test_eo_gap_half(self):
        # TPR 1.0 (group 0) vs 0.5 (group 1)
        pred = [1, 1, 1, 0]
        truth = [1, 1, 1, 1]
        sens = [0, 0, 1, 1]
        assert equalized_odds(pred, truth, sens) == pytest.approx(0.5)

    def test_eo_requires_positives_in_both_groups(self):
        with pytest.raises(HgBenchError):
            equalized_odds([1, 1], [1, 0], [0, 1])

    def test_symmetric_in_group_labels_and_bounded(self):
        rng = np.random.default_rng(9)
        for _ in range(50):
            n = int(rng.integers(4, 40))
            pred = rng.integers(0, 2, n)
            truth = rng.integers(0, 2, n)
            sens = rng.integers(0, 2, n)
            if sens.min() == sens.max():
                sens[0] = 1 - sens[0]
            dp = demographic_parity(pred, sens)
            assert 0.0 <= dp <= 1.0
            assert dp == pytest.approx(demographic_parity(pred, 1 - sens))
            if (truth[sens == 0] == 1).any() and (truth[sens == 1] == 1).any():
                eo = equalized_odds(pred, truth, sens)
                assert 0.0 <= eo <= 1.0
                assert eo == pytest.approx(equalized_odds(pred, truth, 1 - sens))


class TestAggregate:
    def test_identical_runs_zero_std(self):
        rep = aggregate("node", [0, 1, 2], {"acc": [0.8, 0.8, 0.8]})
        assert rep.mean["acc"] == pytest.approx(0.8)
        assert rep.std["acc"] == 0.0

    def test_sample_std(self):
        rep = aggregate("node", [0, 1], {"acc": [1.0, 3.0]})
        assert rep.mean["acc"] == pytest.approx(2.0)
        assert rep.std["acc"] == pytest.approx(math.sqrt(2))

    def test_order_invariant(self):
        a = aggregate("node", [0, 1, 2], {"acc": [0.1, 0.5, 0.9]})
        b = aggregate("node", [2, 1, 0], {"acc": [0.9, 0.5, 0.1]})
        assert a.mean["acc"] == pytest.approx(b.mean["acc"])
        assert a.std["acc"] == pytest.approx(b.std["acc"])

    def test_length_mismatch_rejected(self):
        with pytest.raises(HgBenchError):
            aggregate("node", [0, 1], {"acc": [0.5]})
