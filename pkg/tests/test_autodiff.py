import math

import numpy as np
import pytest

from hgbench import autodiff as ad
from hgbench.errors import DimensionError, HgBenchError, MemoryCapExceeded
from hgbench.kernels import CsrMatrix


def fd_check(loss_fn, arrays, h=1e-5, tol=1e-4):
    """Central finite-difference gradient oracle.

    ``loss_fn(tensors) -> scalar Tensor``; rebuilds the graph per probe so
    the numeric estimate is independent of the tape implementation.
    """
    tensors = [ad.Tensor(a.copy(), requires_grad=True) for a in arrays]
    loss = loss_fn(tensors)
    ad.backward(loss)

    def eval_at(values):
        with_np = [ad.Tensor(v) for v in values]
        with ad.no_grad():
            out = loss_fn(with_np)
        return float(out.values)

    for ti, t in enumerate(tensors):
        analytic = t.grad if t.grad is not None else np.zeros_like(t.values)
        numeric = np.zeros_like(t.values)
        flat = numeric.reshape(-1)
        base = [u.values.copy() for u in tensors]
        for i in range(t.values.size):
            probe = [b.copy() for b in base]
            probe[ti].reshape(-1)[i] += h
            up = eval_at(probe)
            probe[ti].reshape(-1)[i] -= 2 * h
            down = eval_at(probe)
            flat[i] = (up - down) / (2 * h)
        scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-8)
        rel = np.abs(analytic - numeric).max() / scale
        assert rel < tol, f"input {ti}: rel error {rel:.3e}"


def away_from_kinks(rng, shape, margin=0.1):
    """Random values with no entry near 0 and no near-ties within columns."""
    while True:
        v = rng.standard_normal(shape) * 2.0
        if np.abs(v).min() < margin:
            continue
        if v.ndim == 2 and v.shape[0] > 1:
            s = np.sort(v, axis=0)
            if np.min(np.diff(s, axis=0)) < margin:
                continue
        return v


def half_matrix():
    return CsrMatrix.from_coo(
        [0, 0, 1, 1], [0, 1, 0, 1], [0.5, 0.5, 0.5, 0.5], (2, 2)
    )


class TestForward:
    def test_matmul_identity(self):
        x = ad.Tensor(np.arange(12.0).reshape(3, 4))
        out = ad.matmul(ad.Tensor(np.eye(3)), x)
        np.testing.assert_array_equal(out.values, x.values)

    def test_matmul_shape_error_names_shapes(self):
        with pytest.raises(DimensionError, match=r"\(2, 3\).*\(2, 3\)"):
            ad.matmul(ad.Tensor(np.zeros((2, 3))), ad.Tensor(np.zeros((2, 3))))

    def test_relu(self):
        out = ad.relu(ad.Tensor([[-1.0, 2.0]]))
        np.testing.assert_array_equal(out.values, [[0.0, 2.0]])

    def test_spmm_two_node_shared_hyperedge(self):
        # P entries all 1/2 (hand-built); X = [[2],[4]] -> [[3],[3]]
        out = ad.spmm(half_matrix(), ad.Tensor([[2.0], [4.0]]))
        np.testing.assert_allclose(out.values, [[3.0], [3.0]])

    def test_log_softmax_rows_normalized(self):
        rng = np.random.default_rng(0)
        x = ad.Tensor(rng.standard_normal((13, 7)) * 30)
        out = ad.log_softmax_rows(x)
        sums = np.exp(out.values).sum(axis=1)
        np.testing.assert_allclose(sums, np.ones(13), atol=1e-9)

    def test_max_rows_tie_breaks_low_index(self):
        x = ad.Tensor([[1.0, 5.0], [1.0, 7.0], [1.0, 6.0]], requires_grad=True)
        out = ad.max_rows(x)
        np.testing.assert_array_equal(out.values, [[1.0, 7.0]])
        ad.backward(ad.sum_all(out))
        # column 0 ties: gradient must land on row 0 only
        np.testing.assert_array_equal(x.grad, [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])

    def test_dropout_eval_is_identity(self):
        x = ad.Tensor(np.ones((4, 4)))
        assert ad.dropout(x, 0.5, 1, train=False) is x

    def test_dropout_train_statistics(self):
        rng = np.random.default_rng(7)
        x = ad.Tensor(np.ones((500, 200)))
        p = 0.3
        out = ad.dropout(x, p, rng, train=True).values
        n = out.size
        zero_frac = (out == 0).mean()
        sigma = math.sqrt(p * (1 - p) / n)
        assert abs(zero_frac - p) < 3 * sigma
        survivors = out[out != 0]
        np.testing.assert_allclose(survivors, 1.0 / (1 - p))

    def test_dropout_deterministic_given_seed(self):
        x = ad.Tensor(np.ones((50, 50)))
        a = ad.dropout(x, 0.4, 123, train=True).values
        b = ad.dropout(x, 0.4, 123, train=True).values
        assert np.array_equal(a, b)

    def test_pool_rows_modes(self):
        x = ad.Tensor([[1.0, 4.0], [3.0, 2.0], [5.0, 0.0]])
        mean = ad.pool_rows(x, [[0, 1], [2]], "mean")
        np.testing.assert_allclose(mean.values, [[2.0, 3.0], [5.0, 0.0]])
        mx = ad.pool_rows(x, [[0, 1, 2]], "max")
        np.testing.assert_allclose(mx.values, [[5.0, 4.0]])
        mm = ad.pool_rows(x, [[0, 1]], "max_min")
        np.testing.assert_allclose(mm.values, [[3.0, 4.0, 1.0, 2.0]])
        empty = ad.pool_rows(x, [[]], "mean")
        np.testing.assert_allclose(empty.values, [[0.0, 0.0]])


class TestLosses:
    def test_cross_entropy_saturated(self):
        loss = ad.cross_entropy_loss(ad.Tensor([[1e9, 0.0]]), [0], [0])
        assert float(loss.values) == pytest.approx(0.0, abs=1e-9)

    def test_cross_entropy_uniform(self):
        loss = ad.cross_entropy_loss(ad.Tensor([[0.0, 0.0]]), [0], [0])
        assert float(loss.values) == pytest.approx(math.log(2))

    def test_cross_entropy_batch_uniform(self):
        # two uniform rows over 4 classes -> mean NLL = ln 4
        logits = ad.Tensor(np.zeros((2, 4)))
        loss = ad.cross_entropy_loss(logits, [1, 3], [0, 1])
        assert float(loss.values) == pytest.approx(math.log(4))

    def test_cross_entropy_empty_mask_errors(self):
        with pytest.raises(HgBenchError):
            ad.cross_entropy_loss(ad.Tensor([[0.0, 0.0]]), [0], [])

    def test_binary_logistic_values(self):
        assert float(
            ad.binary_logistic_loss(ad.Tensor([0.0]), [1]).values
        ) == pytest.approx(math.log(2))
        assert float(
            ad.binary_logistic_loss(ad.Tensor([1e9]), [1]).values
        ) == pytest.approx(0.0, abs=1e-12)
        assert float(
            ad.binary_logistic_loss(ad.Tensor([0.0, 0.0]), [1, 0]).values
        ) == pytest.approx(math.log(2))


class TestBackward:
    def test_linear_gradient(self):
        w = ad.Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
        x = ad.Tensor([[5.0], [6.0]])
        ad.backward(ad.sum_all(ad.matmul(w, x)))
        np.testing.assert_allclose(w.grad, [[5.0, 6.0], [5.0, 6.0]])

    def test_relu_gradient_zero_at_negative(self):
        x = ad.Tensor([[-2.0, 3.0]], requires_grad=True)
        ad.backward(ad.sum_all(ad.relu(x)))
        np.testing.assert_array_equal(x.grad, [[0.0, 1.0]])

    def test_gradients_accumulate_for_shared_leaf(self):
        x = ad.Tensor([[2.0]], requires_grad=True)
        out = ad.add(ad.scale(x, 3.0), ad.scale(x, 4.0))
        ad.backward(ad.sum_all(out))
        np.testing.assert_allclose(x.grad, [[7.0]])

    def test_backward_requires_scalar(self):
        x = ad.Tensor([[1.0, 2.0]], requires_grad=True)
        with pytest.raises(DimensionError):
            ad.backward(ad.relu(x))
        ad.clear_tape()

    def test_tape_cleared_after_backward(self):
        x = ad.Tensor([[1.0, -2.0]], requires_grad=True)
        ad.backward(ad.sum_all(ad.relu(x)))
        assert ad.tape_length() == 0

    def test_two_layer_net_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((5, 4))
        s = CsrMatrix.from_coo([0, 1, 2, 3, 4], [1, 2, 3, 4, 0], np.ones(5), (5, 5))

        def net(ts):
            w1, b1, w2 = ts
            h = ad.relu(ad.add(ad.matmul(ad.spmm(s, ad.Tensor(x)), w1), b1))
            logits = ad.matmul(h, w2)
            return ad.cross_entropy_loss(logits, [0, 1, 2, 0, 1], [0, 1, 2, 3, 4])

        fd_check(
            net,
            [
                rng.standard_normal((4, 6)),
                rng.standard_normal((1, 6)),
                rng.standard_normal((6, 3)),
            ],
        )


def _op_cases(rng):
    """One randomized scalar-valued probe per differentiable op."""
    n = int(rng.integers(2, 7))
    d = int(rng.integers(2, 6))
    k = int(rng.integers(2, 6))
    smooth = lambda shape: rng.standard_normal(shape)
    kinky = lambda shape: away_from_kinks(rng, shape)
    rows = rng.integers(0, n, size=max(n // 2, 1))
    cols = rng.integers(0, n, size=len(rows))
    sparse = CsrMatrix.from_coo(rows, cols, rng.standard_normal(len(rows)), (n, n))
    groups = [rng.permutation(n)[: max(1, int(rng.integers(1, n + 1)))] for _ in range(3)]
    labels = rng.integers(0, d, size=n)
    targets = rng.integers(0, 2, size=n)
    drop_seed = int(rng.integers(0, 2**31))
    return {
        "matmul": (lambda ts: ad.sum_all(ad.matmul(ts[0], ts[1])),
                   [smooth((n, k)), smooth((k, d))]),
        "spmm": (lambda ts: ad.sum_all(ad.spmm(sparse, ts[0])), [smooth((n, d))]),
        "add": (lambda ts: ad.sum_all(ad.add(ts[0], ts[1])),
                [smooth((n, d)), smooth((n, d))]),
        "add_bias": (lambda ts: ad.sum_all(ad.add(ts[0], ts[1])),
                     [smooth((n, d)), smooth((1, d))]),
        "scale": (lambda ts: ad.sum_all(ad.scale(ts[0], -1.7)), [smooth((n, d))]),
        "relu": (lambda ts: ad.sum_all(ad.relu(ts[0])), [kinky((n, d))]),
        "leaky_relu": (lambda ts: ad.sum_all(ad.leaky_relu(ts[0], 0.2)),
                       [kinky((n, d))]),
        "sigmoid": (lambda ts: ad.sum_all(ad.sigmoid(ts[0])), [smooth((n, d))]),
        "dropout": (lambda ts: ad.sum_all(
            ad.dropout(ts[0], 0.4, np.random.default_rng(drop_seed), train=True)),
            [smooth((n, d))]),
        "concat_rows": (lambda ts: ad.sum_all(ad.concat_rows(ts)),
                        [smooth((n, d)), smooth((k, d))]),
        "concat_cols": (lambda ts: ad.sum_all(ad.concat_cols(ts)),
                        [smooth((n, d)), smooth((n, k))]),
        "row_gather": (lambda ts: ad.sum_all(ad.row_gather(ts[0], rows)),
                       [smooth((n, d))]),
        "mean_rows": (lambda ts: ad.sum_all(ad.mean_rows(ts[0])), [smooth((n, d))]),
        "max_rows": (lambda ts: ad.sum_all(ad.max_rows(ts[0])), [kinky((n, d))]),
        "min_rows": (lambda ts: ad.sum_all(ad.min_rows(ts[0])), [kinky((n, d))]),
        "pool_mean": (lambda ts: ad.sum_all(ad.pool_rows(ts[0], groups, "mean")),
                      [smooth((n, d))]),
        "pool_max": (lambda ts: ad.sum_all(ad.pool_rows(ts[0], groups, "max")),
                     [kinky((n, d))]),
        "pool_max_min": (lambda ts: ad.sum_all(
            ad.pool_rows(ts[0], groups, "max_min")), [kinky((n, d))]),
        "log_softmax": (lambda ts: ad.sum_all(
            ad.scale(ad.log_softmax_rows(ts[0]), 0.3)), [smooth((n, d))]),
        "cross_entropy": (lambda ts: ad.cross_entropy_loss(ts[0], labels, rows),
                          [smooth((n, d))]),
        "binary_logistic": (lambda ts: ad.binary_logistic_loss(ts[0], targets),
                            [smooth((n, 1))]),
    }


OP_NAMES = sorted(_op_cases(np.random.default_rng(0)))


@pytest.mark.parametrize("op_name", OP_NAMES)
def test_gradient_checks_100_random_instances(op_name):
    checked = 0
    seed = 0
    while checked < 100:
        rng = np.random.default_rng(hash((op_name, seed)) % 2**32)
        seed += 1
        loss_fn, arrays = _op_cases(rng)[op_name]
        fd_check(loss_fn, arrays)
        checked += 1


class TestAdam:
    def test_zero_grad_zero_decay_leaves_params(self):
        p = ad.Tensor([[1.0, -2.0]], requires_grad=True)
        params = {"w": p}
        state = ad.AdamState(params)
        p.grad = np.zeros_like(p.values)
        before = p.values.copy()
        ad.adam_step(params, state, lr=0.1)
        np.testing.assert_array_equal(p.values, before)

    def test_first_step_moves_by_lr_times_sign(self):
        # derived from bias-corrected algebra: with one step,
        # delta = -lr * g / (|g| + eps); choose |g| large so eps vanishes
        p = ad.Tensor([[0.0]], requires_grad=True)
        params = {"w": p}
        state = ad.AdamState(params)
        p.grad = np.array([[1e6]])
        ad.adam_step(params, state, lr=0.1)
        assert abs(p.values[0, 0] - (-0.1)) < 1e-12

    def test_decay_equals_explicit_l2_gradient(self):
        lam = 0.0005
        a = ad.Tensor([[2.0, -3.0]], requires_grad=True)
        b = ad.Tensor([[2.0, -3.0]], requires_grad=True)
        pa, pb = {"w": a}, {"w": b}
        sa, sb = ad.AdamState(pa), ad.AdamState(pb)
        a.grad = np.zeros_like(a.values)
        b.grad = lam * b.values.copy()
        ad.adam_step(pa, sa, lr=0.01, weight_decay=lam)
        ad.adam_step(pb, sb, lr=0.01, weight_decay=0.0)
        np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-15)


class TestMemoryTracking:
    def test_large_tensor_counts(self):
        ad.reset_memory(cap=None)
        t = ad.Tensor(np.zeros((1000, 100)))
        assert ad.memory_high_water() >= 800_000
        del t

    def test_reset_zeroes_peak(self):
        ad.reset_memory(cap=None)
        assert ad.memory_high_water() == 0

    def test_alloc_free_alloc_high_water(self):
        ad.reset_memory(cap=None)
        t = ad.Tensor(np.zeros((1000, 100)))
        peak_one = ad.memory_high_water()
        del t
        t2 = ad.Tensor(np.zeros((1000, 100)))
        assert ad.memory_high_water() == peak_one
        del t2

    def test_peak_monotone_within_run(self):
        ad.reset_memory(cap=None)
        seen = []
        for _ in range(5):
            t = ad.Tensor(np.zeros((100, 100)))
            seen.append(ad.memory_high_water())
            del t
        assert seen == sorted(seen)

    def test_cap_raises(self):
        ad.reset_memory(cap=1000)
        with pytest.raises(MemoryCapExceeded):
            ad.Tensor(np.zeros((1000, 100)))
        ad.reset_memory(cap=None)
