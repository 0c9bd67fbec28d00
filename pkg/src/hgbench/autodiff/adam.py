"""Adam with bias correction and additive-L2 weight decay."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class AdamState:
    """First/second moment estimates plus the step counter."""

    def __init__(self, params: dict[str, Tensor]):
        self.m = {k: np.zeros_like(p.values) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.values) for k, p in params.items()}
        self.step = 0


def adam_step(
    params: dict[str, Tensor],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
    weight_decay: float = 0.0,
) -> None:
    """One in-place update; parameters with ``grad is None`` are skipped."""
    state.step += 1
    t = state.step
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for name, p in params.items():
        if p.grad is None:
            continue
        g = p.grad
        if weight_decay:
            g = g + weight_decay * p.values
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p.values -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)


def zero_grads(params: dict[str, Tensor]) -> None:
    for p in params.values():
        p.grad = None
