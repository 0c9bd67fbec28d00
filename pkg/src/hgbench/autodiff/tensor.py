"""Dense tensors with a thread-confined reverse-mode tape.

Execution is eager: an op runs on numpy arrays, and when gradients are
enabled and an input requires them, the op appends a backward closure to
the calling thread's tape. Recording order is a topological order of the
computation, so one reversed sweep visits every node exactly once.

Every tensor registers its buffer size with a per-thread allocation
tracker; the tracker's high-water mark is the "peak memory" reported by
the efficiency suite, and an optional cap turns oversized experiments
into :class:`MemoryCapExceeded` (the benchmark's OOM stand-in).
"""

from __future__ import annotations

import contextlib
import os
import threading
import weakref

import numpy as np

from ..errors import DimensionError, MemoryCapExceeded

MEM_CAP_ENV = "HGBENCH_MEM_CAP_BYTES"


class _MemoryState(threading.local):
    def __init__(self):
        self.current = 0
        self.peak = 0
        self.cap = _cap_from_env()


def _cap_from_env():
    raw = os.environ.get(MEM_CAP_ENV, "")
    return int(raw) if raw else None


_memory = _MemoryState()


def reset_memory(cap="env"):
    """Zero the calling thread's allocation tracker and set its cap.

    ``cap="env"`` re-reads HGBENCH_MEM_CAP_BYTES; ``None`` removes the cap.
    """
    _memory.current = 0
    _memory.peak = 0
    _memory.cap = _cap_from_env() if cap == "env" else cap


def memory_high_water() -> int:
    """Peak tracked bytes on this thread since the last reset."""
    return _memory.peak


def current_memory() -> int:
    return _memory.current


def _track_alloc(nbytes: int):
    state = _memory
    new = state.current + nbytes
    if state.cap is not None and new > state.cap:
        raise MemoryCapExceeded(
            f"allocation of {nbytes} bytes would exceed cap "
            f"{state.cap} (current {state.current})"
        )
    state.current = new
    if new > state.peak:
        state.peak = new


def _track_free(nbytes: int):
    _memory.current = max(0, _memory.current - nbytes)


class Tensor:
    """Dense array plus autodiff metadata. Double precision by default."""

    __slots__ = ("values", "requires_grad", "grad", "from_op", "__weakref__")

    def __init__(self, values, requires_grad=False, dtype=np.float64):
        arr = np.asarray(values, dtype=dtype)
        self.values = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.from_op = False
        _track_alloc(arr.nbytes)
        weakref.finalize(self, _track_free, arr.nbytes)

    @property
    def shape(self):
        return self.values.shape

    @property
    def is_leaf(self):
        return self.requires_grad and not self.from_op

    def detach(self) -> "Tensor":
        return Tensor(self.values, requires_grad=False, dtype=self.values.dtype)

    def __repr__(self):
        return (
            f"Tensor(shape={self.values.shape}, dtype={self.values.dtype},"
            f" requires_grad={self.requires_grad})"
        )


class _Node:
    __slots__ = ("out", "inputs", "backward")

    def __init__(self, out, inputs, backward):
        self.out = out
        self.inputs = inputs
        self.backward = backward


class _TapeState(threading.local):
    def __init__(self):
        self.nodes = []
        self.grad_enabled = True


_tape = _TapeState()


def tape_length() -> int:
    return len(_tape.nodes)


def clear_tape():
    _tape.nodes.clear()


@contextlib.contextmanager
def no_grad():
    prev = _tape.grad_enabled
    _tape.grad_enabled = False
    try:
        yield
    finally:
        _tape.grad_enabled = prev


def record(out: Tensor, inputs, backward) -> Tensor:
    """Register a backward closure if grads are on and any input needs them.

    ``backward(grad_out, needs)`` must return one gradient per input (or
    None for inputs whose ``needs`` flag is False).
    """
    if _tape.grad_enabled and any(t.requires_grad for t in inputs):
        out.requires_grad = True
        out.from_op = True
        _tape.nodes.append(_Node(out, tuple(inputs), backward))
    return out


def backward(loss: Tensor):
    """Populate ``grad`` on every requires-grad leaf reachable from ``loss``.

    Gradients sum over repeated uses. The tape is cleared afterwards.
    """
    if loss.values.size != 1:
        raise DimensionError(f"backward needs a scalar loss, got shape {loss.shape}")
    grads = {id(loss): np.ones_like(loss.values)}
    try:
        for node in reversed(_tape.nodes):
            g = grads.pop(id(node.out), None)
            if g is None:
                continue
            needs = tuple(t.requires_grad for t in node.inputs)
            in_grads = node.backward(g, needs)
            for t, gi in zip(node.inputs, in_grads):
                if gi is None:
                    continue
                key = id(t)
                if key in grads:
                    grads[key] = grads[key] + gi
                else:
                    grads[key] = gi
        # leaves are never node outputs, so their totals are still in the
        # dict after the sweep; flush each one once
        for node in _tape.nodes:
            for t in node.inputs:
                if t.is_leaf and id(t) in grads:
                    gi = grads.pop(id(t))
                    t.grad = gi if t.grad is None else t.grad + gi
    finally:
        clear_tape()
