"""Wall-time and peak-memory profiling for a single training run."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .autodiff import memory_high_water, reset_memory


@dataclass
class RunProfile:
    wall_time_to_best_s: float
    total_wall_time_s: float
    peak_memory_bytes: int
    epochs_run: int
    spmm_calls_in_loop: int = 0

    def __post_init__(self):
        assert self.wall_time_to_best_s <= self.total_wall_time_s + 1e-9
        assert self.peak_memory_bytes >= 0

    def to_json(self) -> dict:
        return {
            "wall_time_to_best_s": self.wall_time_to_best_s,
            "total_wall_time_s": self.total_wall_time_s,
            "peak_memory_bytes": self.peak_memory_bytes,
            "epochs_run": self.epochs_run,
            "spmm_calls_in_loop": self.spmm_calls_in_loop,
        }


def profile(run) -> tuple[object, RunProfile]:
    """Run a training closure under a fresh memory tracker.

    ``run()`` must return an object exposing ``seconds_to_best``,
    ``epochs_run`` and ``spmm_calls_in_loop`` (a TrainedModel does).
    Returns (result, RunProfile). Must be called on the thread that owns
    the run; the tracker is thread-local.
    """
    reset_memory()
    t0 = time.perf_counter()
    result = run()
    total = time.perf_counter() - t0
    prof = RunProfile(
        wall_time_to_best_s=min(result.seconds_to_best, total),
        total_wall_time_s=total,
        peak_memory_bytes=memory_high_water(),
        epochs_run=result.epochs_run,
        spmm_calls_in_loop=result.spmm_calls_in_loop,
    )
    return result, prof
