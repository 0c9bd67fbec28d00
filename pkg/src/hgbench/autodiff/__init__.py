from .adam import AdamState, adam_step, zero_grads
from .ops import (
    ACTIVATIONS,
    activation_fn,
    add,
    binary_logistic_loss,
    concat_cols,
    concat_rows,
    cross_entropy_loss,
    dropout,
    leaky_relu,
    log_softmax_rows,
    matmul,
    max_rows,
    mean_rows,
    min_rows,
    nll_from_log_probs,
    pool_rows,
    relu,
    row_gather,
    scale,
    sigmoid,
    spmm,
    sum_all,
)
from .tensor import (
    MEM_CAP_ENV,
    Tensor,
    backward,
    clear_tape,
    current_memory,
    memory_high_water,
    no_grad,
    reset_memory,
    tape_length,
)

__all__ = [
    "ACTIVATIONS",
    "AdamState",
    "MEM_CAP_ENV",
    "Tensor",
    "activation_fn",
    "adam_step",
    "add",
    "backward",
    "binary_logistic_loss",
    "clear_tape",
    "concat_cols",
    "concat_rows",
    "cross_entropy_loss",
    "current_memory",
    "dropout",
    "leaky_relu",
    "log_softmax_rows",
    "matmul",
    "max_rows",
    "mean_rows",
    "memory_high_water",
    "min_rows",
    "nll_from_log_probs",
    "no_grad",
    "pool_rows",
    "relu",
    "reset_memory",
    "row_gather",
    "scale",
    "sigmoid",
    "spmm",
    "sum_all",
    "tape_length",
    "zero_grads",
]
