"""Dense f64 tensor core: backend kernels, RNG, tape autodiff, Adam."""

from .kernels import BACKEND, available_backends
from .rng import Stream, splitmix64
from .initializers import glorot_uniform, init, uniform, zeros
from .tensor import (
    Tape,
    Tensor,
    add,
    add_bias,
    add_n,
    bce_with_logits,
    concat_cols,
    dropout,
    gather_rows,
    gradients,
    layer_norm,
    leaky_relu,
    masked_softmax_xent,
    matmul,
    mean_all,
    mean_over_rows,
    mul,
    outer_add,
    relu,
    reshape,
    scale,
    sigmoid,
    slice_cols,
    softmax_rows,
    sub,
    sum_all,
    transpose,
)
from .optim import Adam, clip_global_norm

__all__ = [
    "BACKEND",
    "available_backends",
    "Stream",
    "splitmix64",
    "glorot_uniform",
    "init",
    "uniform",
    "zeros",
    "Tape",
    "Tensor",
    "add",
    "add_bias",
    "add_n",
    "bce_with_logits",
    "concat_cols",
    "dropout",
    "gather_rows",
    "gradients",
    "layer_norm",
    "leaky_relu",
    "masked_softmax_xent",
    "matmul",
    "mean_all",
    "mean_over_rows",
    "mul",
    "outer_add",
    "relu",
    "reshape",
    "scale",
    "sigmoid",
    "slice_cols",
    "softmax_rows",
    "sub",
    "sum_all",
    "transpose",
    "Adam",
    "clip_global_norm",
]
