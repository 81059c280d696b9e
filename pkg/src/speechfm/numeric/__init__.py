from .functional import (
    ConfigError,
    EmptyBatchError,
    cross_entropy,
    depthwise_conv1d,
    embedding,
    gelu,
    glu,
    layer_norm,
    log_softmax,
    softmax,
    swish,
)
from .gradcheck import grad_check
from .rng import SeededRng
from .tensor import (
    Parameter,
    ShapeError,
    Tensor,
    concat,
    default_dtype,
    is_grad_enabled,
    matmul,
    no_grad,
    pad,
    precision,
    where,
)

__all__ = [
    "ConfigError",
    "EmptyBatchError",
    "Parameter",
    "SeededRng",
    "ShapeError",
    "Tensor",
    "concat",
    "cross_entropy",
    "default_dtype",
    "depthwise_conv1d",
    "embedding",
    "gelu",
    "glu",
    "grad_check",
    "is_grad_enabled",
    "layer_norm",
    "log_softmax",
    "matmul",
    "no_grad",
    "pad",
    "precision",
    "softmax",
    "swish",
    "where",
]
