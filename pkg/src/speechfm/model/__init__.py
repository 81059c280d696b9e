from .config import ENCODER_TYPES, PRESETS, ModelConfig
from .layers import (
    ConformerBlock,
    EBranchformerBlock,
    Module,
    MultiHeadAttention,
    TransformerBlock,
    causal_mask,
    sinusoidal_pe,
)
from .model import (
    Decoder,
    DecoderBlock,
    DecoderSession,
    Encoder,
    EncoderOutput,
    InputTooShortError,
    Model,
    SubsampleFrontend,
    build_model,
    count_params,
)

__all__ = [
    "ENCODER_TYPES",
    "PRESETS",
    "ConformerBlock",
    "Decoder",
    "DecoderBlock",
    "DecoderSession",
    "EBranchformerBlock",
    "Encoder",
    "EncoderOutput",
    "InputTooShortError",
    "Model",
    "ModelConfig",
    "Module",
    "MultiHeadAttention",
    "SubsampleFrontend",
    "TransformerBlock",
    "build_model",
    "causal_mask",
    "count_params",
    "sinusoidal_pe",
]
