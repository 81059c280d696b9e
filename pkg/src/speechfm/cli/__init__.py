from .formats import (
    CHECKPOINT_MAGIC,
    FEATURE_MAGIC,
    BadMagicError,
    Checkpoint,
    ConfigHashError,
    FormatError,
    checkpoint_bytes,
    feature_bytes,
    load_checkpoint,
    load_features,
    parse_checkpoint,
    parse_features,
    save_checkpoint,
    save_features,
)
from .manifest import RunManifest, git_blob_hash
from .main import build_parser, load_model, main, save_model, synth_features

__all__ = [
    "CHECKPOINT_MAGIC",
    "FEATURE_MAGIC",
    "BadMagicError",
    "Checkpoint",
    "ConfigHashError",
    "FormatError",
    "RunManifest",
    "build_parser",
    "checkpoint_bytes",
    "feature_bytes",
    "git_blob_hash",
    "load_checkpoint",
    "load_features",
    "load_model",
    "main",
    "parse_checkpoint",
    "parse_features",
    "save_checkpoint",
    "save_features",
    "save_model",
    "synth_features",
]
