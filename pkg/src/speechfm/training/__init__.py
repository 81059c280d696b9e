from .adam import Adam, AdamMoments, adam_step
from .compare import (
    DEFAULT_COMPARE_CONFIG,
    Comparison,
    EncoderRun,
    compare_encoders,
    equalize_budget,
)
from .schedule import WarmupSchedule, lr_at_step
from .toytask import IGNORE_ID, Batch, ToyExample, ToyTask, ToyTaskConfig, make_batch
from .trainer import DEFAULT_BATCH_SIZE, DivergenceError, TracePoint, batch_loss, evaluate, train_loop, write_trace_csv

__all__ = [
    "DEFAULT_BATCH_SIZE",
    "DEFAULT_COMPARE_CONFIG",
    "IGNORE_ID",
    "Adam",
    "AdamMoments",
    "Batch",
    "Comparison",
    "DivergenceError",
    "EncoderRun",
    "ToyExample",
    "ToyTask",
    "ToyTaskConfig",
    "TracePoint",
    "WarmupSchedule",
    "adam_step",
    "batch_loss",
    "compare_encoders",
    "equalize_budget",
    "evaluate",
    "lr_at_step",
    "make_batch",
    "train_loop",
    "write_trace_csv",
]
