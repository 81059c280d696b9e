from .align import AlignmentOp, ErrorCounts, align, cer, count_errors, error_rate, wer
from .bias import BiasReport, biased_wer, corpus_biased_wer
from .bleu import BleuStats, bleu, bleu_stats
from .normalize import NORMALIZER_NAME, basic_normalize
from .speed import speedup

__all__ = [
    "NORMALIZER_NAME",
    "AlignmentOp",
    "BiasReport",
    "BleuStats",
    "ErrorCounts",
    "align",
    "basic_normalize",
    "biased_wer",
    "bleu",
    "bleu_stats",
    "cer",
    "corpus_biased_wer",
    "count_errors",
    "error_rate",
    "speedup",
    "wer",
]
