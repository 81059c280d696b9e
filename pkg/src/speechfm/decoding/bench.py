from __future__ import annotations

import gc
import time
from dataclasses import dataclass

from ..metrics import speedup
from .greedy import DecodeOptions, greedy_decode


@dataclass
class SuiteTiming:
    label: str
    per_utterance_ms: list[float]
    repeats: int

    @property
    def mean_ms(self) -> float:
        return sum(self.per_utterance_ms) / len(self.per_utterance_ms)

    def speedup_over(self, baseline: "SuiteTiming") -> float:
        """How many times faster this run is than ``baseline``."""
        return speedup(baseline.mean_ms, self.mean_ms)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "repeats": self.repeats,
            "mean_ms": self.mean_ms,
            "per_utterance_ms": list(self.per_utterance_ms),
        }


def timed_decode_suite(
    model,
    features_list,
    opts: DecodeOptions = DecodeOptions(),
    repeats: int = 1,
    label: str = "",
    decode=greedy_decode,
) -> SuiteTiming:
    """Wall-clock decode time per utterance.

    One untimed warm-up decode runs first. Each utterance is then decoded
    ``repeats`` times and the fastest run is kept, which filters scheduler
    noise without changing which model is faster. The garbage collector is
    paused while timing, as ``timeit`` does.
    """
    feats = list(features_list)
    if not feats:
        raise ValueError("benchmark suite is empty")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    decode(model, feats[0], opts)
    times = []
    gc_was_enabled = gc.isenabled()
    gc.collect()
    gc.disable()
    try:
        for f in feats:
            best = float("inf")
            for _ in range(repeats):
                t0 = time.perf_counter()
                decode(model, f, opts)
                best = min(best, (time.perf_counter() - t0) * 1000.0)
            times.append(best)
    finally:
        if gc_was_enabled:
            gc.enable()
    return SuiteTiming(label, times, repeats)
