from __future__ import annotations


def speedup(baseline_ms: float, candidate_ms: float) -> float:
    """How many times faster the candidate is than the baseline."""
    if baseline_ms <= 0 or candidate_ms <= 0:
        raise ValueError(f"timings must be positive, got baseline={baseline_ms}, candidate={candidate_ms}")
    return baseline_ms / candidate_ms
