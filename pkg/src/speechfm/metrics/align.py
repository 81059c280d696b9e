"""Levenshtein alignment and error rates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

MATCH, SUBSTITUTE, INSERT, DELETE = "match", "substitute", "insert", "delete"


@dataclass(frozen=True)
class AlignmentOp:
    kind: str
    ref_word: str | None = None
    hyp_word: str | None = None

    def __post_init__(self):
        has_ref, has_hyp = self.ref_word is not None, self.hyp_word is not None
        ok = {
            MATCH: has_ref and has_hyp,
            SUBSTITUTE: has_ref and has_hyp,
            INSERT: has_hyp and not has_ref,
            DELETE: has_ref and not has_hyp,
        }.get(self.kind)
        if not ok:
            raise ValueError(f"malformed alignment op {self}")


@dataclass
class ErrorCounts:
    substitutions: int = 0
    deletions: int = 0
    insertions: int = 0
    ref_len: int = 0

    @property
    def errors(self) -> int:
        return self.substitutions + self.deletions + self.insertions

    @property
    def rate(self) -> float:
        return error_rate(self.errors, self.ref_len)

    def __add__(self, other: "ErrorCounts") -> "ErrorCounts":
        return ErrorCounts(
            self.substitutions + other.substitutions,
            self.deletions + other.deletions,
            self.insertions + other.insertions,
            self.ref_len + other.ref_len,
        )


def error_rate(errors: int, n_ref: int) -> float:
    """``errors / n_ref``; no reference words with errors is ``inf``, without errors 0."""
    if n_ref == 0:
        return math.inf if errors else 0.0
    return errors / n_ref


def align(ref: Sequence[str], hyp: Sequence[str]) -> tuple[list[AlignmentOp], int]:
    """Minimum unit-cost edit alignment of ``hyp`` against ``ref``.

    The backtrace prefers match, then substitution, deletion, insertion.
    """
    n, m = len(ref), len(hyp)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dist[i][0] = i
    for j in range(1, m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row, prev = dist[i], dist[i - 1]
        r = ref[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (r != hyp[j - 1])
            row[j] = min(diag, prev[j] + 1, row[j - 1] + 1)

    ops: list[AlignmentOp] = []
    i, j = n, m
    while i or j:
        d = dist[i][j]
        if i and j and ref[i - 1] == hyp[j - 1] and d == dist[i - 1][j - 1]:
            ops.append(AlignmentOp(MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i and j and d == dist[i - 1][j - 1] + 1:
            ops.append(AlignmentOp(SUBSTITUTE, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i and d == dist[i - 1][j] + 1:
            ops.append(AlignmentOp(DELETE, ref[i - 1], None))
            i -= 1
        else:
            ops.append(AlignmentOp(INSERT, None, hyp[j - 1]))
            j -= 1
    ops.reverse()
    return ops, dist[n][m]


def count_errors(ref: Sequence[str], hyp: Sequence[str]) -> ErrorCounts:
    ops, _ = align(ref, hyp)
    c = ErrorCounts(ref_len=len(ref))
    for op in ops:
        if op.kind == SUBSTITUTE:
            c.substitutions += 1
        elif op.kind == DELETE:
            c.deletions += 1
        elif op.kind == INSERT:
            c.insertions += 1
    return c


def _words(x) -> list[str]:
    return x.split() if isinstance(x, str) else list(x)


def wer(ref, hyp) -> float:
    """Word error rate ``(S + D + I) / N``; strings are split on whitespace."""
    return count_errors(_words(ref), _words(hyp)).rate


def cer(ref: str, hyp: str) -> float:
    """Character error rate over the raw strings, spaces included."""
    return count_errors(list(ref), list(hyp)).rate
