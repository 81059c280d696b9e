from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

MAX_ORDER = 4


@dataclass
class BleuStats:
    matches: list[int]
    totals: list[int]
    hyp_len: int
    ref_len: int

    @property
    def precisions(self) -> list[float]:
        out = []
        for n, (m, t) in enumerate(zip(self.matches, self.totals), start=1):
            if m == 0 and n > 1:
                out.append(1.0 / (t + 1))  # add-one smoothing
            else:
                out.append(m / t if t else 0.0)
        return out

    @property
    def brevity_penalty(self) -> float:
        if self.hyp_len == 0:
            return 0.0
        if self.hyp_len > self.ref_len:
            return 1.0
        return math.exp(1.0 - self.ref_len / self.hyp_len)

    @property
    def score(self) -> float:
        p = self.precisions
        if self.hyp_len == 0 or p[0] == 0.0:
            return 0.0
        return self.brevity_penalty * math.exp(sum(math.log(x) for x in p) / len(p))


def _ngrams(words: Sequence[str], n: int) -> Counter:
    return Counter(tuple(words[i : i + n]) for i in range(len(words) - n + 1))


def bleu_stats(refs: Sequence[str], hyps: Sequence[str]) -> BleuStats:
    if len(refs) != len(hyps):
        raise ValueError(f"{len(refs)} references but {len(hyps)} hypotheses")
    matches = [0] * MAX_ORDER
    totals = [0] * MAX_ORDER
    hyp_len = ref_len = 0
    for ref, hyp in zip(refs, hyps):
        r, h = ref.split(), hyp.split()
        hyp_len += len(h)
        ref_len += len(r)
        for n in range(1, MAX_ORDER + 1):
            hc, rc = _ngrams(h, n), _ngrams(r, n)
            matches[n - 1] += sum((hc & rc).values())
            totals[n - 1] += max(len(h) - n + 1, 0)
    return BleuStats(matches, totals, hyp_len, ref_len)


def bleu(refs: Sequence[str], hyps: Sequence[str]) -> float:
    """Corpus BLEU in [0, 1] with clipped 1-4-gram precisions and brevity penalty.

    Higher orders with no matches fall back to ``1 / (total + 1)``; a corpus
    with no unigram match scores 0.
    """
    return bleu_stats(refs, hyps).score
