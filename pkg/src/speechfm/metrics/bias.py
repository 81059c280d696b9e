from __future__ import annotations

from dataclasses import asdict, dataclass

from .align import DELETE, INSERT, SUBSTITUTE, align, error_rate


@dataclass
class BiasReport:
    wer: float
    u_wer: float
    b_wer: float
    n_ref: int = 0
    n_ref_b: int = 0
    n_ref_u: int = 0
    errors: int = 0
    errors_b: int = 0
    errors_u: int = 0
    substitutions_b: int = 0
    deletions_b: int = 0
    insertions_b: int = 0
    substitutions_u: int = 0
    deletions_u: int = 0
    insertions_u: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def biased_wer(ref, hyp, bias_list) -> BiasReport:
    """Split word errors into biased (B) and unbiased (U) parts.

    Substitutions and deletions go to B when the reference word is in the
    bias list; insertions go to B when the inserted word is. B-WER is over
    the reference words in the list, U-WER over the rest. ``ref`` and ``hyp``
    are strings or word lists.
    """
    return corpus_biased_wer([ref], [hyp], bias_list)


def corpus_biased_wer(refs, hyps, bias_list) -> BiasReport:
    """Pooled :func:`biased_wer` counts over parallel utterance lists."""
    bias = set(bias_list)
    if not bias:
        raise ValueError("bias list is empty")
    if len(refs) != len(hyps):
        raise ValueError(f"{len(refs)} references but {len(hyps)} hypotheses")
    pairs = [(_split(r), _split(h)) for r, h in zip(refs, hyps)]

    c = dict.fromkeys(("sb", "db", "ib", "su", "du", "iu", "nb", "nu"), 0)
    for r, h in pairs:
        for w in r:
            c["nb" if w in bias else "nu"] += 1
        ops, _ = align(r, h)
        for op in ops:
            if op.kind == SUBSTITUTE:
                c["sb" if op.ref_word in bias else "su"] += 1
            elif op.kind == DELETE:
                c["db" if op.ref_word in bias else "du"] += 1
            elif op.kind == INSERT:
                c["ib" if op.hyp_word in bias else "iu"] += 1
    eb = c["sb"] + c["db"] + c["ib"]
    eu = c["su"] + c["du"] + c["iu"]
    n = c["nb"] + c["nu"]
    return BiasReport(
        wer=error_rate(eb + eu, n),
        u_wer=error_rate(eu, c["nu"]),
        b_wer=error_rate(eb, c["nb"]),
        n_ref=n,
        n_ref_b=c["nb"],
        n_ref_u=c["nu"],
        errors=eb + eu,
        errors_b=eb,
        errors_u=eu,
        substitutions_b=c["sb"],
        deletions_b=c["db"],
        insertions_b=c["ib"],
        substitutions_u=c["su"],
        deletions_u=c["du"],
        insertions_u=c["iu"],
    )


def _split(x):
    return x.split() if isinstance(x, str) else list(x)
