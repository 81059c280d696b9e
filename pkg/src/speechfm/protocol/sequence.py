"""Multitask token layout: optional prompt, task prefix, body, eos.

    [<sop> prompt...] <sos> <lang> <task> (<notimestamps> text... | (<t> text... <t>)...) <eos>

The prompt region (``<sop>`` and its characters) conditions the decoder but is
never a training target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .vocab import MAX_TIMESTAMP_S, Vocabulary, VocabularyError

MAX_PROMPT_TOKENS = 2048
WINDOW_S = 30.0


@dataclass
class FormattedSample:
    tokens: list[int]
    supervised_mask: list[bool]
    lang: str
    task: str
    prompt: str | None = None
    timestamps: list[tuple[float, float]] | None = None

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class Segment:
    start: float
    end: float
    text: str


@dataclass
class DecodedSequence:
    text: str
    lang: str | None
    task: str | None
    prompt: str | None = None
    segments: list[Segment] = field(default_factory=list)
    timestamped: bool = False

    @property
    def timestamps(self) -> list[tuple[float, float]]:
        return [(s.start, s.end) for s in self.segments]


def prompt_tokens(vocab: Vocabulary, prompt: str) -> list[int]:
    ids = [vocab.sop] + vocab.text_ids(prompt)
    if len(ids) > MAX_PROMPT_TOKENS:
        raise VocabularyError(f"prompt is {len(ids)} tokens, limit is {MAX_PROMPT_TOKENS}")
    return ids


def task_prefix(vocab: Vocabulary, lang: str, task: str, with_timestamps: bool) -> list[int]:
    ids = [vocab.sos, vocab.lang_id(lang), vocab.task_id(task)]
    if not with_timestamps:
        ids.append(vocab.notimestamps)
    return ids


def encode_sequence(
    vocab: Vocabulary,
    text: str | Sequence[str],
    lang: str,
    task: str,
    timestamps: Sequence[tuple[float, float]] | None = None,
    prompt: str | None = None,
) -> FormattedSample:
    """Lay out one training / decoding target.

    With ``timestamps``, ``text`` is either one string (exactly one pair) or
    one string per (start, end) pair. Times are quantized to the nearest
    timestamp token.
    """
    head: list[int] = prompt_tokens(vocab, prompt) if prompt is not None else []
    body = task_prefix(vocab, lang, task, with_timestamps=timestamps is not None)
    if timestamps is None:
        if not isinstance(text, str):
            raise TypeError("text must be a string when no timestamps are given")
        body += vocab.text_ids(text)
    else:
        pieces = [text] if isinstance(text, str) else list(text)
        if len(pieces) != len(timestamps):
            raise ValueError(f"{len(pieces)} text segments for {len(timestamps)} timestamp pairs")
        last = 0.0
        for (start, end), piece in zip(timestamps, pieces):
            if start > MAX_TIMESTAMP_S or end > MAX_TIMESTAMP_S:
                raise VocabularyError(f"timestamp ({start}, {end}) exceeds {MAX_TIMESTAMP_S} s")
            if start < last or end < start:
                raise ValueError(f"timestamps must be nondecreasing, got ({start}, {end}) after {last}")
            last = end
            body.append(vocab.timestamp_id(start))
            body += vocab.text_ids(piece)
            body.append(vocab.timestamp_id(end))
    body.append(vocab.eos)
    return FormattedSample(
        tokens=head + body,
        supervised_mask=[False] * len(head) + [True] * len(body),
        lang=lang,
        task=task,
        prompt=prompt,
        timestamps=None if timestamps is None else [tuple(p) for p in timestamps],
    )


def split_segments(ids: Sequence[int], vocab: Vocabulary) -> tuple[list[Segment], int]:
    """Pair up timestamp tokens around text.

    Returns the closed segments and the index just past the last closing
    timestamp (0 if no segment closed).
    """
    segments: list[Segment] = []
    start: float | None = None
    chars: list[int] = []
    consumed = 0
    for pos, tok in enumerate(ids):
        if vocab.is_timestamp(tok):
            t = vocab.timestamp_seconds(tok)
            if start is None:
                start, chars = t, []
            else:
                segments.append(Segment(start, t, vocab.detokenize(chars)))
                start, chars = None, []
                consumed = pos + 1
        elif vocab.is_text(tok):
            chars.append(tok)
    return segments, consumed


def decode_sequence(ids: Sequence[int], vocab: Vocabulary) -> DecodedSequence:
    ids = list(ids)
    pos = 0
    prompt = None
    if ids and ids[0] == vocab.sop:
        end = ids.index(vocab.sos) if vocab.sos in ids else len(ids)
        prompt = vocab.detokenize(ids[1:end])
        pos = end
    lang = task = None
    if pos < len(ids) and ids[pos] == vocab.sos:
        pos += 1
    if pos < len(ids) and vocab.role(ids[pos]) == "language":
        lang = vocab.code_of(ids[pos])
        pos += 1
    if pos < len(ids) and vocab.role(ids[pos]) == "task":
        task = vocab.task_of(ids[pos])
        pos += 1
    timestamped = True
    if pos < len(ids) and ids[pos] == vocab.notimestamps:
        timestamped = False
        pos += 1
    body = ids[pos:]
    if vocab.eos in body:
        body = body[: body.index(vocab.eos)]
    segments: list[Segment] = []
    if timestamped:
        segments, _ = split_segments(body, vocab)
    return DecodedSequence(
        text=vocab.detokenize(body),
        lang=lang,
        task=task,
        prompt=prompt,
        segments=segments,
        timestamped=timestamped and bool(segments),
    )


def sample_prompt(rng, prev_sentence: str | None, p: float) -> str | None:
    """Return the previous sentence as a prompt with probability ``p``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"prompt probability must be in [0, 1], got {p}")
    draw = rng.random()
    if prev_sentence is None:
        return None
    return prev_sentence if draw < p else None


@dataclass
class Window:
    start_s: float
    end_s: float
    sample: FormattedSample
    utterances: list[tuple[str, float, float]]


def segment_utterances(
    utterances: Sequence[tuple[str, float, float]],
    vocab: Vocabulary,
    lang: str,
    task: str = "asr",
) -> list[Window]:
    """Greedily pack consecutive utterances into windows of at most 30 s.

    A window opens at its first utterance's start time; timestamps inside a
    window are relative to that point.
    """
    windows: list[Window] = []
    group: list[tuple[str, float, float]] = []
    last_end = -np.inf

    def flush():
        w0 = group[0][1]
        rel = [(round(s - w0, 6), round(e - w0, 6)) for _, s, e in group]
        sample = encode_sequence(vocab, [u[0] for u in group], lang, task, timestamps=rel)
        windows.append(Window(w0, group[-1][2], sample, list(group)))

    for text, start, end in utterances:
        if end < start:
            raise ValueError(f"utterance ends before it starts: ({start}, {end})")
        if start < last_end:
            raise ValueError("utterances must be time-ordered and non-overlapping")
        if end - start > WINDOW_S:
            raise ValueError(f"utterance of {end - start:.2f} s exceeds the {WINDOW_S:.0f} s window")
        last_end = end
        if group and end - group[0][1] > WINDOW_S:
            flush()
            group = []
        group.append((text, start, end))
    if group:
        flush()
    return windows
