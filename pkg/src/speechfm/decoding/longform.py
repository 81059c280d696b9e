"""Chunked decoding of recordings longer than one 30 s window."""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..protocol import Segment, split_segments
from .greedy import MAX_WINDOW_FRAMES, DecodeOptions, DecodeResult, _features, greedy_decode

log = logging.getLogger(__name__)

FRAMES_PER_S = 100
WINDOW_S = MAX_WINDOW_FRAMES / FRAMES_PER_S


@dataclass
class LongFormState:
    total_s: float
    cursor_s: float = 0.0
    window: np.ndarray | None = None
    transcript: str = ""
    done: bool = False
    window_starts: list[float] = field(default_factory=list)


def window_at(features: np.ndarray, cursor_s: float) -> np.ndarray:
    """30 s slice starting at ``cursor_s``, zero-padded past the end of the audio."""
    start = int(round(cursor_s * FRAMES_PER_S))
    chunk = features[start : start + MAX_WINDOW_FRAMES]
    if chunk.shape[0] < MAX_WINDOW_FRAMES:
        chunk = np.concatenate([chunk, np.zeros((MAX_WINDOW_FRAMES - chunk.shape[0], features.shape[1]), chunk.dtype)])
    return chunk


def iteration_cap(n_frames: int) -> int:
    return 2 * math.ceil(n_frames / MAX_WINDOW_FRAMES)


def long_form_decode(model, full_features, opts: DecodeOptions = DecodeOptions()) -> DecodeResult:
    """Decode window by window, moving the window to the last predicted end time.

    A window advances by the end time of its last closed segment. Text after
    that point is dropped and re-decoded from the next window, except in the
    window that reaches the end of the audio. With no usable timestamp the
    window advances by a full 30 s.
    """
    t0 = time.perf_counter()
    feats = _features(full_features)
    n_frames = feats.shape[0]
    if n_frames < 1:
        raise ValueError("long-form input is empty")
    vocab = model.vocab
    opts = opts.replace(with_timestamps=True)
    state = LongFormState(total_s=n_frames / FRAMES_PER_S)
    tokens: list[int] = []
    segments: list[Segment] = []
    truncated = False
    lang = opts.lang
    cap = iteration_cap(n_frames)

    while not state.done:
        if len(state.window_starts) >= cap:
            truncated = True
            break
        state.window = window_at(feats, state.cursor_s)
        state.window_starts.append(state.cursor_s)
        log.info("window %d starts at %.2f s", len(state.window_starts), state.cursor_s)
        res = greedy_decode(model, state.window, opts if lang is None else opts.replace(lang=lang))
        lang = lang or res.lang
        body = res.tokens[:-1] if res.tokens and res.tokens[-1] == vocab.eos else res.tokens
        closed, consumed = split_segments(body, vocab)
        advance = closed[-1].end if closed else 0.0
        reaches_end = state.cursor_s + WINDOW_S >= state.total_s
        if advance <= 0.0:
            advance, kept = WINDOW_S, body
        elif reaches_end:
            kept = body
        else:
            kept = body[:consumed]
        kept_segments, _ = split_segments(kept, vocab)
        offset = state.cursor_s
        segments += [Segment(round(s.start + offset, 2), round(s.end + offset, 2), s.text) for s in kept_segments]
        tokens += kept
        state.transcript += vocab.detokenize(kept)
        state.cursor_s = min(round(state.cursor_s + advance, 2), state.total_s)
        state.done = reaches_end or state.cursor_s >= state.total_s

    return DecodeResult(
        tokens=tokens,
        text=state.transcript,
        timestamps=[(s.start, s.end) for s in segments],
        token_count=len(tokens),
        wall_time_ms=(time.perf_counter() - t0) * 1000.0,
        truncated=truncated,
        lang=lang,
        segments=segments,
        windows=list(state.window_starts),
    )
