from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from ..numeric import ShapeError, Tensor, no_grad
from ..protocol import Segment, prompt_tokens, split_segments, task_prefix

MAX_WINDOW_FRAMES = 3000


@dataclass(frozen=True)
class DecodeOptions:
    task: str = "asr"
    lang: str | None = None
    prompt: str | None = None
    max_tokens: int = 448
    with_timestamps: bool = False
    # benchmarking only: never stop on eos, so every run emits max_tokens
    ignore_eos: bool = False

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be at least 1")

    def replace(self, **changes) -> "DecodeOptions":
        return dataclasses.replace(self, **changes)


@dataclass
class DecodeResult:
    tokens: list[int]
    text: str
    timestamps: list[tuple[float, float]]
    token_count: int
    wall_time_ms: float
    truncated: bool = False
    lang: str | None = None
    prefix: list[int] = field(default_factory=list)
    segments: list[Segment] = field(default_factory=list)
    windows: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "tokens": list(self.tokens),
            "timestamps": [list(p) for p in self.timestamps],
            "token_count": self.token_count,
            "truncated": self.truncated,
            "lang": self.lang,
            "wall_time_ms": self.wall_time_ms,
        }


def _features(features) -> np.ndarray:
    arr = features.data if isinstance(features, Tensor) else np.asarray(features)
    if arr.ndim != 2:
        raise ShapeError(f"features must be [frames, dim], got shape {arr.shape}")
    return arr


def _argmax_language(logits: np.ndarray, vocab) -> str:
    block = vocab.language_range
    # np.argmax returns the first maximum, i.e. the lowest id on ties
    return vocab.code_of(block.start + int(np.argmax(logits[block.start : block.stop])))


def lid_predict(model, features) -> str:
    """Most likely language token after ``<sos>``, restricted to the language block."""
    feats = _features(features)
    with no_grad():
        session = model.start_session(model.encode(feats))
        logits = session.next_logits([model.vocab.sos])
    return _argmax_language(logits, model.vocab)


def greedy_decode(model, features, opts: DecodeOptions = DecodeOptions()) -> DecodeResult:
    t0 = time.perf_counter()
    vocab = model.vocab
    feats = _features(features)
    if feats.shape[0] > MAX_WINDOW_FRAMES:
        raise ShapeError(f"{feats.shape[0]} frames exceed the {MAX_WINDOW_FRAMES}-frame window")
    head = prompt_tokens(vocab, opts.prompt) if opts.prompt is not None else []
    with no_grad():
        session = model.start_session(model.encode(feats))
        lang = opts.lang
        if lang is None:
            lang = _argmax_language(session.next_logits(head + [vocab.sos]), vocab)
        prefix = head + task_prefix(vocab, lang, opts.task, opts.with_timestamps)
        tokens = list(prefix)
        generated: list[int] = []
        for _ in range(opts.max_tokens):
            logits = session.next_logits(tokens)
            if opts.ignore_eos:
                logits = logits.copy()
                logits[vocab.eos] = -np.inf
            tok = int(np.argmax(logits))
            generated.append(tok)
            tokens.append(tok)
            if tok == vocab.eos:
                break
    truncated = not generated or generated[-1] != vocab.eos
    body = generated if truncated else generated[:-1]
    segments = split_segments(body, vocab)[0] if opts.with_timestamps else []
    return DecodeResult(
        tokens=generated,
        text=vocab.detokenize(body),
        timestamps=[(s.start, s.end) for s in segments],
        token_count=len(generated),
        wall_time_ms=(time.perf_counter() - t0) * 1000.0,
        truncated=truncated,
        lang=lang,
        prefix=prefix,
        segments=segments,
    )


def biasing_decode(model, features, bias_words, opts: DecodeOptions = DecodeOptions()) -> DecodeResult:
    """Greedy decoding with the bias list, space-separated, as the prompt."""
    words = list(bias_words)
    if not words:
        raise ValueError("bias word list is empty")
    return greedy_decode(model, features, opts.replace(prompt=" ".join(words)))
