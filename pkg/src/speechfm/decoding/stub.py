"""Models with scripted outputs, for exercising the decoding loops."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from ..model import EncoderOutput
from ..numeric import Tensor
from ..protocol import Vocabulary, build_vocabulary

SCRIPT_MARGIN = 10.0


class _ScriptedSession:
    def __init__(self, owner: "ScriptedModel"):
        self.owner = owner
        self.base: int | None = None

    def next_logits(self, tokens) -> np.ndarray:
        if self.base is None:
            self.base = len(tokens)
        return self.owner.logits_for(len(tokens) - self.base, list(tokens))


class ScriptedModel:
    """Emits a fixed token script, restarting it for every utterance/window.

    ``script`` is a list of token ids, or a callable ``(step, tokens) ->
    logits`` for full control. Once a list script runs out the model emits
    ``<eos>``. The audio is ignored, and so is everything in the prefix,
    including any prompt.
    """

    def __init__(
        self,
        vocab: Vocabulary | None = None,
        script: Sequence[int] | Callable[[int, list[int]], np.ndarray] = (),
        time_shift_ms: int = 40,
        n_mels: int = 80,
        loop: bool = False,
    ):
        self.vocab = vocab or build_vocabulary()
        self.script = script if callable(script) else [int(t) for t in script]
        self.time_shift_ms = time_shift_ms
        self.n_mels = n_mels
        self.loop = loop

    def encode(self, features) -> EncoderOutput:
        arr = features.data if isinstance(features, Tensor) else np.asarray(features)
        n = arr.shape[-2] // (self.time_shift_ms // 10)
        return EncoderOutput(Tensor(np.zeros((n, 1))), self.time_shift_ms)

    def start_session(self, enc: EncoderOutput) -> _ScriptedSession:
        return _ScriptedSession(self)

    def logits_for(self, step: int, tokens: list[int]) -> np.ndarray:
        if callable(self.script):
            return np.asarray(self.script(step, tokens), dtype=np.float32)
        if self.loop and self.script:
            tok = self.script[step % len(self.script)]
        else:
            tok = self.script[step] if step < len(self.script) else self.vocab.eos
        logits = np.zeros(len(self.vocab), dtype=np.float32)
        logits[tok] = SCRIPT_MARGIN
        return logits

    def to_config(self) -> dict:
        if callable(self.script):
            raise TypeError("only list scripts can be serialized")
        return {
            "kind": "scripted",
            "languages": list(self.vocab.languages),
            "st_targets": [t[3:] for t in self.vocab.tasks if t.startswith("st_")],
            "script": [self.vocab.tokens[t] for t in self.script],
            "script_roles": [self.vocab.roles[t] for t in self.script],
            "time_shift_ms": self.time_shift_ms,
            "n_mels": self.n_mels,
            "loop": self.loop,
        }

    @classmethod
    def from_config(cls, cfg: dict) -> "ScriptedModel":
        vocab = build_vocabulary(cfg["languages"], cfg["st_targets"])
        index = {(r, t): i for i, (t, r) in enumerate(zip(vocab.tokens, vocab.roles))}
        script = [index[(r, t)] for t, r in zip(cfg["script"], cfg["script_roles"])]
        return cls(vocab, script, cfg.get("time_shift_ms", 40), cfg.get("n_mels", 80), cfg.get("loop", False))


def script_from_text(vocab: Vocabulary, *pieces) -> list[int]:
    """Build a script from strings (spelled char by char), float timestamps
    in seconds, and raw int token ids."""
    ids: list[int] = []
    for piece in pieces:
        if isinstance(piece, str):
            ids += vocab.text_ids(piece)
        elif isinstance(piece, float):
            ids.append(vocab.timestamp_id(piece))
        else:
            ids.append(int(piece))
    return ids
