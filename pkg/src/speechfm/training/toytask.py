"""Synthetic speech-like seq2seq data for desk-scale training runs.

Each symbol owns a prototype: a short spectro-temporal pattern over the
feature bins. An utterance is a random symbol string rendered by time-warping
each prototype to a random duration, laying them end to end at a random
offset and adding noise. The target is the symbol string under the usual
token layout.
"""

from __future__ import annotations

import string
from dataclasses import asdict, dataclass

import numpy as np

from ..numeric import ConfigError, SeededRng
from ..protocol import FormattedSample, Vocabulary, build_vocabulary, encode_sequence, sample_prompt


@dataclass(frozen=True)
class ToyTaskConfig:
    n_symbols: int = 8
    min_symbols: int = 3
    max_symbols: int = 6
    n_frames: int = 96
    n_mels: int = 80
    proto_frames: int = 8
    min_dur: int = 8
    max_dur: int = 14
    noise: float = 0.6
    n_train: int = 512
    n_val: int = 64
    prompt_prob: float = 0.0
    lang: str = "eng"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_symbols <= 26:
            raise ConfigError("n_symbols must be in [1, 26]")
        if not 1 <= self.min_symbols <= self.max_symbols:
            raise ConfigError("need 1 <= min_symbols <= max_symbols")
        if not 1 <= self.min_dur <= self.max_dur:
            raise ConfigError("need 1 <= min_dur <= max_dur")
        if self.max_symbols * self.max_dur > self.n_frames:
            raise ConfigError(f"{self.max_symbols} symbols of {self.max_dur} frames do not fit in {self.n_frames} frames")
        if not 0.0 <= self.prompt_prob <= 1.0:
            raise ConfigError("prompt_prob must be in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ToyExample:
    features: np.ndarray
    text: str
    sample: FormattedSample


def _prototypes(cfg: ToyTaskConfig, rng: SeededRng) -> np.ndarray:
    """Per symbol: a few time-modulated spectral bumps, [n_symbols, proto_frames, n_mels]."""
    t = np.linspace(0.0, 1.0, cfg.proto_frames)[:, None]
    bins = np.arange(cfg.n_mels)[None, :]
    protos = np.zeros((cfg.n_symbols, cfg.proto_frames, cfg.n_mels))
    for s in range(cfg.n_symbols):
        for _ in range(3):
            centre = rng.uniform(0, cfg.n_mels)
            width = rng.uniform(2.0, 8.0)
            slope = rng.uniform(-20.0, 20.0)  # formant-like glide in bins per prototype
            phase = rng.uniform(0, 2 * np.pi)
            envelope = 0.5 + 0.5 * np.sin(2 * np.pi * rng.uniform(0.5, 1.5) * t + phase)
            protos[s] += envelope * np.exp(-0.5 * ((bins - centre - slope * t) / width) ** 2)
    protos -= protos.mean(axis=(1, 2), keepdims=True)
    return protos / protos.std(axis=(1, 2), keepdims=True)


def _warp(proto: np.ndarray, n: int) -> np.ndarray:
    src = np.linspace(0.0, proto.shape[0] - 1, n)
    lo = np.floor(src).astype(int)
    hi = np.minimum(lo + 1, proto.shape[0] - 1)
    frac = (src - lo)[:, None]
    return proto[lo] * (1 - frac) + proto[hi] * frac


class ToyTask:
    def __init__(self, cfg: ToyTaskConfig = ToyTaskConfig(), vocab: Vocabulary | None = None):
        self.cfg = cfg
        self.vocab = vocab or build_vocabulary()
        self.symbols = string.ascii_lowercase[: cfg.n_symbols]
        root = SeededRng(cfg.seed)
        self.prototypes = _prototypes(cfg, root.split())
        gen = root.split()
        self.train = self._draw(gen, cfg.n_train, exclude=set())
        self.val = self._draw(gen, cfg.n_val, exclude={ex.text for ex in self.train})

    def _draw(self, rng: SeededRng, n: int, exclude: set[str]) -> list[ToyExample]:
        cfg = self.cfg
        out: list[ToyExample] = []
        prev: str | None = None
        attempts = 0
        while len(out) < n:
            attempts += 1
            if attempts > 100 * n:
                raise ConfigError("could not draw enough distinct utterances; enlarge the symbol space")
            k = int(rng.integers(cfg.min_symbols, cfg.max_symbols + 1))
            ids = rng.integers(0, cfg.n_symbols, size=k)
            durs = rng.integers(cfg.min_dur, cfg.max_dur + 1, size=k)
            start = int(rng.integers(0, cfg.n_frames - int(durs.sum()) + 1))
            noise = rng.normal(0.0, cfg.noise, size=(cfg.n_frames, cfg.n_mels))
            prompt = sample_prompt(rng, prev, cfg.prompt_prob) if cfg.prompt_prob > 0 else None
            text = "".join(self.symbols[i] for i in ids)
            if text in exclude:
                continue
            feats = noise
            pos = start
            for i, d in zip(ids, durs):
                feats[pos : pos + d] += _warp(self.prototypes[i], int(d))
                pos += d
            sample = encode_sequence(self.vocab, text, cfg.lang, "asr", prompt=prompt)
            out.append(ToyExample(feats.astype(np.float32), text, sample))
            prev = text
        return out

    def batches(self, examples: list[ToyExample], batch_size: int):
        for i in range(0, len(examples), batch_size):
            yield make_batch(examples[i : i + batch_size], self.vocab)


@dataclass
class Batch:
    features: np.ndarray  # [B, T, n_mels]
    inputs: np.ndarray  # [B, L] decoder inputs, eos-padded
    targets: np.ndarray  # [B, L] next tokens, -1 where unsupervised or padding

    @property
    def n_supervised(self) -> int:
        return int((self.targets >= 0).sum())


IGNORE_ID = -1


def make_batch(examples: list[ToyExample], vocab: Vocabulary) -> Batch:
    """Teacher-forcing batch; padding goes at the end of each row."""
    L = max(len(ex.sample.tokens) for ex in examples) - 1
    inputs = np.full((len(examples), L), vocab.eos, dtype=np.int64)
    targets = np.full((len(examples), L), IGNORE_ID, dtype=np.int64)
    for b, ex in enumerate(examples):
        toks = np.asarray(ex.sample.tokens)
        sup = np.asarray(ex.sample.supervised_mask)
        n = len(toks) - 1
        inputs[b, :n] = toks[:-1]
        targets[b, :n] = np.where(sup[1:], toks[1:], IGNORE_ID)
    feats = np.stack([ex.features for ex in examples])
    return Batch(feats, inputs, targets)
