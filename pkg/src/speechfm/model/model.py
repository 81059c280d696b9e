from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numeric import SeededRng, ShapeError, Tensor, concat, gelu, no_grad
from ..protocol import VocabularyError
from .config import ModelConfig
from .layers import (
    ConformerBlock,
    EBranchformerBlock,
    FeedForward,
    LayerNorm,
    Linear,
    Module,
    MultiHeadAttention,
    StridedConv,
    TransformerBlock,
    _uniform,
    causal_mask,
    sinusoidal_pe,
)


class InputTooShortError(ValueError):
    pass


@dataclass
class EncoderOutput:
    frames: Tensor
    frame_duration_ms: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[-2]


class SubsampleFrontend(Module):
    """Strided convolutions over 10 ms features, projection, absolute positions."""

    def __init__(self, cfg: ModelConfig, rng: SeededRng):
        self.factor = cfg.subsample_factor
        stages = {2: 1, 4: 2}[self.factor]
        self.convs = [StridedConv(cfg.n_mels if i == 0 else cfg.hidden, cfg.hidden, rng) for i in range(stages)]
        self.proj = Linear(cfg.hidden, cfg.hidden, rng)
        self.hidden = cfg.hidden

    def __call__(self, features: Tensor) -> Tensor:
        if features.shape[-2] < self.factor:
            raise InputTooShortError(
                f"input shorter than one output frame: {features.shape[-2]} frames, need {self.factor}"
            )
        x = features
        for conv in self.convs:
            x = gelu(conv(x))
        x = self.proj(x)
        return x + sinusoidal_pe(x.shape[-2], self.hidden)


def _encoder_block(cfg: ModelConfig, rng: SeededRng) -> Module:
    ffn = cfg.encoder_ffn_expansion
    if cfg.encoder_type == "transformer":
        return TransformerBlock(cfg.hidden, cfg.heads, ffn, rng)
    if cfg.encoder_type == "conformer":
        return ConformerBlock(cfg.hidden, cfg.heads, ffn, cfg.conv_kernel, rng)
    return EBranchformerBlock(
        cfg.hidden, cfg.heads, ffn, cfg.cgmlp_expansion, cfg.conv_kernel, cfg.merge_kernel, rng
    )


class Encoder(Module):
    def __init__(self, cfg: ModelConfig, rng: SeededRng):
        self.frontend = SubsampleFrontend(cfg, rng)
        self.blocks = [_encoder_block(cfg, rng) for _ in range(cfg.enc_layers)]
        self.final_norm = LayerNorm(cfg.hidden)
        self.time_shift_ms = cfg.time_shift_ms

    def __call__(self, features: Tensor) -> EncoderOutput:
        x = self.frontend(features)
        for block in self.blocks:
            x = block(x)
        return EncoderOutput(self.final_norm(x), self.time_shift_ms)


class DecoderBlock(Module):
    def __init__(self, hidden: int, heads: int, ffn_expansion: int, rng: SeededRng):
        self.self_norm = LayerNorm(hidden)
        self.self_attn = MultiHeadAttention(hidden, heads, rng)
        self.cross_norm = LayerNorm(hidden)
        self.cross_attn = MultiHeadAttention(hidden, heads, rng)
        self.ffn_norm = LayerNorm(hidden)
        self.ffn = FeedForward(hidden, ffn_expansion, rng)

    def __call__(self, x: Tensor, memory: Tensor, mask: np.ndarray) -> Tensor:
        x = x + self.self_attn(self.self_norm(x), mask=mask)
        x = x + self.cross_attn(self.cross_norm(x), src=memory)
        return x + self.ffn(self.ffn_norm(x))

    def step(self, x: Tensor, cache: dict, cross_kv: tuple[Tensor, Tensor]) -> Tensor:
        """Process new positions, extending the self-attention key/value cache."""
        h = self.self_norm(x)
        k_new, v_new = self.self_attn.project_kv(h)
        if cache:
            k = concat([cache["k"], k_new], axis=-2)
            v = concat([cache["v"], v_new], axis=-2)
        else:
            k, v = k_new, v_new
        cache["k"], cache["v"] = k, v
        mask = causal_mask(x.shape[-2], k.shape[-2])
        x = x + self.self_attn.attend(h, k, v, mask=mask)
        x = x + self.cross_attn.attend(self.cross_norm(x), *cross_kv)
        return x + self.ffn(self.ffn_norm(x))


class Decoder(Module):
    def __init__(self, cfg: ModelConfig, rng: SeededRng):
        self.embed = _uniform(rng, cfg.hidden, (cfg.vocab_size, cfg.hidden))
        self.blocks = [DecoderBlock(cfg.hidden, cfg.heads, cfg.ffn_expansion, rng) for _ in range(cfg.dec_layers)]
        self.final_norm = LayerNorm(cfg.hidden)
        self.vocab_size = cfg.vocab_size
        self.hidden = cfg.hidden

    def _embed(self, ids: np.ndarray, offset: int = 0) -> Tensor:
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            bad = ids[(ids < 0) | (ids >= self.vocab_size)][0]
            raise VocabularyError(f"token id {int(bad)} outside vocabulary of size {self.vocab_size}")
        return self.embed[ids] + sinusoidal_pe(ids.shape[-1], self.hidden, offset)

    def _logits(self, x: Tensor) -> Tensor:
        return self.final_norm(x) @ self.embed.T

    def __call__(self, tokens, memory: Tensor) -> Tensor:
        ids = np.asarray(tokens, dtype=np.int64)
        if ids.shape[-1] < 1:
            raise ShapeError("decoder needs at least one token")
        x = self._embed(ids)
        mask = causal_mask(ids.shape[-1], ids.shape[-1])
        for block in self.blocks:
            x = block(x, memory, mask)
        return self._logits(x)


class DecoderSession:
    """Incremental decoding state for one utterance.

    ``next_logits`` takes the full token prefix each call and only runs the
    positions it has not yet seen; cross-attention keys/values are computed
    once per utterance.
    """

    def __init__(self, model: "Model", enc: EncoderOutput):
        self.model = model
        self.memory = enc.frames
        with no_grad():
            self.cross_kv = [b.cross_attn.project_kv(self.memory) for b in model.decoder.blocks]
        self._reset()

    def _reset(self):
        self.seen: list[int] = []
        self.caches: list[dict] = [{} for _ in self.model.decoder.blocks]

    def next_logits(self, tokens) -> np.ndarray:
        tokens = [int(t) for t in tokens]
        if tokens[: len(self.seen)] != self.seen or len(tokens) == len(self.seen):
            self._reset()
        new = np.asarray(tokens[len(self.seen) :], dtype=np.int64)
        dec = self.model.decoder
        with no_grad():
            x = dec._embed(new, offset=len(self.seen))
            for block, cache, kv in zip(dec.blocks, self.caches, self.cross_kv):
                x = block.step(x, cache, kv)
            logits = dec._logits(x[-1:])
        self.seen = tokens
        return logits.data[0]


class Model(Module):
    def __init__(self, cfg: ModelConfig, rng: SeededRng):
        self.cfg = cfg
        self.encoder = Encoder(cfg, rng)
        self.decoder = Decoder(cfg, rng)
        for name, p in self.named_parameters():
            p.name = name

    @property
    def vocab(self):
        return self.cfg.vocab

    def _features(self, features) -> Tensor:
        f = features if isinstance(features, Tensor) else Tensor(features)
        if f.shape[-1] != self.cfg.n_mels:
            raise ShapeError(f"features have dimension {f.shape[-1]}, model expects {self.cfg.n_mels}")
        return f

    def encode(self, features) -> EncoderOutput:
        return self.encoder(self._features(features))

    def decode(self, tokens, enc: EncoderOutput) -> Tensor:
        return self.decoder(tokens, enc.frames)

    def __call__(self, features, tokens) -> Tensor:
        return self.decode(tokens, self.encode(features))

    def start_session(self, enc: EncoderOutput) -> DecoderSession:
        return DecoderSession(self, enc)

    def state_dict(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_parameters()}

    def load_state_dict(self, tensors: dict[str, np.ndarray]) -> None:
        params = dict(self.named_parameters())
        missing = set(params) - set(tensors)
        extra = set(tensors) - set(params)
        if missing or extra:
            raise KeyError(f"state mismatch: missing {sorted(missing)[:5]}, unexpected {sorted(extra)[:5]}")
        for name, p in params.items():
            arr = np.asarray(tensors[name])
            if arr.shape != p.shape:
                raise ShapeError(f"{name}: checkpoint shape {arr.shape} != model shape {p.shape}")
            p.data = arr.astype(p.data.dtype, copy=True)


def build_model(cfg: ModelConfig, rng: SeededRng | int) -> Model:
    if not isinstance(rng, SeededRng):
        rng = SeededRng(rng)
    return Model(cfg, rng)


def count_params(model: Module) -> int:
    return sum(p.size for p in model.parameters())
