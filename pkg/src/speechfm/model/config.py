from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field

from ..numeric import ConfigError
from ..protocol import DEFAULT_LANGUAGES, DEFAULT_ST_TARGETS, build_vocabulary

ENCODER_TYPES = ("transformer", "conformer", "e_branchformer")
FRAME_MS = 10

# Architecture rows of the released model families: layers, hidden, heads,
# nominal parameter count and peak learning rate.
PRESETS = {
    "whisper_base": dict(encoder_type="transformer", layers=6, hidden=512, heads=8, time_shift_ms=20, params="74M", max_lr=1e-3),
    "whisper_small": dict(encoder_type="transformer", layers=12, hidden=768, heads=12, time_shift_ms=20, params="244M", max_lr=5e-4),
    "whisper_medium": dict(encoder_type="transformer", layers=24, hidden=1024, heads=16, time_shift_ms=20, params="769M", max_lr=2.5e-4),
    "v3_medium": dict(encoder_type="transformer", layers=24, hidden=1024, heads=16, time_shift_ms=40, params="889M", max_lr=2.5e-4),
    "base": dict(encoder_type="e_branchformer", layers=6, hidden=384, heads=6, time_shift_ms=40, params="101M", max_lr=1e-3),
    "small": dict(encoder_type="e_branchformer", layers=9, hidden=768, heads=12, time_shift_ms=40, params="367M", max_lr=5e-4),
    "medium": dict(encoder_type="e_branchformer", layers=18, hidden=1024, heads=16, time_shift_ms=40, params="1.02B", max_lr=2e-4),
}


@dataclass(frozen=True)
class ModelConfig:
    encoder_type: str = "e_branchformer"
    enc_layers: int = 6
    dec_layers: int = 6
    hidden: int = 384
    heads: int = 6
    time_shift_ms: int = 40
    ffn_expansion: int = 4
    cgmlp_expansion: int = 6
    merge_kernel: int = 31
    conv_kernel: int = 31
    enc_ffn_expansion: float | None = None
    vocab_size: int = 0
    n_mels: int = 80
    max_audio_s: int = 30
    languages: tuple[str, ...] = DEFAULT_LANGUAGES
    st_targets: tuple[str, ...] = DEFAULT_ST_TARGETS
    _vocab: object = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "languages", tuple(self.languages))
        object.__setattr__(self, "st_targets", tuple(self.st_targets))
        if self.encoder_type not in ENCODER_TYPES:
            raise ConfigError(f"encoder_type must be one of {ENCODER_TYPES}, got {self.encoder_type!r}")
        for name in ("enc_layers", "dec_layers", "hidden", "heads", "ffn_expansion", "cgmlp_expansion", "n_mels"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.enc_ffn_expansion is not None and self.enc_ffn_expansion <= 0:
            raise ConfigError("enc_ffn_expansion must be positive")
        if self.hidden % self.heads:
            raise ConfigError(f"hidden {self.hidden} is not divisible by heads {self.heads}")
        if self.hidden % 2:
            raise ConfigError("hidden must be even for sinusoidal positions")
        if self.time_shift_ms not in (20, 40) or self.time_shift_ms % FRAME_MS:
            raise ConfigError(f"time_shift_ms must be 20 or 40, got {self.time_shift_ms}")
        if self.max_audio_s != 30:
            raise ConfigError("max_audio_s is fixed at 30")
        if self.merge_kernel % 2 == 0 or self.conv_kernel % 2 == 0:
            raise ConfigError("merge_kernel and conv_kernel must be odd")
        if (self.cgmlp_expansion * self.hidden) % 2:
            raise ConfigError("cgmlp_expansion * hidden must be even (the gate splits it in half)")
        vocab = build_vocabulary(self.languages, self.st_targets)
        if self.vocab_size == 0:
            object.__setattr__(self, "vocab_size", len(vocab))
        elif self.vocab_size != len(vocab):
            raise ConfigError(f"vocab_size {self.vocab_size} disagrees with the vocabulary size {len(vocab)}")
        object.__setattr__(self, "_vocab", vocab)

    @property
    def vocab(self):
        return self._vocab

    @property
    def subsample_factor(self) -> int:
        return self.time_shift_ms // FRAME_MS

    @property
    def encoder_ffn_expansion(self) -> float:
        return self.enc_ffn_expansion or self.ffn_expansion

    def replace(self, **changes) -> "ModelConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.init}
        d["languages"] = list(self.languages)
        d["st_targets"] = list(self.st_targets)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        known = {f.name for f in dataclasses.fields(cls) if f.init}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    @classmethod
    def preset(cls, name: str, **overrides) -> "ModelConfig":
        p = PRESETS[name]
        base = dict(
            encoder_type=p["encoder_type"],
            enc_layers=p["layers"],
            dec_layers=p["layers"],
            hidden=p["hidden"],
            heads=p["heads"],
            time_shift_ms=p["time_shift_ms"],
        )
        base.update(overrides)
        return cls(**base)
