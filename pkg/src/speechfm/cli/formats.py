"""Binary feature and checkpoint files (little-endian throughout).

Feature file::

    "FEAT" | u16 version | u32 n_frames | u32 dim | f32[n_frames * dim]

Checkpoint file::

    "OWSF" | u16 version | u32 json_len | config JSON | 32-byte sha256 of the JSON
    | u32 n_tensors | per tensor: u16 name_len, name, u8 rank, u32 dims[rank], f32 data
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass

import numpy as np

FEATURE_MAGIC = b"FEAT"
CHECKPOINT_MAGIC = b"OWSF"
FORMAT_VERSION = 1
FRAME_MS = 10


class FormatError(ValueError):
    """Malformed or truncated file."""


class BadMagicError(FormatError):
    pass


class ConfigHashError(FormatError):
    pass


class _Reader:
    def __init__(self, buf: bytes, what: str):
        self.buf = buf
        self.pos = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FormatError(f"{self.what} is truncated at byte {self.pos}")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        size = struct.calcsize(fmt)
        return struct.unpack(fmt, self.take(size))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float32)


def _check_magic(r: _Reader, magic: bytes) -> None:
    got = r.take(4) if len(r.buf) >= 4 else r.buf
    if got != magic:
        raise BadMagicError(f"{r.what}: expected magic {magic!r}, found {bytes(got)!r}")
    (version,) = r.unpack("<H")
    if version != FORMAT_VERSION:
        raise FormatError(f"{r.what}: unsupported version {version}")


def feature_bytes(features: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(features, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError(f"features must be [frames, dim], got shape {arr.shape}")
    return FEATURE_MAGIC + struct.pack("<HII", FORMAT_VERSION, *arr.shape) + arr.tobytes()


def save_features(path, features: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(feature_bytes(features))


def parse_features(buf: bytes, what: str = "feature file") -> np.ndarray:
    r = _Reader(buf, what)
    _check_magic(r, FEATURE_MAGIC)
    n_frames, dim = r.unpack("<II")
    data = r.floats(n_frames * dim)
    if r.pos != len(buf):
        raise FormatError(f"{what}: {len(buf) - r.pos} trailing bytes")
    return data.reshape(n_frames, dim)


def load_features(path) -> np.ndarray:
    with open(path, "rb") as f:
        return parse_features(f.read(), str(path))


@dataclass
class Checkpoint:
    config: dict
    tensors: dict[str, np.ndarray]


def checkpoint_bytes(config: dict, tensors: dict[str, np.ndarray]) -> bytes:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    parts = [CHECKPOINT_MAGIC, struct.pack("<HI", FORMAT_VERSION, len(blob)), blob, hashlib.sha256(blob).digest()]
    parts.append(struct.pack("<I", len(tensors)))
    for name, arr in tensors.items():
        a = np.asarray(arr, dtype="<f4", order="C")  # ascontiguousarray would promote 0-d to 1-d
        key = name.encode()
        parts.append(struct.pack("<H", len(key)) + key + struct.pack("<B", a.ndim))
        parts.append(struct.pack(f"<{a.ndim}I", *a.shape))
        parts.append(a.tobytes())
    return b"".join(parts)


def save_checkpoint(path, config: dict, tensors: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as f:
        f.write(checkpoint_bytes(config, tensors))


def parse_checkpoint(buf: bytes, what: str = "checkpoint") -> Checkpoint:
    r = _Reader(buf, what)
    _check_magic(r, CHECKPOINT_MAGIC)
    (n,) = r.unpack("<I")
    blob = r.take(n)
    if hashlib.sha256(blob).digest() != r.take(32):
        raise ConfigHashError(f"{what}: config hash does not match its contents")
    config = json.loads(blob)
    (count,) = r.unpack("<I")
    tensors: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = r.unpack("<H")
        name = r.take(name_len).decode()
        (rank,) = r.unpack("<B")
        dims = r.unpack(f"<{rank}I")
        size = int(np.prod(dims)) if rank else 1
        tensors[name] = r.floats(size).reshape(dims)
    if r.pos != len(buf):
        raise FormatError(f"{what}: {len(buf) - r.pos} trailing bytes")
    return Checkpoint(config, tensors)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        return parse_checkpoint(f.read(), str(path))
