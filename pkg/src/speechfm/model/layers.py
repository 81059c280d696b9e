"""Parameterized building blocks: linear maps, attention, feed-forward and
convolution modules, and the three encoder block families."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..numeric import (
    ConfigError,
    Parameter,
    SeededRng,
    Tensor,
    concat,
    depthwise_conv1d,
    gelu,
    glu,
    layer_norm,
    pad,
    softmax,
    swish,
)


class Module:
    """Container that discovers parameters from its attributes, in definition order."""

    def named_parameters(self, prefix: str = ""):
        for name, value in vars(self).items():
            if isinstance(value, Parameter):
                yield prefix + name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(f"{prefix}{name}.")
            elif isinstance(value, list) and value and isinstance(value[0], Module):
                for i, m in enumerate(value):
                    yield from m.named_parameters(f"{prefix}{name}.{i}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.grad = None


def _uniform(rng: SeededRng, fan_in: int, shape) -> Parameter:
    bound = 1.0 / np.sqrt(fan_in)
    return Parameter(rng.uniform(-bound, bound, size=shape))


@lru_cache(maxsize=32)
def _pe_table(length: int, dim: int) -> np.ndarray:
    pos = np.arange(length, dtype=np.float64)[:, None]
    rates = np.power(10000.0, -np.arange(0, dim, 2, dtype=np.float64) / dim)
    table = np.empty((length, dim), dtype=np.float64)
    table[:, 0::2] = np.sin(pos * rates)
    table[:, 1::2] = np.cos(pos * rates)
    table.setflags(write=False)
    return table


def sinusoidal_pe(length: int, dim: int, offset: int = 0) -> Tensor:
    """Interleaved sin/cos absolute positions: sin in even slots, cos in odd."""
    if dim % 2:
        raise ConfigError(f"sinusoidal positions need an even dimension, got {dim}")
    return Tensor(_pe_table(offset + length, dim)[offset:])


class Linear(Module):
    def __init__(self, n_in: int, n_out: int, rng: SeededRng):
        self.weight = _uniform(rng, n_in, (n_in, n_out))
        self.bias = _uniform(rng, n_in, (n_out,))

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.weight + self.bias


class LayerNorm(Module):
    def __init__(self, dim: int):
        self.gamma = Parameter(np.ones(dim))
        self.beta = Parameter(np.zeros(dim))

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gamma, self.beta)


class DepthwiseConv(Module):
    def __init__(self, kernel_size: int, channels: int, rng: SeededRng):
        if kernel_size % 2 == 0:
            raise ConfigError(f"kernel size must be odd, got {kernel_size}")
        self.kernel = _uniform(rng, kernel_size, (kernel_size, channels))
        self.bias = _uniform(rng, kernel_size, (channels,))

    def __call__(self, x: Tensor) -> Tensor:
        return depthwise_conv1d(x, self.kernel) + self.bias


def causal_mask(n_query: int, n_key: int) -> np.ndarray:
    """True where query ``i`` (the last ``n_query`` positions) may see key ``j``."""
    offset = n_key - n_query
    return np.arange(n_key)[None, :] <= (np.arange(n_query)[:, None] + offset)


class MultiHeadAttention(Module):
    def __init__(self, hidden: int, heads: int, rng: SeededRng):
        self.heads = heads
        self.q = Linear(hidden, hidden, rng)
        self.k = Linear(hidden, hidden, rng)
        self.v = Linear(hidden, hidden, rng)
        self.out = Linear(hidden, hidden, rng)

    def _split(self, t: Tensor) -> Tensor:
        *lead, n, d = t.shape
        return t.reshape(*lead, n, self.heads, d // self.heads).swapaxes(-2, -3)

    def project_kv(self, src: Tensor) -> tuple[Tensor, Tensor]:
        return self._split(self.k(src)), self._split(self.v(src))

    def attend(self, x: Tensor, k: Tensor, v: Tensor, mask=None, return_probs: bool = False):
        q = self._split(self.q(x))
        scale = 1.0 / np.sqrt(q.shape[-1])
        scores = (q @ k.swapaxes(-1, -2)) * scale
        if mask is not None:
            scores = scores.masked_fill(~np.asarray(mask, dtype=bool), -np.inf)
        probs = softmax(scores, axis=-1)
        ctx = probs @ v
        *lead, n, _ = x.shape
        out = self.out(ctx.swapaxes(-2, -3).reshape(*lead, n, x.shape[-1]))
        return (out, probs) if return_probs else out

    def __call__(self, x: Tensor, src: Tensor | None = None, mask=None, return_probs: bool = False):
        k, v = self.project_kv(x if src is None else src)
        return self.attend(x, k, v, mask=mask, return_probs=return_probs)


class FeedForward(Module):
    def __init__(self, hidden: int, expansion: float, rng: SeededRng, activation=gelu):
        inner = int(round(hidden * expansion))
        self.up = Linear(hidden, inner, rng)
        self.down = Linear(inner, hidden, rng)
        self._act = activation

    def __call__(self, x: Tensor) -> Tensor:
        return self.down(self._act(self.up(x)))


class ConvolutionModule(Module):
    """Pointwise-GLU, depthwise conv, norm, swish, pointwise."""

    def __init__(self, hidden: int, kernel_size: int, rng: SeededRng):
        self.pointwise_in = Linear(hidden, 2 * hidden, rng)
        self.depthwise = DepthwiseConv(kernel_size, hidden, rng)
        self.norm = LayerNorm(hidden)
        self.pointwise_out = Linear(hidden, hidden, rng)

    def __call__(self, x: Tensor) -> Tensor:
        x = glu(self.pointwise_in(x))
        x = swish(self.norm(self.depthwise(x)))
        return self.pointwise_out(x)


class ConvolutionalGatingMLP(Module):
    """Up-projection, then one half gates the other after a depthwise conv."""

    def __init__(self, hidden: int, expansion: int, kernel_size: int, rng: SeededRng):
        inner = hidden * expansion
        self.half = inner // 2
        self.up = Linear(hidden, inner, rng)
        self.gate_norm = LayerNorm(self.half)
        self.gate_conv = DepthwiseConv(kernel_size, self.half, rng)
        self.down = Linear(self.half, hidden, rng)

    def __call__(self, x: Tensor) -> Tensor:
        x = gelu(self.up(x))
        content = x[..., : self.half]
        gate = self.gate_conv(self.gate_norm(x[..., self.half :]))
        return self.down(content * gate)


class TransformerBlock(Module):
    def __init__(self, hidden: int, heads: int, ffn_expansion: float, rng: SeededRng):
        self.attn_norm = LayerNorm(hidden)
        self.attn = MultiHeadAttention(hidden, heads, rng)
        self.ffn_norm = LayerNorm(hidden)
        self.ffn = FeedForward(hidden, ffn_expansion, rng)

    def __call__(self, x: Tensor) -> Tensor:
        x = x + self.attn(self.attn_norm(x))
        return x + self.ffn(self.ffn_norm(x))


class ConformerBlock(Module):
    def __init__(self, hidden: int, heads: int, ffn_expansion: float, conv_kernel: int, rng: SeededRng):
        self.ff1_norm = LayerNorm(hidden)
        self.ff1 = FeedForward(hidden, ffn_expansion, rng, activation=swish)
        self.attn_norm = LayerNorm(hidden)
        self.attn = MultiHeadAttention(hidden, heads, rng)
        self.conv_norm = LayerNorm(hidden)
        self.conv = ConvolutionModule(hidden, conv_kernel, rng)
        self.ff2_norm = LayerNorm(hidden)
        self.ff2 = FeedForward(hidden, ffn_expansion, rng, activation=swish)
        self.final_norm = LayerNorm(hidden)

    def __call__(self, x: Tensor) -> Tensor:
        x = x + 0.5 * self.ff1(self.ff1_norm(x))
        x = x + self.attn(self.attn_norm(x))
        x = x + self.conv(self.conv_norm(x))
        x = x + 0.5 * self.ff2(self.ff2_norm(x))
        return self.final_norm(x)


class EBranchformerBlock(Module):
    """Macaron FFNs around parallel attention and cgMLP branches.

    The branch outputs are concatenated, mixed over time by a depthwise
    convolution (added back onto the concatenation) and projected to the
    model width before the residual add.
    """

    def __init__(
        self,
        hidden: int,
        heads: int,
        ffn_expansion: float,
        cgmlp_expansion: int,
        conv_kernel: int,
        merge_kernel: int,
        rng: SeededRng,
    ):
        self.ff1_norm = LayerNorm(hidden)
        self.ff1 = FeedForward(hidden, ffn_expansion, rng, activation=swish)
        self.attn_norm = LayerNorm(hidden)
        self.attn = MultiHeadAttention(hidden, heads, rng)
        self.mlp_norm = LayerNorm(hidden)
        self.cgmlp = ConvolutionalGatingMLP(hidden, cgmlp_expansion, conv_kernel, rng)
        self.merge_conv = DepthwiseConv(merge_kernel, 2 * hidden, rng)
        self.merge_proj = Linear(2 * hidden, hidden, rng)
        self.ff2_norm = LayerNorm(hidden)
        self.ff2 = FeedForward(hidden, ffn_expansion, rng, activation=swish)
        self.final_norm = LayerNorm(hidden)

    def __call__(self, x: Tensor) -> Tensor:
        x = x + 0.5 * self.ff1(self.ff1_norm(x))
        global_branch = self.attn(self.attn_norm(x))
        local_branch = self.cgmlp(self.mlp_norm(x))
        both = concat([global_branch, local_branch], axis=-1)
        x = x + self.merge_proj(both + self.merge_conv(both))
        x = x + 0.5 * self.ff2(self.ff2_norm(x))
        return self.final_norm(x)


class StridedConv(Module):
    """Kernel-3, stride-2 convolution producing ``floor(T / 2)`` frames."""

    def __init__(self, n_in: int, n_out: int, rng: SeededRng):
        self.weight = _uniform(rng, 3 * n_in, (3 * n_in, n_out))
        self.bias = _uniform(rng, 3 * n_in, (n_out,))

    def __call__(self, x: Tensor) -> Tensor:
        n_out = x.shape[-2] // 2
        widths = [(0, 0)] * (x.ndim - 2) + [(1, 0), (0, 0)]
        xp = pad(x, widths)
        taps = [xp[..., j : j + 2 * n_out - 1 : 2, :] for j in range(3)]
        return concat(taps, axis=-1) @ self.weight + self.bias
