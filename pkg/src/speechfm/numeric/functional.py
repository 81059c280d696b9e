"""Fused differentiable primitives used by the model blocks."""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .tensor import ShapeError, Tensor, _sigmoid, _sum64, _unbroadcast


class ConfigError(ValueError):
    pass


class EmptyBatchError(ValueError):
    pass


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = _as_tensor(x)
    a = x.data
    if not -a.ndim <= axis < a.ndim:
        raise ShapeError(f"softmax axis {axis} out of range for shape {a.shape}")
    shifted = (a - a.max(axis=axis, keepdims=True)).astype(np.float64)
    e = np.exp(shifted)
    out = (e / e.sum(axis=axis, keepdims=True)).astype(a.dtype)

    def backward(g):
        inner = _sum64(g * out, axis=axis, keepdims=True)
        return (out * (g - inner),)

    return Tensor._result(out, (x,), backward)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    x = _as_tensor(x)
    a = x.data
    shifted = (a - a.max(axis=axis, keepdims=True)).astype(np.float64)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out64 = shifted - lse
    out = out64.astype(a.dtype)
    probs = np.exp(out64).astype(a.dtype)

    def backward(g):
        return (g - probs * _sum64(g, axis=axis, keepdims=True),)

    return Tensor._result(out, (x,), backward)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    x, gamma, beta = _as_tensor(x), _as_tensor(gamma), _as_tensor(beta)
    a = x.data
    d = a.shape[-1]
    if d < 2:
        raise ShapeError(f"layer_norm needs a last dimension >= 2, got shape {a.shape}")
    if eps <= 0:
        raise ConfigError("layer_norm eps must be positive")
    a64 = a.astype(np.float64)
    mu = a64.mean(axis=-1, keepdims=True)
    centered = a64 - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (centered * inv_std).astype(a.dtype)
    out = xhat * gamma.data + beta.data
    inv_std = inv_std.astype(a.dtype)

    def backward(g):
        gx_hat = g * gamma.data
        m1 = _sum64(gx_hat, axis=-1, keepdims=True) / d
        m2 = _sum64(gx_hat * xhat, axis=-1, keepdims=True) / d
        gx = inv_std * (gx_hat - m1 - xhat * m2)
        gg = _unbroadcast(g * xhat, gamma.data.shape)
        gb = _unbroadcast(g, beta.data.shape)
        return gx, gg, gb

    return Tensor._result(out, (x, gamma, beta), backward)


_GELU_C = math.sqrt(2.0 / math.pi)


def gelu(x: Tensor) -> Tensor:
    """tanh approximation of GELU."""
    x = _as_tensor(x)
    a = x.data
    inner = _GELU_C * (a + 0.044715 * a**3)
    t = np.tanh(inner)
    out = 0.5 * a * (1.0 + t)

    def backward(g):
        dinner = _GELU_C * (1.0 + 3 * 0.044715 * a * a)
        return (g * (0.5 * (1.0 + t) + 0.5 * a * (1.0 - t * t) * dinner),)

    return Tensor._result(out, (x,), backward)


def swish(x: Tensor) -> Tensor:
    x = _as_tensor(x)
    a = x.data
    s = _sigmoid(a)

    def backward(g):
        return (g * (s + a * s * (1.0 - s)),)

    return Tensor._result(a * s, (x,), backward)


def glu(x: Tensor, axis: int = -1) -> Tensor:
    """First half gated by the sigmoid of the second half."""
    n = x.shape[axis] // 2
    lead = (slice(None),) * (x.ndim + axis if axis < 0 else axis)
    first = x[lead + (slice(0, n),)]
    second = x[lead + (slice(n, 2 * n),)]
    return first * second.sigmoid()


def depthwise_conv1d(x: Tensor, kernel: Tensor) -> Tensor:
    """Per-channel 'same' convolution over the time axis.

    ``x`` is ``[..., T, d]`` and ``kernel`` is ``[K, d]`` with odd ``K``;
    ``y[t, c] = sum_j x[t + j - K//2, c] * kernel[j, c]`` with zero padding.
    """
    x, kernel = _as_tensor(x), _as_tensor(kernel)
    a, k = x.data, kernel.data
    K = k.shape[0]
    if K % 2 == 0:
        raise ConfigError(f"depthwise_conv1d needs an odd kernel size, got {K}")
    if a.ndim < 2 or k.ndim != 2 or k.shape[1] != a.shape[-1]:
        raise ShapeError(f"depthwise_conv1d shape mismatch: x {a.shape}, kernel {k.shape}")
    T = a.shape[-2]
    half = K // 2
    widths = [(0, 0)] * (a.ndim - 2) + [(half, half), (0, 0)]
    padded = np.pad(a, widths)
    windows = sliding_window_view(padded, K, axis=-2)  # [..., T, d, K]
    out = np.einsum("...tdk,kd->...td", windows, k)

    def backward(g):
        d = a.shape[-1]
        gk = np.einsum("ntdk,ntd->kd", windows.reshape(-1, T, d, K), g.reshape(-1, T, d))
        gpad = np.zeros_like(padded)
        for j in range(K):
            gpad[..., j : j + T, :] += g * k[j]
        return gpad[..., half : half + T, :], gk

    return Tensor._result(out, (x, kernel), backward)


def embedding(table: Tensor, ids) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    return table[ids]


def cross_entropy(logits: Tensor, targets, ignore_id: int = -1) -> Tensor:
    """Mean negative log-likelihood over positions whose target is not ``ignore_id``."""
    logits = _as_tensor(logits)
    a = logits.data
    V = a.shape[-1]
    flat = a.reshape(-1, V)
    t = np.asarray(targets, dtype=np.int64).reshape(-1)
    if t.shape[0] != flat.shape[0]:
        raise ShapeError(f"cross_entropy: {flat.shape[0]} logit rows but {t.shape[0]} targets")
    keep = t != ignore_id
    n = int(keep.sum())
    if n == 0:
        raise EmptyBatchError("no supervised positions")
    if np.any((t[keep] < 0) | (t[keep] >= V)):
        raise ShapeError(f"cross_entropy targets must lie in [0, {V})")
    rows = np.nonzero(keep)[0]
    sel = flat[rows].astype(np.float64)
    shifted = sel - sel.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1))
    nll = lse - shifted[np.arange(n), t[rows]]
    loss = np.asarray(nll.sum() / n, dtype=a.dtype)

    def backward(g):
        probs = np.exp(shifted - lse[:, None])
        probs[np.arange(n), t[rows]] -= 1.0
        full = np.zeros(flat.shape, dtype=a.dtype)
        full[rows] = (probs * (float(g) / n)).astype(a.dtype)
        return (full.reshape(a.shape),)

    return Tensor._result(loss, (logits,), backward)
