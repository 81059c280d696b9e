from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..numeric import ShapeError


@dataclass
class AdamMoments:
    m: list[np.ndarray]
    v: list[np.ndarray]
    t: int = 0

    @classmethod
    def zeros_like(cls, params) -> "AdamMoments":
        return cls([np.zeros(p.shape, np.float64) for p in params], [np.zeros(p.shape, np.float64) for p in params])


def adam_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    moments: AdamMoments,
    lr: float,
    betas: tuple[float, float] = (0.9, 0.98),
    eps: float = 1e-9,
) -> tuple[list[np.ndarray], AdamMoments]:
    """One bias-corrected Adam update. Returns new arrays; inputs are untouched."""
    if not (len(params) == len(grads) == len(moments.m) == len(moments.v)):
        raise ShapeError("params, grads and moments must have the same length")
    b1, b2 = betas
    t = moments.t + 1
    new_p, new_m, new_v = [], [], []
    for p, g, m, v in zip(params, grads, moments.m, moments.v):
        if p.shape != g.shape or p.shape != m.shape:
            raise ShapeError(f"gradient shape {np.shape(g)} does not match parameter shape {np.shape(p)}")
        g = np.asarray(g, np.float64)
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        new_p.append((p - lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.dtype))
        new_m.append(m)
        new_v.append(v)
    return new_p, AdamMoments(new_m, new_v, t)


@dataclass
class Adam:
    """Adam over a model's parameters, updating them in place."""

    params: list
    betas: tuple[float, float] = (0.9, 0.98)
    eps: float = 1e-9
    moments: AdamMoments = field(init=False)

    def __post_init__(self):
        self.params = list(self.params)
        self.moments = AdamMoments.zeros_like(self.params)

    def step(self, lr: float) -> None:
        grads = [p.grad if p.grad is not None else np.zeros(p.shape, p.data.dtype) for p in self.params]
        data, self.moments = adam_step([p.data for p in self.params], grads, self.moments, lr, self.betas, self.eps)
        for p, d in zip(self.params, data):
            p.data = d

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None
