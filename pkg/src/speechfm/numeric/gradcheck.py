from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .rng import SeededRng
from .tensor import Tensor, no_grad, precision


def grad_check(
    f: Callable[[], Tensor],
    params: Sequence[Tensor],
    h: float = 1e-3,
    n_coords: int = 6,
    rng: SeededRng | None = None,
) -> float:
    """Max relative error between backprop and central differences.

    ``f`` is re-evaluated with each sampled coordinate nudged by ``±h``. The
    parameters are promoted to float64 for the duration of the check and
    restored afterwards; the error per coordinate is
    ``|a - n| / (|a| + |n| + 1e-8)``.
    """
    rng = rng or SeededRng(0)
    saved = [p.data.dtype for p in params]
    for p in params:
        p.data = p.data.astype(np.float64)
        p.grad = None
    worst = 0.0
    try:
        with precision(np.float64):
            loss = f()
            loss.backward()
            analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]
            with no_grad():
                for p, ga in zip(params, analytic):
                    flat = p.data.reshape(-1)
                    count = min(n_coords, flat.size)
                    picks = rng.choice(flat.size, size=count, replace=False)
                    for i in picks:
                        orig = flat[i]
                        flat[i] = orig + h
                        up = float(f().data)
                        flat[i] = orig - h
                        down = float(f().data)
                        flat[i] = orig
                        numeric = (up - down) / (2.0 * h)
                        a = float(ga.reshape(-1)[i])
                        worst = max(worst, abs(a - numeric) / (abs(a) + abs(numeric) + 1e-8))
    finally:
        for p, dt in zip(params, saved):
            p.data = p.data.astype(dt)
            p.grad = None
    return worst
