from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..numeric import SeededRng, cross_entropy, no_grad
from .adam import Adam
from .schedule import WarmupSchedule
from .toytask import IGNORE_ID, Batch, ToyTask, make_batch

log = logging.getLogger(__name__)

DEFAULT_BATCH_SIZE = 16


class DivergenceError(RuntimeError):
    def __init__(self, step: int, loss: float):
        super().__init__(f"loss became {loss} at step {step}")
        self.step = step
        self.loss = loss


@dataclass
class TracePoint:
    step: int
    train_loss: float
    val_loss: float | None


def batch_loss(model, batch: Batch):
    logits = model(batch.features, batch.inputs)
    return cross_entropy(logits, batch.targets, ignore_id=IGNORE_ID)


def evaluate(model, task: ToyTask, batch_size: int = 32) -> float:
    """Token-weighted mean cross-entropy over the validation split."""
    total = 0.0
    count = 0
    with no_grad():
        for batch in task.batches(task.val, batch_size):
            n = batch.n_supervised
            total += batch_loss(model, batch).item() * n
            count += n
    return total / count


def _clip(params, max_norm: float) -> None:
    grads = [p.grad for p in params if p.grad is not None]
    norm = math.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64))) for g in grads))
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads:
            g *= scale


def train_loop(
    model,
    task: ToyTask,
    sched: WarmupSchedule,
    steps: int,
    batch_size: int = DEFAULT_BATCH_SIZE,
    rng: SeededRng | int = 0,
    eval_interval: int = 50,
    grad_clip: float | None = 1.0,
    on_point: Callable[[TracePoint], None] | None = None,
) -> list[TracePoint]:
    """Teacher-forced training with Adam; returns the loss trace.

    Steps are 1-based in the trace. Validation runs every ``eval_interval``
    steps and after the last one. A non-finite loss raises
    :class:`DivergenceError` carrying the step.
    """
    if steps < 1:
        raise ValueError("steps must be at least 1")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    rng = rng if isinstance(rng, SeededRng) else SeededRng(rng)
    opt = Adam(model.parameters())
    trace: list[TracePoint] = []
    order: list[int] = []
    for step in range(1, steps + 1):
        if len(order) < batch_size:
            order += [int(i) for i in rng.permutation(len(task.train))]
        picked, order = order[:batch_size], order[batch_size:]
        batch = make_batch([task.train[i] for i in picked], task.vocab)
        opt.zero_grad()
        loss = batch_loss(model, batch)
        value = loss.item()
        if not math.isfinite(value):
            raise DivergenceError(step, value)
        loss.backward()
        if grad_clip is not None:
            _clip(opt.params, grad_clip)
        opt.step(sched(step))
        val = evaluate(model, task) if (step % eval_interval == 0 or step == steps) else None
        point = TracePoint(step, value, val)
        trace.append(point)
        if val is not None:
            log.info("step %d train %.4f val %.4f", step, value, val)
        if on_point is not None:
            on_point(point)
    return trace


def write_trace_csv(path, trace: list[TracePoint], encoder_type: str = "", seed: int | None = None) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["step", "encoder_type", "seed", "train_loss", "val_loss"])
        for p in trace:
            w.writerow([p.step, encoder_type, "" if seed is None else seed, repr(p.train_loss), "" if p.val_loss is None else repr(p.val_loss)])
