from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..model import ENCODER_TYPES, ModelConfig, build_model, count_params
from ..numeric import ConfigError, SeededRng
from .schedule import TOY_HALF_LIFE_FRAC, WarmupSchedule
from .toytask import ToyTask
from .trainer import DEFAULT_BATCH_SIZE, TracePoint, train_loop

BUDGET_TOLERANCE = 0.02
WORKERS_ENV = "SPEECHFM_WORKERS"

# Desk-scale reference variant; the other encoders are sized to match it.
DEFAULT_COMPARE_CONFIG = ModelConfig(
    encoder_type="e_branchformer",
    enc_layers=2,
    dec_layers=1,
    hidden=48,
    heads=4,
    conv_kernel=7,
    merge_kernel=7,
    cgmlp_expansion=4,
)
DEFAULT_STEPS = 300
DEFAULT_PEAK_LR = 1e-3


def _params(cfg: ModelConfig) -> int:
    return count_params(build_model(cfg, 0))


def equalize_budget(base: ModelConfig, encoder_type: str, target: int | None = None, tol: float = BUDGET_TOLERANCE) -> ModelConfig:
    """Size ``encoder_type`` to the parameter count of ``base``; the decoder is untouched.

    Depth is chosen so the encoder FFN width needed to close the gap is as
    close as possible to the default expansion; the width then absorbs the
    remainder.
    """
    target = target or _params(base)
    cfg = base.replace(encoder_type=encoder_type)
    if abs(_params(cfg) - target) <= tol * target:
        return cfg
    h = cfg.hidden
    default_inner = h * cfg.encoder_ffn_expansion
    candidates = []
    for layers in range(1, 4 * base.enc_layers + 1):
        p1 = _params(cfg.replace(enc_layers=layers, enc_ffn_expansion=1.0))
        p2 = _params(cfg.replace(enc_layers=layers, enc_ffn_expansion=2.0))
        per_unit = (p2 - p1) / h  # parameters per unit of FFN inner width
        inner = round(h + (target - p1) / per_unit)
        if inner >= max(1, h // 4):
            candidates.append((abs(np.log(inner / default_inner)), layers, inner))
    for _, layers, inner in sorted(candidates):
        out = cfg.replace(enc_layers=layers, enc_ffn_expansion=inner / h)
        if abs(_params(out) - target) <= tol * target:
            return out
    raise ConfigError(f"cannot size a {encoder_type} encoder to {target} parameters within {tol:.0%}")


@dataclass
class EncoderRun:
    encoder_type: str
    seed: int
    config: ModelConfig
    n_params: int
    trace: list[TracePoint]

    @property
    def final_val_loss(self) -> float:
        return self.trace[-1].val_loss


@dataclass
class Comparison:
    runs: list[EncoderRun]
    seeds: list[int]
    steps: int
    per_seed: dict[int, bool] = field(default_factory=dict)

    @property
    def wins(self) -> int:
        return sum(self.per_seed.values())

    @property
    def verdict(self) -> str:
        # E-Branchformer must be no worse than both baselines on at least 2/3 of the seeds
        return "pass" if 3 * self.wins >= 2 * len(self.seeds) else "fail"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["step", "encoder_type", "seed", "val_loss"])
            for run in self.runs:
                for p in run.trace:
                    if p.val_loss is not None:
                        w.writerow([p.step, run.encoder_type, run.seed, repr(p.val_loss)])

    def summary(self) -> dict:
        return {
            "verdict": self.verdict,
            "wins": self.wins,
            "seeds": self.seeds,
            "steps": self.steps,
            "per_seed": {str(s): ok for s, ok in self.per_seed.items()},
            "final_val_loss": {
                f"{r.encoder_type}/{r.seed}": r.final_val_loss for r in self.runs
            },
            "params": {r.encoder_type: r.n_params for r in self.runs if r.seed == self.seeds[0]},
            "configs": {r.encoder_type: r.config.to_dict() for r in self.runs if r.seed == self.seeds[0]},
        }

    def write_verdict(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.summary(), f, indent=2, sort_keys=True)
            f.write("\n")


def _workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def compare_encoders(
    cfg_base: ModelConfig = DEFAULT_COMPARE_CONFIG,
    task: ToyTask | None = None,
    steps: int = DEFAULT_STEPS,
    seeds=(0, 1, 2),
    encoder_types=ENCODER_TYPES,
    peak_lr: float = DEFAULT_PEAK_LR,
    batch_size: int = DEFAULT_BATCH_SIZE,
    eval_interval: int = 50,
    half_life_frac: float = TOY_HALF_LIFE_FRAC,
) -> Comparison:
    """Train each encoder variant with the same decoder, data order and seed.

    Budgets are matched to ``cfg_base`` within 2%. Runs can share a thread
    pool sized by the ``SPEECHFM_WORKERS`` environment variable; results do
    not depend on it.
    """
    task = task or ToyTask()
    seeds = [int(s) for s in seeds]
    target = _params(cfg_base)
    configs = {et: equalize_budget(cfg_base, et, target) for et in encoder_types}
    sched = WarmupSchedule.scaled(steps, peak_lr, half_life_frac=half_life_frac)

    def run(job):
        et, seed = job
        cfg = configs[et]
        root = SeededRng(seed)
        init, order = root.split(), root.split()
        model = build_model(cfg, init)
        trace = train_loop(model, task, sched, steps, batch_size, order, eval_interval=eval_interval)
        return EncoderRun(et, seed, cfg, count_params(model), trace)

    jobs = [(et, s) for s in seeds for et in encoder_types]
    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(run, jobs))
    else:
        runs = [run(j) for j in jobs]

    for r in runs:
        if abs(r.n_params - target) > BUDGET_TOLERANCE * target:
            raise ConfigError(f"{r.encoder_type} has {r.n_params} parameters, budget is {target}")
    cmp = Comparison(runs, seeds, steps)
    if "e_branchformer" in encoder_types:
        for s in seeds:
            final = {r.encoder_type: r.final_val_loss for r in runs if r.seed == s}
            ebf = final["e_branchformer"]
            cmp.per_seed[s] = all(ebf <= v for et, v in final.items() if et != "e_branchformer")
    return cmp
