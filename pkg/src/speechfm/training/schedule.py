from __future__ import annotations

from dataclasses import dataclass

from ..numeric import ConfigError

DEFAULT_HALF_LIFE_STEPS = 200_000
TOY_HALF_LIFE_FRAC = 0.15  # short runs need the rate well down by the last step


@dataclass(frozen=True)
class WarmupSchedule:
    """Two linear ramps (slow, then fast) to the peak rate, then exponential decay.

    ``decay_rate`` is the per-step factor after the peak; the default halves
    the rate every 200K steps.
    """

    knee_step: int = 30_000
    knee_lr: float = 5e-5
    peak_step: int = 60_000
    peak_lr: float = 2e-4
    decay_rate: float = 0.5 ** (1.0 / DEFAULT_HALF_LIFE_STEPS)

    def __post_init__(self):
        if not 0 < self.knee_step < self.peak_step:
            raise ConfigError(f"need 0 < knee_step < peak_step, got {self.knee_step}, {self.peak_step}")
        if not 0 < self.knee_lr < self.peak_lr:
            raise ConfigError(f"need 0 < knee_lr < peak_lr, got {self.knee_lr}, {self.peak_lr}")
        if not 0 < self.decay_rate < 1:
            raise ConfigError(f"decay_rate must be in (0, 1), got {self.decay_rate}")

    @classmethod
    def scaled(cls, total_steps: int, peak_lr: float, knee_frac: float = 0.25, knee_ratio: float = 0.25, half_life_frac: float = TOY_HALF_LIFE_FRAC):
        """Same shape compressed to a short run: knee at ``knee_frac`` of the
        run, peak at twice the knee, post-peak half-life ``half_life_frac``
        times the run length."""
        knee = max(1, int(round(total_steps * knee_frac)))
        return cls(
            knee_step=knee,
            knee_lr=peak_lr * knee_ratio,
            peak_step=2 * knee,
            peak_lr=peak_lr,
            decay_rate=0.5 ** (1.0 / max(1.0, half_life_frac * total_steps)),
        )

    def __call__(self, step: int) -> float:
        return lr_at_step(step, self)


def lr_at_step(step: int, sched: WarmupSchedule) -> float:
    if step < 0:
        raise ValueError(f"step must be nonnegative, got {step}")
    if step <= sched.knee_step:
        return sched.knee_lr * step / sched.knee_step
    if step <= sched.peak_step:
        frac = (step - sched.knee_step) / (sched.peak_step - sched.knee_step)
        return sched.knee_lr + (sched.peak_lr - sched.knee_lr) * frac
    return sched.peak_lr * sched.decay_rate ** (step - sched.peak_step)
