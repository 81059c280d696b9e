"""Command-line interface: ``speechfm <command> [options]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from ..decoding import (
    MAX_WINDOW_FRAMES,
    DecodeOptions,
    ScriptedModel,
    biasing_decode,
    greedy_decode,
    long_form_decode,
    timed_decode_suite,
)
from ..metrics import NORMALIZER_NAME, basic_normalize, bleu_stats, cer, corpus_biased_wer, count_errors, error_rate, speedup
from ..model import ModelConfig, Model, build_model
from ..numeric import SeededRng, ShapeError
from ..protocol import VocabularyError
from ..training import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_COMPARE_CONFIG,
    DivergenceError,
    ToyTask,
    ToyTaskConfig,
    WarmupSchedule,
    compare_encoders,
    train_loop,
    write_trace_csv,
)
from ..training.compare import DEFAULT_PEAK_LR, DEFAULT_STEPS
from .formats import BadMagicError, FormatError, load_checkpoint, load_features, save_checkpoint, save_features
from .manifest import MANIFEST_NAME, RunManifest

log = logging.getLogger("speechfm")

EXIT_OK = 0
EXIT_BAD_MAGIC = 2
EXIT_DIM_MISMATCH = 3
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NO_INPUT = 66
EXIT_DIVERGED = 70

FILE_OUTPUT_COMMANDS = ("synth-features", "init")
MAX_SYNTH_S = 3600
FRAMES_PER_S = 100


class UsageError(Exception):
    pass


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------- models


def model_checkpoint_config(cfg: ModelConfig) -> dict:
    return {"kind": "model", "model": cfg.to_dict()}


def save_model(path, model) -> None:
    if isinstance(model, ScriptedModel):
        save_checkpoint(path, model.to_config(), {})
    else:
        save_checkpoint(path, model_checkpoint_config(model.cfg), model.state_dict())


def load_model(path):
    ckpt = load_checkpoint(path)
    kind = ckpt.config.get("kind")
    if kind == "scripted":
        return ScriptedModel.from_config(ckpt.config)
    if kind != "model":
        raise FormatError(f"{path}: unknown checkpoint kind {kind!r}")
    model = build_model(ModelConfig.from_dict(ckpt.config["model"]), 0)
    model.load_state_dict(ckpt.tensors)
    return model


def _read_config(path) -> dict:
    with open(path) as f:
        return json.load(f)


def _model_config(path) -> ModelConfig:
    if path is None:
        return DEFAULT_COMPARE_CONFIG
    d = _read_config(path)
    return ModelConfig.from_dict(d.get("model", d))


# --------------------------------------------------------------- commands


def synth_features(seed: int, duration_s: float, dim: int = 80) -> np.ndarray:
    """Band-limited noise: white noise smoothed over time and frequency."""
    n = int(round(duration_s * FRAMES_PER_S))
    rng = SeededRng(seed)
    raw = rng.normal(size=(n + 8, dim + 4))
    kt = np.hanning(9)
    kt /= kt.sum()
    kf = np.hanning(5)
    kf /= kf.sum()
    smooth = np.apply_along_axis(lambda c: np.convolve(c, kt, mode="valid"), 0, raw)
    smooth = np.apply_along_axis(lambda r: np.convolve(r, kf, mode="valid"), 1, smooth)
    return (smooth / smooth.std()).astype(np.float32)


def cmd_synth_features(args, man: RunManifest) -> int:
    if not 0 < args.duration_s <= MAX_SYNTH_S:
        raise UsageError(f"--duration-s must be in (0, {MAX_SYNTH_S}]")
    feats = synth_features(args.seed, args.duration_s, args.dim)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_features(out, feats)
    man.add_output(out)
    man.note("n_frames", int(feats.shape[0]))
    return EXIT_OK


def cmd_init(args, man: RunManifest) -> int:
    d = _read_config(args.config)
    man.add_inputs(args.config)
    if d.get("kind") == "scripted":
        model = ScriptedModel.from_config(d)
    else:
        cfg = ModelConfig.from_dict(d.get("model", d))
        man.data["config_hash"] = cfg.config_hash()
        model = build_model(cfg, args.seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(out, model)
    man.add_output(out)
    return EXIT_OK


def _toy_task(path, seed_default: int = 0) -> ToyTask:
    if path is None:
        return ToyTask(ToyTaskConfig(seed=seed_default))
    return ToyTask(ToyTaskConfig(**_read_config(path)))


def cmd_train_toy(args, man: RunManifest) -> int:
    cfg = _model_config(args.config)
    man.add_inputs(args.config, args.task_config)
    man.data["config_hash"] = cfg.config_hash()
    task = _toy_task(args.task_config)
    root = SeededRng(args.seed)
    model = build_model(cfg, root.split())
    sched = WarmupSchedule.scaled(args.steps, args.lr)
    man.note("batch_size", args.batch_size)
    man.note("schedule", sched.__dict__)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        trace = train_loop(model, task, sched, args.steps, args.batch_size, root.split(), eval_interval=args.eval_interval)
    except DivergenceError as e:
        man.note("diverged_at_step", e.step)
        raise CliError(str(e), EXIT_DIVERGED) from e
    write_trace_csv(out / "loss.csv", trace, cfg.encoder_type, args.seed)
    save_model(out / "model.owsf", model)
    man.add_output(out / "loss.csv")
    man.add_output(out / "model.owsf")
    return EXIT_OK


def _seed_list(text: str) -> list[int]:
    try:
        seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise UsageError(f"--seeds must be comma-separated integers, got {text!r}")
    if not seeds:
        raise UsageError("--seeds is empty")
    return seeds


def cmd_compare_encoders(args, man: RunManifest) -> int:
    cfg = _model_config(args.config)
    man.add_inputs(args.config, args.task_config)
    man.data["config_hash"] = cfg.config_hash()
    seeds = _seed_list(args.seeds)
    task = _toy_task(args.task_config)
    cmp = compare_encoders(cfg, task, args.steps, seeds, peak_lr=args.lr, batch_size=args.batch_size, eval_interval=args.eval_interval)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmp.write_csv(out / "curves.csv")
    cmp.write_verdict(out / "verdict.json")
    man.add_output(out / "curves.csv")
    man.add_output(out / "verdict.json")
    man.note("batch_size", args.batch_size)
    return EXIT_OK


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.rstrip("\n").rstrip("\r") for line in f]


def _decode_options(args) -> DecodeOptions:
    return DecodeOptions(
        task=args.task,
        lang=args.lang,
        prompt=args.prompt,
        max_tokens=args.max_tokens,
        with_timestamps=args.timestamps,
    )


def cmd_decode(args, man: RunManifest) -> int:
    if args.prompt is not None and args.bias_list is not None:
        raise UsageError("--prompt and --bias-list are mutually exclusive")
    man.add_inputs(args.checkpoint, args.features, args.bias_list)
    model = load_model(args.checkpoint)
    if isinstance(model, Model):
        man.data["config_hash"] = model.cfg.config_hash()
    feats = load_features(args.features)
    expected = model.n_mels if isinstance(model, ScriptedModel) else model.cfg.n_mels
    if feats.shape[1] != expected:
        raise CliError(f"features have dimension {feats.shape[1]}, model expects {expected}", EXIT_DIM_MISMATCH)
    if not args.long_form and feats.shape[0] > MAX_WINDOW_FRAMES:
        raise CliError(f"{feats.shape[0]} frames exceed one 30 s window; use --long-form", EXIT_DATA)
    opts = _decode_options(args)
    if args.long_form:
        res = long_form_decode(model, feats, opts)
        for i, start in enumerate(res.windows):
            log.info("window %d at %.2f s", i + 1, start)
    elif args.bias_list is not None:
        words = [w.strip() for w in _read_lines(args.bias_list) if w.strip()]
        if not words:
            raise CliError(f"{args.bias_list}: bias list is empty", EXIT_DATA)
        res = biasing_decode(model, feats, words, opts)
        man.note("prompt", " ".join(words))
    else:
        res = greedy_decode(model, feats, opts)
    if opts.prompt is not None:
        man.note("prompt", opts.prompt)
    report = res.to_dict()
    report["windows"] = list(res.windows)
    out = Path(args.out)
    _write_json(out / "transcript.json", report)
    man.add_output(out / "transcript.json")
    return EXIT_OK


def cmd_eval(args, man: RunManifest) -> int:
    man.add_inputs(args.refs, args.hyps, args.bias_list)
    refs, hyps = _read_lines(args.refs), _read_lines(args.hyps)
    if len(refs) != len(hyps):
        raise CliError(f"{len(refs)} reference lines but {len(hyps)} hypothesis lines", EXIT_DATA)
    if args.normalize:
        refs = [basic_normalize(x) for x in refs]
        hyps = [basic_normalize(x) for x in hyps]
    report: dict = {"metric": args.metric, "segments": len(refs), "normalizer": NORMALIZER_NAME if args.normalize else None}
    if args.metric == "bleu":
        st = bleu_stats(refs, hyps)
        report.update(
            bleu=st.score,
            precisions=st.precisions,
            brevity_penalty=st.brevity_penalty,
            hyp_len=st.hyp_len,
            ref_len=st.ref_len,
        )
    else:
        total = None
        for r, h in zip(refs, hyps):
            c = count_errors(r.split(), h.split()) if args.metric == "wer" else count_errors(list(r), list(h))
            total = c if total is None else total + c
        if total is None:
            report.update(value=0.0, substitutions=0, deletions=0, insertions=0, ref_len=0)
        else:
            report.update(
                value=error_rate(total.errors, total.ref_len),
                substitutions=total.substitutions,
                deletions=total.deletions,
                insertions=total.insertions,
                ref_len=total.ref_len,
            )
        report[args.metric] = report["value"]
    if args.bias_list is not None:
        bias = [w.strip() for w in _read_lines(args.bias_list) if w.strip()]
        if not bias:
            raise CliError(f"{args.bias_list}: bias list is empty", EXIT_DATA)
        report["bias"] = corpus_biased_wer(refs, hyps, bias).to_dict()
    _write_json(Path(args.out) / "report.json", _finite(report))
    man.add_output(Path(args.out) / "report.json")
    return EXIT_OK


def _finite(obj):
    """JSON has no infinity; an error rate over an empty reference becomes the string "inf"."""
    if isinstance(obj, float) and not np.isfinite(obj):
        return "inf" if obj > 0 else str(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def cmd_bench(args, man: RunManifest) -> int:
    files = sorted(Path(args.features_dir).glob("*.feat"))
    if len(files) < 3:
        raise CliError(f"{args.features_dir}: need at least 3 .feat files, found {len(files)}", EXIT_DATA)
    man.add_inputs(args.checkpoint_a, args.checkpoint_b, *files)
    feats = [load_features(f) for f in files]
    opts = DecodeOptions(task=args.task, lang=args.lang, max_tokens=args.max_tokens, ignore_eos=True)
    timings = {}
    for label, path in (("a", args.checkpoint_a), ("b", args.checkpoint_b)):
        model = load_model(path)
        timings[label] = timed_decode_suite(model, feats, opts, repeats=args.repeats, label=str(path))
    report = {
        "a": timings["a"].to_dict(),
        "b": timings["b"].to_dict(),
        "speedup_b_over_a": speedup(timings["a"].mean_ms, timings["b"].mean_ms),
        "files": [f.name for f in files],
        "max_tokens": args.max_tokens,
        "warmup_runs": 1,
    }
    man.note("hardware", man.data["host"]["processor"])
    _write_json(Path(args.out) / "bench.json", report)
    man.add_output(Path(args.out) / "bench.json")
    return EXIT_OK


# ----------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="speechfm", description="Desk-scale speech foundation model toolkit.")
    p.add_argument("--log-level", default="WARNING", help="logging level (default WARNING)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth-features", help="write deterministic synthetic features")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--duration-s", type=float, required=True)
    s.add_argument("--dim", type=int, default=80)
    s.add_argument("--out", required=True, help="output .feat file")
    s.set_defaults(func=cmd_synth_features)

    s = sub.add_parser("init", help="write a freshly initialized (or scripted) checkpoint")
    s.add_argument("--config", required=True, help="model config JSON, or a scripted-model config")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="output checkpoint file")
    s.set_defaults(func=cmd_init)

    s = sub.add_parser("train-toy", help="train on the synthetic toy task")
    s.add_argument("--config", help="model config JSON (default: the comparison reference model)")
    s.add_argument("--task-config", help="toy task config JSON")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    s.add_argument("--lr", type=float, default=DEFAULT_PEAK_LR, help="peak learning rate")
    s.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    s.add_argument("--eval-interval", type=int, default=50)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_train_toy)

    s = sub.add_parser("compare-encoders", help="train Transformer, Conformer and E-Branchformer encoders")
    s.add_argument("--config", help="reference model config JSON")
    s.add_argument("--task-config", help="toy task config JSON")
    s.add_argument("--seeds", default="0,1,2")
    s.add_argument("--steps", type=int, default=DEFAULT_STEPS)
    s.add_argument("--lr", type=float, default=DEFAULT_PEAK_LR)
    s.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE)
    s.add_argument("--eval-interval", type=int, default=50)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_compare_encoders)

    s = sub.add_parser("decode", help="greedy, long-form or prompted decoding")
    s.add_argument("--checkpoint", required=True)
    s.add_argument("--features", required=True)
    s.add_argument("--task", default="asr")
    s.add_argument("--lang", help="language code; predicted when omitted")
    s.add_argument("--prompt")
    s.add_argument("--long-form", action="store_true")
    s.add_argument("--bias-list", help="file with one bias word per line")
    s.add_argument("--timestamps", action="store_true", help="decode with timestamp tokens")
    s.add_argument("--max-tokens", type=int, default=448)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("eval", help="score hypotheses against references")
    s.add_argument("--refs", required=True)
    s.add_argument("--hyps", required=True)
    s.add_argument("--metric", choices=("wer", "cer", "bleu"), default="wer")
    s.add_argument("--bias-list")
    s.add_argument("--normalize", action="store_true", help=f"apply the {NORMALIZER_NAME} text normalizer first")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("bench", help="compare decoding speed of two checkpoints")
    s.add_argument("--checkpoint-a", required=True, help="baseline")
    s.add_argument("--checkpoint-b", required=True, help="candidate")
    s.add_argument("--features-dir", required=True)
    s.add_argument("--task", default="asr")
    s.add_argument("--lang", default="eng")
    s.add_argument("--max-tokens", type=int, default=32)
    s.add_argument("--repeats", type=int, default=3)
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_bench)
    return p


def manifest_path(args) -> Path:
    """``<file>.manifest.json`` next to a file output, ``<dir>/manifest.json`` inside an output directory."""
    out = Path(args.out)
    if args.command in FILE_OUTPUT_COMMANDS:
        return out.with_name(out.name + ".manifest.json")
    return out / MANIFEST_NAME


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    man = RunManifest(args.command, argv, getattr(args, "seed", None))
    code = EXIT_OK
    try:
        code = args.func(args, man)
    except UsageError as e:
        print(f"speechfm {args.command}: error: {e}", file=sys.stderr)
        code = EXIT_USAGE
    except CliError as e:
        print(f"speechfm {args.command}: {e}", file=sys.stderr)
        code = e.code
    except BadMagicError as e:
        print(f"speechfm {args.command}: {e}", file=sys.stderr)
        code = EXIT_BAD_MAGIC
    except FileNotFoundError as e:
        print(f"speechfm {args.command}: {e}", file=sys.stderr)
        code = EXIT_NO_INPUT
    except FormatError as e:
        print(f"speechfm {args.command}: {e}", file=sys.stderr)
        code = EXIT_BAD_MAGIC
    except ShapeError as e:
        print(f"speechfm {args.command}: {e}", file=sys.stderr)
        code = EXIT_DIM_MISMATCH
    except (VocabularyError, ValueError) as e:
        print(f"speechfm {args.command}: {e}", file=sys.stderr)
        code = EXIT_DATA
    man.write(manifest_path(args), code)
    return code


if __name__ == "__main__":
    sys.exit(main())
