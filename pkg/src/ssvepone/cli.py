"""Command-line interface.

Subcommands: synth, train, evaluate, benchmark, ablate, report. Errors exit
nonzero with one machine-readable JSON line on stderr.
"""

import argparse
import dataclasses
import hashlib
import json
import sys
from pathlib import Path

from . import io as dataset_io
from .core import group_by_class
from .errors import ToolkitError
from .filterbank import default_filter_bank
from .harness import (RunConfig, ablation_run, evaluate_fold, load_run_data,
                      loso_evaluate, report_emit, results_from_json,
                      results_to_json, _net_training_inputs, _window_epochs)
from .network import NetConfig, train_network
from .references import template_bank
from .synth import SynthSpec, synth_generate
from .transform import estimate_stimulus_transforms


def _parse_windows(text: str) -> tuple:
    """"0.5:1.0:0.1" -> inclusive grid; a single float or comma list also works."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ToolkitError("invalid-arguments", f"bad window range {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ToolkitError("invalid-arguments", f"bad window range {text!r}")
        n = int(round((stop - start) / step))
        return tuple(round(start + i * step, 6) for i in range(n + 1))
    return tuple(float(p) for p in text.split(","))


def _build_config(args) -> RunConfig:
    base = {}
    if getattr(args, "config", None):
        base = json.loads(Path(args.config).read_text("utf-8"))
    cfg = RunConfig.from_dict(base) if base else RunConfig()
    updates = {}
    if getattr(args, "dataset", None):
        updates["dataset_dir"] = args.dataset
    if getattr(args, "seed", None) is not None:
        updates["seed"] = args.seed
    if getattr(args, "windows", None):
        updates["windows"] = _parse_windows(args.windows)
    if getattr(args, "members", None):
        updates["fusion_members"] = tuple(args.members.split(","))
    if getattr(args, "jobs", None):
        updates["jobs"] = args.jobs
    if getattr(args, "out", None):
        updates["out_dir"] = args.out
    if updates:
        cfg = dataclasses.replace(cfg, **updates)
    if cfg.dataset_dir is None and cfg.synth is None:
        raise ToolkitError("invalid-arguments", "need --dataset or a synth config")
    return cfg


def _cmd_synth(args) -> int:
    spec_kw = {}
    if args.config:
        spec_kw = json.loads(Path(args.config).read_text("utf-8")).get("synth", {})
    for name, value in [("n_subjects", args.subjects), ("n_stimuli", args.stimuli),
                        ("n_blocks", args.blocks), ("n_channels", args.channels),
                        ("sampling_rate", args.fs), ("duration", args.duration),
                        ("snr", args.snr)]:
        if value is not None:
            spec_kw[name] = value
    spec = SynthSpec.from_dict(spec_kw)
    manifest, tensors = synth_generate(spec, seed=args.seed)
    out = dataset_io.save_dataset(manifest, tensors, args.out)
    print(f"wrote synthetic dataset to {out}")
    return 0


def _cmd_train(args) -> int:
    cfg = _build_config(args)
    manifest, epochs = load_run_data(cfg)
    subjects = [s for s in manifest.subjects if s != args.exclude]
    window = cfg.windows[0]
    by_subject = {s: [] for s in manifest.subjects}
    for e in epochs:
        by_subject[e.subject_id].append(e)
    win = {s: _window_epochs(by_subject[s], manifest, window) for s in subjects}
    n_s = next(iter(win.values()))[0].n_samples
    bank = cfg.filter_bank or default_filter_bank(manifest.sampling_rate)
    refs = template_bank(manifest.stimuli, cfg.n_harmonics, manifest.sampling_rate, n_s)
    x1, x2, y = _net_training_inputs(win, subjects, refs, bank, cfg.net_paths)
    net_cfg = NetConfig(
        n_classes=manifest.n_stimuli, n_channels=manifest.n_channels,
        n_harmonics=cfg.n_harmonics, n_samples=n_s, n_bands=bank.n_bands,
        n_filters=cfg.n_filters, dropout_spatial=cfg.dropout_spatial,
        dropout_temporal=cfg.dropout_temporal, label_smoothing=cfg.label_smoothing,
        paths=cfg.net_paths, seed=cfg.seed)
    params, history = train_network(x1, x2, y, net_cfg, epochs=cfg.net_epochs,
                                    batch_size=cfg.batch_size,
                                    learning_rate=cfg.learning_rate)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg_dict = dataclasses.asdict(net_cfg)
    cfg_dict["paths"] = list(cfg_dict["paths"])
    cfg_hash = hashlib.sha256(
        json.dumps(cfg_dict, sort_keys=True).encode("utf-8")).hexdigest()
    meta = {"config": cfg_dict, "config_hash": cfg_hash, "window_s": window}
    dataset_io.save_tensor_bundle(out / "net_params", params, meta=meta)
    hist_lines = ["epoch,mean_loss"] + [f"{i + 1},{v:.6f}" for i, v in enumerate(history)]
    (out / "loss_history.csv").write_text("\n".join(hist_lines) + "\n", "utf-8")
    print(f"trained on {len(y)} trials; final mean loss {history[-1]:.4f}")
    return 0


def _cmd_evaluate(args) -> int:
    cfg = _build_config(args)
    manifest, epochs = load_run_data(cfg)
    target = args.target or manifest.subjects[0]
    fold_index = list(manifest.subjects).index(target)
    result = evaluate_fold(manifest, epochs, target, cfg, cfg.seed ^ fold_index)
    if args.dump_transforms:
        window = cfg.windows[0]
        by_target = [e for e in epochs if e.subject_id == target]
        win = _window_epochs(by_target, manifest, window)
        calib = [e for e in win if e.labeled and e.block_id == cfg.calibration_block]
        refs = template_bank(manifest.stimuli, cfg.n_harmonics,
                             manifest.sampling_rate, win[0].n_samples)
        transforms = estimate_stimulus_transforms(
            group_by_class(calib, n_classes=manifest.n_stimuli), refs)
        tensors = {f"transform_{p.stimulus_index:03d}": p.data for p in transforms}
        dataset_io.save_tensor_bundle(Path(args.out) / "transforms", tensors,
                                      meta={"subject": target, "window_s": window})
    if args.out:
        report_emit([result], args.out, cfg)
    for w in result.windows:
        print(f"{target} window={w}s accuracy={result.accuracy[w]:.2f}% "
              f"itr={result.itr_bpm[w]:.2f}bpm")
    return 0


def _cmd_benchmark(args) -> int:
    cfg = _build_config(args)
    results, summary = loso_evaluate(cfg)
    out = Path(args.out)
    report_emit(results, out, cfg)
    (out / "results.json").write_text(results_to_json(results, cfg), "utf-8")
    for w in summary["windows"]:
        print(f"window={w}s accuracy={summary['accuracy_mean'][w]:.2f}"
              f"±{summary['accuracy_sem'][w]:.2f}% "
              f"itr={summary['itr_mean'][w]:.2f}±{summary['itr_sem'][w]:.2f}bpm")
    return 0


def _cmd_ablate(args) -> int:
    cfg = _build_config(args)
    results, summary = ablation_run(cfg, args.variant)
    out = Path(args.out)
    report_emit(results, out, cfg)
    (out / "results.json").write_text(results_to_json(results, cfg), "utf-8")
    for w in summary["windows"]:
        print(f"[{args.variant}] window={w}s "
              f"accuracy={summary['accuracy_mean'][w]:.2f}%")
    return 0


def _cmd_report(args) -> int:
    results, cfg = results_from_json(Path(args.results).read_text("utf-8"))
    written = report_emit(results, args.out, cfg)
    for path in written:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssvepone",
        description="One-shot SSVEP classification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config")
    p.add_argument("--subjects", type=int)
    p.add_argument("--stimuli", type=int)
    p.add_argument("--blocks", type=int)
    p.add_argument("--channels", type=int)
    p.add_argument("--fs", type=float)
    p.add_argument("--duration", type=float)
    p.add_argument("--snr", type=float)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train the network only")
    p.add_argument("--dataset")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--windows")
    p.add_argument("--exclude", help="subject to hold out of training")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="run a single LOSO fold")
    p.add_argument("--dataset")
    p.add_argument("--config")
    p.add_argument("--target", help="target subject id (default: first)")
    p.add_argument("--out")
    p.add_argument("--seed", type=int)
    p.add_argument("--windows")
    p.add_argument("--members")
    p.add_argument("--dump-transforms", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("benchmark", help="full leave-one-subject-out run")
    p.add_argument("--dataset")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--windows")
    p.add_argument("--members")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=_cmd_benchmark)

    p = sub.add_parser("ablate", help="run an ablation variant")
    p.add_argument("--variant", required=True,
                   help="no-mlst | no-original | members=<a,b> | sources=<k>")
    p.add_argument("--dataset")
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--windows")
    p.add_argument("--members")
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("report", help="re-emit report files from results.json")
    p.add_argument("--results", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as exc:
        print(json.dumps({"error": exc.code, "detail": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(json.dumps({"error": "internal", "detail": repr(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
