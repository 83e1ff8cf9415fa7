"""Leave-one-subject-out evaluation: orchestration, ablations, reporting.

Per fold: train the network on all other subjects (each mapped through its
own per-stimulus transforms), estimate the target's transforms from its
single calibration block, SAME-augment that block to train eTRCA and TDCA,
then classify every remaining target trial through score fusion. The target
subject's trials never enter network training; this is asserted
structurally. Folds are independently seeded (seed XOR fold index) so serial
and parallel runs agree bit-for-bit.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
from joblib import Parallel, delayed

from . import io as dataset_io
from .core import DatasetManifest, WindowSpec, epoch_window, group_by_class
from .decoders import ScoreVector, etrca_score, tdca_score, tdca_train, trca_train
from .errors import ToolkitError
from .filterbank import FilterBankSpec, default_filter_bank, filterbank_decompose
from .fusion import FusionConfig, fuse_and_decide
from .metrics import itr
from .network import ALL_PATHS, NetConfig, net_infer, train_network
from .references import template_bank
from .synth import SynthSpec, synth_generate
from .transform import estimate_stimulus_transforms, same_augment

DEFAULT_WINDOWS = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class RunConfig:
    """Everything a benchmark run needs; serializable to/from JSON."""

    dataset_dir: Optional[str] = None
    synth: Optional[SynthSpec] = None
    windows: tuple = DEFAULT_WINDOWS
    n_harmonics: int = 5
    filter_bank: Optional[FilterBankSpec] = None
    n_filters: int = 120
    dropout_spatial: float = 0.1
    dropout_temporal: float = 0.6
    label_smoothing: float = 0.01
    net_paths: tuple = ALL_PATHS
    net_epochs: int = 100
    batch_size: int = 32
    learning_rate: float = 2e-4
    same_n_aug: int = 3
    same_noise_level: float = 0.05
    fusion_members: tuple = ("net", "etrca", "tdca")
    tdca_delays: int = 5
    tdca_components: int = 8
    calibration_block: int = 0
    gaze_shift: float = 0.5
    seed: int = 0
    jobs: int = 1
    n_source_subjects: Optional[int] = None
    out_dir: Optional[str] = None
    log_scores: bool = False

    def __post_init__(self):
        object.__setattr__(self, "windows", tuple(float(w) for w in self.windows))
        object.__setattr__(self, "net_paths", tuple(self.net_paths))
        object.__setattr__(self, "fusion_members", tuple(self.fusion_members))
        if not self.windows:
            raise ToolkitError("invalid-arguments", "need at least one window length")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["synth"] = self.synth.to_dict() if self.synth else None
        d["filter_bank"] = self.filter_bank.to_dict() if self.filter_bank else None
        d["windows"] = list(self.windows)
        d["net_paths"] = list(self.net_paths)
        d["fusion_members"] = list(self.fusion_members)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        kw = {k: d[k] for k in cls.__dataclass_fields__ if k in d}
        if kw.get("synth"):
            kw["synth"] = SynthSpec.from_dict(kw["synth"])
        if kw.get("filter_bank"):
            kw["filter_bank"] = FilterBankSpec.from_dict(kw["filter_bank"])
        return cls(**kw)


@dataclass
class FoldResult:
    """One target subject's outcome across window lengths."""

    target_subject: str
    windows: tuple
    accuracy: dict       # window -> percent in [0, 100]
    itr_bpm: dict        # window -> bits per minute
    predictions: dict    # window -> list of (block, true, predicted)
    seconds: float
    fused_scores: dict = dataclasses.field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "target_subject": self.target_subject,
            "windows": list(self.windows),
            "accuracy": {str(w): v for w, v in self.accuracy.items()},
            "itr_bpm": {str(w): v for w, v in self.itr_bpm.items()},
            "predictions": {
                str(w): [list(p) for p in preds] for w, preds in self.predictions.items()
            },
            "seconds": self.seconds,
        }
        if self.fused_scores:
            d["fused_scores"] = {
                str(w): [list(s) for s in scores]
                for w, scores in self.fused_scores.items()
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FoldResult":
        windows = tuple(float(w) for w in d["windows"])
        return cls(
            target_subject=d["target_subject"],
            windows=windows,
            accuracy={float(w): v for w, v in d["accuracy"].items()},
            itr_bpm={float(w): v for w, v in d["itr_bpm"].items()},
            predictions={
                float(w): [tuple(p) for p in preds]
                for w, preds in d["predictions"].items()
            },
            seconds=d["seconds"],
            fused_scores={
                float(w): [list(s) for s in scores]
                for w, scores in d.get("fused_scores", {}).items()
            },
        )


def load_run_data(cfg: RunConfig) -> tuple:
    """Materialize (manifest, epochs) from a dataset directory or synth spec."""
    if cfg.dataset_dir:
        manifest, tensors = dataset_io.load_dataset(cfg.dataset_dir)
    elif cfg.synth:
        manifest, tensors = synth_generate(cfg.synth, seed=cfg.seed)
    else:
        raise ToolkitError("invalid-arguments", "config needs dataset_dir or synth")
    return manifest, dataset_io.epochs_from_tensors(manifest, tensors)


def _window_epochs(epochs, manifest: DatasetManifest, length: float) -> list:
    spec = WindowSpec(start_offset=manifest.latency_offset, length=length)
    return [epoch_window(e, spec, onset=manifest.cue_offset) for e in epochs]


def _transform_stacks(trials, transforms) -> np.ndarray:
    """(n, Nf, 2Nh, Ns) stacks for a list of epochs given fitted transforms."""
    mats = np.stack([p.data for p in transforms])  # (Nf, 2Nh, Nc)
    data = np.stack([t.data for t in trials])      # (n, Nc, Ns)
    return np.einsum("fhc,ncs->nfhs", mats, data, optimize=True)


def _band_tensors(trials, bank: FilterBankSpec) -> np.ndarray:
    """(n, Nb, Nc, Ns) filter-bank decompositions for a list of epochs."""
    return np.stack([filterbank_decompose(t, bank) for t in trials])


def _net_training_inputs(subject_epochs: dict, subjects, refs, bank: FilterBankSpec,
                         paths: tuple) -> tuple:
    """Assemble (x_bands, x_stacks, labels) over the given subjects.

    Each subject's trials are mapped through that subject's own transforms.
    """
    need_bands = "f1" in paths
    need_stacks = "f2" in paths
    xs1, xs2, ys = [], [], []
    for subject in subjects:
        trials = [e for e in subject_epochs[subject] if e.labeled]
        if not trials:
            continue
        if need_stacks:
            by_class = group_by_class(trials, n_classes=len(refs))
            transforms = estimate_stimulus_transforms(by_class, refs)
            xs2.append(_transform_stacks(trials, transforms))
        if need_bands:
            xs1.append(_band_tensors(trials, bank))
        ys.extend(e.stimulus_index for e in trials)
    if not ys:
        raise ToolkitError("empty-source-set", "no labeled source trials")
    x1 = np.concatenate(xs1) if xs1 else None
    x2 = np.concatenate(xs2) if xs2 else None
    return x1, x2, np.asarray(ys, dtype=np.int64)


def _select_sources(subjects, target: str, cfg: RunConfig, rng) -> list:
    sources = [s for s in subjects if s != target]
    if cfg.n_source_subjects is not None:
        k = cfg.n_source_subjects
        if not 1 <= k <= len(sources):
            raise ToolkitError(
                "invalid-variant", f"n_source_subjects={k} not in [1, {len(sources)}]")
        picked = rng.choice(len(sources), size=k, replace=False)
        sources = [sources[i] for i in sorted(picked)]
    return sources


def evaluate_fold(manifest: DatasetManifest, epochs, target: str, cfg: RunConfig,
                  fold_seed: int) -> FoldResult:
    """Run one leave-one-subject-out fold against `target`."""
    if target not in manifest.subjects:
        raise ToolkitError("invalid-arguments", f"unknown subject {target}")
    t_start = time.perf_counter()
    seed_seq = np.random.SeedSequence(fold_seed)
    net_seed, same_seed, subsample_seed = (int(s) for s in seed_seq.generate_state(3))
    sources = _select_sources(manifest.subjects, target, cfg,
                              np.random.default_rng(subsample_seed))
    assert target not in sources  # leave-one-subject-out contract

    by_subject = {s: [] for s in manifest.subjects}
    for e in epochs:
        by_subject[e.subject_id].append(e)

    members = FusionConfig(cfg.fusion_members).members
    fs = manifest.sampling_rate
    bank = cfg.filter_bank or default_filter_bank(fs)
    n_f = manifest.n_stimuli
    weights = np.asarray(bank.weights)

    accuracy, itr_bpm, predictions, fused_scores = {}, {}, {}, {}
    for window in cfg.windows:
        win = {s: _window_epochs(by_subject[s], manifest, window) for s in by_subject}
        n_s = win[target][0].n_samples if win[target] else 0
        refs = template_bank(manifest.stimuli, cfg.n_harmonics, fs, n_s)

        net_params = net_cfg = None
        if "net" in members:
            x1, x2, y = _net_training_inputs(win, sources, refs, bank, cfg.net_paths)
            net_cfg = NetConfig(
                n_classes=n_f, n_channels=manifest.n_channels,
                n_harmonics=cfg.n_harmonics, n_samples=n_s,
                n_bands=bank.n_bands, n_filters=cfg.n_filters,
                dropout_spatial=cfg.dropout_spatial,
                dropout_temporal=cfg.dropout_temporal,
                label_smoothing=cfg.label_smoothing,
                paths=cfg.net_paths, seed=net_seed)
            net_params, _ = train_network(
                x1, x2, y, net_cfg, epochs=cfg.net_epochs,
                batch_size=cfg.batch_size, learning_rate=cfg.learning_rate)

        calib = [e for e in win[target]
                 if e.labeled and e.block_id == cfg.calibration_block]
        calib_by_class = group_by_class(calib, n_classes=n_f)
        for t, trials in enumerate(calib_by_class):
            if len(trials) != 1:
                raise ToolkitError(
                    "missing-calibration-block",
                    f"target {target} block {cfg.calibration_block}: "
                    f"{len(trials)} trial(s) for stimulus {t}, need exactly 1")

        target_transforms = None
        if "net" in members and "f2" in cfg.net_paths:
            target_transforms = estimate_stimulus_transforms(calib_by_class, refs)

        trca_model = tdca_model = None
        if "etrca" in members or "tdca" in members:
            artificial = same_augment(calib_by_class, refs, n_aug=cfg.same_n_aug,
                                      noise_level=cfg.same_noise_level, seed=same_seed)
            train_trials, train_labels = [], []
            for t in range(n_f):
                for tr in calib_by_class[t] + artificial[t]:
                    train_trials.append(tr)
                    train_labels.append(t)
            bands_train = _band_tensors(train_trials, bank).transpose(1, 0, 2, 3)
            train_labels = np.asarray(train_labels)
            if "etrca" in members:
                trca_model = trca_train(bands_train, train_labels)
            if "tdca" in members:
                tdca_model = tdca_train(bands_train, train_labels, refs,
                                        n_delays=cfg.tdca_delays,
                                        n_components=cfg.tdca_components)

        tests = [e for e in win[target]
                 if e.labeled and e.block_id != cfg.calibration_block]
        test_bands = _band_tensors(tests, bank)  # (n, Nb, Nc, Ns)
        net_scores = None
        if "net" in members:
            x2_test = None
            if "f2" in cfg.net_paths:
                x2_test = _transform_stacks(tests, target_transforms)
            x1_test = test_bands if "f1" in cfg.net_paths else None
            net_scores = net_infer(net_params, net_cfg, x1_test, x2_test)

        preds = []
        trial_scores = []
        for i, trial in enumerate(tests):
            score_sets = []
            if net_scores is not None:
                score_sets.append(ScoreVector(net_scores[i], "net"))
            if trca_model is not None:
                score_sets.append(etrca_score(test_bands[i], trca_model, weights))
            if tdca_model is not None:
                score_sets.append(tdca_score(test_bands[i], tdca_model, weights))
            pred, fused = fuse_and_decide(score_sets, FusionConfig(members))
            preds.append((trial.block_id, trial.stimulus_index, pred))
            if cfg.log_scores:
                trial_scores.append([float(v) for v in fused.scores])

        correct = sum(1 for _, true, pred in preds if true == pred)
        acc = correct / len(preds) if preds else 0.0
        accuracy[window] = 100.0 * acc
        itr_bpm[window] = itr(n_f, acc, window + cfg.gaze_shift)
        predictions[window] = preds
        if cfg.log_scores:
            fused_scores[window] = trial_scores

    return FoldResult(target, cfg.windows, accuracy, itr_bpm, predictions,
                      time.perf_counter() - t_start, fused_scores=fused_scores)


def loso_evaluate(cfg: RunConfig) -> tuple:
    """Full leave-one-subject-out run; returns (fold results, summary)."""
    manifest, epochs = load_run_data(cfg)
    if len(manifest.subjects) < 2:
        raise ToolkitError("insufficient-subjects", "need >= 2 subjects for LOSO")
    folds = list(enumerate(manifest.subjects))
    if cfg.jobs > 1:
        results = Parallel(n_jobs=cfg.jobs)(
            delayed(evaluate_fold)(manifest, epochs, target, cfg, cfg.seed ^ i)
            for i, target in folds)
    else:
        results = [evaluate_fold(manifest, epochs, target, cfg, cfg.seed ^ i)
                   for i, target in folds]
    results = sorted(results, key=lambda r: r.target_subject)
    return results, summarize(results)


def summarize(results) -> dict:
    """Mean and standard error (std/sqrt(n)) across subjects per window."""
    if not results:
        raise ToolkitError("invalid-arguments", "no fold results")
    windows = results[0].windows
    out = {"windows": list(windows), "n_folds": len(results),
           "accuracy_mean": {}, "accuracy_sem": {}, "itr_mean": {}, "itr_sem": {}}
    for w in windows:
        accs = np.array([r.accuracy[w] for r in results])
        itrs = np.array([r.itr_bpm[w] for r in results])
        out["accuracy_mean"][w] = float(accs.mean())
        out["itr_mean"][w] = float(itrs.mean())
        if len(results) > 1:
            out["accuracy_sem"][w] = float(accs.std(ddof=1) / np.sqrt(len(accs)))
            out["itr_sem"][w] = float(itrs.std(ddof=1) / np.sqrt(len(itrs)))
        else:
            out["accuracy_sem"][w] = 0.0
            out["itr_sem"][w] = 0.0
    return out


VARIANTS = ("no-mlst", "no-original")


def ablation_run(cfg: RunConfig, variant: str) -> tuple:
    """Run LOSO under an ablation variant.

    Variants: "no-mlst" (network uses the raw-signal branch only),
    "no-original" (transform branch only), "members=<a,b>" (fusion subset),
    "sources=<k>" (deterministically subsample the training pool).
    """
    if variant == "no-mlst":
        cfg = dataclasses.replace(cfg, net_paths=("f1",))
    elif variant == "no-original":
        cfg = dataclasses.replace(cfg, net_paths=("f2",))
    elif variant.startswith("members="):
        members = tuple(m for m in variant[len("members="):].split(",") if m)
        cfg = dataclasses.replace(cfg, fusion_members=members)
    elif variant.startswith("sources="):
        try:
            k = int(variant[len("sources="):])
        except ValueError as exc:
            raise ToolkitError("invalid-variant", f"bad source count in {variant!r}") from exc
        cfg = dataclasses.replace(cfg, n_source_subjects=k)
    else:
        raise ToolkitError("invalid-variant", f"unknown variant {variant!r}")
    return loso_evaluate(cfg)


# ---------------------------------------------------------------------------
# Reporting


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def report_emit(results, out_dir, cfg: Optional[RunConfig] = None) -> list:
    """Write per-fold CSV, summary CSV, config snapshot and a text table.

    All output is deterministic given the results.
    """
    if not results:
        raise ToolkitError("invalid-arguments", "no results to report")
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ToolkitError("io-failure", f"cannot create {out_dir}: {exc}") from exc
    summary = summarize(results)
    windows = results[0].windows
    written = []

    folds_path = out_dir / "folds.csv"
    lines = ["subject,window_s,accuracy_pct,itr_bpm"]
    for r in results:
        for w in windows:
            lines.append(f"{r.target_subject},{w},{_fmt(r.accuracy[w])},{_fmt(r.itr_bpm[w])}")
    folds_path.write_text("\n".join(lines) + "\n", "utf-8")
    written.append(folds_path)

    preds_path = out_dir / "predictions.csv"
    lines = ["subject,window_s,block,true,predicted"]
    for r in results:
        for w in windows:
            for block, true, pred in r.predictions[w]:
                lines.append(f"{r.target_subject},{w},{block},{true},{pred}")
    preds_path.write_text("\n".join(lines) + "\n", "utf-8")
    written.append(preds_path)

    if any(r.fused_scores for r in results):
        scores_path = out_dir / "scores.csv"
        first = next(r for r in results if r.fused_scores)
        n_classes = len(next(iter(first.fused_scores.values()))[0])
        header = "subject,window_s,trial," + ",".join(
            f"score_{t}" for t in range(n_classes))
        lines = [header]
        for r in results:
            for w in windows:
                for i, scores in enumerate(r.fused_scores.get(w, [])):
                    row = ",".join(_fmt(v) for v in scores)
                    lines.append(f"{r.target_subject},{w},{i},{row}")
        scores_path.write_text("\n".join(lines) + "\n", "utf-8")
        written.append(scores_path)

    summary_path = out_dir / "summary.csv"
    lines = ["window_s,accuracy_mean_pct,accuracy_sem_pct,itr_mean_bpm,itr_sem_bpm,n_subjects"]
    for w in windows:
        lines.append(",".join([
            str(w), _fmt(summary["accuracy_mean"][w]), _fmt(summary["accuracy_sem"][w]),
            _fmt(summary["itr_mean"][w]), _fmt(summary["itr_sem"][w]),
            str(summary["n_folds"]),
        ]))
    summary_path.write_text("\n".join(lines) + "\n", "utf-8")
    written.append(summary_path)

    if cfg is not None:
        cfg_path = out_dir / "run_config.json"
        cfg_path.write_text(json.dumps(cfg.to_dict(), indent=2) + "\n", "utf-8")
        written.append(cfg_path)

    table_path = out_dir / "summary.txt"
    header = "window_s " + " ".join(f"{w:>14}" for w in windows)
    acc_row = "acc_pct  " + " ".join(
        f"{summary['accuracy_mean'][w]:7.2f}±{summary['accuracy_sem'][w]:<6.2f}"
        for w in windows)
    itr_row = "itr_bpm  " + " ".join(
        f"{summary['itr_mean'][w]:7.2f}±{summary['itr_sem'][w]:<6.2f}"
        for w in windows)
    table_path.write_text("\n".join([header, acc_row, itr_row]) + "\n", "utf-8")
    written.append(table_path)
    return written


def results_to_json(results, cfg: RunConfig) -> str:
    return json.dumps({
        "config": cfg.to_dict(),
        "folds": [r.to_dict() for r in results],
    }, indent=2) + "\n"


def results_from_json(text: str) -> tuple:
    d = json.loads(text)
    return ([FoldResult.from_dict(f) for f in d["folds"]],
            RunConfig.from_dict(d["config"]))
