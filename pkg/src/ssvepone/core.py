"""Core domain types: stimuli, epochs, manifests, windowing, dataset validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy import ndarray

from .errors import ToolkitError

#: stimulus_index value marking an unlabeled epoch
UNLABELED = -1


@dataclass(frozen=True)
class StimulusSpec:
    """One visual target: frequency (Hz) and phase (rad) at position `index`."""

    index: int
    frequency: float
    phase: float = 0.0

    def __post_init__(self):
        if self.index < 0:
            raise ToolkitError("invalid-stimulus", f"index must be >= 0, got {self.index}")
        if not self.frequency > 0:
            raise ToolkitError(
                "invalid-stimulus", f"frequency must be > 0, got {self.frequency}")


def check_stimuli(stimuli) -> tuple:
    """Validate a stimulus set: >= 2 entries, indices 0..n-1 unique and contiguous."""
    stimuli = tuple(stimuli)
    if len(stimuli) < 2:
        raise ToolkitError("invalid-stimulus", "need at least 2 stimuli")
    indices = [s.index for s in stimuli]
    if sorted(indices) != list(range(len(stimuli))):
        raise ToolkitError(
            "invalid-stimulus", f"indices must be contiguous 0..{len(stimuli) - 1}")
    return tuple(sorted(stimuli, key=lambda s: s.index))


@dataclass(frozen=True)
class EpochTensor:
    """A windowed multi-channel EEG trial, (n_channels, n_samples).

    Immutable after construction. Shape invariants are enforced here;
    finiteness is checked by `validate_dataset` (report-only) so that a
    corrupted recording can be loaded and inspected.
    """

    data: ndarray
    sampling_rate: float
    stimulus_index: int = UNLABELED
    subject_id: str = ""
    block_id: int = 0

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise ToolkitError("invalid-epoch", f"data must be 2-d, got ndim={data.ndim}")
        if data.shape[0] < 1 or data.shape[1] < 2:
            raise ToolkitError(
                "invalid-epoch",
                f"need >= 1 channel and >= 2 samples, got {data.shape}")
        if not self.sampling_rate > 0:
            raise ToolkitError(
                "invalid-epoch", f"sampling_rate must be > 0, got {self.sampling_rate}")
        if data.flags.writeable:
            data = data.copy()
            data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def labeled(self) -> bool:
        return self.stimulus_index != UNLABELED


@dataclass(frozen=True)
class WindowSpec:
    """Analysis window: `start_offset` seconds after stimulus onset, `length` seconds."""

    start_offset: float
    length: float

    def __post_init__(self):
        if self.start_offset < 0:
            raise ToolkitError(
                "invalid-window", f"start_offset must be >= 0, got {self.start_offset}")
        if not self.length > 0:
            raise ToolkitError("invalid-window", f"length must be > 0, got {self.length}")


def epoch_window(epoch: EpochTensor, w: WindowSpec, onset: float = 0.0) -> EpochTensor:
    """Slice an epoch to an analysis window.

    `onset` is the position of stimulus onset within the recorded epoch in
    seconds (e.g. the cue duration); the window starts `w.start_offset`
    seconds after it. The output holds round(length * f_s) samples.
    """
    fs = epoch.sampling_rate
    start = int(round((onset + w.start_offset) * fs))
    n_out = int(round(w.length * fs))
    if start < 0 or n_out < 2 or start + n_out > epoch.n_samples:
        raise ToolkitError(
            "window-out-of-range",
            f"window [{start}, {start + n_out}) outside epoch of {epoch.n_samples} samples")
    return EpochTensor(
        data=epoch.data[:, start:start + n_out].copy(),
        sampling_rate=fs,
        stimulus_index=epoch.stimulus_index,
        subject_id=epoch.subject_id,
        block_id=epoch.block_id,
    )


@dataclass(frozen=True)
class DatasetManifest:
    """Dataset geometry and bookkeeping shared by loaders and the harness.

    `cue_offset` is the time of stimulus onset within each stored epoch;
    `latency_offset` is the visual latency added on top of it when windowing.
    `k_calibration` (JSON key "K") is the number of calibration stimuli
    available per target subject; one-shot mode requires it to equal the
    number of stimuli with exactly one calibration trial each.
    """

    subjects: tuple
    stimuli: tuple
    blocks_per_subject: int
    channel_names: tuple
    sampling_rate: float
    n_samples: int
    latency_offset: float = 0.0
    cue_offset: float = 0.0
    k_calibration: int = 0
    n_trial: int = 1
    files: dict = field(default_factory=dict)
    per_subject_samples: dict = field(default_factory=dict)
    checksums: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "subjects", tuple(self.subjects))
        object.__setattr__(self, "stimuli", check_stimuli(self.stimuli))
        object.__setattr__(self, "channel_names", tuple(self.channel_names))
        if self.blocks_per_subject < 1:
            raise ToolkitError("invalid-manifest", "blocks_per_subject must be >= 1")
        if not self.sampling_rate > 0:
            raise ToolkitError("invalid-manifest", "sampling_rate must be > 0")

    @property
    def n_stimuli(self) -> int:
        return len(self.stimuli)

    @property
    def n_channels(self) -> int:
        return len(self.channel_names)

    def samples_for(self, subject: str) -> int:
        return int(self.per_subject_samples.get(subject, self.n_samples))

    def to_dict(self) -> dict:
        d = {
            "format_version": 1,
            "subjects": list(self.subjects),
            "files": dict(self.files),
            "stimuli": [
                {"index": s.index, "frequency": s.frequency, "phase": s.phase}
                for s in self.stimuli
            ],
            "blocks_per_subject": self.blocks_per_subject,
            "channel_names": list(self.channel_names),
            "sampling_rate": self.sampling_rate,
            "n_samples": self.n_samples,
            "latency_offset": self.latency_offset,
            "cue_offset": self.cue_offset,
            "K": self.k_calibration,
            "n_trial": self.n_trial,
        }
        if self.per_subject_samples:
            d["per_subject_samples"] = dict(self.per_subject_samples)
        if self.checksums:
            d["checksums"] = dict(self.checksums)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        try:
            stimuli = tuple(
                StimulusSpec(int(s["index"]), float(s["frequency"]), float(s.get("phase", 0.0)))
                for s in d["stimuli"]
            )
            return cls(
                subjects=tuple(d["subjects"]),
                stimuli=stimuli,
                blocks_per_subject=int(d["blocks_per_subject"]),
                channel_names=tuple(d["channel_names"]),
                sampling_rate=float(d["sampling_rate"]),
                n_samples=int(d["n_samples"]),
                latency_offset=float(d.get("latency_offset", 0.0)),
                cue_offset=float(d.get("cue_offset", 0.0)),
                k_calibration=int(d.get("K", 0)),
                n_trial=int(d.get("n_trial", 1)),
                files=dict(d.get("files", {})),
                per_subject_samples={k: int(v) for k, v in d.get("per_subject_samples", {}).items()},
                checksums=dict(d.get("checksums", {})),
            )
        except KeyError as exc:
            raise ToolkitError("invalid-manifest", f"missing manifest field {exc}") from exc


@dataclass
class ValidationReport:
    """Outcome of `validate_dataset`; report-only, never raises."""

    passed: bool
    issues: list
    trial_counts: dict
    n_epochs: int

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{status}: {self.n_epochs} epochs"]
        lines += [f"  - {msg}" for msg in self.issues]
        return "\n".join(lines)


def validate_dataset(manifest: DatasetManifest, epochs) -> ValidationReport:
    """Check a collection of epochs against the manifest.

    Reports per-subject trial counts per stimulus, dimension mismatches and
    non-finite values. A passing report implies the dimension preconditions
    of all downstream modules hold.
    """
    epochs = list(epochs)
    issues = []
    counts: dict = {s: {t.index: 0 for t in manifest.stimuli} for s in manifest.subjects}
    if not epochs:
        return ValidationReport(False, ["no epochs"], counts, 0)

    n_c = manifest.n_channels
    for ep in epochs:
        where = f"subject={ep.subject_id} block={ep.block_id} stimulus={ep.stimulus_index}"
        if ep.subject_id not in counts:
            issues.append(f"unknown subject: {where}")
            continue
        if ep.n_channels != n_c:
            issues.append(f"channel mismatch ({ep.n_channels} != {n_c}): {where}")
        if ep.n_samples != manifest.samples_for(ep.subject_id):
            issues.append(
                f"sample-count mismatch ({ep.n_samples} != "
                f"{manifest.samples_for(ep.subject_id)}): {where}")
        if ep.sampling_rate != manifest.sampling_rate:
            issues.append(f"sampling-rate mismatch ({ep.sampling_rate}): {where}")
        if not np.isfinite(ep.data).all():
            issues.append(f"non-finite values: {where}")
        if ep.labeled:
            if ep.stimulus_index not in counts[ep.subject_id]:
                issues.append(f"unknown stimulus index: {where}")
            else:
                counts[ep.subject_id][ep.stimulus_index] += 1

    for subject, per_stim in counts.items():
        missing = [t for t, n in per_stim.items() if n == 0]
        if missing:
            issues.append(f"subject={subject}: no trials for stimuli {missing}")

    return ValidationReport(not issues, issues, counts, len(epochs))


def group_by_class(epochs, n_classes: Optional[int] = None) -> list:
    """Group labeled epochs into per-stimulus lists ordered by stimulus index."""
    labeled = [e for e in epochs if e.labeled]
    if n_classes is None:
        if not labeled:
            raise ToolkitError("missing-class", "no labeled epochs")
        n_classes = max(e.stimulus_index for e in labeled) + 1
    out = [[] for _ in range(n_classes)]
    for e in labeled:
        if 0 <= e.stimulus_index < n_classes:
            out[e.stimulus_index].append(e)
    return out
