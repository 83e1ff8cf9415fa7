"""MAT-file to manifest + flat-binary conversion and round-trip verification.

Output follows the toolkit's wire format: `manifest.json` plus one file per
subject holding a 24-byte header (magic "SSVP", format version u32, four
u32 dims) and little-endian float32 values, row-major over
[block][stimulus][channel][sample]. Writes are atomic (temp file + rename)
and byte-deterministic given the same sources.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .matio import load_array, try_load_array
from .recipes import (BENCHMARK_FREQUENCIES, BENCHMARK_PHASES,
                      ConversionRecipe)

MAGIC = b"SSVP"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIII")

OUTPUT_ORDER = ("block", "stimulus", "channel", "sample")


class ConvertError(Exception):
    """Conversion failure with a machine-readable `code`."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def __str__(self) -> str:
        return f"{self.code}: {super().__str__()}"


@dataclass
class VerifyReport:
    passed: bool
    issues: list
    subjects_checked: int
    values_spot_checked: int

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{status}: {self.subjects_checked} subjects, "
                 f"{self.values_spot_checked} values spot-checked"]
        lines += [f"  - {msg}" for msg in self.issues]
        return "\n".join(lines)


def _write_binary(path: Path, tensor: np.ndarray) -> str:
    """Atomically write one subject tensor; returns its sha256 hex digest."""
    tensor = np.ascontiguousarray(tensor, dtype=np.float32)
    payload = _HEADER.pack(MAGIC, FORMAT_VERSION, *tensor.shape) \
        + tensor.astype("<f4").tobytes(order="C")
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)
    return hashlib.sha256(payload).hexdigest()


def _read_binary(path: Path) -> np.ndarray:
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ConvertError("invalid-format", f"{path}: truncated header")
    magic, version, n_b, n_f, n_c, n_s = _HEADER.unpack_from(raw)
    if magic != MAGIC or version != FORMAT_VERSION:
        raise ConvertError("invalid-format", f"{path}: bad magic/version")
    expected = n_b * n_f * n_c * n_s * 4
    if len(raw) - _HEADER.size != expected:
        raise ConvertError("invalid-format", f"{path}: truncated payload")
    return np.frombuffer(raw, dtype="<f4", offset=_HEADER.size).reshape(
        n_b, n_f, n_c, n_s)


def _reorder(source: np.ndarray, recipe: ConversionRecipe) -> np.ndarray:
    """Transpose a source array into [block][stimulus][channel][sample]."""
    if source.ndim != 4:
        raise ConvertError(
            "unexpected-dims", f"source array is {source.ndim}-d, expected 4-d")
    perm = [recipe.dim_order.index(name) for name in OUTPUT_ORDER]
    return np.transpose(source, perm)


def _check_source_dims(tensor: np.ndarray, recipe: ConversionRecipe,
                       source_name: str) -> int:
    n_b, n_f, n_c, n_s = tensor.shape
    if n_b != recipe.n_blocks or n_f != recipe.n_stimuli \
            or n_c != len(recipe.source_channels):
        raise ConvertError(
            "unexpected-dims",
            f"{source_name}: got [block={n_b} stimulus={n_f} channel={n_c} "
            f"sample={n_s}], recipe expects [block={recipe.n_blocks} "
            f"stimulus={recipe.n_stimuli} channel={len(recipe.source_channels)}]")
    if n_s not in recipe.samples_options:
        raise ConvertError(
            "unexpected-dims",
            f"{source_name}: {n_s} samples not in {recipe.samples_options}")
    return n_s


def _grid_phase(freq: float) -> float:
    return (round((freq - 8.0) / 0.2) % 4) * 0.5 * np.pi


def _resolve_stimulus_table(recipe: ConversionRecipe, in_dir: Path) -> tuple:
    """Frequencies/phases for the manifest, honoring the dataset's ordering files."""
    if recipe.dataset_id == "beta":
        first = in_dir / recipe.subject_files()[0]
        freqs = try_load_array(first, "data/suppl_info/freqs", mat73=True)
        if freqs is None:
            freqs = try_load_array(first, "data/freqs", mat73=True)
        if freqs is None:
            raise ConvertError(
                "ordering-mismatch",
                f"{first}: no stimulus frequency table (data/suppl_info/freqs)")
        freqs = np.asarray(freqs, dtype=np.float64).ravel()
        if freqs.shape[0] != recipe.n_stimuli:
            raise ConvertError(
                "ordering-mismatch",
                f"{first}: {freqs.shape[0]} frequencies for {recipe.n_stimuli} targets")
        grid = np.round((freqs - 8.0) / 0.2)
        if not np.allclose(freqs, 8.0 + 0.2 * grid, atol=1e-6) \
                or grid.min() < 0 or grid.max() > 39:
            raise ConvertError(
                "ordering-mismatch",
                f"{first}: frequencies outside the 8-15.8 Hz / 0.2 Hz grid")
        phases = try_load_array(first, "data/suppl_info/phases", mat73=True)
        if phases is None:
            phases = np.array([_grid_phase(f) for f in freqs])
        return tuple(float(f) for f in freqs), tuple(float(p) for p in np.ravel(phases))

    if recipe.ordering_file:
        ordering = in_dir / recipe.ordering_file
        if ordering.is_file():
            freqs = np.ravel(load_array(ordering, "freqs")).astype(np.float64)
            phases = np.ravel(load_array(ordering, "phases")).astype(np.float64)
            if freqs.shape[0] != recipe.n_stimuli:
                raise ConvertError(
                    "ordering-mismatch",
                    f"{ordering}: {freqs.shape[0]} entries for {recipe.n_stimuli} targets")
            if not np.allclose(freqs, BENCHMARK_FREQUENCIES, atol=1e-6) \
                    or not np.allclose(phases, BENCHMARK_PHASES, atol=1e-6):
                raise ConvertError(
                    "ordering-mismatch",
                    f"{ordering}: table does not match the published ordering")
    return recipe.frequencies, recipe.phases


def _manifest_dict(recipe: ConversionRecipe, freqs, phases, files: dict,
                   samples: dict, checksums: dict) -> dict:
    counts = sorted(set(samples.values()))
    n_samples = counts[0]
    manifest = {
        "format_version": 1,
        "subjects": recipe.subject_ids(),
        "files": files,
        "stimuli": [
            {"index": i, "frequency": float(freqs[i]), "phase": float(phases[i])}
            for i in range(recipe.n_stimuli)
        ],
        "blocks_per_subject": recipe.n_blocks,
        "channel_names": list(recipe.montage),
        "sampling_rate": recipe.sampling_rate,
        "n_samples": n_samples,
        "latency_offset": recipe.latency_offset,
        "cue_offset": recipe.cue_offset,
        "K": recipe.n_stimuli,
        "n_trial": 1,
    }
    if len(counts) > 1:
        manifest["per_subject_samples"] = {s: samples[s] for s in recipe.subject_ids()}
    manifest["checksums"] = checksums
    return manifest


def convert(recipe: ConversionRecipe, in_dir, out_dir) -> dict:
    """Convert one dataset; returns the manifest dict it wrote.

    Lossless up to float32 rounding; selected-channel order in the output
    matches the recipe montage exactly.
    """
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    montage_idx = recipe.montage_indices()
    freqs, phases = _resolve_stimulus_table(recipe, in_dir)

    files, samples, checksums = {}, {}, {}
    for subject, source_name in zip(recipe.subject_ids(), recipe.subject_files()):
        source_path = in_dir / source_name
        if not source_path.is_file():
            raise ConvertError("missing-file", f"no such file: {source_path}")
        source = load_array(source_path, recipe.array_key, mat73=recipe.mat73)
        tensor = _reorder(source, recipe)
        samples[subject] = _check_source_dims(tensor, recipe, source_name)
        tensor = tensor[:, :, montage_idx, :]
        out_name = f"{subject}.bin"
        checksums[subject] = _write_binary(out_dir / out_name, tensor)
        files[subject] = out_name

    manifest = _manifest_dict(recipe, freqs, phases, files, samples, checksums)
    payload = (json.dumps(manifest, indent=2) + "\n").encode("utf-8")
    tmp = out_dir / "manifest.json.tmp"
    tmp.write_bytes(payload)
    os.replace(tmp, out_dir / "manifest.json")
    return manifest


def verify_roundtrip(out_dir, source_dir=None, recipe: ConversionRecipe | None = None,
                     n_spot: int = 100, seed: int = 0) -> VerifyReport:
    """Reload converted output and check it end to end.

    Checks dims against the manifest and recomputes per-subject checksums;
    with `source_dir` and `recipe` it also spot-checks `n_spot` random
    values per subject against the source within float32 rounding.
    """
    out_dir = Path(out_dir)
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.is_file():
        raise ConvertError("missing-file", f"no manifest.json in {out_dir}")
    manifest = json.loads(manifest_path.read_text("utf-8"))
    issues = []
    spot_total = 0
    rng = np.random.default_rng(seed)
    per_subject = manifest.get("per_subject_samples", {})
    for subject in manifest["subjects"]:
        name = manifest["files"][subject]
        path = out_dir / name
        if not path.is_file():
            issues.append(f"{subject}: missing binary {name}")
            continue
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        recorded = manifest.get("checksums", {}).get(subject)
        if recorded and digest != recorded:
            issues.append(f"{subject}: checksum mismatch")
        tensor = _read_binary(path)
        expected = (manifest["blocks_per_subject"], len(manifest["stimuli"]),
                    len(manifest["channel_names"]),
                    int(per_subject.get(subject, manifest["n_samples"])))
        if tensor.shape != expected:
            issues.append(f"{subject}: dims {tensor.shape} != manifest {expected}")
            continue
        if source_dir is not None and recipe is not None:
            source_name = recipe.subject_files()[recipe.subject_ids().index(subject)]
            source = load_array(Path(source_dir) / source_name, recipe.array_key,
                                mat73=recipe.mat73)
            reordered = _reorder(source, recipe)[:, :, recipe.montage_indices(), :]
            n_b, n_f, n_c, n_s = tensor.shape
            for _ in range(n_spot):
                b = int(rng.integers(n_b))
                f = int(rng.integers(n_f))
                c = int(rng.integers(n_c))
                s = int(rng.integers(n_s))
                want = np.float32(reordered[b, f, c, s])
                got = tensor[b, f, c, s]
                if got != want:
                    issues.append(
                        f"{subject}: value mismatch at [{b},{f},{c},{s}]")
                spot_total += 1
    report = VerifyReport(not issues, issues, len(manifest["subjects"]), spot_total)
    if not report.passed:
        return report
    return report
