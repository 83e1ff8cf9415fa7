"""On-disk dataset format and generic tensor bundles.

Dataset layout: a UTF-8 `manifest.json` plus one flat binary file per
subject. Subject files carry a 24-byte header -- magic "SSVP", format
version (u32), then four u32 dims -- followed by little-endian float32
values, row-major over [block][stimulus][channel][sample].
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
from numpy import ndarray

from .core import DatasetManifest, EpochTensor
from .errors import ToolkitError

MAGIC = b"SSVP"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIIII")


def write_subject_file(path, tensor: ndarray) -> None:
    """Write a [block][stimulus][channel][sample] tensor as SSVP binary."""
    tensor = np.ascontiguousarray(tensor, dtype=np.float32)
    if tensor.ndim != 4:
        raise ToolkitError("invalid-arguments", f"subject tensor must be 4-d, got {tensor.ndim}")
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, *tensor.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(tensor.astype("<f4").tobytes(order="C"))


def read_subject_file(path) -> ndarray:
    """Read an SSVP binary into a float64 [block][stimulus][channel][sample] tensor."""
    path = Path(path)
    if not path.is_file():
        raise ToolkitError("missing-file", f"no such file: {path}")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise ToolkitError("invalid-format", f"{path}: truncated header")
    magic, version, n_b, n_f, n_c, n_s = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ToolkitError("invalid-format", f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise ToolkitError("invalid-format", f"{path}: unsupported version {version}")
    expected = n_b * n_f * n_c * n_s * 4
    payload = raw[_HEADER.size:]
    if len(payload) != expected:
        raise ToolkitError(
            "invalid-format", f"{path}: payload {len(payload)} bytes, expected {expected}")
    data = np.frombuffer(payload, dtype="<f4").reshape(n_b, n_f, n_c, n_s)
    return data.astype(np.float64)


def manifest_bytes(manifest: DatasetManifest) -> bytes:
    """Deterministic JSON serialization of a manifest."""
    return (json.dumps(manifest.to_dict(), indent=2) + "\n").encode("utf-8")


def save_dataset(manifest: DatasetManifest, tensors: dict, out_dir) -> Path:
    """Write manifest.json and one SSVP binary per subject. Returns out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = dict(manifest.files)
    for subject in manifest.subjects:
        files.setdefault(subject, f"{subject}.bin")
    manifest = DatasetManifest.from_dict({**manifest.to_dict(), "files": files})
    for subject in manifest.subjects:
        tensor = tensors[subject]
        expected = (manifest.blocks_per_subject, manifest.n_stimuli,
                    manifest.n_channels, manifest.samples_for(subject))
        if tuple(tensor.shape) != expected:
            raise ToolkitError(
                "unexpected-dims",
                f"subject {subject}: tensor shape {tensor.shape} != manifest {expected}")
        write_subject_file(out_dir / files[subject], tensor)
    (out_dir / "manifest.json").write_bytes(manifest_bytes(manifest))
    return out_dir


def load_dataset(in_dir) -> tuple:
    """Load (manifest, {subject: tensor}) from a dataset directory.

    Subject tensor dims are checked against the manifest.
    """
    in_dir = Path(in_dir)
    manifest_path = in_dir / "manifest.json"
    if not manifest_path.is_file():
        raise ToolkitError("missing-file", f"no manifest.json in {in_dir}")
    manifest = DatasetManifest.from_dict(json.loads(manifest_path.read_text("utf-8")))
    tensors = {}
    for subject in manifest.subjects:
        name = manifest.files.get(subject, f"{subject}.bin")
        tensor = read_subject_file(in_dir / name)
        expected = (manifest.blocks_per_subject, manifest.n_stimuli,
                    manifest.n_channels, manifest.samples_for(subject))
        if tuple(tensor.shape) != expected:
            raise ToolkitError(
                "unexpected-dims",
                f"subject {subject}: file dims {tensor.shape} != manifest {expected}")
        tensors[subject] = tensor
    return manifest, tensors


def epochs_from_tensors(manifest: DatasetManifest, tensors: dict) -> list:
    """Explode subject tensors into labeled EpochTensor objects."""
    epochs = []
    for subject in manifest.subjects:
        tensor = tensors[subject]
        for block in range(manifest.blocks_per_subject):
            for stim in range(manifest.n_stimuli):
                epochs.append(EpochTensor(
                    data=tensor[block, stim],
                    sampling_rate=manifest.sampling_rate,
                    stimulus_index=stim,
                    subject_id=subject,
                    block_id=block,
                ))
    return epochs


def save_tensor_bundle(prefix, tensors: dict, meta: dict | None = None) -> tuple:
    """Persist named float64 tensors as <prefix>.bin + <prefix>.json.

    Used for trained network parameters, cached decoder models and
    debugging dumps of transform stacks.
    """
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    entries = []
    offset = 0
    blobs = []
    for name in sorted(tensors):
        arr = np.ascontiguousarray(tensors[name], dtype=np.float64)
        blob = arr.astype("<f8").tobytes(order="C")
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += len(blob)
        blobs.append(blob)
    header = {"format": "tensor-bundle", "version": 1, "dtype": "<f8", "tensors": entries}
    if meta:
        header["meta"] = meta
    bin_path = prefix.with_suffix(".bin")
    json_path = prefix.with_suffix(".json")
    bin_path.write_bytes(b"".join(blobs))
    json_path.write_text(json.dumps(header, indent=2) + "\n", "utf-8")
    return bin_path, json_path


def load_tensor_bundle(prefix) -> tuple:
    """Load (tensors, meta) written by `save_tensor_bundle`."""
    prefix = Path(prefix)
    json_path = prefix.with_suffix(".json")
    bin_path = prefix.with_suffix(".bin")
    if not json_path.is_file() or not bin_path.is_file():
        raise ToolkitError("missing-file", f"no tensor bundle at {prefix}")
    header = json.loads(json_path.read_text("utf-8"))
    raw = bin_path.read_bytes()
    tensors = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        start = entry["offset"]
        arr = np.frombuffer(raw, dtype="<f8", count=count, offset=start).reshape(shape)
        tensors[entry["name"]] = arr.astype(np.float64)
    return tensors, header.get("meta", {})
