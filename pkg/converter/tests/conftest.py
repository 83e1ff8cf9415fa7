import dataclasses

import h5py
import numpy as np
import pytest
from scipy import io as sio

from ssvep_convert.recipes import (BENCHMARK_FREQUENCIES, BENCHMARK_PHASES,
                                   recipe_for)


@pytest.fixture()
def ucsd_source(tmp_path):
    """Two-subject UCSD-layout tree: eeg (stimulus, channel, sample, block)."""
    recipe = dataclasses.replace(recipe_for("ucsd"), n_subjects=2)
    rng = np.random.default_rng(42)
    src = tmp_path / "ucsd_src"
    src.mkdir()
    arrays = {}
    for i, name in enumerate(recipe.subject_files(), start=1):
        eeg = rng.standard_normal((12, 8, 1114, 15)) * 30.0
        sio.savemat(src / name, {"eeg": eeg})
        arrays[f"S{i:02d}"] = eeg
    return recipe, src, arrays


@pytest.fixture()
def benchmark_source(tmp_path):
    """One-subject Benchmark-layout tree plus Freq_Phase.mat."""
    recipe = dataclasses.replace(recipe_for("benchmark"), n_subjects=1)
    rng = np.random.default_rng(7)
    src = tmp_path / "bench_src"
    src.mkdir()
    data = rng.standard_normal((64, 1500, 40, 6)).astype(np.float32)
    sio.savemat(src / "S1.mat", {"data": data})
    sio.savemat(src / "Freq_Phase.mat",
                {"freqs": np.asarray(BENCHMARK_FREQUENCIES).reshape(1, -1),
                 "phases": np.asarray(BENCHMARK_PHASES).reshape(1, -1)})
    return recipe, src, {"S01": data}


def write_beta_subject(path, eeg_matlab_order, freqs, phases):
    """v7.3-style file: HDF5 stores MATLAB arrays with reversed dims."""
    with h5py.File(path, "w") as fh:
        grp = fh.create_group("data")
        grp.create_dataset("EEG", data=np.transpose(eeg_matlab_order))
        info = grp.create_group("suppl_info")
        info.create_dataset("freqs", data=np.asarray(freqs).reshape(-1, 1))
        info.create_dataset("phases", data=np.asarray(phases).reshape(-1, 1))


@pytest.fixture()
def beta_source(tmp_path):
    """Two-subject BETA-layout tree with mixed stimulation durations."""
    recipe = dataclasses.replace(recipe_for("beta"), n_subjects=2)
    rng = np.random.default_rng(3)
    src = tmp_path / "beta_src"
    src.mkdir()
    freqs = list(BENCHMARK_FREQUENCIES[5:]) + list(BENCHMARK_FREQUENCIES[:5])
    phases = [(round((f - 8.0) / 0.2) % 4) * 0.5 * np.pi for f in freqs]
    arrays = {}
    for i, (name, n_s) in enumerate(zip(recipe.subject_files(), (750, 1000)), start=1):
        eeg = rng.standard_normal((64, n_s, 4, 40)).astype(np.float32)
        write_beta_subject(src / name, eeg, freqs, phases)
        arrays[f"S{i:02d}"] = eeg
    return recipe, src, arrays, freqs
