"""Per-dataset conversion recipes: montages, timing constants, stimulus tables.

Stimulus orderings follow each dataset's published layout. Where the
distribution ships an ordering file (Benchmark's Freq_Phase.mat, BETA's
per-subject suppl_info) the converter reads it and fails loudly on any
mismatch with the expected frequency grid instead of guessing.
"""

from dataclasses import dataclass, field

import numpy as np

# Standard 64-channel cap ordering shared by the Benchmark and BETA
# distributions (1-based site list flattened to index order).
CHANNELS_64 = (
    "FP1", "FPZ", "FP2", "AF3", "AF4", "F7", "F5", "F3", "F1", "FZ",
    "F2", "F4", "F6", "F8", "FT7", "FC5", "FC3", "FC1", "FCZ", "FC2",
    "FC4", "FC6", "FT8", "T7", "C5", "C3", "C1", "CZ", "C2", "C4",
    "C6", "T8", "M1", "TP7", "CP5", "CP3", "CP1", "CPZ", "CP2", "CP4",
    "CP6", "TP8", "M2", "P7", "P5", "P3", "P1", "PZ", "P2", "P4",
    "P6", "P8", "PO7", "PO5", "PO3", "POZ", "PO4", "PO6", "PO8", "CB1",
    "O1", "OZ", "O2", "CB2",
)

UCSD_CHANNELS = ("PO7", "PO3", "POZ", "PO4", "PO8", "O1", "OZ", "O2")

# 12-class grid, frequencies 9.25-14.75 Hz in 0.5 Hz steps, phases advancing
# by 0.5*pi per row of three targets.
UCSD_FREQUENCIES = (9.25, 11.25, 13.25, 9.75, 11.75, 13.75,
                    10.25, 12.25, 14.25, 10.75, 12.75, 14.75)
UCSD_PHASES = tuple((i // 3) * 0.5 * np.pi for i in range(12))


def _benchmark_table():
    """40 targets, 8-15.8 Hz in 0.2 Hz steps, 0.5*pi phase step per 0.2 Hz.

    Published ordering: 8, 9, ..., 15, then 8.2, 9.2, ... column-wise.
    """
    freqs = [8.0 + 1.0 * r + 0.2 * c for c in range(5) for r in range(8)]
    phases = [(round((f - 8.0) / 0.2) % 4) * 0.5 * np.pi for f in freqs]
    return tuple(freqs), tuple(phases)


BENCHMARK_FREQUENCIES, BENCHMARK_PHASES = _benchmark_table()


@dataclass(frozen=True)
class ConversionRecipe:
    """Everything needed to map one dataset's MAT files onto the output layout."""

    dataset_id: str
    source_channels: tuple          # channel names in source array order
    montage: tuple                  # output channel subset, in output order
    sampling_rate: float
    cue_offset: float               # stimulus onset within the epoch, seconds
    latency_offset: float           # visual latency applied when windowing
    n_subjects: int
    n_stimuli: int
    n_blocks: int
    samples_options: tuple          # legal per-subject sample counts
    array_key: str                  # MAT variable holding the EEG tensor
    dim_order: tuple                # source dims as (names...) naming
    file_pattern: str               # subject file name, %d = 1-based index
    frequencies: tuple = ()         # embedded table; () = read from files
    phases: tuple = ()
    ordering_file: str = ""         # optional ordering file in the source dir
    mat73: bool = False             # v7.3 (HDF5) distribution

    def montage_indices(self) -> list:
        missing = [c for c in self.montage if c not in self.source_channels]
        if missing:
            raise ValueError(f"montage channels absent from source: {missing}")
        return [self.source_channels.index(c) for c in self.montage]

    def subject_ids(self) -> list:
        return [f"S{i:02d}" for i in range(1, self.n_subjects + 1)]

    def subject_files(self) -> list:
        return [self.file_pattern % i for i in range(1, self.n_subjects + 1)]


RECIPES = {
    "ucsd": ConversionRecipe(
        dataset_id="ucsd",
        source_channels=UCSD_CHANNELS,
        montage=UCSD_CHANNELS,
        sampling_rate=256.0,
        cue_offset=39 / 256,        # stimulation onset at the 39th sample
        latency_offset=0.135,
        n_subjects=10,
        n_stimuli=12,
        n_blocks=15,
        samples_options=(1114,),
        array_key="eeg",
        dim_order=("stimulus", "channel", "sample", "block"),
        file_pattern="s%d.mat",
        frequencies=UCSD_FREQUENCIES,
        phases=UCSD_PHASES,
    ),
    "benchmark": ConversionRecipe(
        dataset_id="benchmark",
        source_channels=CHANNELS_64,
        montage=("PZ", "PO3", "PO5", "PO4", "PO6", "POZ", "O1", "OZ", "O2"),
        sampling_rate=250.0,
        cue_offset=0.5,
        latency_offset=0.14,
        n_subjects=35,
        n_stimuli=40,
        n_blocks=6,
        samples_options=(1500,),
        array_key="data",
        dim_order=("channel", "sample", "stimulus", "block"),
        file_pattern="S%d.mat",
        frequencies=BENCHMARK_FREQUENCIES,
        phases=BENCHMARK_PHASES,
        ordering_file="Freq_Phase.mat",
    ),
    "beta": ConversionRecipe(
        dataset_id="beta",
        source_channels=CHANNELS_64,
        montage=("PZ", "PO3", "PO5", "PO4", "PO6", "POZ", "O1", "OZ", "O2"),
        sampling_rate=250.0,
        cue_offset=0.5,
        latency_offset=0.13,
        n_subjects=70,
        n_stimuli=40,
        n_blocks=4,
        # 2 s stimulation for the first 15 subjects, 3 s for the rest
        samples_options=(750, 1000),
        array_key="data/EEG",
        dim_order=("channel", "sample", "block", "stimulus"),
        file_pattern="S%d.mat",
        ordering_file="",           # per-subject suppl_info carries the table
        mat73=True,
    ),
}


def recipe_for(dataset_id: str) -> ConversionRecipe:
    try:
        return RECIPES[dataset_id]
    except KeyError:
        raise ValueError(
            f"unknown dataset {dataset_id!r}; expected one of {sorted(RECIPES)}"
        ) from None
