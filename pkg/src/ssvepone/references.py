"""Sine-cosine reference templates.

A template for a stimulus at frequency f and phase phi stacks, for each
harmonic k = 1..n_harmonics, the rows sin(2*pi*k*f*t + k*phi) and
cos(2*pi*k*f*t + k*phi) evaluated on t = [1/fs, 2/fs, ..., n_samples/fs].
"""

from dataclasses import dataclass

import numpy as np
from numpy import ndarray

from .core import StimulusSpec, check_stimuli
from .errors import ToolkitError


@dataclass(frozen=True)
class ReferenceTemplate:
    """Matrix (2*harmonics, n_samples); row 2k is sin of harmonic k+1, row 2k+1 its cos."""

    data: ndarray
    stimulus_index: int
    harmonics: int
    sampling_rate: float

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.flags.writeable:
            data = data.copy()
            data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


def sine_cosine_template(stimulus: StimulusSpec, n_harmonics: int,
                         sampling_rate: float, n_samples: int) -> ReferenceTemplate:
    """Build the reference template for one stimulus.

    The time vector starts at 1/fs (not 0). The highest harmonic must stay
    below Nyquist.
    """
    if n_harmonics < 1:
        raise ToolkitError("invalid-arguments", f"n_harmonics must be >= 1, got {n_harmonics}")
    if n_samples < 2:
        raise ToolkitError("invalid-arguments", f"n_samples must be >= 2, got {n_samples}")
    if not sampling_rate > 0:
        raise ToolkitError("invalid-arguments", "sampling_rate must be > 0")
    if n_harmonics * stimulus.frequency >= sampling_rate / 2:
        raise ToolkitError(
            "harmonic-above-nyquist",
            f"stimulus {stimulus.index}: harmonic {n_harmonics} x {stimulus.frequency} Hz "
            f">= Nyquist {sampling_rate / 2} Hz")
    t = np.arange(1, n_samples + 1, dtype=np.float64) / sampling_rate
    rows = np.empty((2 * n_harmonics, n_samples))
    for k in range(1, n_harmonics + 1):
        arg = 2.0 * np.pi * k * stimulus.frequency * t + k * stimulus.phase
        rows[2 * (k - 1)] = np.sin(arg)
        rows[2 * (k - 1) + 1] = np.cos(arg)
    return ReferenceTemplate(rows, stimulus.index, n_harmonics, sampling_rate)


def template_bank(stimuli, n_harmonics: int, sampling_rate: float, n_samples: int) -> list:
    """One template per stimulus, ordered by stimulus index."""
    stimuli = check_stimuli(stimuli)
    return [sine_cosine_template(s, n_harmonics, sampling_rate, n_samples) for s in stimuli]
