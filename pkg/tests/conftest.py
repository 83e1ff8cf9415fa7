import numpy as np
import pytest

from ssvepone import SynthSpec, epochs_from_tensors, synth_generate


@pytest.fixture(scope="session")
def small_synth():
    """Tiny 3-subject dataset for harness plumbing tests (fs=125, 0.8 s)."""
    spec = SynthSpec(n_subjects=3, n_stimuli=4, n_blocks=3, n_channels=6,
                     sampling_rate=125.0, duration=0.8, snr=15.0, freq_high=12.0)
    manifest, tensors = synth_generate(spec, seed=123)
    return spec, manifest, tensors


@pytest.fixture(scope="session")
def small_synth_epochs(small_synth):
    spec, manifest, tensors = small_synth
    return spec, manifest, epochs_from_tensors(manifest, tensors)


@pytest.fixture(scope="session")
def decoder_synth_epochs():
    """Higher-SNR 250 Hz dataset exercising the decoders at full geometry."""
    spec = SynthSpec(n_subjects=2, n_stimuli=6, n_blocks=4, n_channels=8,
                     sampling_rate=250.0, duration=1.0, snr=10.0)
    manifest, tensors = synth_generate(spec, seed=7)
    return spec, manifest, epochs_from_tensors(manifest, tensors)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
