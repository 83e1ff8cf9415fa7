"""Butterworth bandpass designs and zero-phase filter-bank decomposition."""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy import ndarray
from scipy import signal

from .core import EpochTensor
from .errors import ToolkitError


@dataclass(frozen=True)
class BandpassDesign:
    """A stable biquad cascade (scipy sos layout: b0,b1,b2,a0,a1,a2 per row)."""

    low_cut: float
    high_cut: float
    order: int
    sos: ndarray

    def __post_init__(self):
        sos = np.asarray(self.sos, dtype=np.float64)
        if sos.flags.writeable:
            sos = sos.copy()
            sos.setflags(write=False)
        object.__setattr__(self, "sos", sos)

    @property
    def n_sections(self) -> int:
        return self.sos.shape[0]


@dataclass(frozen=True)
class FilterBankSpec:
    """Sub-band edges and per-band aggregation weights."""

    bands: tuple
    weights: tuple

    def __post_init__(self):
        bands = tuple((float(lo), float(hi)) for lo, hi in self.bands)
        weights = tuple(float(w) for w in self.weights)
        if not bands:
            raise ToolkitError("invalid-band", "filter bank needs at least one band")
        if len(weights) != len(bands):
            raise ToolkitError(
                "invalid-band", f"{len(weights)} weights for {len(bands)} bands")
        if any(w <= 0 for w in weights):
            raise ToolkitError("invalid-band", "weights must be positive")
        object.__setattr__(self, "bands", bands)
        object.__setattr__(self, "weights", weights)

    @property
    def n_bands(self) -> int:
        return len(self.bands)

    def to_dict(self) -> dict:
        return {"bands": [list(b) for b in self.bands], "weights": list(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "FilterBankSpec":
        return cls(tuple(tuple(b) for b in d["bands"]), tuple(d["weights"]))


def fb_weights(n_bands: int) -> tuple:
    """Standard sub-band weights m^(-1.25) + 0.25, m = 1..n_bands."""
    m = np.arange(1, n_bands + 1, dtype=np.float64)
    return tuple(np.power(m, -1.25) + 0.25)


def default_filter_bank(sampling_rate: float, n_bands: int = 3,
                        base_low: float = 8.0, high: float = 88.0) -> FilterBankSpec:
    """Sub-bands [m*base_low, min(high, 0.45*fs)] with the standard weights."""
    top = min(high, 0.45 * sampling_rate)
    bands = []
    for m in range(1, n_bands + 1):
        lo = m * base_low
        if lo >= top:
            raise ToolkitError(
                "invalid-band",
                f"band {m} low edge {lo} Hz >= top {top} Hz at fs={sampling_rate}")
        bands.append((lo, top))
    return FilterBankSpec(tuple(bands), fb_weights(n_bands))


def design_bandpass(low: float, high: float, sampling_rate: float,
                    order: int = 4) -> BandpassDesign:
    """Butterworth bandpass as second-order sections.

    `order` is the per-edge order; the bandpass cascade has `order` biquads
    (2*order poles). Uses the bilinear transform with frequency pre-warping
    (scipy's butter); pole radii are checked defensively.
    """
    if not (0 < low < high < 0.5 * sampling_rate):
        raise ToolkitError(
            "invalid-band",
            f"need 0 < low < high < fs/2, got ({low}, {high}) at fs={sampling_rate}")
    if order < 2 or order % 2 != 0:
        raise ToolkitError("invalid-band", f"order must be even and >= 2, got {order}")
    sos = signal.butter(order, [low, high], btype="bandpass", fs=sampling_rate, output="sos")
    for section in sos:
        poles = np.roots(section[3:])
        if np.any(np.abs(poles) >= 1.0):
            raise ToolkitError(
                "unstable-design",
                f"pole outside unit circle for band ({low}, {high}) at fs={sampling_rate}")
    return BandpassDesign(low, high, order, sos)


def zero_phase_filter(epoch: EpochTensor, design: BandpassDesign) -> EpochTensor:
    """Forward-backward filtering per channel (zero phase, squared magnitude).

    Uses odd-reflection edge padding of length 3 * order; the epoch must be
    longer than that.
    """
    padlen = 3 * design.order
    if epoch.n_samples <= padlen:
        raise ToolkitError(
            "epoch-too-short",
            f"need more than {padlen} samples for order {design.order}, got {epoch.n_samples}")
    sos = np.array(design.sos)  # scipy requires a writable coefficient buffer
    filtered = signal.sosfiltfilt(sos, epoch.data, axis=1, padtype="odd", padlen=padlen)
    return EpochTensor(
        data=np.ascontiguousarray(filtered),
        sampling_rate=epoch.sampling_rate,
        stimulus_index=epoch.stimulus_index,
        subject_id=epoch.subject_id,
        block_id=epoch.block_id,
    )


@lru_cache(maxsize=128)
def _cached_design(low: float, high: float, sampling_rate: float, order: int) -> BandpassDesign:
    return design_bandpass(low, high, sampling_rate, order)


def filterbank_decompose(epoch: EpochTensor, spec: FilterBankSpec,
                         order: int = 4) -> ndarray:
    """Decompose an epoch into (n_bands, n_channels, n_samples)."""
    out = np.empty((spec.n_bands, epoch.n_channels, epoch.n_samples))
    for m, (lo, hi) in enumerate(spec.bands):
        design = _cached_design(lo, hi, epoch.sampling_rate, order)
        out[m] = zero_phase_filter(epoch, design).data
    return out
