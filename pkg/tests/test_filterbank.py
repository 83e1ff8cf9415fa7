import numpy as np
import pytest
from scipy import signal as sps

from ssvepone import (EpochTensor, FilterBankSpec, ToolkitError,
                      default_filter_bank, design_bandpass, fb_weights,
                      filterbank_decompose, zero_phase_filter)

FS = 250.0


def _sine_epoch(freq, fs=FS, seconds=4.0, amp=1.0):
    t = np.arange(int(seconds * fs)) / fs
    data = amp * np.sin(2 * np.pi * freq * t)
    return EpochTensor(data[np.newaxis, :], fs)


class TestDesign:
    def test_section_count_and_stability(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        assert d.n_sections == 4
        for section in d.sos:
            poles = np.roots(section[3:])
            assert np.all(np.abs(poles) < 1.0)

    def test_midband_gain_within_1db(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        mid = np.sqrt(8.0 * 88.0)
        w, h = sps.sosfreqz(np.array(d.sos), worN=[mid], fs=FS)
        gain_db = 20 * np.log10(np.abs(h[0]))
        assert abs(gain_db) < 1.0

    def test_invalid_band(self):
        with pytest.raises(ToolkitError, match="invalid-band"):
            design_bandpass(40.0, 10.0, FS)
        with pytest.raises(ToolkitError, match="invalid-band"):
            design_bandpass(8.0, 300.0, FS)
        with pytest.raises(ToolkitError, match="order"):
            design_bandpass(8.0, 88.0, FS, order=3)


class TestZeroPhase:
    def test_inband_amplitude_preserved(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        ep = _sine_epoch(12.0)
        out = zero_phase_filter(ep, d)
        interior = slice(int(0.1 * FS), -int(0.1 * FS))
        amp = np.max(np.abs(out.data[0, interior]))
        assert abs(amp - 1.0) < 0.05

    def test_out_of_band_attenuated(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        ep = _sine_epoch(2.0)
        out = zero_phase_filter(ep, d)
        interior = slice(int(0.5 * FS), -int(0.5 * FS))
        ratio = np.max(np.abs(out.data[0, interior])) / 1.0
        assert 20 * np.log10(ratio) <= -20.0

    def test_dc_removed(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        ep = EpochTensor(np.full((2, 1000), 5.0), FS)
        out = zero_phase_filter(ep, d)
        assert np.max(np.abs(out.data)) < 1e-3 * 5.0

    def test_zero_lag(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        ep = _sine_epoch(20.0, seconds=2.0)
        out = zero_phase_filter(ep, d)
        x = ep.data[0] - ep.data[0].mean()
        y = out.data[0] - out.data[0].mean()
        xc = np.correlate(y, x, mode="full")
        lag = int(np.argmax(xc)) - (len(x) - 1)
        assert lag == 0

    def test_too_short_rejected(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        ep = EpochTensor(np.zeros((1, 12)), FS)
        with pytest.raises(ToolkitError, match="epoch-too-short"):
            zero_phase_filter(ep, d)

    def test_deterministic(self):
        d = design_bandpass(8.0, 88.0, FS, order=4)
        ep = _sine_epoch(15.0)
        a = zero_phase_filter(ep, d).data
        b = zero_phase_filter(ep, d).data
        np.testing.assert_array_equal(a, b)


class TestFilterBank:
    def test_default_bank_shape_and_weights(self):
        bank = default_filter_bank(FS)
        assert bank.n_bands == 3
        assert bank.bands[0] == (8.0, 88.0)
        assert bank.bands[2] == (24.0, 88.0)
        np.testing.assert_allclose(
            bank.weights, np.power(np.arange(1, 4), -1.25) + 0.25)

    def test_low_fs_cap(self):
        bank = default_filter_bank(125.0)
        assert bank.bands[0][1] == pytest.approx(56.25)

    def test_weights_validate(self):
        with pytest.raises(ToolkitError, match="weights"):
            FilterBankSpec(((8, 88), (16, 88)), (1.0,))

    def test_decompose_shape(self, rng):
        ep = EpochTensor(rng.standard_normal((5, 500)), FS)
        out = filterbank_decompose(ep, default_filter_bank(FS))
        assert out.shape == (3, 5, 500)

    def test_single_band_matches_zero_phase(self, rng):
        ep = EpochTensor(rng.standard_normal((2, 400)), FS)
        spec = FilterBankSpec(((8.0, 88.0),), (1.0,))
        out = filterbank_decompose(ep, spec)
        direct = zero_phase_filter(ep, design_bandpass(8.0, 88.0, FS, 4)).data
        np.testing.assert_array_equal(out[0], direct)

    def test_band_selectivity_for_10hz(self):
        ep = _sine_epoch(10.0)
        spec = FilterBankSpec(((8.0, 88.0), (16.0, 88.0)), fb_weights(2))
        out = filterbank_decompose(ep, spec)
        interior = slice(int(0.5 * FS), -int(0.5 * FS))
        a0 = np.max(np.abs(out[0, 0, interior]))
        a1 = np.max(np.abs(out[1, 0, interior]))
        assert 20 * np.log10(a1 / a0) <= -20.0

    def test_linearity(self, rng):
        x = EpochTensor(rng.standard_normal((3, 300)), FS)
        y = EpochTensor(rng.standard_normal((3, 300)), FS)
        combo = EpochTensor(2.5 * x.data - 1.5 * y.data, FS)
        bank = default_filter_bank(FS)
        lhs = filterbank_decompose(combo, bank)
        rhs = 2.5 * filterbank_decompose(x, bank) - 1.5 * filterbank_decompose(y, bank)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-9, atol=1e-12)

    def test_spec_round_trip(self):
        bank = default_filter_bank(FS)
        again = FilterBankSpec.from_dict(bank.to_dict())
        assert again.bands == bank.bands
        assert again.weights == bank.weights
