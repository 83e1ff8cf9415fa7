import numpy as np
import pytest

from ssvepone import (StimulusSpec, ToolkitError, sine_cosine_template,
                      template_bank)


class TestScalarOracle:
    def test_first_sin_sample(self):
        # sin(2*pi*10/250), first element of row 0 for f=10 Hz, phase 0, fs=250
        t = sine_cosine_template(StimulusSpec(0, 10.0, 0.0), 1, 250.0, 16)
        assert t.data[0, 0] == pytest.approx(0.24868988716485479, abs=1e-12)

    def test_first_cos_sample(self):
        t = sine_cosine_template(StimulusSpec(0, 10.0, 0.0), 1, 250.0, 16)
        assert t.data[1, 0] == pytest.approx(0.9685831611286311, abs=1e-12)

    def test_harmonic_uses_scaled_phase(self):
        phase = 0.4
        t = sine_cosine_template(StimulusSpec(0, 9.0, phase), 3, 250.0, 64)
        time = np.arange(1, 65) / 250.0
        expected = np.sin(2 * np.pi * 3 * 9.0 * time + 3 * phase)
        np.testing.assert_allclose(t.data[4], expected, atol=1e-12)


class TestShapes:
    def test_row_count_forced_by_harmonics(self):
        t = sine_cosine_template(StimulusSpec(0, 11.0, 0.0), 5, 250.0, 100)
        assert t.data.shape == (10, 100)

    def test_values_bounded(self):
        t = sine_cosine_template(StimulusSpec(0, 13.0, 1.1), 4, 250.0, 500)
        assert np.all(np.abs(t.data) <= 1.0)

    def test_nyquist_rejected(self):
        with pytest.raises(ToolkitError, match="harmonic-above-nyquist"):
            sine_cosine_template(StimulusSpec(3, 30.0, 0.0), 5, 250.0, 100)


class TestBank:
    def _stimuli(self, n):
        return tuple(StimulusSpec(i, 8.0 + 0.2 * i, 0.5 * np.pi * i) for i in range(n))

    def test_benchmark_geometry(self):
        bank = template_bank(self._stimuli(40), 5, 250.0, 125)
        assert len(bank) == 40
        assert all(b.data.shape == (10, 125) for b in bank)

    def test_bank_error_names_offender(self):
        stimuli = (StimulusSpec(0, 9.0), StimulusSpec(1, 60.0))
        with pytest.raises(ToolkitError, match="stimulus 1"):
            template_bank(stimuli, 5, 250.0, 100)

    def test_deterministic(self):
        a = template_bank(self._stimuli(4), 5, 250.0, 256)
        b = template_bank(self._stimuli(4), 5, 250.0, 256)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.data, y.data)


class TestStatisticalInvariants:
    N = 4096

    def test_rows_zero_mean_half_power(self):
        t = sine_cosine_template(StimulusSpec(0, 12.4, 0.7), 5, 250.0, self.N)
        means = t.data.mean(axis=1)
        powers = (t.data ** 2).mean(axis=1)
        assert np.all(np.abs(means) < 0.02)
        assert np.all(np.abs(powers - 0.5) < 0.02)

    def test_distinct_harmonics_near_orthogonal(self):
        t = sine_cosine_template(StimulusSpec(0, 9.7, 0.3), 5, 250.0, self.N)
        d = t.data / np.linalg.norm(t.data, axis=1, keepdims=True)
        gram = d @ d.T
        off = gram - np.diag(np.diag(gram))
        assert np.max(np.abs(off)) < 0.05
