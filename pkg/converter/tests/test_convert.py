import dataclasses
import json
import struct

import numpy as np
import pytest
from scipy import io as sio

from ssvep_convert import ConvertError, convert
from ssvep_convert.recipes import recipe_for

HEADER = struct.Struct("<4sIIIII")


def read_binary(path):
    raw = path.read_bytes()
    magic, version, n_b, n_f, n_c, n_s = HEADER.unpack_from(raw)
    assert magic == b"SSVP"
    assert version == 1
    values = np.frombuffer(raw, dtype="<f4", offset=HEADER.size)
    return values.reshape(n_b, n_f, n_c, n_s)


class TestUcsd:
    def test_structure(self, ucsd_source, tmp_path):
        recipe, src, _ = ucsd_source
        out = tmp_path / "out"
        manifest = convert(recipe, src, out)
        assert manifest["subjects"] == ["S01", "S02"]
        assert manifest["blocks_per_subject"] == 15
        assert len(manifest["stimuli"]) == 12
        assert manifest["channel_names"] == list(recipe.montage)
        assert manifest["sampling_rate"] == 256.0
        assert manifest["n_samples"] == 1114
        assert manifest["K"] == 12
        tensor = read_binary(out / "S01.bin")
        assert tensor.shape == (15, 12, 8, 1114)
        # embedded published table
        assert manifest["stimuli"][0]["frequency"] == 9.25
        assert manifest["stimuli"][3]["phase"] == pytest.approx(0.5 * np.pi)

    def test_values_match_source_to_f32(self, ucsd_source, tmp_path):
        recipe, src, arrays = ucsd_source
        out = tmp_path / "out"
        convert(recipe, src, out)
        tensor = read_binary(out / "S02.bin")
        src_arr = arrays["S02"]  # (stimulus, channel, sample, block)
        rng = np.random.default_rng(0)
        for _ in range(200):
            b, t, c, s = (int(rng.integers(n)) for n in (15, 12, 8, 1114))
            assert tensor[b, t, c, s] == np.float32(src_arr[t, c, s, b])

    def test_deterministic_output_bytes(self, ucsd_source, tmp_path):
        recipe, src, _ = ucsd_source
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        convert(recipe, src, out_a)
        convert(recipe, src, out_b)
        for name in ("manifest.json", "S01.bin", "S02.bin"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_missing_subject_file(self, ucsd_source, tmp_path):
        recipe, src, _ = ucsd_source
        (src / "s2.mat").unlink()
        with pytest.raises(ConvertError, match="missing-file") as exc:
            convert(recipe, src, tmp_path / "out")
        assert "s2.mat" in str(exc.value)

    def test_unexpected_dims(self, ucsd_source, tmp_path):
        recipe, src, _ = ucsd_source
        sio.savemat(src / "s1.mat", {"eeg": np.zeros((12, 8, 999, 15))})
        with pytest.raises(ConvertError, match="unexpected-dims"):
            convert(recipe, src, tmp_path / "out")


class TestBenchmark:
    def test_montage_selection_by_name(self, benchmark_source, tmp_path):
        recipe, src, arrays = benchmark_source
        out = tmp_path / "out"
        manifest = convert(recipe, src, out)
        assert manifest["channel_names"] == ["PZ", "PO3", "PO5", "PO4", "PO6",
                                             "POZ", "O1", "OZ", "O2"]
        tensor = read_binary(out / "S01.bin")
        assert tensor.shape == (6, 40, 9, 1500)
        src_arr = arrays["S01"]  # (channel, sample, stimulus, block)
        # PZ is source row 47; output channel 0
        np.testing.assert_array_equal(
            tensor[2, 5, 0], src_arr[47, :, 5, 2].astype(np.float32))
        # O2 is source row 62; output channel 8
        np.testing.assert_array_equal(
            tensor[0, 39, 8], src_arr[62, :, 39, 0].astype(np.float32))

    def test_ordering_file_mismatch_fails_loudly(self, benchmark_source, tmp_path):
        recipe, src, _ = benchmark_source
        bad = np.linspace(7.0, 20.0, 40).reshape(1, -1)
        sio.savemat(src / "Freq_Phase.mat", {"freqs": bad, "phases": bad * 0})
        with pytest.raises(ConvertError, match="ordering-mismatch"):
            convert(recipe, src, tmp_path / "out")

    def test_embedded_table_used_without_ordering_file(self, benchmark_source, tmp_path):
        recipe, src, _ = benchmark_source
        (src / "Freq_Phase.mat").unlink()
        manifest = convert(recipe, src, tmp_path / "out")
        assert manifest["stimuli"][0]["frequency"] == 8.0
        assert manifest["stimuli"][1]["frequency"] == 9.0
        assert manifest["stimuli"][8]["frequency"] == pytest.approx(8.2)


class TestBeta:
    def test_mixed_durations_recorded_per_subject(self, beta_source, tmp_path):
        recipe, src, arrays, freqs = beta_source
        out = tmp_path / "out"
        manifest = convert(recipe, src, out)
        assert manifest["per_subject_samples"] == {"S01": 750, "S02": 1000}
        assert manifest["n_samples"] == 750
        assert read_binary(out / "S01.bin").shape == (4, 40, 9, 750)
        assert read_binary(out / "S02.bin").shape == (4, 40, 9, 1000)

    def test_frequency_table_read_from_suppl_info(self, beta_source, tmp_path):
        recipe, src, _, freqs = beta_source
        manifest = convert(recipe, src, tmp_path / "out")
        got = [s["frequency"] for s in manifest["stimuli"]]
        np.testing.assert_allclose(got, freqs, atol=1e-9)

    def test_values_match_source_to_f32(self, beta_source, tmp_path):
        recipe, src, arrays, _ = beta_source
        out = tmp_path / "out"
        convert(recipe, src, out)
        tensor = read_binary(out / "S01.bin")
        src_arr = arrays["S01"]  # (channel, sample, block, stimulus)
        idx = recipe.montage_indices()
        rng = np.random.default_rng(1)
        for _ in range(100):
            b, t, c, s = (int(rng.integers(n)) for n in (4, 40, 9, 750))
            assert tensor[b, t, c, s] == np.float32(src_arr[idx[c], s, b, t])

    def test_missing_frequency_table_rejected(self, beta_source, tmp_path):
        import h5py
        recipe, src, arrays, _ = beta_source
        with h5py.File(src / "S1.mat", "w") as fh:
            fh.create_group("data").create_dataset(
                "EEG", data=np.transpose(arrays["S01"]))
        with pytest.raises(ConvertError, match="ordering-mismatch"):
            convert(recipe, src, tmp_path / "out")


class TestRecipes:
    def test_real_geometry_constants(self):
        ucsd = recipe_for("ucsd")
        assert (ucsd.n_subjects, ucsd.n_stimuli, ucsd.n_blocks) == (10, 12, 15)
        assert ucsd.samples_options == (1114,)
        bench = recipe_for("benchmark")
        assert (bench.n_subjects, bench.n_stimuli, bench.n_blocks) == (35, 40, 6)
        assert len(bench.montage) == 9
        beta = recipe_for("beta")
        assert beta.n_subjects == 70
        assert beta.samples_options == (750, 1000)

    def test_unknown_dataset(self):
        with pytest.raises(ValueError, match="unknown dataset"):
            recipe_for("emnist")

    def test_benchmark_phase_rule(self):
        from ssvep_convert.recipes import BENCHMARK_FREQUENCIES, BENCHMARK_PHASES
        assert BENCHMARK_FREQUENCIES[:8] == (8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0, 15.0)
        assert BENCHMARK_PHASES[0] == 0.0
        assert BENCHMARK_PHASES[1] == pytest.approx(0.5 * np.pi)
        assert BENCHMARK_PHASES[8] == pytest.approx(0.5 * np.pi)  # 8.2 Hz


class TestManifestBytes:
    def test_manifest_readable_json_with_fixed_order(self, ucsd_source, tmp_path):
        recipe, src, _ = ucsd_source
        out = tmp_path / "out"
        convert(recipe, src, out)
        text = (out / "manifest.json").read_text("utf-8")
        d = json.loads(text)
        keys = list(d.keys())
        assert keys[:3] == ["format_version", "subjects", "files"]
        assert "checksums" in d
