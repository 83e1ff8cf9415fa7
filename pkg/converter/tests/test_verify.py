import json

import pytest

from ssvep_convert import ConvertError, convert, verify_roundtrip


@pytest.fixture()
def converted(ucsd_source, tmp_path):
    recipe, src, _ = ucsd_source
    out = tmp_path / "converted"
    manifest = convert(recipe, src, out)
    return recipe, src, out, manifest


class TestVerify:
    def test_fresh_conversion_passes(self, converted):
        recipe, src, out, _ = converted
        report = verify_roundtrip(out, source_dir=src, recipe=recipe)
        assert report.passed, report.issues
        assert report.values_spot_checked == 100 * 2

    def test_dims_match_manifest_for_all_subjects(self, converted):
        recipe, src, out, manifest = converted
        report = verify_roundtrip(out)
        assert report.passed
        assert report.subjects_checked == len(manifest["subjects"])

    def test_flipped_byte_reported_as_checksum_mismatch(self, converted):
        recipe, src, out, _ = converted
        path = out / "S01.bin"
        raw = bytearray(path.read_bytes())
        raw[24 + 1000] ^= 0xFF
        path.write_bytes(bytes(raw))
        report = verify_roundtrip(out)
        assert not report.passed
        assert any("checksum mismatch" in msg for msg in report.issues)

    def test_missing_binary_listed(self, converted):
        recipe, src, out, _ = converted
        (out / "S02.bin").unlink()
        report = verify_roundtrip(out)
        assert not report.passed
        assert any("missing binary" in msg for msg in report.issues)

    def test_dim_tampering_detected(self, converted):
        recipe, src, out, _ = converted
        manifest = json.loads((out / "manifest.json").read_text())
        manifest["n_samples"] = 999
        (out / "manifest.json").write_text(json.dumps(manifest))
        report = verify_roundtrip(out)
        assert not report.passed
        assert any("dims" in msg for msg in report.issues)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(ConvertError, match="missing-file"):
            verify_roundtrip(tmp_path)

    def test_spot_check_catches_source_divergence(self, converted):
        recipe, src, out, _ = converted
        import numpy as np
        from scipy import io as sio
        rng = np.random.default_rng(9)
        sio.savemat(src / "s1.mat", {"eeg": rng.standard_normal((12, 8, 1114, 15))})
        report = verify_roundtrip(out, source_dir=src, recipe=recipe)
        assert not report.passed
        assert any("value mismatch" in msg for msg in report.issues)
