import numpy as np
import pytest

from ssvepone import (FusionConfig, ScoreVector, ToolkitError, fuse_and_decide,
                      minmax_normalize)


class TestMinmaxNormalize:
    def test_affine_map(self):
        sv = minmax_normalize(ScoreVector(np.array([2.0, 4.0, 6.0]), "net"))
        np.testing.assert_allclose(sv.scores, [0.0, 0.5, 1.0])

    def test_constant_vector_abstains(self):
        sv = minmax_normalize(ScoreVector(np.array([5.0, 5.0, 5.0]), "net"))
        np.testing.assert_array_equal(sv.scores, np.zeros(3))

    def test_idempotent_on_random_vectors(self, rng):
        for _ in range(100):
            sv = ScoreVector(rng.standard_normal(6), "x")
            once = minmax_normalize(sv)
            twice = minmax_normalize(once)
            np.testing.assert_allclose(twice.scores, once.scores, atol=1e-15)

    def test_keeps_decoder_id(self):
        assert minmax_normalize(ScoreVector(np.arange(3.0), "tdca")).decoder_id == "tdca"


def _sets(*vectors):
    return [ScoreVector(np.asarray(v, dtype=float), name)
            for name, v in vectors]


class TestFuseAndDecide:
    def test_unanimous(self):
        sets = _sets(("net", [0, 0, 0, 1]), ("etrca", [.1, .2, .3, .9]),
                     ("tdca", [0, .5, .1, 2.0]))
        pred, fused = fuse_and_decide(sets, FusionConfig())
        assert pred == 3
        assert fused.decoder_id == "fused"

    def test_tie_breaks_to_lowest_index(self):
        sets = _sets(("net", [1.0, 0.0]), ("etrca", [0.0, 1.0]))
        pred, fused = fuse_and_decide(sets, FusionConfig(("net", "etrca")))
        assert pred == 0
        np.testing.assert_allclose(fused.scores, [1.0, 1.0])

    def test_net_only_reproduces_direct_argmax(self, rng):
        for _ in range(20):
            raw = rng.standard_normal(7)
            sets = _sets(("net", raw), ("etrca", rng.standard_normal(7)))
            pred, _ = fuse_and_decide(sets, FusionConfig(("net",)))
            assert pred == int(np.argmax(raw))

    def test_increasing_affine_map_never_changes_decision(self, rng):
        for _ in range(25):
            a = rng.standard_normal(5)
            b = rng.standard_normal(5)
            sets = _sets(("net", a), ("etrca", b))
            pred, _ = fuse_and_decide(sets, FusionConfig(("net", "etrca")))
            warped = _sets(("net", 3.7 * a + 11.0), ("etrca", b))
            pred2, _ = fuse_and_decide(warped, FusionConfig(("net", "etrca")))
            assert pred == pred2

    def test_fused_scores_bounded_by_member_count(self, rng):
        sets = _sets(("net", rng.standard_normal(5)),
                     ("etrca", rng.standard_normal(5)),
                     ("tdca", rng.standard_normal(5)))
        _, fused = fuse_and_decide(sets, FusionConfig())
        assert fused.scores.min() >= 0.0
        assert fused.scores.max() <= 3.0

    def test_constant_member_never_changes_decision(self, rng):
        a = rng.standard_normal(6)
        with_const = _sets(("net", a), ("etrca", np.ones(6)))
        pred_with, _ = fuse_and_decide(with_const, FusionConfig(("net", "etrca")))
        pred_without, _ = fuse_and_decide(_sets(("net", a)), FusionConfig(("net",)))
        assert pred_with == pred_without

    def test_missing_member(self):
        with pytest.raises(ToolkitError, match="missing member"):
            fuse_and_decide(_sets(("net", [1, 2])), FusionConfig(("net", "tdca")))

    def test_length_mismatch(self):
        sets = _sets(("net", [1, 2, 3]), ("etrca", [1, 2]))
        with pytest.raises(ToolkitError, match="length-mismatch"):
            fuse_and_decide(sets, FusionConfig(("net", "etrca")))

    def test_empty_members_rejected(self):
        with pytest.raises(ToolkitError):
            FusionConfig(())

    def test_unknown_member_rejected(self):
        with pytest.raises(ToolkitError, match="unknown fusion members"):
            FusionConfig(("net", "bogus"))
