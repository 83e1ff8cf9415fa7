import numpy as np
import pytest

from ssvepone import (EpochTensor, PerStimulusLst, StimulusSpec, ToolkitError,
                      apply_stimulus_transforms, estimate_stimulus_transforms,
                      lst_solve, same_augment, template_bank)

FS = 250.0


def _stimuli(n):
    return tuple(StimulusSpec(i, 9.0 + 0.7 * i, 0.5 * np.pi * i) for i in range(n))


class TestLstSolve:
    def test_self_mapping_is_identity(self, rng):
        x = rng.standard_normal((5, 100))
        p = lst_solve(x, x)
        np.testing.assert_allclose(p, np.eye(5), atol=1e-10)

    def test_scalar_scaling(self, rng):
        x1 = rng.standard_normal((4, 80))
        p = lst_solve(x1, 2.0 * x1)
        np.testing.assert_allclose(p, 0.5 * np.eye(4), atol=1e-10)

    def test_exact_recovery(self, rng):
        a = rng.standard_normal((4, 8))
        x2 = rng.standard_normal((8, 200))
        p = lst_solve(a @ x2, x2)
        assert np.linalg.norm(p - a) / np.linalg.norm(a) < 1e-9

    def test_degenerate_input(self):
        with pytest.raises(ToolkitError, match="degenerate-input"):
            lst_solve(np.ones((2, 50)), np.zeros((2, 50)))

    def test_underdetermined_rejected(self, rng):
        with pytest.raises(ToolkitError, match="invalid-arguments"):
            lst_solve(rng.standard_normal((2, 5)), rng.standard_normal((8, 5)))

    def test_first_order_optimality(self, rng):
        x2 = rng.standard_normal((6, 120))
        x1 = rng.standard_normal((4, 120))
        p = lst_solve(x1, x2)
        base = np.linalg.norm(x1 - p @ x2)
        for _ in range(200):
            delta = rng.standard_normal(p.shape)
            delta *= 1e-3 / np.linalg.norm(delta)
            assert np.linalg.norm(x1 - (p + delta) @ x2) >= base - 1e-12


class TestEstimateTransforms:
    def test_one_shot_mean_is_the_trial(self, rng):
        stimuli = _stimuli(2)
        refs = template_bank(stimuli, 3, FS, 150)
        trials = [[EpochTensor(rng.standard_normal((8, 150)), FS, stimulus_index=t)]
                  for t in range(2)]
        transforms = estimate_stimulus_transforms(trials, refs)
        for t in range(2):
            expected = lst_solve(refs[t].data, trials[t][0].data)
            np.testing.assert_array_equal(transforms[t].data, expected)

    def test_noiseless_round_trip(self, rng):
        # recoverable setup: n_channels=12 >= 2*n_harmonics=10
        stimuli = _stimuli(2)
        refs = template_bank(stimuli, 5, FS, 200)
        trials = []
        for t in range(2):
            a = rng.standard_normal((12, 10))
            trials.append([EpochTensor(a @ refs[t].data, FS, stimulus_index=t)])
        transforms = estimate_stimulus_transforms(trials, refs)
        for t in range(2):
            recon = transforms[t].data @ trials[t][0].data
            err = np.linalg.norm(recon - refs[t].data) / np.linalg.norm(refs[t].data)
            assert err < 1e-8

    def test_missing_class_named(self, rng):
        stimuli = _stimuli(2)
        refs = template_bank(stimuli, 3, FS, 120)
        trials = [[EpochTensor(rng.standard_normal((8, 120)), FS)], []]
        with pytest.raises(ToolkitError, match="stimulus 1"):
            estimate_stimulus_transforms(trials, refs)

    def test_multi_trial_mean(self, rng):
        stimuli = _stimuli(2)
        refs = template_bank(stimuli, 3, FS, 150)
        per_class = []
        for t in range(2):
            per_class.append([EpochTensor(rng.standard_normal((6, 150)), FS)
                              for _ in range(4)])
        transforms = estimate_stimulus_transforms(per_class, refs)
        for t in range(2):
            mean = np.mean([tr.data for tr in per_class[t]], axis=0)
            np.testing.assert_array_equal(transforms[t].data,
                                          lst_solve(refs[t].data, mean))


class TestApplyTransforms:
    def _transforms(self, rng, n_f=4, rows=6, n_c=8):
        from ssvepone import LstMatrix
        return [LstMatrix(rng.standard_normal((rows, n_c)), stimulus_index=t)
                for t in range(n_f)]

    def test_stack_geometry(self, rng):
        transforms = self._transforms(rng, n_f=40, rows=10)
        trial = EpochTensor(rng.standard_normal((8, 120)), FS)
        stack = apply_stimulus_transforms(trial, transforms)
        assert stack.transformed.shape == (40, 10, 120)

    def test_zero_transforms_zero_stack(self, rng):
        from ssvepone import LstMatrix
        transforms = [LstMatrix(np.zeros((4, 8)), stimulus_index=t) for t in range(3)]
        trial = EpochTensor(rng.standard_normal((8, 90)), FS)
        stack = apply_stimulus_transforms(trial, transforms)
        assert not stack.transformed.any()

    def test_matches_naive_triple_loop(self, rng):
        transforms = self._transforms(rng, n_f=2, rows=3, n_c=4)
        trial = EpochTensor(rng.standard_normal((4, 20)), FS)
        stack = apply_stimulus_transforms(trial, transforms)
        for t, p in enumerate(transforms):
            naive = np.zeros((3, 20))
            for i in range(3):
                for j in range(20):
                    for c in range(4):
                        naive[i, j] += p.data[i, c] * trial.data[c, j]
            np.testing.assert_allclose(stack.transformed[t], naive, atol=1e-12)

    def test_label_never_consulted(self, rng):
        transforms = self._transforms(rng)
        data = rng.standard_normal((8, 100))
        labeled = EpochTensor(data, FS, stimulus_index=2)
        unlabeled = EpochTensor(data, FS)
        np.testing.assert_array_equal(
            apply_stimulus_transforms(labeled, transforms).transformed,
            apply_stimulus_transforms(unlabeled, transforms).transformed)

    def test_dim_mismatch(self, rng):
        transforms = self._transforms(rng, n_c=5)
        trial = EpochTensor(rng.standard_normal((8, 100)), FS)
        with pytest.raises(ToolkitError, match="dim-mismatch"):
            apply_stimulus_transforms(trial, transforms)


class TestSameAugment:
    def _calib(self, rng, stimuli, refs, n_c=8):
        out = []
        for t in range(len(stimuli)):
            a = rng.standard_normal((n_c, refs[t].data.shape[0]))
            data = a @ refs[t].data + 0.1 * rng.standard_normal((n_c, refs[t].n_samples))
            out.append([EpochTensor(data, FS, stimulus_index=t, subject_id="S01",
                                    block_id=0)])
        return out

    def test_counts_per_class(self, rng):
        stimuli = _stimuli(3)
        refs = template_bank(stimuli, 3, FS, 150)
        calib = self._calib(rng, stimuli, refs)
        art = same_augment(calib, refs, n_aug=3, noise_level=0.05, seed=5)
        assert len(art) == 3
        assert all(len(a) == 3 for a in art)
        assert all(a.stimulus_index == t for t, per in enumerate(art) for a in per)
        # 3 artificial + 1 real = 4 trials per class downstream
        assert all(len(calib[t] + art[t]) == 4 for t in range(3))

    def test_zero_noise_copies_reconstruction(self, rng):
        stimuli = _stimuli(2)
        refs = template_bank(stimuli, 3, FS, 150)
        calib = self._calib(rng, stimuli, refs)
        art = same_augment(calib, refs, n_aug=3, noise_level=0.0, seed=5)
        for per_class in art:
            for a in per_class[1:]:
                np.testing.assert_array_equal(a.data, per_class[0].data)

    def test_seeded_determinism(self, rng):
        stimuli = _stimuli(2)
        refs = template_bank(stimuli, 3, FS, 150)
        calib = self._calib(rng, stimuli, refs)
        a = same_augment(calib, refs, n_aug=2, noise_level=0.1, seed=9)
        b = same_augment(calib, refs, n_aug=2, noise_level=0.1, seed=9)
        for pa, pb in zip(a, b):
            for ea, eb in zip(pa, pb):
                np.testing.assert_array_equal(ea.data, eb.data)

    def test_aliasing_fixed_point(self, rng):
        stimuli = _stimuli(2)
        refs = template_bank(stimuli, 3, FS, 150)
        calib = self._calib(rng, stimuli, refs)
        art = same_augment(calib, refs, n_aug=1, noise_level=0.0, seed=0)
        for t in range(2):
            a_hat = lst_solve(calib[t][0].data, refs[t].data)
            again = lst_solve(art[t][0].data, refs[t].data)
            assert np.linalg.norm(again - a_hat) / np.linalg.norm(a_hat) < 1e-8


class TestEstimator:
    def test_fit_transform_shapes(self, rng):
        stimuli = _stimuli(3)
        X = rng.standard_normal((6, 8, 150))
        y = np.array([0, 1, 2, 0, 1, 2])
        est = PerStimulusLst(stimuli, FS, n_harmonics=4)
        stacks = est.fit(X, y).transform(X)
        assert stacks.shape == (6, 3, 8, 150)
        assert est.get_params()["n_harmonics"] == 4

    def test_transform_matches_functional(self, rng):
        stimuli = _stimuli(2)
        X = rng.standard_normal((4, 6, 150))
        y = np.array([0, 1, 0, 1])
        est = PerStimulusLst(stimuli, FS).fit(X, y)
        stacks = est.transform(X[:1])
        trial = EpochTensor(X[0], FS)
        direct = apply_stimulus_transforms(trial, est.transforms_)
        np.testing.assert_allclose(stacks[0], direct.transformed, atol=1e-12)
