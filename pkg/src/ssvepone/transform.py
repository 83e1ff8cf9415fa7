"""Least-squares transformation core.

`lst_solve` finds P minimizing ||X1 - P @ X2||_F^2. Per-stimulus transforms
map trials from channel space into the reference (sine-cosine) space; the
aliasing direction (references -> channels) drives SAME augmentation, which
reconstructs a calibration trial from its template fit and perturbs the
reconstruction with scaled Gaussian noise to mint artificial trials.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy import ndarray
from scipy import linalg
from sklearn.base import BaseEstimator, TransformerMixin

from .core import EpochTensor
from .errors import ToolkitError
from .references import template_bank
from .validation import check_matrix


@dataclass(frozen=True)
class LstMatrix:
    """A learned linear map, rows = target dim, cols = source dim."""

    data: ndarray
    stimulus_index: Optional[int] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2 or not np.isfinite(data).all():
            raise ToolkitError("invalid-arguments", "transform matrix must be finite and 2-d")
        if data.flags.writeable:
            data = data.copy()
            data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def target_dim(self) -> int:
        return self.data.shape[0]

    @property
    def source_dim(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class AliasingMatrix(LstMatrix):
    """Map from reference rows to channel space (opposite of LstMatrix)."""


@dataclass(frozen=True)
class TransformStack:
    """Per-stimulus transforms plus a trial mapped through all of them."""

    transforms: tuple
    transformed: ndarray  # (n_stimuli, 2*n_harmonics, n_samples)

    def __post_init__(self):
        arr = np.asarray(self.transformed, dtype=np.float64)
        if arr.flags.writeable:
            arr = arr.copy()
            arr.setflags(write=False)
        object.__setattr__(self, "transformed", arr)
        object.__setattr__(self, "transforms", tuple(self.transforms))


def lst_solve(x1, x2) -> ndarray:
    """Solve argmin_P ||X1 - P @ X2||_F^2.

    Uses an SVD least-squares factorization (handles rank-deficient X2 by
    projection); a ridge-regularized normal-equation solve with
    eps = 1e-8 * trace(X2 X2^T) / d2 is kept as a defensive fallback should
    the factorization ever return non-finite values.
    """
    x1 = check_matrix(x1, "x1")
    x2 = check_matrix(x2, "x2")
    if x1.shape[1] != x2.shape[1]:
        raise ToolkitError(
            "dim-mismatch", f"x1 has {x1.shape[1]} samples, x2 has {x2.shape[1]}")
    d2 = x2.shape[0]
    if x2.shape[1] < d2:
        raise ToolkitError(
            "invalid-arguments",
            f"need n_samples >= source dim ({d2}), got {x2.shape[1]}")
    if not np.any(x2):
        raise ToolkitError("degenerate-input", "x2 is all-zero")
    solution, *_ = linalg.lstsq(x2.T, x1.T, lapack_driver="gelsd")
    p = solution.T
    if not np.isfinite(p).all():
        gram = x2 @ x2.T
        eps = 1e-8 * np.trace(gram) / d2
        p = x1 @ x2.T @ linalg.inv(gram + eps * np.eye(d2))
    return p


def estimate_stimulus_transforms(epochs_by_class, refs) -> list:
    """Per-stimulus maps from channel space to reference space.

    `epochs_by_class[t]` holds the labeled trials of stimulus t (one trial
    in the one-shot case); the class template is their mean. Returns one
    LstMatrix (2*n_harmonics, n_channels) per stimulus.
    """
    if len(epochs_by_class) != len(refs):
        raise ToolkitError(
            "dim-mismatch", f"{len(epochs_by_class)} classes but {len(refs)} templates")
    transforms = []
    for t, trials in enumerate(epochs_by_class):
        if not trials:
            raise ToolkitError("missing-class", f"no trials for stimulus {t}")
        mean = np.mean([tr.data for tr in trials], axis=0)
        if mean.shape[1] != refs[t].n_samples:
            raise ToolkitError(
                "dim-mismatch",
                f"stimulus {t}: trial length {mean.shape[1]} != template {refs[t].n_samples}")
        transforms.append(LstMatrix(lst_solve(refs[t].data, mean), stimulus_index=t))
    return transforms


def apply_stimulus_transforms(trial: EpochTensor, transforms) -> TransformStack:
    """Map one trial through every per-stimulus transform.

    Labels are never consulted; the stack has one (2*n_harmonics, n_samples)
    slice per stimulus.
    """
    transforms = tuple(transforms)
    n_c = trial.n_channels
    for p in transforms:
        if p.source_dim != n_c:
            raise ToolkitError(
                "dim-mismatch",
                f"transform for stimulus {p.stimulus_index} expects {p.source_dim} "
                f"channels, trial has {n_c}")
    stack = np.stack([p.data @ trial.data for p in transforms])
    return TransformStack(transforms, stack)


def same_augment(calib_by_class, refs, n_aug: int = 3, noise_level: float = 0.05,
                 seed: int = 0) -> list:
    """Generate artificial trials from calibration data and templates.

    Per stimulus t: fit the aliasing matrix A_t = lst_solve(mean trial, Y_t),
    reconstruct R_t = A_t @ Y_t, then emit `n_aug` copies of R_t plus
    zero-mean Gaussian noise whose per-channel std is `noise_level` times the
    std of that channel of R_t. Returns per-stimulus lists of EpochTensor
    labeled t (block_id = -1). All randomness flows through `seed`.
    """
    if n_aug < 1:
        raise ToolkitError("invalid-arguments", f"n_aug must be >= 1, got {n_aug}")
    if noise_level < 0:
        raise ToolkitError("invalid-arguments", f"noise_level must be >= 0, got {noise_level}")
    if len(calib_by_class) != len(refs):
        raise ToolkitError(
            "dim-mismatch", f"{len(calib_by_class)} classes but {len(refs)} templates")
    rng = np.random.default_rng(seed)
    out = []
    for t, trials in enumerate(calib_by_class):
        if not trials:
            raise ToolkitError("missing-class", f"no calibration trial for stimulus {t}")
        mean = np.mean([tr.data for tr in trials], axis=0)
        aliasing = AliasingMatrix(lst_solve(mean, refs[t].data), stimulus_index=t)
        recon = aliasing.data @ refs[t].data  # (Nc, Ns)
        chan_std = recon.std(axis=1, keepdims=True)
        proto = trials[0]
        artificial = []
        for _ in range(n_aug):
            noise = rng.standard_normal(recon.shape) * (noise_level * chan_std)
            artificial.append(EpochTensor(
                data=recon + noise,
                sampling_rate=proto.sampling_rate,
                stimulus_index=t,
                subject_id=proto.subject_id,
                block_id=-1,
            ))
        out.append(artificial)
    return out


class PerStimulusLst(BaseEstimator, TransformerMixin):
    """Estimator wrapper: fit per-stimulus transforms, map trials into stacks.

    Parameters
    ----------
    stimuli : sequence of StimulusSpec
    sampling_rate : float
    n_harmonics : int (default: 5)

    Attributes
    ----------
    transforms_ : list of LstMatrix, one per stimulus.
    """

    def __init__(self, stimuli, sampling_rate, n_harmonics: int = 5):
        self.stimuli = stimuli
        self.sampling_rate = sampling_rate
        self.n_harmonics = n_harmonics

    def fit(self, X, y):
        """X: (n_trials, n_channels, n_samples); y: stimulus indices."""
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y)
        n_stim = len(tuple(self.stimuli))
        refs = template_bank(self.stimuli, self.n_harmonics, self.sampling_rate, X.shape[-1])
        by_class = [[] for _ in range(n_stim)]
        for trial, label in zip(X, y):
            by_class[int(label)].append(
                EpochTensor(trial, self.sampling_rate, stimulus_index=int(label)))
        self.transforms_ = estimate_stimulus_transforms(by_class, refs)
        return self

    def transform(self, X) -> ndarray:
        """Map (n_trials, n_channels, n_samples) to (n_trials, n_stimuli, 2*Nh, n_samples)."""
        X = np.asarray(X, dtype=np.float64)
        mats = np.stack([p.data for p in self.transforms_])  # (Nf, 2Nh, Nc)
        return np.einsum("fhc,ncs->nfhs", mats, X, optimize=True)
