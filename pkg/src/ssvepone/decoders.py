"""Classical spatial-filter decoders: CCA, FBCCA, (e)TRCA and TDCA.

Functional kernels operate on plain arrays; the estimator classes at the
bottom wrap them behind a fit/predict API and handle filter-bank
decomposition of raw trials.

Shape notation: Nb = bands, Nf = stimuli, Nc = channels, Ns = samples,
Nt = trials, Nh = harmonics, Nk = kept components.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy import ndarray
from scipy import linalg
from sklearn.base import BaseEstimator, ClassifierMixin

from .core import EpochTensor
from .errors import ToolkitError
from .filterbank import FilterBankSpec, default_filter_bank, filterbank_decompose
from .references import template_bank
from .validation import check_band_tensor, check_labels, check_matrix, check_trial_array


@dataclass(frozen=True)
class CcaResult:
    """Canonical correlations (descending) and the paired projection weights."""

    correlations: ndarray  # (Nk,)
    x_weights: ndarray     # (a, Nk)
    y_weights: ndarray     # (b, Nk)


@dataclass(frozen=True)
class ScoreVector:
    """Per-class decision scores from one decoder."""

    scores: ndarray  # (Nf,)
    decoder_id: str

    def __post_init__(self):
        scores = np.asarray(self.scores, dtype=np.float64)
        if scores.ndim != 1:
            raise ToolkitError("invalid-arguments", "scores must be 1-d")
        if not np.isfinite(scores).all():
            raise ToolkitError("invalid-arguments", "scores must be finite")
        object.__setattr__(self, "scores", scores)

    def __len__(self) -> int:
        return self.scores.shape[0]

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.scores))


@dataclass(frozen=True)
class TrcaModel:
    """Per-band, per-stimulus spatial filters and averaged templates."""

    filters: ndarray    # (Nb, Nf, Nc), each row unit-norm; band ensemble = filters[m]
    templates: ndarray  # (Nb, Nf, Nc, Ns)

    @property
    def n_bands(self) -> int:
        return self.filters.shape[0]

    @property
    def n_classes(self) -> int:
        return self.filters.shape[1]


@dataclass(frozen=True)
class TdcaModel:
    """Shared discriminant directions, projected class centers, reference bases."""

    directions: ndarray   # (Nb, (l+1)*Nc, Nk), orthonormal columns per band
    centers: ndarray      # (Nb, Nf, Nk, width)
    bases: Optional[ndarray]  # (Nf, Ns-l, 2*Nh) orthonormal, or None if projection disabled
    n_delays: int

    @property
    def n_bands(self) -> int:
        return self.directions.shape[0]

    @property
    def n_classes(self) -> int:
        return self.centers.shape[1]


def _pearson_flat(a: ndarray, b: ndarray) -> float:
    """Pearson correlation of two flattened arrays; 0.0 if either is constant."""
    a = a.ravel()
    b = b.ravel()
    a = a - a.mean()
    b = b - b.mean()
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na <= 0 or nb <= 0:
        return 0.0
    return float(a @ b / (na * nb))


def _inv_sqrt_psd(c: ndarray, what: str) -> ndarray:
    vals, vecs = linalg.eigh(c)
    if vals[-1] <= 0 or vals[0] <= vals[-1] * 1e-14:
        raise ToolkitError("rank-deficient-input", f"{what} covariance is singular")
    return (vecs * (vals ** -0.5)) @ vecs.T


def cca_correlations(x, y, n_comp: int = 1) -> CcaResult:
    """Canonical correlation via whitened cross-covariance singular values.

    Auto-covariances get a relative ridge 1e-9 * trace before whitening; the
    reported correlations are the empirical Pearson correlations of the
    canonical variate pairs, so a pure scaling of either input leaves them
    unchanged.
    """
    x = check_matrix(x, "x")
    y = check_matrix(y, "y")
    if x.shape[1] != y.shape[1]:
        raise ToolkitError("dim-mismatch", f"x has {x.shape[1]} samples, y has {y.shape[1]}")
    a, b = x.shape[0], y.shape[0]
    n = x.shape[1]
    if n <= a + b:
        raise ToolkitError("invalid-arguments", f"need n_samples > {a + b}, got {n}")
    if n_comp < 1 or n_comp > min(a, b):
        raise ToolkitError("invalid-arguments", f"n_comp must be in [1, {min(a, b)}]")
    xc = x - x.mean(axis=1, keepdims=True)
    yc = y - y.mean(axis=1, keepdims=True)
    cxx = xc @ xc.T / (n - 1)
    cyy = yc @ yc.T / (n - 1)
    cxy = xc @ yc.T / (n - 1)
    cxx = cxx + 1e-9 * np.trace(cxx) * np.eye(a)
    cyy = cyy + 1e-9 * np.trace(cyy) * np.eye(b)
    wx = _inv_sqrt_psd(cxx, "x")
    wy = _inv_sqrt_psd(cyy, "y")
    u, _, vt = linalg.svd(wx @ cxy @ wy)
    x_w = wx @ u[:, :n_comp]
    y_w = wy @ vt[:n_comp].T
    corrs = np.array([
        abs(_pearson_flat(x_w[:, k] @ xc, y_w[:, k] @ yc)) for k in range(n_comp)
    ])
    order = np.argsort(-corrs, kind="stable")
    return CcaResult(corrs[order], x_w[:, order], y_w[:, order])


def fbcca_score(bands: ndarray, refs, weights) -> ScoreVector:
    """score[t] = sum_m w_m * rho_{m,t}^2, rho = first canonical correlation."""
    bands = check_band_tensor(bands)
    weights = np.asarray(weights, dtype=np.float64)
    if bands.shape[0] != weights.shape[0]:
        raise ToolkitError(
            "dim-mismatch", f"{bands.shape[0]} bands but {weights.shape[0]} weights")
    scores = np.zeros(len(refs))
    for m, w in enumerate(weights):
        for t, ref in enumerate(refs):
            rho = cca_correlations(bands[m], ref.data, n_comp=1).correlations[0]
            scores[t] += w * rho ** 2
    return ScoreVector(scores, "fbcca")


def _solve_gep_leading(s: ndarray, q: ndarray) -> ndarray:
    """Leading generalized eigenvector of (S, Q) via whitening; unit-norm output."""
    vals, vecs = linalg.eigh(q)
    if vals[-1] <= 0 or vals[0] <= vals[-1] * 1e-12:
        raise ToolkitError("eigen-failure", "Q covariance not positive definite")
    whiten = (vecs * (vals ** -0.5)) @ vecs.T
    m = whiten @ s @ whiten
    m = 0.5 * (m + m.T)
    _, mvecs = linalg.eigh(m)
    w = whiten @ mvecs[:, -1]
    w = w / np.linalg.norm(w)
    if w[np.argmax(np.abs(w))] < 0:  # deterministic sign convention
        w = -w
    return w


def trca_train(x_bands: ndarray, y) -> TrcaModel:
    """Train per-stimulus TRCA filters on every band.

    x_bands: (Nb, Nt, Nc, Ns) with Nt >= 2 trials per class. Per class, the
    inter-trial covariance S sums x_i x_j^T over distinct trial pairs (trials
    channel-wise mean-centered) and Q is the covariance of the concatenated
    centered trials; the filter is the leading generalized eigenvector of
    (S, Q). Templates are per-class trial means of the raw band data.
    """
    x_bands = np.asarray(x_bands, dtype=np.float64)
    if x_bands.ndim != 4:
        raise ToolkitError("invalid-arguments", "x_bands must be (Nb, Nt, Nc, Ns)")
    n_bands, n_trials, n_c, n_s = x_bands.shape
    y = check_labels(y, n_trials)
    classes = np.unique(y)
    n_f = classes.shape[0]
    for t in classes:
        if np.sum(y == t) < 2:
            raise ToolkitError(
                "insufficient-trials", f"class {t} has {np.sum(y == t)} trial(s), need >= 2")
    filters = np.zeros((n_bands, n_f, n_c))
    templates = np.zeros((n_bands, n_f, n_c, n_s))
    for m in range(n_bands):
        for ti, t in enumerate(classes):
            trials = x_bands[m, y == t]  # (nt, Nc, Ns)
            centered = trials - trials.mean(axis=2, keepdims=True)
            nt = trials.shape[0]
            total = centered.sum(axis=0)
            # sum over i != j of x_i x_j^T, without the explicit double loop
            s = total @ total.T - np.einsum("tcs,tds->cd", centered, centered, optimize=True)
            concat = centered.transpose(1, 0, 2).reshape(n_c, nt * n_s)
            q = concat @ concat.T
            filters[m, ti] = _solve_gep_leading(s, q)
            templates[m, ti] = trials.mean(axis=0)
    return TrcaModel(filters, templates)


def etrca_score(x_bands: ndarray, model: TrcaModel, weights) -> ScoreVector:
    """Ensemble-TRCA score of one trial: weighted Pearson over bands.

    score[t] = sum_m w_m * r(W_m x_m, W_m template_{t,m}) with W_m the band's
    stacked filters and r the Pearson correlation of the flattened arrays.
    """
    x_bands = check_band_tensor(x_bands)
    weights = np.asarray(weights, dtype=np.float64)
    if x_bands.shape[0] != model.n_bands or weights.shape[0] != model.n_bands:
        raise ToolkitError(
            "dim-mismatch",
            f"model has {model.n_bands} bands, got tensor {x_bands.shape[0]} / "
            f"weights {weights.shape[0]}")
    if x_bands.shape[1] != model.filters.shape[2]:
        raise ToolkitError(
            "dim-mismatch", f"trial has {x_bands.shape[1]} channels, "
            f"model expects {model.filters.shape[2]}")
    n_f = model.n_classes
    scores = np.zeros(n_f)
    for m in range(model.n_bands):
        ensemble = model.filters[m]  # (Nf, Nc)
        fx = ensemble @ x_bands[m]   # (Nf, Ns)
        for t in range(n_f):
            ft = ensemble @ model.templates[m, t]
            scores[t] += weights[m] * _pearson_flat(fx, ft)
    return ScoreVector(scores, "etrca")


def delay_augment(trial: ndarray, n_delays: int) -> ndarray:
    """Stack a trial with itself shifted by 0..n_delays samples.

    Output is ((l+1)*Nc, Ns - l); shift d contributes trial[:, d : Ns-l+d].
    """
    n_c, n_s = trial.shape
    if n_s - n_delays < 1:
        raise ToolkitError("invalid-arguments", f"trial too short for {n_delays} delays")
    width = n_s - n_delays
    return np.vstack([trial[:, d:d + width] for d in range(n_delays + 1)])


def _tdca_feature(trial: ndarray, n_delays: int, basis: Optional[ndarray]) -> ndarray:
    """Delay-augmented matrix, optionally concatenated with its reference projection."""
    aug = delay_augment(trial, n_delays)
    if basis is None:
        return aug
    return np.hstack([aug, (aug @ basis) @ basis.T])


def tdca_train(x_bands: ndarray, y, refs, n_delays: int = 5,
               n_components: int = 8) -> TdcaModel:
    """Train the shared task-discriminant projection on every band.

    Each trial becomes a delay-augmented matrix concatenated with its
    projection onto the span of the stimulus template rows (orthonormal
    basis from QR of Y_t^T); the discriminant directions maximize
    between-class scatter against within-class scatter (ridge 1e-6 * trace
    on the within matrix). Pass refs=None to disable reference projection.
    """
    x_bands = np.asarray(x_bands, dtype=np.float64)
    if x_bands.ndim != 4:
        raise ToolkitError("invalid-arguments", "x_bands must be (Nb, Nt, Nc, Ns)")
    if n_delays < 0:
        raise ToolkitError("invalid-arguments", f"n_delays must be >= 0, got {n_delays}")
    n_bands, n_trials, n_c, n_s = x_bands.shape
    y = check_labels(y, n_trials)
    classes = np.unique(y)
    n_f = classes.shape[0]
    for t in classes:
        if np.sum(y == t) < 2:
            raise ToolkitError(
                "insufficient-trials", f"class {t} has {np.sum(y == t)} trial(s), need >= 2")
    width = n_s - n_delays
    bases = None
    if refs is not None:
        if len(refs) != n_f:
            raise ToolkitError("dim-mismatch", f"{len(refs)} templates for {n_f} classes")
        if width < refs[0].data.shape[0]:
            raise ToolkitError(
                "invalid-arguments",
                f"need Ns - l >= 2*Nh ({refs[0].data.shape[0]}), got {width}")
        bases = np.stack([
            linalg.qr(ref.data[:, :width].T, mode="economic")[0] for ref in refs
        ])  # (Nf, width, 2Nh)
    dim = (n_delays + 1) * n_c
    if n_components < 1 or n_components > dim:
        raise ToolkitError("invalid-arguments", f"n_components must be in [1, {dim}]")
    feat_width = width if bases is None else 2 * width
    directions = np.zeros((n_bands, dim, n_components))
    centers = np.zeros((n_bands, n_f, n_components, feat_width))
    for m in range(n_bands):
        feats = np.empty((n_trials, dim, feat_width))
        for i in range(n_trials):
            basis = None if bases is None else bases[np.searchsorted(classes, y[i])]
            feats[i] = _tdca_feature(x_bands[m, i], n_delays, basis)
        class_means = np.stack([feats[y == t].mean(axis=0) for t in classes])
        grand = feats.mean(axis=0)
        s_between = np.zeros((dim, dim))
        s_within = np.zeros((dim, dim))
        for ti, t in enumerate(classes):
            diff = class_means[ti] - grand
            s_between += np.sum(y == t) * diff @ diff.T
            for f in feats[y == t]:
                dev = f - class_means[ti]
                s_within += dev @ dev.T
        ridge = 1e-6 * np.trace(s_within) / dim
        if ridge <= 0:  # identical trials: anchor the ridge on the between scatter
            ridge = 1e-12 * max(1.0, np.trace(s_between) / dim)
        s_within = s_within + ridge * np.eye(dim)
        vals, vecs = linalg.eigh(s_within)
        if vals[0] <= 0:
            raise ToolkitError("degenerate-scatter", "within-class scatter not invertible")
        whiten = (vecs * (vals ** -0.5)) @ vecs.T
        mat = whiten @ s_between @ whiten
        mat = 0.5 * (mat + mat.T)
        _, mvecs = linalg.eigh(mat)
        top = whiten @ mvecs[:, -n_components:][:, ::-1]
        ortho, _ = linalg.qr(top, mode="economic")  # orthonormal, same span
        for k in range(n_components):  # deterministic sign convention
            if ortho[np.argmax(np.abs(ortho[:, k])), k] < 0:
                ortho[:, k] = -ortho[:, k]
        directions[m] = ortho
        for ti in range(n_f):
            centers[m, ti] = ortho.T @ class_means[ti]
    return TdcaModel(directions, centers, bases, n_delays)


def tdca_score(x_bands: ndarray, model: TdcaModel, weights) -> ScoreVector:
    """TDCA score of one trial: weighted Pearson of projected features vs centers."""
    x_bands = check_band_tensor(x_bands)
    weights = np.asarray(weights, dtype=np.float64)
    if x_bands.shape[0] != model.n_bands or weights.shape[0] != model.n_bands:
        raise ToolkitError(
            "dim-mismatch",
            f"model has {model.n_bands} bands, got tensor {x_bands.shape[0]} / "
            f"weights {weights.shape[0]}")
    n_f = model.n_classes
    scores = np.zeros(n_f)
    for m in range(model.n_bands):
        w = model.directions[m]
        for t in range(n_f):
            basis = None if model.bases is None else model.bases[t]
            feat = w.T @ _tdca_feature(x_bands[m], model.n_delays, basis)
            scores[t] += weights[m] * _pearson_flat(feat, model.centers[m, t])
    return ScoreVector(scores, "tdca")


# ---------------------------------------------------------------------------
# Model serialization (tensor bundle + JSON header) for harness caching


def save_trca_model(prefix, model: TrcaModel) -> None:
    from .io import save_tensor_bundle
    save_tensor_bundle(prefix, {"filters": model.filters, "templates": model.templates},
                       meta={"kind": "trca"})


def load_trca_model(prefix) -> TrcaModel:
    from .io import load_tensor_bundle
    tensors, meta = load_tensor_bundle(prefix)
    if meta.get("kind") != "trca":
        raise ToolkitError("invalid-format", f"{prefix} is not a trca model bundle")
    return TrcaModel(tensors["filters"], tensors["templates"])


def save_tdca_model(prefix, model: TdcaModel) -> None:
    from .io import save_tensor_bundle
    tensors = {"directions": model.directions, "centers": model.centers}
    if model.bases is not None:
        tensors["bases"] = model.bases
    save_tensor_bundle(prefix, tensors,
                       meta={"kind": "tdca", "n_delays": model.n_delays,
                             "projection": model.bases is not None})


def load_tdca_model(prefix) -> TdcaModel:
    from .io import load_tensor_bundle
    tensors, meta = load_tensor_bundle(prefix)
    if meta.get("kind") != "tdca":
        raise ToolkitError("invalid-format", f"{prefix} is not a tdca model bundle")
    bases = tensors.get("bases") if meta.get("projection") else None
    return TdcaModel(tensors["directions"], tensors["centers"], bases,
                     int(meta["n_delays"]))


# ---------------------------------------------------------------------------
# Estimator wrappers


class FBCCA(BaseEstimator, ClassifierMixin):
    """Calibration-free filter-bank CCA detector.

    Parameters
    ----------
    stimuli : sequence of StimulusSpec
    sampling_rate : float
    n_harmonics : int (default: 5)
    filter_bank : FilterBankSpec (default: three standard sub-bands)
    """

    def __init__(self, stimuli, sampling_rate, n_harmonics: int = 5,
                 filter_bank: Optional[FilterBankSpec] = None):
        self.stimuli = stimuli
        self.sampling_rate = sampling_rate
        self.n_harmonics = n_harmonics
        self.filter_bank = filter_bank

    def fit(self, X=None, y=None):
        """No-op (calibration-free); kept for API symmetry."""
        return self

    def _bank(self) -> FilterBankSpec:
        return self.filter_bank or default_filter_bank(self.sampling_rate)

    def decision_function(self, X) -> ndarray:
        X = check_trial_array(X)
        bank = self._bank()
        refs = template_bank(self.stimuli, self.n_harmonics, self.sampling_rate, X.shape[-1])
        out = np.empty((X.shape[0], len(refs)))
        for i, trial in enumerate(X):
            ep = EpochTensor(trial, self.sampling_rate)
            bands = filterbank_decompose(ep, bank)
            out[i] = fbcca_score(bands, refs, bank.weights).scores
        return out

    def predict(self, X) -> ndarray:
        return np.argmax(self.decision_function(X), axis=1)


class _BandedClassifier(BaseEstimator, ClassifierMixin):
    """Shared plumbing: decompose raw trials into the filter bank."""

    def _bank(self) -> FilterBankSpec:
        return self.filter_bank or default_filter_bank(self.sampling_rate)

    def _decompose(self, X) -> ndarray:
        X = check_trial_array(X)
        bank = self._bank()
        out = np.empty((bank.n_bands, X.shape[0], X.shape[1], X.shape[2]))
        for i, trial in enumerate(X):
            ep = EpochTensor(trial, self.sampling_rate)
            out[:, i] = filterbank_decompose(ep, bank)
        return out

    def predict(self, X) -> ndarray:
        return np.argmax(self.decision_function(X), axis=1)


class ETRCA(_BandedClassifier):
    """Ensemble TRCA classifier over a filter bank.

    Parameters
    ----------
    sampling_rate : float
    filter_bank : FilterBankSpec (default: three standard sub-bands)
    """

    def __init__(self, sampling_rate, filter_bank: Optional[FilterBankSpec] = None):
        self.sampling_rate = sampling_rate
        self.filter_bank = filter_bank

    def fit(self, X, y):
        """X: (n_trials, n_channels, n_samples) raw trials; y: class labels."""
        bands = self._decompose(X)
        y = check_labels(y, bands.shape[1])
        self.classes_ = np.unique(y)
        self.model_ = trca_train(bands, y)
        return self

    def decision_function(self, X) -> ndarray:
        bands = self._decompose(X)
        weights = np.asarray(self._bank().weights)
        return np.stack([
            etrca_score(bands[:, i], self.model_, weights).scores
            for i in range(bands.shape[1])
        ])


class TDCA(_BandedClassifier):
    """Task-discriminant component analysis classifier over a filter bank.

    Parameters
    ----------
    stimuli : sequence of StimulusSpec (reference projection; None disables)
    sampling_rate : float
    n_harmonics : int (default: 5)
    n_delays : int (default: 5)
    n_components : int (default: 8)
    filter_bank : FilterBankSpec (default: three standard sub-bands)
    """

    def __init__(self, stimuli, sampling_rate, n_harmonics: int = 5,
                 n_delays: int = 5, n_components: int = 8,
                 filter_bank: Optional[FilterBankSpec] = None):
        self.stimuli = stimuli
        self.sampling_rate = sampling_rate
        self.n_harmonics = n_harmonics
        self.n_delays = n_delays
        self.n_components = n_components
        self.filter_bank = filter_bank

    def fit(self, X, y):
        bands = self._decompose(X)
        y = check_labels(y, bands.shape[1])
        self.classes_ = np.unique(y)
        refs = None
        if self.stimuli is not None:
            refs = template_bank(
                self.stimuli, self.n_harmonics, self.sampling_rate, bands.shape[-1])
        self.model_ = tdca_train(bands, y, refs, self.n_delays, self.n_components)
        return self

    def decision_function(self, X) -> ndarray:
        bands = self._decompose(X)
        weights = np.asarray(self._bank().weights)
        return np.stack([
            tdca_score(bands[:, i], self.model_, weights).scores
            for i in range(bands.shape[1])
        ])
