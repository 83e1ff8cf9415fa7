"""Input validation helpers shared by the estimators and functional ops."""

import numpy as np
from numpy import ndarray

from .errors import ToolkitError


def check_trial_array(X, name: str = "X") -> ndarray:
    """Coerce to a float64 (n_trials, n_channels, n_samples) array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[np.newaxis]
    if X.ndim != 3:
        raise ToolkitError(
            "invalid-arguments",
            f"{name} must be (n_trials, n_channels, n_samples), got ndim={X.ndim}")
    if not np.isfinite(X).all():
        raise ToolkitError("invalid-arguments", f"{name} contains non-finite values")
    return X


def check_band_tensor(X, name: str = "bands") -> ndarray:
    """Coerce to a float64 (n_bands, n_channels, n_samples) array."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 3:
        raise ToolkitError(
            "invalid-arguments",
            f"{name} must be (n_bands, n_channels, n_samples), got ndim={X.ndim}")
    return X


def check_labels(y, n_trials: int, name: str = "y") -> ndarray:
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != n_trials:
        raise ToolkitError(
            "invalid-arguments",
            f"{name} must be 1-d with {n_trials} entries, got shape {y.shape}")
    return y.astype(np.int64)


def check_matrix(a, name: str = "matrix") -> ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ToolkitError("invalid-arguments", f"{name} must be 2-d, got ndim={a.ndim}")
    return a
