"""MAT-file reading for both v7 (scipy) and v7.3 (HDF5) distributions."""

from pathlib import Path

import h5py
import numpy as np
from scipy import io as sio


def load_array(path, key: str, mat73: bool = False) -> np.ndarray:
    """Load one numeric array from a MAT file.

    `key` may be a slash path into v7.3 struct groups ("data/EEG"). v7.3
    arrays come back in MATLAB dimension order (HDF5 stores them reversed).
    """
    path = Path(path)
    if mat73:
        with h5py.File(path, "r") as fh:
            node = fh[key]
            arr = np.asarray(node)
        return arr.transpose(range(arr.ndim)[::-1])
    mat = sio.loadmat(path)
    head = key.split("/")[0]
    if head not in mat:
        raise KeyError(f"{path}: variable {head!r} not found")
    node = mat[head]
    for part in key.split("/")[1:]:
        node = node[part][0, 0]
    return np.asarray(node)


def try_load_array(path, key: str, mat73: bool = False):
    try:
        return load_array(path, key, mat73)
    except (KeyError, OSError, ValueError):
        return None
