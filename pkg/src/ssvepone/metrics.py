"""Accuracy-derived metrics."""

import numpy as np

from .errors import ToolkitError


def itr(m: int, p: float, t_select: float) -> float:
    """Information transfer rate in bits per minute.

    (log2 m + p log2 p + (1-p) log2((1-p)/(m-1))) * 60 / t_select, with the
    p = 0 and p = 1 limits taken analytically (0 * log 0 := 0). Negative
    theoretical values (below-chance accuracy) clamp to 0; |value| < 1e-12
    snaps to exactly 0 so the chance level p = 1/m reports zero.
    """
    if m < 2:
        raise ToolkitError("invalid-arguments", f"need m >= 2 classes, got {m}")
    if not t_select > 0:
        raise ToolkitError("invalid-arguments", f"t_select must be > 0, got {t_select}")
    if not 0.0 <= p <= 1.0:
        raise ToolkitError("invalid-arguments", f"accuracy must be in [0, 1], got {p}")
    if p == 1.0:
        bits = np.log2(m)
    elif p == 0.0:
        bits = np.log2(m) + np.log2(1.0 / (m - 1))
    else:
        bits = np.log2(m) + p * np.log2(p) + (1.0 - p) * np.log2((1.0 - p) / (m - 1))
    value = bits * 60.0 / t_select
    if abs(value) < 1e-12 or value < 0:
        return 0.0
    return float(value)
