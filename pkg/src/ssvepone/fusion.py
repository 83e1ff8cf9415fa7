"""Score-level fusion: min-max normalize each decoder's scores, sum, argmax."""

from dataclasses import dataclass

import numpy as np

from .decoders import ScoreVector
from .errors import ToolkitError

KNOWN_MEMBERS = ("net", "etrca", "tdca")


@dataclass(frozen=True)
class FusionConfig:
    """Which decoders vote. Ties break to the lowest class index."""

    members: tuple = KNOWN_MEMBERS

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ToolkitError("invalid-arguments", "fusion needs at least one member")
        unknown = [m for m in members if m not in KNOWN_MEMBERS]
        if unknown:
            raise ToolkitError(
                "invalid-arguments",
                f"unknown fusion members {unknown}; expected a subset of {KNOWN_MEMBERS}")
        object.__setattr__(self, "members", members)


def minmax_normalize(s: ScoreVector) -> ScoreVector:
    """(s - min) / (max - min); a constant vector maps to all zeros (abstain)."""
    scores = s.scores
    lo = scores.min()
    hi = scores.max()
    if hi == lo:
        return ScoreVector(np.zeros_like(scores), s.decoder_id)
    return ScoreVector((scores - lo) / (hi - lo), s.decoder_id)


def fuse_and_decide(score_sets, cfg: FusionConfig) -> tuple:
    """Sum the members' normalized scores; returns (predicted class, fused ScoreVector)."""
    by_id = {s.decoder_id: s for s in score_sets}
    missing = [m for m in cfg.members if m not in by_id]
    if missing:
        raise ToolkitError("invalid-arguments", f"missing member scores: {missing}")
    lengths = {len(by_id[m]) for m in cfg.members}
    if len(lengths) != 1:
        raise ToolkitError("length-mismatch", f"score lengths differ: {sorted(lengths)}")
    fused = np.zeros(lengths.pop())
    for m in cfg.members:
        fused += minmax_normalize(by_id[m]).scores
    return int(np.argmax(fused)), ScoreVector(fused, "fused")
