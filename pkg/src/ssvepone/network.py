"""Dual-domain fusion network with manual forward/backward passes.

Three sub-networks share one topology: f1 reads the filter-bank
decomposition of the raw trial, f2 reads the stack of per-stimulus
reference-domain projections, and fm fuses their intermediate feature maps.
Each branch is: 1x1 depth-collapsing conv -> spatial conv (120 filters) ->
1x2 stride-2 temporal conv -> 1x10 temporal conv -> flatten -> affine head.
The fusion branch convolves the concatenated stage-2 maps, then re-fuses
with the stage-3 and stage-4 maps before its own head. Training minimizes
the sum of label-smoothed cross-entropies of the three heads plus their
summed logits; gradients are exact reverse-mode derivatives computed here
(no autodiff framework), optimized with Adam.

All tensors are float64. Every source of randomness (init, shuffling,
dropout) flows through one seeded generator, so training is bit-reproducible
on a fixed machine configuration.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy import ndarray
from numpy.lib.stride_tricks import sliding_window_view
from sklearn.base import BaseEstimator, ClassifierMixin

from .decoders import ScoreVector
from .errors import ToolkitError

ALL_PATHS = ("f1", "f2", "fm")


@dataclass(frozen=True)
class NetConfig:
    """Architecture hyperparameters; shapes are derived from these."""

    n_classes: int
    n_channels: int
    n_harmonics: int
    n_samples: int
    n_bands: int = 3
    n_filters: int = 120
    kernel_short: int = 2
    stride: int = 2
    kernel_long: int = 10
    dropout_spatial: float = 0.1
    dropout_temporal: float = 0.6
    label_smoothing: float = 0.01
    paths: tuple = ALL_PATHS
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.n_classes < 2 or self.n_channels < 1 or self.n_harmonics < 1:
            raise ToolkitError("invalid-config", "bad class/channel/harmonic counts")
        if self.n_bands < 1 or self.n_filters < 1:
            raise ToolkitError("invalid-config", "bad band/filter counts")
        if not 0 <= self.label_smoothing < 1:
            raise ToolkitError("invalid-config", "label_smoothing must be in [0, 1)")
        for rate in (self.dropout_spatial, self.dropout_temporal):
            if not 0 <= rate < 1:
                raise ToolkitError("invalid-config", "dropout rates must be in [0, 1)")
        bad = set(self.paths) - set(ALL_PATHS)
        if bad or not self.paths:
            raise ToolkitError("invalid-config", f"paths must be a non-empty subset, got {self.paths}")
        if "fm" in self.paths and not {"f1", "f2"} <= set(self.paths):
            raise ToolkitError("invalid-config", "fm requires both f1 and f2")
        if self.t_long < 1:
            raise ToolkitError(
                "invalid-config",
                f"temporal dim underflows: {self.n_samples} samples -> {self.t_long}")

    @property
    def t_short(self) -> int:
        """Temporal length after the 1x2 stride-2 conv."""
        return (self.n_samples - self.kernel_short) // self.stride + 1

    @property
    def t_long(self) -> int:
        """Temporal length after the 1x10 conv."""
        return self.t_short - self.kernel_long + 1

    @property
    def stack_rows(self) -> int:
        return 2 * self.n_harmonics


@dataclass(frozen=True)
class NetOutputs:
    """Per-head logits plus their elementwise sum (batch, n_classes)."""

    logits_f1: Optional[ndarray]
    logits_f2: Optional[ndarray]
    logits_fm: Optional[ndarray]
    logits_sum: ndarray

    def head(self, name: str) -> Optional[ndarray]:
        return getattr(self, f"logits_{name}")


def _branch_specs(cfg: NetConfig) -> dict:
    """Tensor shapes per parameter name, in creation order."""
    f = cfg.n_filters
    specs = {}
    if "f1" in cfg.paths:
        specs.update({
            "f1_mix_w": (cfg.n_bands,), "f1_mix_b": (),
            "f1_sp_w": (f, cfg.n_channels), "f1_sp_b": (f,),
            "f1_t1_w": (f, f, cfg.kernel_short), "f1_t1_b": (f,),
            "f1_t2_w": (f, f, cfg.kernel_long), "f1_t2_b": (f,),
            "f1_head_w": (cfg.n_classes, f * cfg.t_long), "f1_head_b": (cfg.n_classes,),
        })
    if "f2" in cfg.paths:
        specs.update({
            "f2_mix_w": (cfg.n_classes,), "f2_mix_b": (),
            "f2_sp_w": (f, cfg.stack_rows), "f2_sp_b": (f,),
            "f2_t1_w": (f, f, cfg.kernel_short), "f2_t1_b": (f,),
            "f2_t2_w": (f, f, cfg.kernel_long), "f2_t2_b": (f,),
            "f2_head_w": (cfg.n_classes, f * cfg.t_long), "f2_head_b": (cfg.n_classes,),
        })
    if "fm" in cfg.paths:
        specs.update({
            "fm_t1_w": (f, 2 * f, cfg.kernel_short), "fm_t1_b": (f,),
            "fm_t2_w": (f, 3 * f, cfg.kernel_long), "fm_t2_b": (f,),
            "fm_head_w": (cfg.n_classes, 3 * f * cfg.t_long), "fm_head_b": (cfg.n_classes,),
        })
    return specs


def _fan_in(name: str, shape: tuple) -> int:
    if name.endswith("head_w"):
        return shape[1]
    if name.endswith("mix_w"):
        return shape[0]
    if name.endswith("sp_w"):
        return shape[1]
    return shape[1] * shape[2]  # temporal convs: in_channels * kernel


def net_init(cfg: NetConfig, rng: Optional[np.random.Generator] = None) -> dict:
    """Seeded uniform init scaled by 1/sqrt(fan-in); biases zero."""
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    params = {}
    for name, shape in _branch_specs(cfg).items():
        if name.endswith("_b"):
            params[name] = np.zeros(shape)
        else:
            scale = 1.0 / np.sqrt(_fan_in(name, shape))
            params[name] = rng.uniform(-scale, scale, size=shape)
    return params


def parameter_count(cfg: NetConfig) -> int:
    return sum(int(np.prod(shape)) if shape else 1 for shape in _branch_specs(cfg).values())


def flatten_params(params: dict) -> ndarray:
    """Flat view of all parameters (sorted by name) for optimizer-level tests."""
    return np.concatenate([params[k].ravel() for k in sorted(params)])


def unflatten_params(vec: ndarray, like: dict) -> dict:
    out = {}
    pos = 0
    for k in sorted(like):
        size = like[k].size
        out[k] = vec[pos:pos + size].reshape(like[k].shape).copy()
        pos += size
    return out


# ---------------------------------------------------------------------------
# Layer primitives


def _conv_time(x: ndarray, w: ndarray, b: ndarray, stride: int):
    """1-d conv over the last axis: x (B,C,T), w (F,C,k) -> (B,F,O)."""
    k = w.shape[-1]
    win = sliding_window_view(x, k, axis=2)[:, :, ::stride, :]  # (B,C,O,k)
    out = np.einsum("bcok,fck->bfo", win, w, optimize=True) + b[None, :, None]
    return out, win


def _conv_time_backward(dout: ndarray, win: ndarray, x_shape: tuple,
                        w: ndarray, stride: int):
    dw = np.einsum("bcok,bfo->fck", win, dout, optimize=True)
    db = dout.sum(axis=(0, 2))
    n_b, n_c, n_t = x_shape
    k = w.shape[-1]
    n_o = dout.shape[-1]
    dx = np.zeros((n_b, n_c, n_t))
    for j in range(k):
        dx[:, :, j:j + stride * n_o:stride] += np.einsum(
            "bfo,fc->bco", dout, w[:, :, j], optimize=True)
    return dx, dw, db


def _dropout(x: ndarray, rate: float, train: bool, rng):
    if not train or rate <= 0:
        return x, None
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


# ---------------------------------------------------------------------------
# Forward


def _check_inputs(cfg: NetConfig, x1, x2):
    if "f1" in cfg.paths:
        if x1 is None:
            raise ToolkitError("shape-mismatch", "f1 path active but no band input given")
        want = (cfg.n_bands, cfg.n_channels, cfg.n_samples)
        if tuple(x1.shape[1:]) != want:
            raise ToolkitError("shape-mismatch", f"band input {x1.shape[1:]} != {want}")
    if "f2" in cfg.paths:
        if x2 is None:
            raise ToolkitError("shape-mismatch", "f2 path active but no transform input given")
        want = (cfg.n_classes, cfg.stack_rows, cfg.n_samples)
        if tuple(x2.shape[1:]) != want:
            raise ToolkitError("shape-mismatch", f"transform input {x2.shape[1:]} != {want}")


def _branch_forward(params: dict, prefix: str, x: ndarray, cfg: NetConfig,
                    train: bool, rng) -> dict:
    n_b = x.shape[0]
    z0 = np.einsum("bdht,d->bht", x, params[f"{prefix}_mix_w"], optimize=True) \
        + params[f"{prefix}_mix_b"]
    z1 = np.einsum("bht,fh->bft", z0, params[f"{prefix}_sp_w"], optimize=True) \
        + params[f"{prefix}_sp_b"][None, :, None]
    z1d, m1 = _dropout(z1, cfg.dropout_spatial, train, rng)
    z2, win2 = _conv_time(z1d, params[f"{prefix}_t1_w"], params[f"{prefix}_t1_b"], cfg.stride)
    z2d, m2 = _dropout(z2, cfg.dropout_temporal, train, rng)
    z3, win3 = _conv_time(z2d, params[f"{prefix}_t2_w"], params[f"{prefix}_t2_b"], 1)
    logits = z3.reshape(n_b, -1) @ params[f"{prefix}_head_w"].T + params[f"{prefix}_head_b"]
    return {"x": x, "z0": z0, "z1d": z1d, "m1": m1, "win2": win2,
            "z2d": z2d, "m2": m2, "win3": win3, "z3": z3, "logits": logits}


def net_forward(params: dict, cfg: NetConfig, x_bands: Optional[ndarray],
                x_stacks: Optional[ndarray], train_mode: bool = False,
                rng: Optional[np.random.Generator] = None,
                want_cache: bool = False):
    """Run the network; returns NetOutputs (and the cache if requested).

    Dropout is active only in train mode; masks are drawn from `rng` in a
    fixed order (f1, f2, fm) and stored in the cache for the backward pass.
    """
    if train_mode and (cfg.dropout_spatial > 0 or cfg.dropout_temporal > 0) and rng is None:
        raise ToolkitError("invalid-arguments", "train_mode with dropout needs an rng")
    x1 = None if x_bands is None else np.asarray(x_bands, dtype=np.float64)
    x2 = None if x_stacks is None else np.asarray(x_stacks, dtype=np.float64)
    _check_inputs(cfg, x1, x2)
    cache = {"cfg": cfg}
    logits = {}
    if "f1" in cfg.paths:
        cache["f1"] = _branch_forward(params, "f1", x1, cfg, train_mode, rng)
        logits["f1"] = cache["f1"]["logits"]
    if "f2" in cfg.paths:
        cache["f2"] = _branch_forward(params, "f2", x2, cfg, train_mode, rng)
        logits["f2"] = cache["f2"]["logits"]
    if "fm" in cfg.paths:
        b1, b2 = cache["f1"], cache["f2"]
        n_b = b1["z1d"].shape[0]
        cat1 = np.concatenate([b1["z1d"], b2["z1d"]], axis=1)
        a, win_a = _conv_time(cat1, params["fm_t1_w"], params["fm_t1_b"], cfg.stride)
        ad, m_a = _dropout(a, cfg.dropout_temporal, train_mode, rng)
        cat2 = np.concatenate([b1["z2d"], b2["z2d"], ad], axis=1)
        fused, win_b = _conv_time(cat2, params["fm_t2_w"], params["fm_t2_b"], 1)
        cat3 = np.concatenate([b1["z3"], b2["z3"], fused], axis=1)
        logits["fm"] = cat3.reshape(n_b, -1) @ params["fm_head_w"].T + params["fm_head_b"]
        cache["fm"] = {"cat1": cat1, "win_a": win_a, "m_a": m_a, "ad": ad,
                       "cat2": cat2, "win_b": win_b, "cat3": cat3,
                       "logits": logits["fm"]}
    logits_sum = sum(logits[h] for h in cfg.paths if h in logits)
    outputs = NetOutputs(
        logits_f1=logits.get("f1"),
        logits_f2=logits.get("f2"),
        logits_fm=logits.get("fm"),
        logits_sum=logits_sum,
    )
    if want_cache:
        return outputs, cache
    return outputs


# ---------------------------------------------------------------------------
# Loss


def _smoothed_ce(logits: ndarray, labels: ndarray, eps: float):
    """Mean label-smoothed cross-entropy over the batch and its logit gradient."""
    n_b, n_classes = logits.shape
    shifted = logits - logits.max(axis=1, keepdims=True)
    logp = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    target = np.full_like(logits, eps / n_classes)
    target[np.arange(n_b), labels] += 1.0 - eps
    loss = float(-(target * logp).sum() / n_b)
    dlogits = (np.exp(logp) - target) / n_b
    return loss, dlogits


def _head_losses(outputs: NetOutputs, cfg: NetConfig, labels: ndarray):
    """Per-head and summed-logit losses plus gradients w.r.t. each head's logits."""
    labels = np.asarray(labels)
    if labels.min() < 0 or labels.max() >= cfg.n_classes:
        raise ToolkitError("invalid-label", f"labels must be in [0, {cfg.n_classes})")
    eps = cfg.label_smoothing
    heads = [h for h in cfg.paths]
    if len(heads) == 1:
        loss, dlogits = _smoothed_ce(outputs.head(heads[0]), labels, eps)
        return loss, {heads[0]: dlogits}
    total = 0.0
    dlogits = {}
    for h in heads:
        loss_h, d_h = _smoothed_ce(outputs.head(h), labels, eps)
        total += loss_h
        dlogits[h] = d_h
    loss_sum, d_sum = _smoothed_ce(outputs.logits_sum, labels, eps)
    total += loss_sum
    for h in heads:
        dlogits[h] = dlogits[h] + d_sum
    return total, dlogits


def net_loss(outputs: NetOutputs, labels, cfg: NetConfig) -> float:
    """Sum of the label-smoothed cross-entropies (per-head terms plus the
    summed-logit term), averaged over the batch."""
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    loss, _ = _head_losses(outputs, cfg, labels)
    return loss


# ---------------------------------------------------------------------------
# Backward


def _branch_backward(params: dict, prefix: str, branch: dict, dlogits: ndarray,
                     cfg: NetConfig, grads: dict,
                     dz1d_extra: Optional[ndarray] = None,
                     dz2d_extra: Optional[ndarray] = None,
                     dz3_extra: Optional[ndarray] = None) -> None:
    n_b = dlogits.shape[0]
    z3 = branch["z3"]
    grads[f"{prefix}_head_w"] = dlogits.T @ z3.reshape(n_b, -1)
    grads[f"{prefix}_head_b"] = dlogits.sum(axis=0)
    dz3 = (dlogits @ params[f"{prefix}_head_w"]).reshape(z3.shape)
    if dz3_extra is not None:
        dz3 = dz3 + dz3_extra
    dz2d, dw, db = _conv_time_backward(
        dz3, branch["win3"], branch["z2d"].shape, params[f"{prefix}_t2_w"], 1)
    grads[f"{prefix}_t2_w"] = dw
    grads[f"{prefix}_t2_b"] = db
    if dz2d_extra is not None:
        dz2d = dz2d + dz2d_extra
    if branch["m2"] is not None:
        dz2d = dz2d * branch["m2"]
    dz1d, dw, db = _conv_time_backward(
        dz2d, branch["win2"], branch["z1d"].shape, params[f"{prefix}_t1_w"], cfg.stride)
    grads[f"{prefix}_t1_w"] = dw
    grads[f"{prefix}_t1_b"] = db
    if dz1d_extra is not None:
        dz1d = dz1d + dz1d_extra
    if branch["m1"] is not None:
        dz1d = dz1d * branch["m1"]
    grads[f"{prefix}_sp_w"] = np.einsum("bht,bft->fh", branch["z0"], dz1d, optimize=True)
    grads[f"{prefix}_sp_b"] = dz1d.sum(axis=(0, 2))
    dz0 = np.einsum("bft,fh->bht", dz1d, params[f"{prefix}_sp_w"], optimize=True)
    grads[f"{prefix}_mix_w"] = np.einsum("bdht,bht->d", branch["x"], dz0, optimize=True)
    grads[f"{prefix}_mix_b"] = np.array(dz0.sum())


def net_backward(params: dict, cfg: NetConfig, cache: dict, outputs: NetOutputs,
                 labels) -> tuple:
    """Exact gradients of the mean batch loss for every parameter."""
    labels = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    loss, dlogits = _head_losses(outputs, cfg, labels)
    grads = {}
    f = cfg.n_filters
    d_f1 = {"z1d": None, "z2d": None, "z3": None}
    d_f2 = {"z1d": None, "z2d": None, "z3": None}
    if "fm" in cfg.paths:
        fm = cache["fm"]
        d_fm = dlogits["fm"]
        n_b = d_fm.shape[0]
        cat3 = fm["cat3"]
        grads["fm_head_w"] = d_fm.T @ cat3.reshape(n_b, -1)
        grads["fm_head_b"] = d_fm.sum(axis=0)
        dcat3 = (d_fm @ params["fm_head_w"]).reshape(cat3.shape)
        d_f1["z3"] = dcat3[:, :f]
        d_f2["z3"] = dcat3[:, f:2 * f]
        dfused = dcat3[:, 2 * f:]
        dcat2, dw, db = _conv_time_backward(
            dfused, fm["win_b"], fm["cat2"].shape, params["fm_t2_w"], 1)
        grads["fm_t2_w"] = dw
        grads["fm_t2_b"] = db
        d_f1["z2d"] = dcat2[:, :f]
        d_f2["z2d"] = dcat2[:, f:2 * f]
        dad = dcat2[:, 2 * f:]
        if fm["m_a"] is not None:
            dad = dad * fm["m_a"]
        dcat1, dw, db = _conv_time_backward(
            dad, fm["win_a"], fm["cat1"].shape, params["fm_t1_w"], cfg.stride)
        grads["fm_t1_w"] = dw
        grads["fm_t1_b"] = db
        d_f1["z1d"] = dcat1[:, :f]
        d_f2["z1d"] = dcat1[:, f:]
    if "f1" in cfg.paths:
        _branch_backward(params, "f1", cache["f1"], dlogits["f1"], cfg, grads,
                         dz1d_extra=d_f1["z1d"], dz2d_extra=d_f1["z2d"],
                         dz3_extra=d_f1["z3"])
    if "f2" in cfg.paths:
        _branch_backward(params, "f2", cache["f2"], dlogits["f2"], cfg, grads,
                         dz1d_extra=d_f2["z1d"], dz2d_extra=d_f2["z2d"],
                         dz3_extra=d_f2["z3"])
    return loss, grads


def net_grad(params: dict, cfg: NetConfig, x_bands, x_stacks, labels,
             train_mode: bool = False, rng=None) -> tuple:
    """Forward + backward in one step; dropout masks are shared between the two."""
    outputs, cache = net_forward(params, cfg, x_bands, x_stacks,
                                 train_mode=train_mode, rng=rng, want_cache=True)
    return net_backward(params, cfg, cache, outputs, labels)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    """Bias-corrected first/second-moment accumulators, one slot per tensor."""

    m: dict
    v: dict
    step: int
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def create(cls, params: dict, learning_rate: float = 2e-4, **kw) -> "AdamState":
        return cls(m={k: np.zeros_like(p) for k, p in params.items()},
                   v={k: np.zeros_like(p) for k, p in params.items()},
                   step=0, learning_rate=learning_rate, **kw)


def adam_step(params: dict, grads: dict, state: AdamState) -> tuple:
    """Standard bias-corrected Adam update (in place); returns (params, state)."""
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1 ** state.step
    c2 = 1.0 - b2 ** state.step
    for k, p in params.items():
        g = grads[k]
        state.m[k] = b1 * state.m[k] + (1 - b1) * g
        state.v[k] = b2 * state.v[k] + (1 - b2) * g * g
        p -= state.learning_rate * (state.m[k] / c1) / (np.sqrt(state.v[k] / c2) + state.eps)
    return params, state


# ---------------------------------------------------------------------------
# Training loop and inference


def train_network(x_bands, x_stacks, labels, cfg: NetConfig, epochs: int = 100,
                  batch_size: int = 32, learning_rate: float = 2e-4) -> tuple:
    """Train on source-subject trials; returns (params, per-epoch mean loss).

    Shuffling, init and dropout all derive from cfg.seed.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.shape[0]
    if n == 0:
        raise ToolkitError("empty-source-set", "no training trials")
    x1 = None if x_bands is None else np.asarray(x_bands, dtype=np.float64)
    x2 = None if x_stacks is None else np.asarray(x_stacks, dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    params = net_init(cfg, rng)
    state = AdamState.create(params, learning_rate)
    history = []
    for _ in range(epochs):
        perm = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            loss, grads = net_grad(
                params, cfg,
                None if x1 is None else x1[idx],
                None if x2 is None else x2[idx],
                labels[idx], train_mode=True, rng=rng)
            adam_step(params, grads, state)
            total += loss * idx.shape[0]
        history.append(total / n)
    return params, history


def net_infer(params: dict, cfg: NetConfig, x_bands, x_stacks) -> ndarray:
    """Deterministic inference (dropout off); returns summed logits (n, n_classes)."""
    outputs = net_forward(params, cfg, x_bands, x_stacks, train_mode=False)
    return outputs.logits_sum


def infer_scores(params: dict, cfg: NetConfig, x_bands, x_stacks) -> ScoreVector:
    """Single-trial ScoreVector from the summed logits."""
    x1 = None if x_bands is None else np.asarray(x_bands)[None]
    x2 = None if x_stacks is None else np.asarray(x_stacks)[None]
    return ScoreVector(net_infer(params, cfg, x1, x2)[0], "net")


# ---------------------------------------------------------------------------
# Estimator wrapper


class DualDomainNet(BaseEstimator, ClassifierMixin):
    """Sklearn-style wrapper around the dual-domain network.

    X is a pair (bands, stacks): bands (n, n_bands, n_channels, n_samples)
    and stacks (n, n_classes, 2*n_harmonics, n_samples); either may be None
    when the corresponding path is disabled via `paths`.
    """

    def __init__(self, n_filters: int = 120, dropout_spatial: float = 0.1,
                 dropout_temporal: float = 0.6, label_smoothing: float = 0.01,
                 epochs: int = 100, batch_size: int = 32,
                 learning_rate: float = 2e-4, seed: int = 0,
                 paths: tuple = ALL_PATHS):
        self.n_filters = n_filters
        self.dropout_spatial = dropout_spatial
        self.dropout_temporal = dropout_temporal
        self.label_smoothing = label_smoothing
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.seed = seed
        self.paths = paths

    def _config(self, x_bands, x_stacks, n_classes: int) -> NetConfig:
        if x_stacks is not None:
            n_classes = x_stacks.shape[1]
            n_harmonics = x_stacks.shape[2] // 2
            n_samples = x_stacks.shape[3]
        elif x_bands is not None:
            n_harmonics = 1
            n_samples = x_bands.shape[3]
        else:
            raise ToolkitError("invalid-config", "need at least one input domain")
        n_bands = x_bands.shape[1] if x_bands is not None else 3
        n_channels = x_bands.shape[2] if x_bands is not None else 1
        return NetConfig(
            n_classes=n_classes, n_channels=n_channels, n_harmonics=n_harmonics,
            n_samples=n_samples, n_bands=n_bands, n_filters=self.n_filters,
            dropout_spatial=self.dropout_spatial, dropout_temporal=self.dropout_temporal,
            label_smoothing=self.label_smoothing, paths=tuple(self.paths), seed=self.seed)

    def fit(self, X, y):
        x_bands, x_stacks = X
        x_bands = None if x_bands is None else np.asarray(x_bands, dtype=np.float64)
        x_stacks = None if x_stacks is None else np.asarray(x_stacks, dtype=np.float64)
        n_classes = int(np.max(y)) + 1
        self.config_ = self._config(x_bands, x_stacks, n_classes)
        self.params_, self.history_ = train_network(
            x_bands, x_stacks, y, self.config_, epochs=self.epochs,
            batch_size=self.batch_size, learning_rate=self.learning_rate)
        return self

    def decision_function(self, X) -> ndarray:
        x_bands, x_stacks = X
        return net_infer(self.params_, self.config_, x_bands, x_stacks)

    def predict(self, X) -> ndarray:
        return np.argmax(self.decision_function(X), axis=1)
