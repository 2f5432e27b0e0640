"""Dual-path LSTM over the stacked (log envelope, carrier) sub-band matrix.

A time path runs a 3-layer LSTM along the frames, a frequency path runs a
3-layer LSTM along the rows; each is projected back to the input size. The
two results are stacked along the feature axis and a bidirectional LSTM over
time maps them to the output. Rows ``[:n_bands]`` of the output are an
additive log-envelope gain, rows ``[n_bands:]`` an additive carrier residual.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..container import ContainerFormatError, read_container, write_container
from ..exceptions import InvalidArgumentError, ShapeMismatchError
from .lstm import LstmStackParams, init_lstm_stack, lstm_backward, lstm_forward

CHECKPOINT_KIND = "dplstm-checkpoint"


@dataclass
class DplstmParams:
    """All weights of the dual-path model plus its hyper-parameters.

    ``norm_mean``/``norm_std`` standardise the log-envelope rows of the
    network input (one value per band); carriers are fed as they are.
    """

    arrays: dict
    hidden_size: int = 64
    n_bands: int = 64
    n_frames: int = 250
    time_layers: int = 3
    freq_layers: int = 3
    fusion_layers: int = 2
    norm_mean: np.ndarray = None
    norm_std: np.ndarray = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.norm_mean is None:
            self.norm_mean = np.zeros(self.n_bands)
        if self.norm_std is None:
            self.norm_std = np.ones(self.n_bands)
        self.norm_mean = np.asarray(self.norm_mean, dtype=np.float64)
        self.norm_std = np.asarray(self.norm_std, dtype=np.float64)

    @property
    def n_rows(self) -> int:
        return 2 * self.n_bands

    @property
    def time_path(self) -> LstmStackParams:
        return LstmStackParams("time", self.n_rows, self.hidden_size, self.time_layers,
                               False, self.arrays)

    @property
    def freq_path(self) -> LstmStackParams:
        return LstmStackParams("freq", self.n_frames, self.hidden_size, self.freq_layers,
                               False, self.arrays)

    @property
    def fusion(self) -> LstmStackParams:
        return LstmStackParams("fusion", 2 * self.n_rows, self.hidden_size, self.fusion_layers,
                               True, self.arrays)

    def hyperparameters(self) -> dict:
        return {
            "hidden_size": self.hidden_size, "n_bands": self.n_bands,
            "n_frames": self.n_frames, "time_layers": self.time_layers,
            "freq_layers": self.freq_layers, "fusion_layers": self.fusion_layers,
        }

    def copy(self) -> "DplstmParams":
        return DplstmParams({k: v.copy() for k, v in self.arrays.items()},
                            norm_mean=self.norm_mean.copy(), norm_std=self.norm_std.copy(),
                            meta=dict(self.meta), **self.hyperparameters())

    def astype(self, dtype) -> "DplstmParams":
        out = self.copy()
        out.arrays = {k: v.astype(dtype) for k, v in out.arrays.items()}
        return out

    def n_parameters(self) -> int:
        return sum(v.size for v in self.arrays.values())

    def save(self, path):
        tensors = dict(self.arrays)
        tensors["norm.mean"] = self.norm_mean
        tensors["norm.std"] = self.norm_std
        meta = {**self.meta, **self.hyperparameters()}
        return write_container(path, tensors, meta, kind=CHECKPOINT_KIND)

    @classmethod
    def load(cls, path, dtype=np.float64) -> "DplstmParams":
        tensors, meta, kind = read_container(path)
        if kind != CHECKPOINT_KIND:
            raise ContainerFormatError(f"{path}: container kind {kind!r} is not a checkpoint")
        try:
            hyper = {k: int(meta.pop(k)) for k in (
                "hidden_size", "n_bands", "n_frames", "time_layers", "freq_layers",
                "fusion_layers")}
            mean = tensors.pop("norm.mean").astype(np.float64)
            std = tensors.pop("norm.std").astype(np.float64)
        except KeyError as exc:
            raise ContainerFormatError(f"{path}: checkpoint lacks {exc.args[0]!r}") from exc
        params = cls({k: v.astype(dtype) for k, v in tensors.items()},
                     norm_mean=mean, norm_std=std, meta=meta, **hyper)
        params.check_shapes()
        return params

    def expected_shapes(self) -> dict:
        shapes = {}
        for stack in (self.time_path, self.freq_path, self.fusion):
            for k, size in enumerate(stack.layer_inputs()):
                for d in stack.directions:
                    base = f"{stack.prefix}.l{k}.{d}"
                    shapes[f"{base}.Wx"] = (size, 4 * self.hidden_size)
                    shapes[f"{base}.Wh"] = (self.hidden_size, 4 * self.hidden_size)
                    shapes[f"{base}.b"] = (4 * self.hidden_size,)
        shapes["time.proj.W"] = (self.hidden_size, self.n_rows)
        shapes["time.proj.b"] = (self.n_rows,)
        shapes["freq.proj.W"] = (self.hidden_size, self.n_frames)
        shapes["freq.proj.b"] = (self.n_frames,)
        shapes["out.W"] = (2 * self.hidden_size, self.n_rows)
        shapes["out.b"] = (self.n_rows,)
        return shapes

    def check_shapes(self):
        expected = self.expected_shapes()
        if set(expected) != set(self.arrays):
            missing = sorted(set(expected) - set(self.arrays))
            extra = sorted(set(self.arrays) - set(expected))
            raise ShapeMismatchError(f"parameter set mismatch: missing {missing}, extra {extra}")
        for name, shape in expected.items():
            if self.arrays[name].shape != shape:
                raise ShapeMismatchError(
                    f"{name}: shape {self.arrays[name].shape}, expected {shape}")


def init_params(hidden_size=64, n_bands=64, n_frames=250, seed=0, time_layers=3,
                freq_layers=3, fusion_layers=2, zero_output=True, dtype=np.float64) -> DplstmParams:
    """Random LSTM weights; a zero output projection makes the model start as
    the identity on the enhanced signal."""
    rng = np.random.default_rng(seed)
    rows = 2 * n_bands
    arrays = {}
    arrays.update(init_lstm_stack(rng, "time", rows, hidden_size, time_layers, dtype=dtype).arrays)
    arrays.update(init_lstm_stack(rng, "freq", n_frames, hidden_size, freq_layers, dtype=dtype).arrays)
    arrays.update(init_lstm_stack(rng, "fusion", 2 * rows, hidden_size, fusion_layers,
                                  bidirectional=True, dtype=dtype).arrays)
    bound = 1.0 / np.sqrt(hidden_size)
    arrays["time.proj.W"] = rng.uniform(-bound, bound, (hidden_size, rows)).astype(dtype)
    arrays["time.proj.b"] = np.zeros(rows, dtype=dtype)
    arrays["freq.proj.W"] = rng.uniform(-bound, bound, (hidden_size, n_frames)).astype(dtype)
    arrays["freq.proj.b"] = np.zeros(n_frames, dtype=dtype)
    out_bound = 0.0 if zero_output else 1.0 / np.sqrt(2 * hidden_size)
    arrays["out.W"] = rng.uniform(-out_bound, out_bound, (2 * hidden_size, rows)).astype(dtype)
    arrays["out.b"] = rng.uniform(-out_bound, out_bound, rows).astype(dtype)
    return DplstmParams(arrays, hidden_size, n_bands, n_frames, time_layers, freq_layers,
                        fusion_layers)


def normalize_input(params: DplstmParams, X) -> np.ndarray:
    """Standardise the log-envelope rows of ``X`` (``(..., 2 * n_bands, T)``)."""
    X = np.array(X, dtype=np.float64)
    nb = params.n_bands
    X[..., :nb, :] = (X[..., :nb, :] - params.norm_mean[:, None]) / params.norm_std[:, None]
    return X


def _check_input(params, X):
    X = np.asarray(X)
    squeeze = X.ndim == 2
    Xb = X[None] if squeeze else X
    if Xb.ndim != 3 or Xb.shape[1:] != (params.n_rows, params.n_frames):
        raise InvalidArgumentError(
            f"expected input ({params.n_rows}, {params.n_frames}), got {X.shape}")
    return Xb, squeeze


def dplstm_forward(params: DplstmParams, X, return_cache=False):
    """Map an already-normalised ``(2 * n_bands, T)`` matrix (or a batch of them)
    to the additive corrections of the same shape."""
    Xb, squeeze = _check_input(params, X)
    A = params.arrays
    # time path: sequence over frames, features are rows
    t_in = Xb.transpose(2, 0, 1)
    t_h, t_cache = lstm_forward(params.time_path, t_in, return_cache=True)
    t_out = t_h @ A["time.proj.W"] + A["time.proj.b"]              # (T, B, R)
    # frequency path: sequence over rows, features are frames
    f_in = Xb.transpose(1, 0, 2)
    f_h, f_cache = lstm_forward(params.freq_path, f_in, return_cache=True)
    f_out = f_h @ A["freq.proj.W"] + A["freq.proj.b"]              # (R, B, T)
    fused_in = np.concatenate([t_out, f_out.transpose(2, 1, 0)], axis=-1)   # (T, B, 2R)
    u_h, u_cache = lstm_forward(params.fusion, fused_in, return_cache=True)
    out = u_h @ A["out.W"] + A["out.b"]                             # (T, B, R)
    Y = out.transpose(1, 2, 0)
    if squeeze:
        Y = Y[0]
    if return_cache:
        return Y, (Xb, t_h, t_cache, f_h, f_cache, u_h, u_cache, squeeze)
    return Y


def dplstm_backward(params: DplstmParams, dY, cache) -> dict:
    """Gradients of every parameter array given ``dL/dY``."""
    Xb, t_h, t_cache, f_h, f_cache, u_h, u_cache, squeeze = cache
    A = params.arrays
    dY = np.asarray(dY)
    if squeeze:
        dY = dY[None]
    R = params.n_rows
    grads = {}
    d_out = dY.transpose(2, 0, 1)                                   # (T, B, R)
    grads["out.W"] = u_h.reshape(-1, u_h.shape[-1]).T @ d_out.reshape(-1, R)
    grads["out.b"] = d_out.sum(axis=(0, 1))
    d_fused, g = lstm_backward(params.fusion, d_out @ A["out.W"].T, u_cache)
    grads.update(g)
    d_t_out = d_fused[..., :R]
    d_f_out = d_fused[..., R:].transpose(2, 1, 0)                   # (R, B, T)
    grads["time.proj.W"] = t_h.reshape(-1, t_h.shape[-1]).T @ d_t_out.reshape(-1, R)
    grads["time.proj.b"] = d_t_out.sum(axis=(0, 1))
    _, g = lstm_backward(params.time_path, d_t_out @ A["time.proj.W"].T, t_cache)
    grads.update(g)
    Tn = params.n_frames
    grads["freq.proj.W"] = f_h.reshape(-1, f_h.shape[-1]).T @ d_f_out.reshape(-1, Tn)
    grads["freq.proj.b"] = d_f_out.sum(axis=(0, 1))
    _, g = lstm_backward(params.freq_path, d_f_out @ A["freq.proj.W"].T, f_cache)
    grads.update(g)
    return grads


def loss(pred, X, target, lam: float = 0.6, return_grad: bool = False):
    """Weighted MSE of the corrected envelope and carrier.

    ``lam * MSE(X_env + pred_env, target_env) +
    (1 - lam) * MSE(X_carr + pred_carr, target_carr)``, where ``X`` is the
    un-normalised network input and every array is ``(..., 2 * n_bands, T)``.
    With ``return_grad`` the gradient w.r.t. ``pred`` is returned as well.
    """
    if not 0.0 <= lam <= 1.0:
        raise InvalidArgumentError(f"lambda must be in [0, 1], got {lam}")
    pred, X, target = (np.asarray(a, dtype=np.float64) for a in (pred, X, target))
    if not pred.shape == X.shape == target.shape:
        raise ShapeMismatchError(f"shape mismatch {pred.shape}, {X.shape}, {target.shape}")
    nb = pred.shape[-2] // 2
    diff = X + pred - target
    n_half = diff[..., :nb, :].size
    env_mse = np.sum(diff[..., :nb, :] ** 2) / n_half
    carr_mse = np.sum(diff[..., nb:, :] ** 2) / n_half
    value = lam * env_mse + (1.0 - lam) * carr_mse
    if not return_grad:
        return float(value)
    grad = np.empty_like(diff)
    grad[..., :nb, :] = (2.0 * lam / n_half) * diff[..., :nb, :]
    grad[..., nb:, :] = (2.0 * (1.0 - lam) / n_half) * diff[..., nb:, :]
    return float(value), grad


def head_exclusive_parameters(params: DplstmParams, head: str) -> dict:
    """Slices of the output projection that only feed one head.

    Returns ``{name: index}`` with indices into ``params.arrays[name]``.
    """
    nb = params.n_bands
    rows = slice(0, nb) if head == "envelope" else slice(nb, 2 * nb)
    if head not in ("envelope", "carrier"):
        raise InvalidArgumentError(f"head must be 'envelope' or 'carrier', got {head!r}")
    return {"out.W": (slice(None), rows), "out.b": rows}
