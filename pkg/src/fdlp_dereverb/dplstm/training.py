"""Training loop, Adam optimiser and the end-to-end enhancement chain."""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import fdlp, qmf
from ..exceptions import InvalidArgumentError, NonFiniteLossError, ShapeMismatchError
from ..sigproc import AudioSignal, SegmentGrid, desegment, segment
from .model import (DplstmParams, dplstm_backward, dplstm_forward, init_params, loss,
                    normalize_input)

logger = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class TrainConfig:
    lam: float = 0.6
    learning_rate: float = 3e-4
    epochs: int = 20
    batch_size: int = 8
    seed: int = 0
    hidden_size: int = 64
    lp_order: int = 30
    clip_norm: float = 5.0
    dtype: str = "float32"
    checkpoint_path: str | None = None

    def validate(self):
        if not 0.0 <= self.lam <= 1.0:
            raise InvalidArgumentError(f"lambda must be in [0, 1], got {self.lam}")
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidArgumentError("epochs and batch_size must be >= 1")
        if self.learning_rate < 0:
            raise InvalidArgumentError("learning_rate must be non-negative")


@dataclass
class TrainHistory:
    loss: list = field(default_factory=list)
    env_mse: list = field(default_factory=list)
    carrier_mse: list = field(default_factory=list)

    def as_dict(self):
        return asdict(self)

    def write(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            fh.write("# epoch\tloss\tenv_mse\tcarrier_mse\n")
            for k, row in enumerate(zip(self.loss, self.env_mse, self.carrier_mse), start=1):
                fh.write(f"{k}\t" + "\t".join(repr(float(v)) for v in row) + "\n")
        return path


class Adam:
    """Adam with bias correction over a dict of arrays, updated in place."""

    def __init__(self, params: dict, learning_rate=1e-3, beta1=ADAM_BETA1, beta2=ADAM_BETA2,
                 eps=ADAM_EPS):
        self.lr, self.beta1, self.beta2, self.eps = learning_rate, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name in sorted(params):
            g = grads[name].astype(params[name].dtype, copy=False)
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= (self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)).astype(
                params[name].dtype, copy=False)


def clip_gradients(grads: dict, max_norm: float) -> float:
    total = float(np.sqrt(sum(float(np.sum(np.square(g, dtype=np.float64)))
                              for _, g in sorted(grads.items()))))
    if max_norm and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def decompose_signal(signal: AudioSignal, cfg: fdlp.FdlpConfig | None = None,
                     proto: qmf.QmfPrototype | None = None) -> np.ndarray:
    """Stacked ``(n_segments, 128, 250)`` envelope/carrier inputs of a signal."""
    segs = segment(signal, SegmentGrid(signal.sample_rate))
    return np.stack([fdlp.decompose(s, proto, cfg).stacked() for s in segs])


def load_pairs(manifest, cfg: fdlp.FdlpConfig | None = None):
    """Decompose every pair of a manifest into aligned ``(inputs, targets)``."""
    from ..roomsim import read_manifest
    from ..wavio import read_wav

    records = read_manifest(manifest) if isinstance(manifest, (str, Path)) else list(manifest)
    inputs, targets = [], []
    for rec in records:
        clean, reverb = read_wav(rec.clean_path), read_wav(rec.reverb_path)
        if len(clean) != len(reverb):
            raise ShapeMismatchError(
                f"pair length mismatch: {rec.clean_path} vs {rec.reverb_path}")
        inputs.append(decompose_signal(reverb, cfg))
        targets.append(decompose_signal(clean, cfg))
    if not inputs:
        raise InvalidArgumentError("empty corpus")
    return np.concatenate(inputs), np.concatenate(targets)


def normalization_stats(inputs: np.ndarray, n_bands: int = qmf.N_BANDS):
    log_env = inputs[:, :n_bands, :]
    mean = log_env.mean(axis=(0, 2))
    std = log_env.std(axis=(0, 2))
    return mean, np.where(std > 1e-8, std, 1.0)


def train(cfg: TrainConfig, manifest=None, inputs=None, targets=None, params=None):
    """Fit the dual-path model on reverberant/clean pairs.

    Pairs come from a manifest (path or records) or directly as stacked
    ``inputs``/``targets`` arrays of shape ``(N, 128, 250)``. Returns the
    trained parameters and the per-epoch history. Mini-batch order is drawn
    from ``cfg.seed``; results are bit-reproducible for a given seed.
    """
    cfg.validate()
    if inputs is None:
        if manifest is None:
            raise InvalidArgumentError("need a manifest or inputs/targets")
        inputs, targets = load_pairs(manifest, fdlp.FdlpConfig(cfg.lp_order))
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if inputs.shape[0] == 0:
        raise InvalidArgumentError("empty corpus")
    if inputs.shape != targets.shape:
        raise ShapeMismatchError(f"inputs {inputs.shape} and targets {targets.shape} differ")
    dtype = np.dtype(cfg.dtype)
    n, rows, frames = inputs.shape
    if params is None:
        params = init_params(cfg.hidden_size, rows // 2, frames, seed=cfg.seed, dtype=dtype)
        params.norm_mean, params.norm_std = normalization_stats(inputs, rows // 2)
    params.meta.update({"lp_order": cfg.lp_order, "lambda": cfg.lam})
    net_inputs = normalize_input(params, inputs).astype(dtype)

    opt = Adam(params.arrays, cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    history = TrainHistory()
    per_sample = np.empty((3, n))
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            Y, cache = dplstm_forward(params, net_inputs[idx], return_cache=True)
            value, dY = loss(Y, inputs[idx], targets[idx], cfg.lam, return_grad=True)
            if not np.isfinite(value):
                raise NonFiniteLossError(f"epoch {epoch}: loss is {value}")
            for j, k in enumerate(idx):
                env, carr = _mse_parts(Y[j], inputs[k], targets[k])
                per_sample[:, k] = (cfg.lam * env + (1 - cfg.lam) * carr, env, carr)
            grads = dplstm_backward(params, dY.astype(dtype), cache)
            clip_gradients(grads, cfg.clip_norm)
            opt.step(params.arrays, grads)
        epoch_means = per_sample.mean(axis=1)
        history.loss.append(float(epoch_means[0]))
        history.env_mse.append(float(epoch_means[1]))
        history.carrier_mse.append(float(epoch_means[2]))
        logger.info("epoch %d loss %.5f (env %.5f, carrier %.5f)", epoch, *epoch_means)
        if cfg.checkpoint_path:
            params.save(cfg.checkpoint_path)
    return params, history


def _mse_parts(pred, X, target):
    nb = pred.shape[-2] // 2
    diff = X + pred - target
    return float(np.mean(diff[:nb] ** 2)), float(np.mean(diff[nb:] ** 2))


def evaluate_loss(params: DplstmParams, inputs, targets, lam=0.6, batch_size=16) -> dict:
    """Mean loss terms of the model, and of the unprocessed input, over a set."""
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    enhanced = enhance_stacked(params, inputs, batch_size)
    nb = params.n_bands
    env = np.mean((enhanced[:, :nb] - targets[:, :nb]) ** 2)
    carr = np.mean((enhanced[:, nb:] - targets[:, nb:]) ** 2)
    env0 = np.mean((inputs[:, :nb] - targets[:, :nb]) ** 2)
    carr0 = np.mean((inputs[:, nb:] - targets[:, nb:]) ** 2)
    return {"env_mse": float(env), "carrier_mse": float(carr),
            "loss": float(lam * env + (1 - lam) * carr),
            "env_mse_unprocessed": float(env0), "carrier_mse_unprocessed": float(carr0),
            "loss_unprocessed": float(lam * env0 + (1 - lam) * carr0)}


def enhance_stacked(params: DplstmParams, inputs, batch_size: int = 16) -> np.ndarray:
    """Apply the additive corrections to stacked ``(N, 128, 250)`` inputs."""
    inputs = np.asarray(inputs, dtype=np.float64)
    dtype = next(iter(params.arrays.values())).dtype
    out = np.empty_like(inputs)
    for start in range(0, inputs.shape[0], batch_size):
        chunk = inputs[start:start + batch_size]
        Y = dplstm_forward(params, normalize_input(params, chunk).astype(dtype))
        out[start:start + batch_size] = chunk + Y
    return out


def enhance(params: DplstmParams, noisy: AudioSignal, proto: qmf.QmfPrototype | None = None,
            cfg: fdlp.FdlpConfig | None = None) -> AudioSignal:
    """Dereverberate a 16 kHz signal segment by segment.

    segment -> decompose -> network corrections -> remodulate -> QMF
    synthesis -> concatenate, trimmed to the input length.
    """
    if noisy.sample_rate != 16000:
        raise InvalidArgumentError(f"expected 16 kHz input, got {noisy.sample_rate} Hz")
    cfg = cfg or fdlp.FdlpConfig(int(params.meta.get("lp_order", 30)))
    stacked = decompose_signal(noisy, cfg, proto)
    enhanced = enhance_stacked(params, stacked)
    segments = [fdlp.recompose(fdlp.EnvelopeCarrier.from_stacked(e), proto) for e in enhanced]
    return AudioSignal(desegment(np.stack(segments), len(noisy)), noisy.sample_rate)
