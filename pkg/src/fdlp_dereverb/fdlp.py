"""Envelope/carrier decomposition of sub-band segments by linear prediction
in the DCT domain, and the matching remodulation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import qmf
from .exceptions import DegenerateInputError, InvalidArgumentError, ShapeMismatchError
from .sigproc import dct_ii, hilbert_envelope

# Envelope floor used when a band (or the whole segment) has no energy at all.
ABSOLUTE_FLOOR = 1e-30


@dataclass(frozen=True)
class FdlpConfig:
    """Parameters of the all-pole envelope model.

    ``floor_eps`` is relative to the mean power of the segment being
    decomposed; envelopes never fall below it.
    """

    lp_order: int = 30
    floor_eps: float = 1e-12

    def validate(self, band_length: int = 250):
        if not 0 < self.lp_order < band_length:
            raise InvalidArgumentError(
                f"lp_order must be in (0, {band_length}), got {self.lp_order}")
        if not self.floor_eps > 0:
            raise InvalidArgumentError("floor_eps must be positive")


@dataclass(frozen=True)
class EnvelopeCarrier:
    """Log envelopes and carriers of one segment, both ``(n_bands, n_frames)``."""

    log_env: np.ndarray
    carrier: np.ndarray
    degenerate: np.ndarray

    @property
    def envelope(self) -> np.ndarray:
        return np.exp(self.log_env)

    def stacked(self) -> np.ndarray:
        """The ``(2 * n_bands, n_frames)`` network input layout."""
        return np.concatenate([self.log_env, self.carrier], axis=0)

    @classmethod
    def from_stacked(cls, stacked) -> "EnvelopeCarrier":
        stacked = np.asarray(stacked, dtype=np.float64)
        n = stacked.shape[0] // 2
        return cls(stacked[:n], stacked[n:], np.zeros(n, dtype=bool))

    def subbands(self) -> np.ndarray:
        return remodulate(self.envelope, self.carrier)


def _burg(x: np.ndarray, order: int):
    """Burg recursion on each row of ``x``; returns (a, gain, reflection)."""
    rows, n = x.shape
    forward = x[:, 1:].copy()
    backward = x[:, :-1].copy()
    a = np.zeros((rows, order + 1))
    a[:, 0] = 1.0
    reflection = np.zeros((rows, order))
    err = np.mean(x * x, axis=1)
    for k in range(order):
        num = -2.0 * np.sum(forward * backward, axis=1)
        den = np.sum(forward * forward + backward * backward, axis=1)
        safe = den > 0
        kk = np.where(safe, num / np.where(safe, den, 1.0), 0.0)
        reflection[:, k] = kk
        a[:, 1:k + 2] = a[:, 1:k + 2] + kk[:, None] * a[:, k::-1]
        err = err * (1.0 - kk * kk)
        forward, backward = (forward[:, 1:] + kk[:, None] * backward[:, 1:],
                             backward[:, :-1] + kk[:, None] * forward[:, :-1])
    return a, err, reflection


def burg_lp(x, order: int, return_reflection: bool = False):
    """Fit an AR model with Burg's method.

    Parameters
    ----------
    x : array_like
        Real sequence, longer than ``order``.
    order : int
        Model order ``m >= 1``.
    return_reflection : bool
        Also return the ``m`` reflection coefficients.

    Returns
    -------
    coeffs : ndarray, shape (m + 1,)
        Prediction polynomial ``[1, b_1, ..., b_m]`` so that
        ``sum_p coeffs[p] * x[n - p]`` is the prediction error.
    gain : float
        Final prediction-error power.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidArgumentError("burg_lp expects a 1-D sequence")
    if order < 1 or order >= x.size:
        raise InvalidArgumentError(f"order must be in [1, {x.size - 1}], got {order}")
    if not np.any(x):
        raise DegenerateInputError("burg_lp of an all-zero sequence")
    a, err, refl = _burg(x[None, :], order)
    if return_reflection:
        return a[0], float(err[0]), refl[0]
    return a[0], float(err[0])


def _all_pole_shape(a: np.ndarray, n: int) -> np.ndarray:
    # The DCT of n samples is the spectrum of their 2n-point even extension,
    # so time sample t maps to the normalised frequency pi * t / n.
    response = np.fft.rfft(a, 2 * n, axis=-1)[..., :n]
    return 1.0 / (response.real ** 2 + response.imag ** 2)


def _envelopes(bands: np.ndarray, cfg: FdlpConfig, floor: float):
    """Energy-matched FDLP envelopes of each row plus a degenerate-row mask."""
    n = bands.shape[-1]
    degenerate = ~np.any(bands, axis=-1)
    env = np.full(bands.shape, floor)
    live = np.flatnonzero(~degenerate)
    if live.size:
        x = bands[live]
        a, _, _ = _burg(dct_ii(x), cfg.lp_order)
        shape = _all_pole_shape(a, n)
        target = np.sum(hilbert_envelope(x), axis=-1)
        env[live] = np.maximum(shape * (target / np.sum(shape, axis=-1))[:, None], floor)
    return env, degenerate


def fdlp_envelope(band_segment, cfg: FdlpConfig | None = None, floor: float | None = None):
    """All-pole temporal envelope of one sub-band segment.

    The AR model is fitted to the DCT of the segment; its power response is
    sampled at the segment's time points and scaled so that its sum equals the
    sum of the Hilbert envelope. An all-zero segment yields a constant floor
    envelope.
    """
    cfg = cfg or FdlpConfig()
    x = np.asarray(band_segment, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidArgumentError("fdlp_envelope expects a 1-D band segment")
    cfg.validate(x.size)
    if floor is None:
        floor = max(cfg.floor_eps * float(np.mean(x * x)), ABSOLUTE_FLOOR)
    env, _ = _envelopes(x[None, :], cfg, floor)
    return env[0]


def carrier(band_segment, envelope) -> np.ndarray:
    """Carrier ``x / sqrt(envelope)``."""
    x = np.asarray(band_segment, dtype=np.float64)
    envelope = np.asarray(envelope, dtype=np.float64)
    if x.shape != envelope.shape:
        raise ShapeMismatchError(f"shape mismatch {x.shape} vs {envelope.shape}")
    if not np.all(envelope > 0):
        raise InvalidArgumentError("envelope must be strictly positive")
    return x / np.sqrt(envelope)


def remodulate(envelope, carrier_signal) -> np.ndarray:
    """Sub-band signal ``sqrt(envelope) * carrier``."""
    envelope = np.asarray(envelope, dtype=np.float64)
    carrier_signal = np.asarray(carrier_signal, dtype=np.float64)
    if envelope.shape != carrier_signal.shape:
        raise ShapeMismatchError(
            f"shape mismatch {envelope.shape} vs {carrier_signal.shape}")
    return np.sqrt(envelope) * carrier_signal


def decompose(segment, proto: qmf.QmfPrototype | None = None,
              cfg: FdlpConfig | None = None) -> EnvelopeCarrier:
    """QMF-analyse one segment and split every band into envelope and carrier."""
    cfg = cfg or FdlpConfig()
    x = np.asarray(segment, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidArgumentError("decompose expects one 1-D segment")
    bands = qmf.analyze(x, proto)
    cfg.validate(bands.shape[-1])
    floor = max(cfg.floor_eps * float(np.mean(x * x)), ABSOLUTE_FLOOR)
    env, degenerate = _envelopes(bands, cfg, floor)
    return EnvelopeCarrier(np.log(env), bands / np.sqrt(env), degenerate)


def recompose(ec: EnvelopeCarrier, proto: qmf.QmfPrototype | None = None) -> np.ndarray:
    """Remodulate and QMF-synthesise back to the time domain."""
    return qmf.synthesize(ec.subbands(), proto)
