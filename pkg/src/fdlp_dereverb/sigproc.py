"""Shared numerical primitives: DCT pair, convolution, Hilbert envelope and
fixed-length segmentation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import fft as sp_fft
from scipy import signal as sp_signal

from .exceptions import InvalidArgumentError

DEFAULT_SAMPLE_RATE = 16000


@dataclass(frozen=True)
class AudioSignal:
    """Mono waveform with its sample rate."""

    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise InvalidArgumentError("AudioSignal must be mono (1-D)")
        if int(self.sample_rate) <= 0:
            raise InvalidArgumentError("sample_rate must be positive")
        if not np.all(np.isfinite(samples)):
            raise InvalidArgumentError("AudioSignal samples must be finite")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.shape[0]

    @property
    def duration(self) -> float:
        return len(self) / self.sample_rate


@dataclass(frozen=True)
class SegmentGrid:
    """Non-overlapping segmentation with zero padding of the last segment."""

    segment_len: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        if self.segment_len <= 0:
            raise InvalidArgumentError("segment_len must be positive")


def _as_vector(x, name="x") -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidArgumentError(f"{name} must be 1-D, got shape {x.shape}")
    if x.size == 0:
        raise InvalidArgumentError(f"{name} must be non-empty")
    return x


def dct_ii(x) -> np.ndarray:
    """Orthonormal type-II DCT along the last axis."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0 or x.shape[-1] == 0:
        raise InvalidArgumentError("dct_ii of an empty vector")
    return sp_fft.dct(x, type=2, norm="ortho", axis=-1)


def idct_ii(c) -> np.ndarray:
    """Inverse of :func:`dct_ii` (orthonormal type-III DCT)."""
    c = np.asarray(c, dtype=np.float64)
    if c.size == 0 or c.shape[-1] == 0:
        raise InvalidArgumentError("idct_ii of an empty vector")
    return sp_fft.idct(c, type=2, norm="ortho", axis=-1)


def convolve(a, b) -> np.ndarray:
    """Full linear convolution, output length ``len(a) + len(b) - 1``."""
    a = _as_vector(a, "a")
    b = _as_vector(b, "b")
    return sp_signal.oaconvolve(a, b) if min(a.size, b.size) > 64 else np.convolve(a, b)


def analytic_signal(x) -> np.ndarray:
    """Analytic signal of ``x`` along the last axis.

    Negative-frequency bins are zeroed and positive ones doubled over the whole
    vector, so the real part equals ``x``.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    spec = np.fft.fft(x, axis=-1)
    weights = np.zeros(n)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[n // 2] = 1.0
        weights[1:n // 2] = 2.0
    else:
        weights[1:(n + 1) // 2] = 2.0
    return np.fft.ifft(spec * weights, axis=-1)


def hilbert_envelope(x) -> np.ndarray:
    """Squared magnitude of the analytic signal (works row-wise on 2-D input)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 2:
        raise InvalidArgumentError("hilbert_envelope needs at least 2 samples")
    z = analytic_signal(x)
    return z.real ** 2 + z.imag ** 2


def segment(signal, grid: SegmentGrid | None = None) -> np.ndarray:
    """Split a signal into ``ceil(len / segment_len)`` zero-padded rows."""
    grid = grid or SegmentGrid()
    x = signal.samples if isinstance(signal, AudioSignal) else _as_vector(signal, "signal")
    if x.size == 0:
        raise InvalidArgumentError("cannot segment an empty signal")
    n_seg = -(-x.size // grid.segment_len)
    out = np.zeros(n_seg * grid.segment_len)
    out[:x.size] = x
    return out.reshape(n_seg, grid.segment_len)


def desegment(segments, length: int) -> np.ndarray:
    """Concatenate segments and trim to the original ``length``."""
    segments = np.asarray(segments, dtype=np.float64)
    flat = segments.reshape(-1)
    if length > flat.size:
        raise InvalidArgumentError("length exceeds total segment samples")
    return flat[:length].copy()


def snr_db(reference, estimate) -> float:
    """Signal-to-error ratio in dB."""
    reference = np.asarray(reference, dtype=np.float64)
    err = reference - np.asarray(estimate, dtype=np.float64)
    err_power = np.sum(err ** 2)
    if err_power == 0:
        return np.inf
    return 10 * np.log10(np.sum(reference ** 2) / err_power)
