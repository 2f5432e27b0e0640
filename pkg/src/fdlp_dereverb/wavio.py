"""WAV reading/writing restricted to 16 kHz mono PCM16 or float32."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .exceptions import UnsupportedFormatError
from .sigproc import DEFAULT_SAMPLE_RATE, AudioSignal

PCM16_SCALE = 32768.0


def read_wav(path, sample_rate: int = DEFAULT_SAMPLE_RATE) -> AudioSignal:
    """Read a mono WAV; PCM16 is scaled to [-1, 1). Nothing is resampled."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    try:
        rate, data = wavfile.read(path)
    except ValueError as exc:
        raise UnsupportedFormatError(f"{path}: malformed WAV ({exc})") from exc
    if data.ndim != 1:
        raise UnsupportedFormatError(f"{path}: expected mono, got {data.shape[1]} channels")
    if rate != sample_rate:
        raise UnsupportedFormatError(f"{path}: sample rate {rate} Hz, expected {sample_rate} Hz")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise UnsupportedFormatError(f"{path}: sample format {data.dtype} not supported")
    return AudioSignal(samples, rate)


def to_pcm16(samples, dither: bool = False, seed: int = 0) -> np.ndarray:
    """Quantise to int16, optionally with seeded TPDF dither of +-1 LSB."""
    scaled = np.asarray(samples, dtype=np.float64) * PCM16_SCALE
    if dither:
        rng = np.random.default_rng(seed)
        scaled = scaled + rng.uniform(-0.5, 0.5, scaled.shape) + rng.uniform(-0.5, 0.5, scaled.shape)
    return np.clip(np.round(scaled), -32768, 32767).astype(np.int16)


def write_wav(path, signal: AudioSignal, pcm16: bool = False, dither: bool = False,
              seed: int = 0) -> Path:
    """Write ``signal`` as float32 (default) or PCM16."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if pcm16:
        data = to_pcm16(signal.samples, dither=dither, seed=seed)
    else:
        data = signal.samples.astype(np.float32)
    wavfile.write(path, signal.sample_rate, data)
    return path
