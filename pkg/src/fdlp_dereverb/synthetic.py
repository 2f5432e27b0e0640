"""Seeded synthetic test signals: speech-like utterances and AM tones."""
from __future__ import annotations

import numpy as np
from scipy import signal as sp_signal

from .sigproc import DEFAULT_SAMPLE_RATE, AudioSignal


def _resonator(freq, bandwidth, fs):
    r = np.exp(-np.pi * bandwidth / fs)
    theta = 2 * np.pi * freq / fs
    return [1.0 - r], [1.0, -2 * r * np.cos(theta), r * r]


def speech_like(seed: int, duration: float = 1.0, sample_rate: int = DEFAULT_SAMPLE_RATE,
                peak: float = 0.5, floor_db: float = -50.0) -> AudioSignal:
    """A voiced/unvoiced syllable train with formant shaping.

    Syllables are harmonic (random, gliding f0) bursts filtered by two random
    formant resonators, separated by pauses, with the occasional noise-like
    fricative. A faint white noise floor keeps log envelopes bounded.
    """
    rng = np.random.default_rng(seed)
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    out = np.zeros(n)
    cursor = rng.uniform(0.0, 0.08)
    while cursor < duration - 0.06:
        length = rng.uniform(0.09, 0.25)
        start = int(cursor * sample_rate)
        stop = min(n, int((cursor + length) * sample_rate))
        m = stop - start
        shape = np.sin(np.pi * np.arange(m) / m) ** 2
        if rng.random() < 0.2:
            burst = rng.standard_normal(m)
            b, a = sp_signal.butter(2, rng.uniform(2500, 4500) / (sample_rate / 2), "highpass")
            burst = sp_signal.lfilter(b, a, burst) * 0.3
        else:
            f0 = rng.uniform(100, 220) * (1 + rng.uniform(-0.15, 0.15) * np.linspace(0, 1, m))
            phase = 2 * np.pi * np.cumsum(f0) / sample_rate
            n_harm = int(4000 // f0.max())
            burst = sum(np.cos(h * phase) / h for h in range(1, n_harm + 1))
            for freq, bw in ((rng.uniform(300, 900), 80.0), (rng.uniform(900, 2500), 120.0)):
                b, a = _resonator(freq, bw, sample_rate)
                burst = burst + 4.0 * sp_signal.lfilter(b, a, burst)
        out[start:stop] += shape * burst * rng.uniform(0.5, 1.0)
        cursor += length + rng.uniform(0.03, 0.15)
    out /= max(np.max(np.abs(out)), 1e-12)
    out = peak * out
    out += 10 ** (floor_db / 20) * peak * rng.standard_normal(n)
    return AudioSignal(out, sample_rate)


def am_tone(carrier_hz: float, mod_hz: float = 4.0, depth: float = 0.5,
            duration: float = 1.0, sample_rate: int = DEFAULT_SAMPLE_RATE,
            amplitude: float = 0.5, phase: float = 0.0) -> AudioSignal:
    """``amplitude * (1 + depth cos(2 pi mod t)) cos(2 pi carrier t + phase)``."""
    t = np.arange(int(round(duration * sample_rate))) / sample_rate
    x = amplitude * (1 + depth * np.cos(2 * np.pi * mod_hz * t)) * np.cos(
        2 * np.pi * carrier_hz * t + phase)
    return AudioSignal(x, sample_rate)


def white_noise(seed: int, duration: float = 1.0, sample_rate: int = DEFAULT_SAMPLE_RATE,
                rms: float = 0.1) -> AudioSignal:
    rng = np.random.default_rng(seed)
    return AudioSignal(rms * rng.standard_normal(int(round(duration * sample_rate))), sample_rate)
