"""Uniform 64-band QMF analysis/synthesis built as a 6-level binary tree.

Each tree node splits its input with a linear-phase low-pass ``h0`` and its
mirror ``h1[n] = (-1)**n h0[n]`` followed by decimation by two. Synthesis uses
``f0 = h0`` and ``f1 = -h1`` so aliasing cancels exactly at every node.

Filtering is circular over the segment. With a finite segment and linear
filtering the tree's total group delay (31 * 63 samples) would push the tail
of the segment out of the critically sampled bands; circular filtering keeps
all 16000 samples and lets the delay be removed with an exact rotation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError

N_BANDS = 64
TREE_DEPTH = 6

# First half of a symmetric 32-tap low-pass, optimised for
# |H0|^2 + |H1|^2 = 1 with the stop band starting at 0.65*pi.
_H0_HALF = (
    0.00023324514649306112,
    -0.0006723539188212936,
    -0.0007627765398640816,
    0.002595613706905641,
    0.0012670047088124906,
    -0.006904867175681758,
    -0.0008362176595401647,
    0.01492904247173357,
    -0.002329301226814755,
    -0.028439763281150984,
    0.011666773363028843,
    0.051248068148088015,
    -0.03597459793579101,
    -0.09976857639174408,
    0.1255803914493902,
    0.4681070645070713,
)


@dataclass(frozen=True)
class QmfPrototype:
    """Analysis/synthesis filter pair for one tree node."""

    h0: np.ndarray
    h1: np.ndarray = field(init=False)

    def __post_init__(self):
        h0 = np.asarray(self.h0, dtype=np.float64)
        if h0.ndim != 1 or h0.size % 2:
            raise InvalidArgumentError("h0 must be a 1-D even-length filter")
        h1 = h0 * (-1.0) ** np.arange(h0.size)
        h0.setflags(write=False)
        h1.setflags(write=False)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)

    @property
    def n_taps(self) -> int:
        return self.h0.size

    @property
    def node_delay(self) -> int:
        """Analysis + synthesis delay of one node, in samples at its input rate."""
        return self.n_taps - 1

    @property
    def g0(self) -> np.ndarray:
        return self.h0

    @property
    def g1(self) -> np.ndarray:
        return -self.h1

    def frequency_response(self, n_points: int = 512):
        """Return ``(omega, H0, H1)`` on ``n_points`` frequencies in [0, pi]."""
        omega = np.linspace(0.0, np.pi, n_points)
        basis = np.exp(-1j * np.outer(omega, np.arange(self.n_taps)))
        return omega, basis @ self.h0, basis @ self.h1


def design_prototype() -> QmfPrototype:
    """The fixed 32-tap near-perfect-reconstruction QMF pair."""
    half = np.asarray(_H0_HALF)
    return QmfPrototype(np.concatenate([half, half[::-1]]))


def power_complementarity_error(proto: QmfPrototype, n_points: int = 512) -> float:
    """Max deviation of ``|H0|^2 + |H1|^2`` from 1."""
    _, H0, H1 = proto.frequency_response(n_points)
    return float(np.max(np.abs(np.abs(H0) ** 2 + np.abs(H1) ** 2 - 1.0)))


def _circular_filter(x: np.ndarray, h: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    if h.size > n:
        raise InvalidArgumentError("segment too short for the prototype filter")
    return np.fft.irfft(np.fft.rfft(x, axis=-1) * np.fft.rfft(h, n), n, axis=-1)


def _split(x, proto):
    low = np.sqrt(2.0) * _circular_filter(x, proto.h0)[..., ::2]
    high = np.sqrt(2.0) * _circular_filter(x, proto.h1)[..., ::2]
    return low, high


def _merge(low, high, proto):
    n = 2 * low.shape[-1]
    up_low = np.zeros(low.shape[:-1] + (n,))
    up_high = np.zeros_like(up_low)
    up_low[..., ::2] = low
    up_high[..., ::2] = high
    y = np.sqrt(2.0) * (_circular_filter(up_low, proto.g0) + _circular_filter(up_high, proto.g1))
    return np.roll(y, -proto.node_delay, axis=-1)


def _analyze_tree(x, proto, depth):
    if depth == 0:
        return [x]
    low, high = _split(x, proto)
    # Decimating the high branch mirrors its spectrum, so its leaves come out
    # in descending frequency order.
    return _analyze_tree(low, proto, depth - 1) + _analyze_tree(high, proto, depth - 1)[::-1]


def _synthesize_tree(bands, proto):
    if len(bands) == 1:
        return bands[0]
    half = len(bands) // 2
    low = _synthesize_tree(bands[:half], proto)
    high = _synthesize_tree(bands[half:][::-1], proto)
    return _merge(low, high, proto)


def analyze(segment, proto: QmfPrototype | None = None, n_bands: int = N_BANDS) -> np.ndarray:
    """Split a segment into ``n_bands`` critically sampled sub-bands.

    Parameters
    ----------
    segment : array_like, shape (..., L)
        Time-domain segment(s); ``L`` must be divisible by ``n_bands``.
    proto : QmfPrototype, optional
        Defaults to :func:`design_prototype`.
    n_bands : int
        Power of two; 64 for the standard 6-level tree.

    Returns
    -------
    ndarray, shape (..., n_bands, L // n_bands)
        Sub-band signals, row index ascending in centre frequency.
    """
    proto = proto or design_prototype()
    x = np.asarray(segment, dtype=np.float64)
    depth = _tree_depth(n_bands)
    if x.ndim == 0 or x.shape[-1] % n_bands or x.shape[-1] == 0:
        raise InvalidArgumentError(
            f"segment length must be a positive multiple of {n_bands}, got shape {x.shape}")
    return np.stack(_analyze_tree(x, proto, depth), axis=-2)


def synthesize(frame, proto: QmfPrototype | None = None) -> np.ndarray:
    """Rebuild the time-domain segment from an ``(n_bands, L/n_bands)`` frame.

    The per-node delay is removed inside the tree, so the output is aligned
    with the segment that was analysed.
    """
    proto = proto or design_prototype()
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim < 2:
        raise InvalidArgumentError(f"frame must be at least 2-D, got shape {frame.shape}")
    n_bands = frame.shape[-2]
    _tree_depth(n_bands)
    if frame.shape[-1] < 1:
        raise InvalidArgumentError("frame has no samples")
    bands = [frame[..., i, :] for i in range(n_bands)]
    return _synthesize_tree(bands, proto)


def band_centers(sample_rate: int = 16000, n_bands: int = N_BANDS) -> np.ndarray:
    """Centre frequency in Hz of each band."""
    width = sample_rate / 2 / n_bands
    return (np.arange(n_bands) + 0.5) * width


def _tree_depth(n_bands: int) -> int:
    depth = int(np.log2(n_bands)) if n_bands > 0 else -1
    if depth < 1 or 2 ** depth != n_bands:
        raise InvalidArgumentError(f"n_bands must be a power of two >= 2, got {n_bands}")
    return depth
