"""Input validation helpers."""
from __future__ import annotations

import numpy as np

from .exceptions import InvalidArgumentError
from .qmf import N_BANDS


def check_segments(X, segment_length=None) -> np.ndarray:
    """Validate a 2-D float array of segments, one per row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidArgumentError(f"expected (n_segments, n_samples), got shape {X.shape}")
    if segment_length is not None and X.shape[1] != segment_length:
        raise InvalidArgumentError(
            f"expected segments of {segment_length} samples, got {X.shape[1]}")
    if X.shape[1] % N_BANDS:
        raise InvalidArgumentError(f"segment length {X.shape[1]} not divisible by {N_BANDS}")
    if not np.all(np.isfinite(X)):
        raise InvalidArgumentError("segments contain NaN or inf")
    return X


def check_stacked(Z, n_rows) -> np.ndarray:
    """Validate ``(n, n_rows, n_frames)`` envelope/carrier stacks."""
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim == 2:
        Z = Z[None]
    if Z.ndim != 3 or Z.shape[1] != n_rows:
        raise InvalidArgumentError(f"expected (n, {n_rows}, n_frames), got shape {Z.shape}")
    if not np.all(np.isfinite(Z)):
        raise InvalidArgumentError("stacked input contains NaN or inf")
    return Z
