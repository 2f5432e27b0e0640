"""scikit-learn style wrappers around the decomposition and the dereverberator.

Both estimators work on 2-D arrays of 1-second, 16 kHz segments, one segment
per row, so they compose with pipelines and model-selection utilities.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import fdlp, qmf
from .exceptions import ShapeMismatchError
from .dplstm import DplstmParams, TrainConfig, enhance_stacked, evaluate_loss, train
from .validation import check_segments, check_stacked


class SubbandDecomposer(TransformerMixin, BaseEstimator):
    """Segments -> stacked (log envelope, carrier) matrices and back.

    Parameters
    ----------
    lp_order : int
        All-pole model order per band.
    floor_eps : float
        Envelope floor relative to segment power.
    """

    def __init__(self, lp_order=30, floor_eps=1e-12):
        self.lp_order = lp_order
        self.floor_eps = floor_eps

    def fit(self, X, y=None):
        X = check_segments(X)
        self._cfg().validate(X.shape[1] // qmf.N_BANDS)
        self.segment_length_ = X.shape[1]
        self.n_bands_ = qmf.N_BANDS
        return self

    def _cfg(self):
        return fdlp.FdlpConfig(self.lp_order, self.floor_eps)

    def transform(self, X):
        """Return an array of shape ``(n_segments, 2 * n_bands, n_frames)``."""
        check_is_fitted(self, "segment_length_")
        X = check_segments(X, self.segment_length_)
        cfg = self._cfg()
        return np.stack([fdlp.decompose(x, cfg=cfg).stacked() for x in X])

    def inverse_transform(self, Z):
        check_is_fitted(self, "segment_length_")
        Z = check_stacked(Z, 2 * self.n_bands_)
        return np.stack([fdlp.recompose(fdlp.EnvelopeCarrier.from_stacked(z)) for z in Z])


class DplstmDereverberator(TransformerMixin, BaseEstimator):
    """Dual-path LSTM dereverberation of 1-second segments.

    ``fit(X, y)`` takes reverberant segments ``X`` and their clean
    counterparts ``y``; ``transform`` returns enhanced segments.
    """

    def __init__(self, hidden_size=64, lam=0.6, learning_rate=3e-4, epochs=20, batch_size=8,
                 seed=0, lp_order=30, clip_norm=5.0, dtype="float32"):
        self.hidden_size = hidden_size
        self.lam = lam
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.seed = seed
        self.lp_order = lp_order
        self.clip_norm = clip_norm
        self.dtype = dtype

    def _decomposer(self):
        return SubbandDecomposer(self.lp_order).fit(np.zeros((1, 16000)))

    def fit(self, X, y):
        X = check_segments(X)
        y = check_segments(y, X.shape[1])
        if X.shape != y.shape:
            raise ShapeMismatchError(f"X {X.shape} and y {y.shape} differ")
        dec = self._decomposer()
        cfg = TrainConfig(lam=self.lam, learning_rate=self.learning_rate, epochs=self.epochs,
                          batch_size=self.batch_size, seed=self.seed,
                          hidden_size=self.hidden_size, lp_order=self.lp_order,
                          clip_norm=self.clip_norm, dtype=self.dtype)
        self.params_, self.history_ = train(cfg, inputs=dec.transform(X), targets=dec.transform(y))
        return self

    @classmethod
    def from_checkpoint(cls, path):
        params = DplstmParams.load(path)
        est = cls(hidden_size=params.hidden_size, lam=params.meta.get("lambda", 0.6),
                  lp_order=int(params.meta.get("lp_order", 30)))
        est.params_ = params
        est.history_ = None
        return est

    def transform(self, X):
        check_is_fitted(self, "params_")
        dec = self._decomposer()
        enhanced = enhance_stacked(self.params_, dec.transform(X))
        return dec.inverse_transform(enhanced)

    def predict(self, X):
        return self.transform(X)

    def score(self, X, y):
        """Negative weighted log-envelope/carrier loss on held-out pairs."""
        check_is_fitted(self, "params_")
        dec = self._decomposer()
        result = evaluate_loss(self.params_, dec.transform(X), dec.transform(y), self.lam)
        return -result["loss"]
