"""Central finite-difference check of the analytic DPLSTM gradients."""
from __future__ import annotations

import numpy as np

from .model import dplstm_backward, dplstm_forward, init_params, loss

PARAMETER_GROUPS = ("time", "freq", "fusion", "projection")


def _group(name: str) -> str:
    return "projection" if ".proj." in name or name.startswith("out.") else name.split(".")[0]


def gradient_check(hidden_size=4, n_bands=6, n_frames=8, batch=2, lam=0.6, eps=1e-5, seed=0):
    """Compare backprop against central differences for every parameter.

    The error of a group is ``max|analytic - numeric| / max|numeric|`` over all
    its entries, which stays meaningful when individual gradients are tiny.
    Returns ``{group: relative_error}``.
    """
    params = init_params(hidden_size, n_bands, n_frames, seed=seed, zero_output=False)
    rng = np.random.default_rng(seed + 1)
    X = rng.standard_normal((batch, 2 * n_bands, n_frames))
    target = rng.standard_normal(X.shape)

    Y, cache = dplstm_forward(params, X, return_cache=True)
    _, dY = loss(Y, X, target, lam, return_grad=True)
    analytic = dplstm_backward(params, dY, cache)

    abs_err = dict.fromkeys(PARAMETER_GROUPS, 0.0)
    scale = dict.fromkeys(PARAMETER_GROUPS, 0.0)
    for name, arr in params.arrays.items():
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + eps
            up = loss(dplstm_forward(params, X), X, target, lam)
            arr[idx] = orig - eps
            down = loss(dplstm_forward(params, X), X, target, lam)
            arr[idx] = orig
            numeric = (up - down) / (2 * eps)
            g = _group(name)
            abs_err[g] = max(abs_err[g], abs(numeric - analytic[name][idx]))
            scale[g] = max(scale[g], abs(numeric))
    return {g: abs_err[g] / scale[g] for g in PARAMETER_GROUPS}
