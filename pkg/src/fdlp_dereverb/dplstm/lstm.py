"""Stacked (optionally bidirectional) LSTM with explicit backpropagation
through time.

Sequences are laid out ``(T, B, F)``. Gate order in the weight columns is
input, forget, cell, output.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import InvalidArgumentError


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class LstmStackParams:
    """View onto the weights of one LSTM stack.

    ``arrays`` maps ``"{prefix}.l{k}.{fw|bw}.{Wx|Wh|b}"`` to arrays; it is
    usually shared with the owning model so updates are seen by both.
    """

    prefix: str
    n_in: int
    hidden: int
    n_layers: int
    bidirectional: bool
    arrays: dict

    @property
    def directions(self):
        return ("fw", "bw") if self.bidirectional else ("fw",)

    @property
    def n_out(self) -> int:
        return self.hidden * len(self.directions)

    def layer_inputs(self):
        sizes = [self.n_in] + [self.n_out] * (self.n_layers - 1)
        return sizes

    def names(self):
        out = []
        for k in range(self.n_layers):
            for d in self.directions:
                out += [f"{self.prefix}.l{k}.{d}.{p}" for p in ("Wx", "Wh", "b")]
        return out

    def get(self, k, d, p):
        return self.arrays[f"{self.prefix}.l{k}.{d}.{p}"]


def init_lstm_stack(rng, prefix, n_in, hidden, n_layers, bidirectional=False, dtype=np.float64):
    """Uniform(+-1/sqrt(hidden)) initialisation, returns a stack owning new arrays."""
    bound = 1.0 / np.sqrt(hidden)
    stack = LstmStackParams(prefix, n_in, hidden, n_layers, bidirectional, {})
    for k, size in enumerate(stack.layer_inputs()):
        for d in stack.directions:
            base = f"{prefix}.l{k}.{d}"
            stack.arrays[f"{base}.Wx"] = rng.uniform(-bound, bound, (size, 4 * hidden)).astype(dtype)
            stack.arrays[f"{base}.Wh"] = rng.uniform(-bound, bound, (hidden, 4 * hidden)).astype(dtype)
            stack.arrays[f"{base}.b"] = rng.uniform(-bound, bound, 4 * hidden).astype(dtype)
    return stack


def _cell_forward(x, Wx, Wh, b):
    T, B, _ = x.shape
    H = Wh.shape[0]
    pre = x @ Wx + b
    gates = np.empty((T, B, 4 * H), dtype=pre.dtype)
    cells = np.empty((T, B, H), dtype=pre.dtype)
    tanh_c = np.empty_like(cells)
    hs = np.empty_like(cells)
    h = np.zeros((B, H), dtype=pre.dtype)
    c = np.zeros((B, H), dtype=pre.dtype)
    for t in range(T):
        z = pre[t] + h @ Wh
        g = gates[t]
        g[:, :H] = _sigmoid(z[:, :H])
        g[:, H:2 * H] = _sigmoid(z[:, H:2 * H])
        g[:, 2 * H:3 * H] = np.tanh(z[:, 2 * H:3 * H])
        g[:, 3 * H:] = _sigmoid(z[:, 3 * H:])
        c = g[:, H:2 * H] * c + g[:, :H] * g[:, 2 * H:3 * H]
        cells[t] = c
        tanh_c[t] = np.tanh(c)
        h = g[:, 3 * H:] * tanh_c[t]
        hs[t] = h
    return hs, (x, gates, cells, tanh_c, hs)


def _cell_backward(dhs, cache, Wx, Wh):
    x, gates, cells, tanh_c, hs = cache
    T, B, H = hs.shape
    dpre = np.empty_like(gates)
    dh_next = np.zeros((B, H), dtype=hs.dtype)
    dc_next = np.zeros((B, H), dtype=hs.dtype)
    WhT = Wh.T
    for t in range(T - 1, -1, -1):
        g = gates[t]
        i, f, gg, o = g[:, :H], g[:, H:2 * H], g[:, 2 * H:3 * H], g[:, 3 * H:]
        dh = dhs[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tanh_c[t] ** 2)
        c_prev = cells[t - 1] if t > 0 else 0.0
        d = dpre[t]
        d[:, :H] = dc * gg * i * (1.0 - i)
        d[:, H:2 * H] = dc * c_prev * f * (1.0 - f)
        d[:, 2 * H:3 * H] = dc * i * (1.0 - gg * gg)
        d[:, 3 * H:] = dh * tanh_c[t] * o * (1.0 - o)
        dc_next = dc * f
        dh_next = d @ WhT
    flat = dpre.reshape(T * B, 4 * H)
    dWx = x.reshape(T * B, -1).T @ flat
    h_prev = np.concatenate([np.zeros((1, B, H), dtype=hs.dtype), hs[:-1]], axis=0)
    dWh = h_prev.reshape(T * B, H).T @ flat
    db = flat.sum(axis=0)
    dx = dpre @ Wx.T
    return dx, dWx, dWh, db


def lstm_forward(stack: LstmStackParams, seq, return_cache=False):
    """Run the stack over ``seq`` (``(T, F)`` or ``(T, B, F)``) from zero state.

    Bidirectional layers concatenate the forward and time-reversed hidden
    sequences along the feature axis.
    """
    seq = np.asarray(seq)
    squeeze = seq.ndim == 2
    x = seq[:, None, :] if squeeze else seq
    if x.ndim != 3 or x.shape[-1] != stack.n_in:
        raise InvalidArgumentError(
            f"{stack.prefix}: expected input feature size {stack.n_in}, got shape {seq.shape}")
    caches = []
    for k in range(stack.n_layers):
        outs, layer_cache = [], []
        for d in stack.directions:
            xin = x if d == "fw" else x[::-1]
            h, cache = _cell_forward(xin, stack.get(k, d, "Wx"), stack.get(k, d, "Wh"),
                                     stack.get(k, d, "b"))
            outs.append(h if d == "fw" else h[::-1])
            layer_cache.append(cache)
        caches.append(layer_cache)
        x = np.concatenate(outs, axis=-1) if len(outs) > 1 else outs[0]
    out = x[:, 0, :] if squeeze else x
    return (out, caches) if return_cache else out


def lstm_backward(stack: LstmStackParams, dout, caches):
    """Gradients of the stack given ``dL/d(output)`` shaped like the output.

    Returns ``(dinput, grads)`` where ``grads`` is keyed like ``stack.arrays``.
    """
    dx = np.asarray(dout)
    grads = {}
    H = stack.hidden
    for k in range(stack.n_layers - 1, -1, -1):
        dnext = None
        for j, d in enumerate(stack.directions):
            dh = dx[..., j * H:(j + 1) * H]
            if d == "bw":
                dh = dh[::-1]
            din, dWx, dWh, db = _cell_backward(
                dh, caches[k][j], stack.get(k, d, "Wx"), stack.get(k, d, "Wh"))
            if d == "bw":
                din = din[::-1]
            base = f"{stack.prefix}.l{k}.{d}"
            grads[f"{base}.Wx"], grads[f"{base}.Wh"], grads[f"{base}.b"] = dWx, dWh, db
            dnext = din if dnext is None else dnext + din
        dx = dnext
    return dx, grads
