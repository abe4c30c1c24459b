"""Minimal tensor/layer engine: forward passes and exact analytic gradients.

Layers operate on float64 numpy arrays with a leading batch dimension and
cache whatever the backward pass needs. Gradients accumulate into per-layer
``grads`` dicts (call ``zero_grads`` between steps); every backward returns
the gradient w.r.t. the layer input. The single-sequence helpers at the
bottom wrap the batched layers for one example.

The pipeline is a fixed chain (embedding, convolution, dropout, recurrence,
concatenation, sigmoid head), so explicit per-layer backprop is used instead
of a general autodiff graph; tests verify every layer against central finite
differences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import (
    DimensionMismatchError,
    EmptySequenceError,
    IndexOutOfVocabError,
    SequenceTooShortError,
)

EMBEDDING_DIM = 100
CONV_FILTERS = 64
KERNEL_SIZE = 3
LSTM_UNITS = 100

PAD_INDEX = 0
OOV_INDEX = 1


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Overflow-safe logistic function."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _glorot(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


class Layer:
    """Base: ordered parameter dict plus matching gradient accumulators."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}

    def _register(self, name: str, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=np.float64)
        self.params[name] = value
        self.grads[name] = np.zeros_like(value)
        return value

    def zero_grads(self) -> None:
        for g in self.grads.values():
            g[...] = 0.0

    def param_items(self) -> list[tuple[str, np.ndarray]]:
        return list(self.params.items())


class EmbeddingTable(Layer):
    """Token-id lookup table. Row 0 is padding: all zeros, zero gradient."""

    def __init__(self, vocab_size: int, dim: int = EMBEDDING_DIM, rng: np.random.Generator | None = None):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        self.vocab_size = vocab_size
        self.dim = dim
        weights = rng.uniform(-0.05, 0.05, size=(vocab_size, dim))
        weights[PAD_INDEX] = 0.0
        self._register("weights", weights)
        self._ids: np.ndarray | None = None

    def forward(self, ids: np.ndarray) -> np.ndarray:
        ids = np.asarray(ids)
        if ids.size and (ids.min() < 0 or ids.max() >= self.vocab_size):
            raise IndexOutOfVocabError(
                f"token ids must lie in [0, {self.vocab_size}), got range "
                f"[{ids.min()}, {ids.max()}]"
            )
        self._ids = ids
        return self.params["weights"][ids]

    def backward(self, dout: np.ndarray) -> None:
        ids = self._ids
        grad = self.grads["weights"]
        np.add.at(grad, ids.reshape(-1), dout.reshape(-1, self.dim))
        grad[PAD_INDEX] = 0.0
        return None


class ConvLayer(Layer):
    """Valid 1-D convolution over the token axis, ReLU activation."""

    def __init__(
        self,
        n_filters: int = CONV_FILTERS,
        kernel_size: int = KERNEL_SIZE,
        in_dim: int = EMBEDDING_DIM,
        rng: np.random.Generator | None = None,
    ):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        self.n_filters = n_filters
        self.kernel_size = kernel_size
        self.in_dim = in_dim
        self._register(
            "filters",
            _glorot(rng, (n_filters, kernel_size, in_dim), kernel_size * in_dim, n_filters),
        )
        self._register("bias", np.zeros(n_filters))
        self._windows: np.ndarray | None = None
        self._pre: np.ndarray | None = None

    def forward(self, emb: np.ndarray) -> np.ndarray:
        batch, length, dim = emb.shape
        h = self.kernel_size
        if length < h:
            raise SequenceTooShortError(f"sequence length {length} < kernel size {h}")
        if dim != self.in_dim:
            raise DimensionMismatchError(f"expected embedding dim {self.in_dim}, got {dim}")
        # (B, L-h+1, h, d) flattened per window for one matmul against all filters
        windows = sliding_window_view(emb, h, axis=1)  # (B, Lout, d, h)
        windows = np.ascontiguousarray(windows.transpose(0, 1, 3, 2)).reshape(
            batch, length - h + 1, h * dim
        )
        flat = self.params["filters"].reshape(self.n_filters, h * dim)
        pre = windows @ flat.T + self.params["bias"]
        self._windows = windows
        self._pre = pre
        return np.maximum(pre, 0.0)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        h, dim = self.kernel_size, self.in_dim
        windows, pre = self._windows, self._pre
        batch, out_len, _ = windows.shape
        dpre = dout * (pre > 0)
        flat = self.params["filters"].reshape(self.n_filters, h * dim)
        self.grads["filters"] += np.einsum("blf,blk->fk", dpre, windows).reshape(
            self.n_filters, h, dim
        )
        self.grads["bias"] += dpre.sum(axis=(0, 1))
        dwin = (dpre @ flat).reshape(batch, out_len, h, dim)
        demb = np.zeros((batch, out_len + h - 1, dim))
        for j in range(h):
            demb[:, j : j + out_len] += dwin[:, :, j, :]
        return demb


class MaxPoolLayer:
    """Per-filter maximum over positions; gradient goes to the first argmax."""

    def __init__(self):
        self._argmax: np.ndarray | None = None
        self._shape: tuple | None = None

    def forward(self, feature_map: np.ndarray) -> np.ndarray:
        if feature_map.shape[1] == 0:
            raise EmptySequenceError("cannot max-pool an empty sequence")
        self._argmax = feature_map.argmax(axis=1)  # (B, nf), first max on ties
        self._shape = feature_map.shape
        return feature_map.max(axis=1)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        batch, length, nf = self._shape
        dmap = np.zeros(self._shape)
        b_idx = np.arange(batch)[:, None]
        f_idx = np.arange(nf)[None, :]
        dmap[b_idx, self._argmax, f_idx] = dout
        return dmap


class DropoutLayer:
    """Inverted dropout: survivors are scaled by 1/(1-rate); eval is identity."""

    def __init__(self, rate: float):
        if not 0.0 <= rate < 1.0:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self._mask: np.ndarray | None = None

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None = None) -> np.ndarray:
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) >= self.rate) / keep
        return x * self._mask

    def backward(self, dout: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return dout
        return dout * self._mask


@dataclass(frozen=True)
class LstmState:
    """Final cell and hidden state of a recurrence."""

    c: np.ndarray
    h: np.ndarray


class LstmLayer(Layer):
    """Single-layer LSTM returning the final hidden state.

    Gate weights are stored per gate (input/forget/cell/output, each with an
    input-to-gate and hidden-to-gate matrix) and stacked once per call for
    the matmuls. Backward is full backprop through time.
    """

    GATES = ("i", "f", "g", "o")

    def __init__(
        self,
        in_dim: int,
        hidden: int = LSTM_UNITS,
        rng: np.random.Generator | None = None,
    ):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        self.in_dim = in_dim
        self.hidden = hidden
        for gate in self.GATES:
            self._register(f"W_i{gate}", _glorot(rng, (in_dim, hidden), in_dim, hidden))
        for gate in self.GATES:
            self._register(f"W_h{gate}", _glorot(rng, (hidden, hidden), hidden, hidden))
        for gate in self.GATES:
            # forget bias 1.0 keeps early cell memory open on short sequences
            init = np.ones(hidden) if gate == "f" else np.zeros(hidden)
            self._register(f"b_{gate}", init)
        self._cache: list[tuple] = []
        self._seq_shape: tuple | None = None
        self.final_state: LstmState | None = None

    def _stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        wx = np.hstack([self.params[f"W_i{g}"] for g in self.GATES])
        wh = np.hstack([self.params[f"W_h{g}"] for g in self.GATES])
        b = np.concatenate([self.params[f"b_{g}"] for g in self.GATES])
        return wx, wh, b

    def forward(self, seq: np.ndarray) -> np.ndarray:
        batch, steps, dim = seq.shape
        if dim != self.in_dim:
            raise DimensionMismatchError(f"expected input dim {self.in_dim}, got {dim}")
        if steps < 1:
            raise EmptySequenceError("LSTM needs at least one timestep")
        wx, wh, b = self._stacked()
        hsz = self.hidden
        h = np.zeros((batch, hsz))
        c = np.zeros((batch, hsz))
        self._cache = []
        self._seq_shape = seq.shape
        for t in range(steps):
            x_t = seq[:, t, :]
            pre = x_t @ wx + h @ wh + b
            i = sigmoid(pre[:, 0 * hsz : 1 * hsz])
            f = sigmoid(pre[:, 1 * hsz : 2 * hsz])
            g = np.tanh(pre[:, 2 * hsz : 3 * hsz])
            o = sigmoid(pre[:, 3 * hsz : 4 * hsz])
            c_new = f * c + i * g
            tanh_c = np.tanh(c_new)
            self._cache.append((x_t, h, c, i, f, g, o, tanh_c))
            c = c_new
            h = o * tanh_c
        self.final_state = LstmState(c=c, h=h)
        return h

    def backward(self, dh_final: np.ndarray) -> np.ndarray:
        wx, wh, _ = self._stacked()
        hsz = self.hidden
        batch, steps, _ = self._seq_shape
        dwx = np.zeros_like(wx)
        dwh = np.zeros_like(wh)
        db = np.zeros(4 * hsz)
        dseq = np.zeros(self._seq_shape)
        dh = dh_final.copy()
        dc = np.zeros((batch, hsz))
        for t in range(steps - 1, -1, -1):
            x_t, h_prev, c_prev, i, f, g, o, tanh_c = self._cache[t]
            do = dh * tanh_c
            dc = dc + dh * o * (1.0 - tanh_c**2)
            di = dc * g
            df = dc * c_prev
            dg = dc * i
            dpre = np.concatenate(
                [
                    di * i * (1.0 - i),
                    df * f * (1.0 - f),
                    dg * (1.0 - g**2),
                    do * o * (1.0 - o),
                ],
                axis=1,
            )
            dwx += x_t.T @ dpre
            dwh += h_prev.T @ dpre
            db += dpre.sum(axis=0)
            dseq[:, t, :] = dpre @ wx.T
            dh = dpre @ wh.T
            dc = dc * f
        for k, gate in enumerate(self.GATES):
            self.grads[f"W_i{gate}"] += dwx[:, k * hsz : (k + 1) * hsz]
            self.grads[f"W_h{gate}"] += dwh[:, k * hsz : (k + 1) * hsz]
            self.grads[f"b_{gate}"] += db[k * hsz : (k + 1) * hsz]
        return dseq


class DenseLayer(Layer):
    """Fully connected layer with optional ReLU (used by the feature head)."""

    def __init__(self, in_dim: int, out_dim: int, relu: bool = True, rng: np.random.Generator | None = None):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        self.in_dim = in_dim
        self.relu = relu
        self._register("W", _glorot(rng, (in_dim, out_dim), in_dim, out_dim))
        self._register("b", np.zeros(out_dim))
        self._x: np.ndarray | None = None
        self._pre: np.ndarray | None = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] != self.in_dim:
            raise DimensionMismatchError(f"expected input dim {self.in_dim}, got {x.shape[1]}")
        self._x = x
        pre = x @ self.params["W"] + self.params["b"]
        self._pre = pre
        return np.maximum(pre, 0.0) if self.relu else pre

    def backward(self, dout: np.ndarray) -> np.ndarray:
        dpre = dout * (self._pre > 0) if self.relu else dout
        self.grads["W"] += self._x.T @ dpre
        self.grads["b"] += dpre.sum(axis=0)
        return dpre @ self.params["W"].T


class DenseHead(Layer):
    """Final fully connected layer with sigmoid activation: one probability."""

    def __init__(self, in_dim: int, rng: np.random.Generator | None = None):
        super().__init__()
        rng = rng or np.random.default_rng(0)
        self.in_dim = in_dim
        self._register("w", _glorot(rng, (in_dim,), in_dim, 1))
        self._register("b", np.zeros(1))
        self._z: np.ndarray | None = None
        self._p: np.ndarray | None = None

    def forward(self, z: np.ndarray) -> np.ndarray:
        if z.shape[1] != self.in_dim:
            raise DimensionMismatchError(f"expected input dim {self.in_dim}, got {z.shape[1]}")
        self._z = z
        p = sigmoid(z @ self.params["w"] + self.params["b"][0])
        self._p = p
        return p

    def backward(self, dprob: np.ndarray) -> np.ndarray:
        p = self._p
        return self.backward_logit(dprob * p * (1.0 - p))

    def backward_logit(self, dlogit: np.ndarray) -> np.ndarray:
        """Backward from the pre-sigmoid gradient (used with the fused
        cross-entropy gradient p - y)."""
        self.grads["w"] += self._z.T @ dlogit
        self.grads["b"] += np.array([dlogit.sum()])
        return dlogit[:, None] * self.params["w"][None, :]


# -- single-sequence views of the batched layers ------------------------------


def embed(table: EmbeddingTable, ids) -> np.ndarray:
    """(L,) token ids -> (L, dim) embedding rows."""
    return table.forward(np.asarray(ids)[None, :])[0]


def conv1d_relu(layer: ConvLayer, emb: np.ndarray) -> np.ndarray:
    """(L, d) -> (L - h + 1, n_filters) convolved feature map."""
    return layer.forward(np.asarray(emb, dtype=np.float64)[None])[0]


def max_pool(feature_map: np.ndarray) -> np.ndarray:
    """(L, nf) -> (nf,) per-filter maximum."""
    feature_map = np.asarray(feature_map, dtype=np.float64)
    if feature_map.ndim != 2 or feature_map.shape[0] == 0:
        raise EmptySequenceError("max_pool expects a non-empty (L, nf) map")
    return feature_map.max(axis=0)


def dropout(x: np.ndarray, rate: float, mode: str, rng: np.random.Generator | None = None) -> np.ndarray:
    """Inverted dropout; mode is 'train' or 'eval' (eval is the identity)."""
    if mode not in ("train", "eval"):
        raise ValueError(f"mode must be 'train' or 'eval', got {mode!r}")
    layer = DropoutLayer(rate)
    return layer.forward(np.asarray(x, dtype=np.float64), train=(mode == "train"), rng=rng)


def lstm_forward(layer: LstmLayer, seq: np.ndarray) -> LstmState:
    """(T, in_dim) -> final LstmState from zero initial state."""
    layer.forward(np.asarray(seq, dtype=np.float64)[None])
    state = layer.final_state
    return LstmState(c=state.c[0], h=state.h[0])


def dense_sigmoid(head: DenseHead, z: np.ndarray) -> float:
    """(dim,) -> classification probability in (0, 1)."""
    return float(head.forward(np.asarray(z, dtype=np.float64)[None])[0])


def concat_features(h: np.ndarray, features: np.ndarray) -> np.ndarray:
    """Concatenate the sequence representation with the feature vector,
    sequence side first."""
    return np.concatenate([np.asarray(h, dtype=np.float64), np.asarray(features, dtype=np.float64)])
