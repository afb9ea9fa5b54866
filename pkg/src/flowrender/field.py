"""Per-frame conditional vector field with hand-written reverse mode.

Each output frame is an MLP of (state frame, sinusoidal time features,
conditioning row). Hidden layers use tanh; the output layer is linear.
Weights are stored (in, out) so a stack of frames multiplies on the left.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ShapeError

DEFAULT_TIME_DIM = 16
DEFAULT_HIDDEN = (128, 128)


def time_frequencies(dim):
    if dim < 2 or dim % 2:
        raise ConfigError(f"time feature width must be even and >= 2, got {dim}")
    half = dim // 2
    # geometric ladder centred (in log space) on 2*pi
    return 2.0 * np.pi * 2.0 ** (np.arange(half) - (half - 1) / 2.0)


def time_features(t, dim=DEFAULT_TIME_DIM):
    """[sin(w_j t) ..., cos(w_j t) ...]; ``t`` may be a scalar or a vector of row times."""
    w = time_frequencies(dim)
    arg = np.multiply.outer(np.asarray(t, dtype=np.float64), w)
    return np.concatenate([np.sin(arg), np.cos(arg)], axis=-1)


@dataclass
class FieldNet:
    weights: list
    biases: list
    time_dim: int = DEFAULT_TIME_DIM
    activation: str = "tanh"

    def __post_init__(self):
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeError("need one bias per weight and at least one layer")
        for a, b in zip(self.weights[:-1], self.weights[1:]):
            if a.shape[1] != b.shape[0]:
                raise ShapeError(f"layer shapes do not chain: {a.shape} -> {b.shape}")
        if self.activation not in ("tanh", "identity"):
            raise ConfigError(f"unknown activation {self.activation!r}")
        time_frequencies(self.time_dim)

    @classmethod
    def init(cls, rng, mel_dim, cond_dim, hidden=DEFAULT_HIDDEN, time_dim=DEFAULT_TIME_DIM):
        widths = [mel_dim + time_dim + cond_dim, *hidden, mel_dim]
        weights = [rng.normal((a, b)) / np.sqrt(a) for a, b in zip(widths[:-1], widths[1:])]
        biases = [np.zeros(b) for b in widths[1:]]
        return cls(weights, biases, time_dim)

    @property
    def mel_dim(self):
        return self.weights[-1].shape[1]

    @property
    def in_dim(self):
        return self.weights[0].shape[0]

    @property
    def cond_dim(self):
        return self.in_dim - self.mel_dim - self.time_dim

    def parameters(self):
        params = {}
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            params[f"w{i}"] = w
            params[f"b{i}"] = b
        return params

    def _act(self, z):
        return np.tanh(z) if self.activation == "tanh" else z


@dataclass
class FieldGradients:
    params: dict
    bundle: np.ndarray = field(default=None)
    x: np.ndarray = field(default=None)


def _rows(bundle):
    return bundle.rows if hasattr(bundle, "rows") else np.atleast_2d(np.asarray(bundle, dtype=np.float64))


def forward_rows(net, x, t, cond):
    """Evaluate the field on stacked frames; ``t`` is a scalar or per-row vector.

    Returns the (N, mel_dim) output and the activation cache for backward.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if x.shape[1] != net.mel_dim:
        raise ShapeError(f"state width {x.shape[1]} != mel dim {net.mel_dim}")
    if cond.shape[0] != x.shape[0]:
        raise ShapeError(f"conditioning has {cond.shape[0]} rows, state has {x.shape[0]}")
    if cond.shape[1] != net.cond_dim:
        raise ShapeError(f"conditioning width {cond.shape[1]} != {net.cond_dim}")
    tf = time_features(t, net.time_dim)
    if tf.ndim == 1:
        tf = np.broadcast_to(tf, (x.shape[0], net.time_dim))
    h = np.concatenate([x, tf, cond], axis=1)
    acts = [h]
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        h = h @ w + b
        if i < last:
            h = net._act(h)
        acts.append(h)
    return h, acts


def backward_rows(net, acts, upstream):
    """Reverse pass for :func:`forward_rows` given d(objective)/d(output)."""
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != acts[-1].shape:
        raise ShapeError(f"upstream {upstream.shape} != output {acts[-1].shape}")
    grads = {}
    g = upstream
    for i in range(len(net.weights) - 1, -1, -1):
        if i < len(net.weights) - 1 and net.activation == "tanh":
            g = g * (1.0 - acts[i + 1] ** 2)
        grads[f"w{i}"] = acts[i].T @ g
        grads[f"b{i}"] = g.sum(axis=0)
        g = g @ net.weights[i].T
    d, f = net.mel_dim, net.time_dim
    return FieldGradients(grads, bundle=g[:, d + f:], x=g[:, :d])


def forward(net, state, bundle):
    """Predicted velocity for every frame of ``state.x``."""
    return forward_rows(net, state.x, state.t, _rows(bundle))[0]


def backward(net, state, bundle, upstream):
    """Gradients of <forward(net, state, bundle), upstream> w.r.t. parameters and bundle."""
    _, acts = forward_rows(net, state.x, state.t, _rows(bundle))
    return backward_rows(net, acts, upstream)
