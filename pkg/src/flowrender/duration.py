"""Duration length regulator.

Per-unit log-duration prediction (unit embedding, two same-padded 1-D
convolutions with ReLU and per-position normalisation, linear classifier),
expansion of units to frame rate, and interpolation to a requested length.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, FormatError, ShapeError, VocabularyError
from .numerics import lerp_rows

NORM_EPS = 1e-5


@dataclass
class UnitSequence:
    ids: np.ndarray
    durations: np.ndarray | None = None

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64).ravel()
        if self.ids.size == 0:
            raise ShapeError("unit sequence is empty")
        if self.durations is not None:
            self.durations = np.asarray(self.durations, dtype=np.int64).ravel()
            if self.durations.shape != self.ids.shape:
                raise ShapeError("durations and ids differ in length")
            if np.any(self.durations < 1):
                raise DomainError("every duration must be >= 1")

    def __len__(self):
        return self.ids.size


def format_units(units):
    lines = ["ids: " + ",".join(str(int(i)) for i in units.ids)]
    if units.durations is not None:
        lines.append("durations: " + ",".join(str(int(d)) for d in units.durations))
    return "\n".join(lines) + "\n"


def parse_units(text, source="<text>"):
    fields = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep or key.strip() not in ("ids", "durations"):
            raise FormatError(f"{source}: unexpected line {line!r}")
        try:
            fields[key.strip()] = [int(v) for v in value.split(",") if v.strip()]
        except ValueError as exc:
            raise FormatError(f"{source}: non-integer value in {key.strip()}") from exc
    if "ids" not in fields:
        raise FormatError(f"{source}: missing ids line")
    try:
        return UnitSequence(fields["ids"], fields.get("durations"))
    except ValueError as exc:
        raise FormatError(f"{source}: {exc}") from exc


def conv1d_same(x, w, b):
    """Same-length 1-D convolution. x: (L, C_in), w: (k, C_in, C_out)."""
    k = w.shape[0]
    pad = k // 2
    length = x.shape[0]
    xp = np.pad(x, ((pad, pad), (0, 0)))
    y = np.broadcast_to(b, (length, w.shape[2])).copy()
    for j in range(k):
        y += xp[j:j + length] @ w[j]
    return y


def _conv1d_same_backward(x, w, dy):
    k = w.shape[0]
    pad = k // 2
    length = x.shape[0]
    xp = np.pad(x, ((pad, pad), (0, 0)))
    dw = np.empty_like(w)
    dxp = np.zeros_like(xp)
    for j in range(k):
        dw[j] = xp[j:j + length].T @ dy
        dxp[j:j + length] += dy @ w[j].T
    return dxp[pad:pad + length], dw, dy.sum(axis=0)


def _norm(h):
    mu = h.mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(h.var(axis=1, keepdims=True) + NORM_EPS)
    return (h - mu) * inv, inv


def _norm_backward(n, inv, dn):
    return inv * (dn - dn.mean(axis=1, keepdims=True) - n * (dn * n).mean(axis=1, keepdims=True))


@dataclass
class DurationPredictor:
    table: np.ndarray  # (V, E)
    conv1_w: np.ndarray  # (k, E, H)
    conv1_b: np.ndarray
    conv2_w: np.ndarray  # (k, H, H)
    conv2_b: np.ndarray
    cls_w: np.ndarray  # (H,)
    cls_b: np.ndarray  # (1,)

    def __post_init__(self):
        if self.conv1_w.shape[0] % 2 == 0:
            raise ShapeError("convolution kernel size must be odd")

    @classmethod
    def init(cls, rng, vocab, embed_dim=32, hidden=64, kernel=3):
        if kernel % 2 == 0:
            raise ShapeError("convolution kernel size must be odd")
        return cls(
            table=rng.normal((vocab, embed_dim)),
            conv1_w=rng.normal((kernel, embed_dim, hidden)) * np.sqrt(2.0 / (kernel * embed_dim)),
            conv1_b=np.zeros(hidden),
            conv2_w=rng.normal((kernel, hidden, hidden)) * np.sqrt(2.0 / (kernel * hidden)),
            conv2_b=np.zeros(hidden),
            cls_w=rng.normal(hidden) / np.sqrt(hidden),
            cls_b=np.zeros(1),
        )

    @property
    def vocab(self):
        return self.table.shape[0]

    def parameters(self):
        return {
            "table": self.table,
            "conv1.w": self.conv1_w,
            "conv1.b": self.conv1_b,
            "conv2.w": self.conv2_w,
            "conv2.b": self.conv2_b,
            "cls.w": self.cls_w,
            "cls.b": self.cls_b,
        }

    def _check_ids(self, ids):
        if ids.min() < 0 or ids.max() >= self.vocab:
            raise VocabularyError(f"unit id outside [0, {self.vocab})")

    def forward(self, ids):
        ids = np.asarray(ids, dtype=np.int64)
        self._check_ids(ids)
        e = self.table[ids]
        z1 = conv1d_same(e, self.conv1_w, self.conv1_b)
        n1, inv1 = _norm(np.maximum(z1, 0.0))
        z2 = conv1d_same(n1, self.conv2_w, self.conv2_b)
        n2, inv2 = _norm(np.maximum(z2, 0.0))
        out = n2 @ self.cls_w + self.cls_b[0]
        return out, (ids, e, z1, n1, inv1, z2, n2, inv2)

    def backward(self, cache, dout):
        ids, e, z1, n1, inv1, z2, n2, inv2 = cache
        dout = np.asarray(dout, dtype=np.float64)
        grads = {"cls.w": n2.T @ dout, "cls.b": np.array([dout.sum()])}
        dz2 = _norm_backward(n2, inv2, np.outer(dout, self.cls_w)) * (z2 > 0)
        dn1, grads["conv2.w"], grads["conv2.b"] = _conv1d_same_backward(n1, self.conv2_w, dz2)
        dz1 = _norm_backward(n1, inv1, dn1) * (z1 > 0)
        de, grads["conv1.w"], grads["conv1.b"] = _conv1d_same_backward(e, self.conv1_w, dz1)
        dtable = np.zeros_like(self.table)
        np.add.at(dtable, ids, de)
        grads["table"] = dtable
        return grads


def predict_log_durations(p, units):
    ids = units.ids if isinstance(units, UnitSequence) else np.asarray(units, dtype=np.int64)
    return p.forward(ids)[0]


def duration_loss(pred_log, true_durations):
    pred_log = np.asarray(pred_log, dtype=np.float64)
    true = np.asarray(true_durations, dtype=np.float64)
    if pred_log.shape != true.shape:
        raise ShapeError(f"{pred_log.shape} predictions for {true.shape} durations")
    if np.any(true <= 0):
        raise DomainError("true durations must be positive")
    return float(np.mean((pred_log - np.log(true)) ** 2))


def duration_loss_grad(pred_log, true_durations):
    pred_log = np.asarray(pred_log, dtype=np.float64)
    true = np.asarray(true_durations, dtype=np.float64)
    return 2.0 * (pred_log - np.log(true)) / pred_log.size


def quantize_durations(pred_log):
    d = np.floor(np.exp(np.asarray(pred_log, dtype=np.float64)) + 0.5)
    return np.maximum(d, 1).astype(np.int64)


def length_regulate(units):
    """Repeat each unit id by its duration, giving one id per frame."""
    if units.durations is None:
        raise ContractError("length_regulate needs durations")
    return np.repeat(units.ids, units.durations)


def regulate_to_source_length(expanded_features, source_frames):
    if source_frames < 1:
        raise ShapeError("source_frames must be >= 1")
    return lerp_rows(expanded_features, source_frames)
