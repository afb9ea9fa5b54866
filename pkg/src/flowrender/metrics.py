"""Objective metrics: DTW alignment, mel cepstral distortion and a cosine speaker score."""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, ShapeError
from .numerics import dct2

MCD_ALPHA = 10.0 * np.sqrt(2.0) / np.log(10.0)
DEFAULT_CEPSTRA = 13
LOG_FLOOR = 1e-5


@dataclass
class DtwResult:
    total_cost: float
    path: np.ndarray  # (path_length, 2) index pairs

    @property
    def path_length(self):
        return len(self.path)


def pairwise_euclidean(a, b):
    diff = a[:, None, :] - b[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _sequence(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise ShapeError(f"{name} must be a non-empty (T, dim) sequence")
    return x


def dtw(a, b):
    """Minimum-cost monotone alignment with steps (1,0), (0,1), (1,1)."""
    a = _sequence(a, "a")
    b = _sequence(b, "b")
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"feature dims differ: {a.shape[1]} vs {b.shape[1]}")
    acc = _kernels.dtw_accumulate(pairwise_euclidean(a, b))
    return DtwResult(float(acc[-1, -1]), _kernels.dtw_backtrack(acc))


def mel_cepstra(mel, keep=DEFAULT_CEPSTRA, floor=LOG_FLOOR):
    """Cepstral coefficients 1..keep-1 of each log-mel frame."""
    mel = np.asarray(mel, dtype=np.float64)
    if keep < 2:
        raise ShapeError("need at least two cepstra (the 0th is dropped)")
    if floor:
        mel = np.maximum(mel, floor)
    elif np.any(mel <= 0):
        raise DomainError("mel values must be positive without a log floor")
    return dct2(np.log(mel), keep)[:, 1:]


def mcd_dtw(ref, hyp, keep=DEFAULT_CEPSTRA, floor=LOG_FLOOR):
    ref = np.atleast_2d(ref)
    hyp = np.atleast_2d(hyp)
    if ref.shape[1] != hyp.shape[1]:
        raise ShapeError(f"mel dims differ: {ref.shape[1]} vs {hyp.shape[1]}")
    res = dtw(mel_cepstra(ref, keep, floor), mel_cepstra(hyp, keep, floor))
    return MCD_ALPHA * res.total_cost / res.path_length


def mcd_dtw_sl(ref, hyp, keep=DEFAULT_CEPSTRA, floor=LOG_FLOOR):
    """MCD-DTW scaled by the longer-to-shorter length ratio."""
    ref = np.atleast_2d(ref)
    hyp = np.atleast_2d(hyp)
    t_ref, t_hyp = ref.shape[0], hyp.shape[0]
    return mcd_dtw(ref, hyp, keep, floor) * max(t_ref, t_hyp) / min(t_ref, t_hyp)


def cosine_ss(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f"vector dims differ: {a.size} vs {b.size}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise DomainError("cosine similarity of a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))
