"""Speaker and emotion conditioning, prompt masking and per-frame assembly."""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import EmptyInputError, ShapeError

SPEAKER_DIM = 192
EMOTION_DIM = 256
GUIDANCE_DIM = 80
DEFAULT_MASK_RANGE = (0.7, 1.0)


class SpeakerSource(Enum):
    AVERAGED = "averaged"
    SINGLE_UTTERANCE = "single_utterance"


@dataclass
class SpeakerEmbedding:
    vec: np.ndarray
    source: SpeakerSource = SpeakerSource.SINGLE_UTTERANCE


@dataclass
class EmotionTrack:
    frames: np.ndarray  # (K, emotion_dim)
    frame_rate: float = 25.0

    def __post_init__(self):
        self.frames = np.atleast_2d(np.asarray(self.frames, dtype=np.float64))
        if self.frames.shape[0] == 0:
            raise EmptyInputError("emotion track has no frames")


@dataclass
class Projection:
    weight: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)

    @classmethod
    def init(cls, rng, in_dim, out_dim=GUIDANCE_DIM):
        w = rng.normal((out_dim, in_dim)) / np.sqrt(in_dim)
        return cls(w, np.zeros(out_dim))

    @property
    def in_dim(self):
        return self.weight.shape[1]

    @property
    def out_dim(self):
        return self.weight.shape[0]

    def parameters(self):
        return {"w": self.weight, "b": self.bias}


@dataclass
class ConditioningBundle:
    rows: np.ndarray  # (T, E + 80 + 80 + D)
    unit_dim: int
    guide_dim: int
    mel_dim: int
    audio_guidance: bool = True
    visual_guidance: bool = True

    @property
    def frames(self):
        return self.rows.shape[0]

    @property
    def width(self):
        return self.rows.shape[1]

    def block(self, name):
        e, g = self.unit_dim, self.guide_dim
        spans = {
            "unit": (0, e),
            "speaker": (e, e + g),
            "emotion": (e + g, e + 2 * g),
            "prompt": (e + 2 * g, e + 2 * g + self.mel_dim),
        }
        lo, hi = spans[name]
        return self.rows[:, lo:hi]


def average_speaker(utts):
    if len(utts) == 0:
        raise EmptyInputError("no utterance embeddings to average")
    vecs = [np.asarray(u, dtype=np.float64).ravel() for u in utts]
    if len({v.shape for v in vecs}) != 1:
        raise ShapeError("utterance embeddings have different dimensions")
    return SpeakerEmbedding(np.mean(vecs, axis=0), SpeakerSource.AVERAGED)


def project(p, v):
    """Affine map weight @ v + bias. ``v`` may also be a (T, in_dim) stack."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != p.in_dim:
        raise ShapeError(f"projection expects dim {p.in_dim}, got {v.shape[-1]}")
    return v @ p.weight.T + p.bias


def nearest_indices(source_frames, target_frames):
    centres = (np.arange(target_frames) + 0.5) * source_frames / target_frames
    return np.minimum(np.floor(centres).astype(np.int64), source_frames - 1)


def resample_emotion(track, target_frames):
    """Nearest-neighbour resampling of the emotion frames onto the mel grid."""
    if target_frames < 1:
        raise ShapeError("target_frames must be >= 1")
    frames = track.frames if isinstance(track, EmotionTrack) else np.atleast_2d(track)
    return frames[nearest_indices(frames.shape[0], target_frames)]


def mask_prompt(x1, rng, mask_fraction_range=DEFAULT_MASK_RANGE):
    """Copy of ``x1`` with one contiguous span of frames zeroed."""
    lo, hi = mask_fraction_range
    if not 0.0 <= lo <= hi <= 1.0:
        raise ValueError(f"bad mask range {mask_fraction_range}")
    x1 = np.asarray(x1, dtype=np.float64)
    frames = x1.shape[0]
    frac = lo if lo == hi else float(rng.uniform(low=lo, high=hi))
    n_mask = int(np.floor(frac * frames + 0.5))
    start = int(rng.integers(0, frames - n_mask + 1))
    out = x1.copy()
    out[start:start + n_mask] = 0.0
    return out


def assemble(units_expanded, spk, emo, prompt, audio_guidance=True, visual_guidance=True):
    """Concatenate the per-frame conditioning blocks.

    ``spk`` is the already-projected speaker vector (guide_dim,) and ``emo``
    the projected, resampled emotion rows (T, guide_dim). A disabled
    modality is written as an all-zero block.
    """
    units_expanded = np.atleast_2d(np.asarray(units_expanded, dtype=np.float64))
    emo = np.atleast_2d(np.asarray(emo, dtype=np.float64))
    prompt = np.atleast_2d(np.asarray(prompt, dtype=np.float64))
    spk = np.asarray(spk, dtype=np.float64)
    frames = units_expanded.shape[0]
    if emo.shape[0] != frames or prompt.shape[0] != frames:
        raise ShapeError(
            f"frame counts differ: units {frames}, emotion {emo.shape[0]}, prompt {prompt.shape[0]}")
    guide = spk.shape[-1]
    if emo.shape[1] != guide:
        raise ShapeError("speaker and emotion blocks must share the guidance width")
    # a (T, guide) speaker matrix is accepted for stacked multi-utterance batches
    spk_block = np.broadcast_to(spk, (frames, guide)) if audio_guidance else np.zeros((frames, guide))
    emo_block = emo if visual_guidance else np.zeros_like(emo)
    rows = np.concatenate([units_expanded, spk_block, emo_block, prompt], axis=1)
    return ConditioningBundle(rows, units_expanded.shape[1], guide, prompt.shape[1],
                              audio_guidance, visual_guidance)
