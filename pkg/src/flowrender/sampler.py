"""Fixed-step ODE integration of a learned field, and the full synthesis path."""

from dataclasses import dataclass

import numpy as np

from . import guidance
from .duration import UnitSequence, length_regulate, predict_log_durations, quantize_durations, \
    regulate_to_source_length
from .errors import ConfigError, DivergenceError, ShapeError
from .field import FieldNet, forward_rows
from .guidance import SpeakerEmbedding, SpeakerSource
from .numerics import Rng, sample_standard_normal

DEFAULT_STEPS = 32


@dataclass(frozen=True)
class SampleConfig:
    steps: int = DEFAULT_STEPS
    method: str = "euler"
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("sampler steps must be >= 1")
        if self.method not in ("euler", "midpoint"):
            raise ConfigError(f"unknown integration method {self.method!r}")


def _field_fn(net, bundle):
    if isinstance(net, FieldNet):
        rows = bundle.rows if hasattr(bundle, "rows") else np.asarray(bundle)
        return lambda x, t: forward_rows(net, x, t, rows)[0]
    # any callable v(x, t, bundle) stands in for a trained network
    return lambda x, t: net(x, t, bundle)


def integrate(net, bundle, shape, cfg=SampleConfig(), x0=None):
    """Transport a N(0, I) draw from t=0 to t=1 along the field.

    ``x0`` overrides the seeded noise draw when given.
    """
    frames, dim = shape
    if bundle is not None and hasattr(bundle, "rows") and bundle.rows.shape[0] != frames:
        raise ShapeError(f"bundle has {bundle.rows.shape[0]} rows for {frames} frames")
    f = _field_fn(net, bundle)
    x = sample_standard_normal(Rng(cfg.seed), frames, dim) if x0 is None else np.array(x0, dtype=np.float64)
    h = 1.0 / cfg.steps
    for n in range(cfg.steps):
        t = n * h
        if cfg.method == "euler":
            x = x + h * f(x, t)
        else:
            x_mid = x + 0.5 * h * f(x, t)
            x = x + h * f(x_mid, t + 0.5 * h)
        if not np.all(np.isfinite(x)):
            raise DivergenceError("ODE state became non-finite", n)
    return x


def synthesize(model, units, spk, emo, source_frames, cfg=SampleConfig(), prompt=None,
               audio_guidance=True, visual_guidance=True):
    """Render a mel matrix with exactly ``source_frames`` rows.

    Durations come from ``units`` when present, otherwise from the
    predictor. The expanded unit embeddings are interpolated to the source
    length. The prompt is fully masked unless a reference is supplied.
    """
    if source_frames < 1:
        raise ShapeError("source_frames must be >= 1")
    if not isinstance(units, UnitSequence):
        units = UnitSequence(units)
    if units.durations is None:
        units = UnitSequence(units.ids, quantize_durations(predict_log_durations(model.duration, units)))
    unit_rows = regulate_to_source_length(model.embed_units(length_regulate(units)), source_frames)
    if isinstance(spk, SpeakerEmbedding):
        spk_vec = spk.vec
    else:
        spk_vec = np.asarray(spk, dtype=np.float64).ravel()
        spk = SpeakerEmbedding(spk_vec, SpeakerSource.SINGLE_UTTERANCE)
    emo_rows = guidance.resample_emotion(emo, source_frames)
    if prompt is None:
        prompt = np.zeros((source_frames, model.mel_dim))
    else:
        prompt = regulate_to_source_length(prompt, source_frames)
    bundle = model.conditioning(unit_rows, spk_vec, emo_rows, prompt, audio_guidance, visual_guidance)
    return integrate(model.field, bundle, (source_frames, model.mel_dim), cfg)
