"""The complete renderer parameter set and the conditioning it builds."""

from dataclasses import dataclass

import numpy as np

from . import guidance
from .duration import DurationPredictor
from .field import DEFAULT_HIDDEN, DEFAULT_TIME_DIM, FieldNet
from .guidance import EMOTION_DIM, GUIDANCE_DIM, SPEAKER_DIM, Projection
from .numerics import Rng


@dataclass
class RenderModel:
    field: FieldNet
    spk_proj: Projection
    emo_proj: Projection
    unit_table: np.ndarray  # (V, E)
    duration: DurationPredictor

    @classmethod
    def init(cls, seed, mel_dim=80, vocab=50, unit_dim=32, hidden=DEFAULT_HIDDEN,
             time_dim=DEFAULT_TIME_DIM, speaker_dim=SPEAKER_DIM, emotion_dim=EMOTION_DIM,
             guide_dim=GUIDANCE_DIM, duration_dim=32, duration_hidden=64, duration_kernel=3):
        rng = Rng(seed)
        cond_dim = unit_dim + 2 * guide_dim + mel_dim
        return cls(
            field=FieldNet.init(rng, mel_dim, cond_dim, hidden, time_dim),
            spk_proj=Projection.init(rng, speaker_dim, guide_dim),
            emo_proj=Projection.init(rng, emotion_dim, guide_dim),
            unit_table=rng.normal((vocab, unit_dim)),
            duration=DurationPredictor.init(rng, vocab, duration_dim, duration_hidden, duration_kernel),
        )

    @property
    def mel_dim(self):
        return self.field.mel_dim

    @property
    def unit_dim(self):
        return self.unit_table.shape[1]

    @property
    def guide_dim(self):
        return self.spk_proj.out_dim

    @property
    def vocab(self):
        return self.unit_table.shape[0]

    def parameters(self):
        params = {f"field.{k}": v for k, v in self.field.parameters().items()}
        params.update({f"guide.spk.{k}": v for k, v in self.spk_proj.parameters().items()})
        params.update({f"guide.emo.{k}": v for k, v in self.emo_proj.parameters().items()})
        params["units.table"] = self.unit_table
        params.update({f"dur.{k}": v for k, v in self.duration.parameters().items()})
        return params

    def renderer_parameters(self):
        return {k: v for k, v in self.parameters().items() if not k.startswith("dur.")}

    def duration_parameters(self):
        return {k: v for k, v in self.parameters().items() if k.startswith("dur.")}

    def embed_units(self, frame_ids):
        return self.unit_table[np.asarray(frame_ids, dtype=np.int64)]

    def conditioning(self, unit_rows, speaker_vec, emotion_rows, prompt,
                     audio_guidance=True, visual_guidance=True):
        """Project raw guidance and assemble the per-frame bundle."""
        spk = guidance.project(self.spk_proj, speaker_vec)
        emo = guidance.project(self.emo_proj, emotion_rows)
        return guidance.assemble(unit_rows, spk, emo, prompt, audio_guidance, visual_guidance)

    def route_bundle_grad(self, dbundle, frame_ids, speaker_rows, emotion_rows,
                          audio_guidance=True, visual_guidance=True):
        """Push d(loss)/d(bundle) into the unit table and guidance projections.

        ``speaker_rows`` and ``emotion_rows`` are the raw vectors behind every
        bundle row (speaker repeated per frame).
        """
        e, g = self.unit_dim, self.guide_dim
        grads = {}
        dtable = np.zeros_like(self.unit_table)
        np.add.at(dtable, frame_ids, dbundle[:, :e])
        grads["units.table"] = dtable
        for name, rows, on, lo in (("spk", speaker_rows, audio_guidance, e),
                                   ("emo", emotion_rows, visual_guidance, e + g)):
            proj = self.spk_proj if name == "spk" else self.emo_proj
            if on:
                gb = dbundle[:, lo:lo + g]
                grads[f"guide.{name}.w"] = gb.T @ rows
                grads[f"guide.{name}.b"] = gb.sum(axis=0)
            else:
                grads[f"guide.{name}.w"] = np.zeros_like(proj.weight)
                grads[f"guide.{name}.b"] = np.zeros_like(proj.bias)
        return grads

    def copy(self):
        return model_from_parameters({k: v.copy() for k, v in self.parameters().items()})


def model_from_parameters(params):
    """Rebuild a model from named arrays; every width is implied by the shapes."""
    n_layers = sum(1 for k in params if k.startswith("field.w"))
    mel_dim = params[f"field.w{n_layers - 1}"].shape[1]
    cond_dim = params["units.table"].shape[1] + 2 * params["guide.spk.w"].shape[0] + mel_dim
    time_dim = params["field.w0"].shape[0] - mel_dim - cond_dim
    net = FieldNet([params[f"field.w{i}"] for i in range(n_layers)],
                   [params[f"field.b{i}"] for i in range(n_layers)], time_dim)
    return RenderModel(
        field=net,
        spk_proj=Projection(params["guide.spk.w"], params["guide.spk.b"]),
        emo_proj=Projection(params["guide.emo.w"], params["guide.emo.b"]),
        unit_table=params["units.table"],
        duration=DurationPredictor(
            table=params["dur.table"],
            conv1_w=params["dur.conv1.w"], conv1_b=params["dur.conv1.b"],
            conv2_w=params["dur.conv2.w"], conv2_b=params["dur.conv2.b"],
            cls_w=params["dur.cls.w"], cls_b=params["dur.cls.b"]),
    )
