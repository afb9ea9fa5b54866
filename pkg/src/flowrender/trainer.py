"""Optimisation of the flow-matching objective and of the duration regulator."""

import time
from dataclasses import dataclass, field

import numpy as np

from . import guidance
from .duration import duration_loss, duration_loss_grad, length_regulate
from .errors import ConfigError, DivergenceError, EmptyInputError
from .field import backward_rows, forward_rows
from .flow_path import DEFAULT_SIGMA, PathConfig, sample_training_point
from .numerics import Rng


@dataclass
class TrainConfig:
    steps: int = 2000
    batch: int = 8
    learning_rate: float = 1e-4
    optimizer: str = "adam"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    sigma: float = DEFAULT_SIGMA
    mask_fraction_range: tuple = guidance.DEFAULT_MASK_RANGE
    audio_guidance: bool = True
    visual_guidance: bool = True

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError("steps must be >= 1")
        if self.batch < 1:
            raise ConfigError("batch must be >= 1")
        if not self.learning_rate >= 0:
            raise ConfigError("learning_rate must be non-negative")
        if self.optimizer not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        PathConfig(self.sigma)

    @property
    def path(self):
        return PathConfig(self.sigma)


@dataclass
class TrainReport:
    losses: list
    model: object
    wall_clock: float = 0.0
    extra: dict = field(default_factory=dict)


class SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        for name, p in params.items():
            p -= self.lr * grads[name]


class Adam:
    """Adam with bias-corrected moments."""

    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name in sorted(params):
            g = grads[name]
            m = self.m.setdefault(name, np.zeros_like(g))
            v = self.v.setdefault(name, np.zeros_like(g))
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[name] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(cfg):
    if cfg.optimizer == "sgd":
        return SGD(cfg.learning_rate)
    return Adam(cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.eps)


def cfm_loss(net, x1, bundle, rng, cfg=PathConfig()):
    """Flow-matching loss for one target and its gradients.

    Draws (t, x0), builds the path point and target velocity, and returns
    the mean squared error of the field against it together with the
    exact parameter and bundle gradients.
    """
    state, target = sample_training_point(x1, rng, cfg)
    rows = bundle.rows if hasattr(bundle, "rows") else np.asarray(bundle)
    pred, acts = forward_rows(net, state.x, state.t, rows)
    diff = pred - target
    loss = float(np.mean(diff ** 2))
    return loss, backward_rows(net, acts, 2.0 * diff / diff.size)


@dataclass
class _Prepared:
    mel: np.ndarray
    frame_ids: np.ndarray
    speaker: guidance.SpeakerEmbedding
    emotion: np.ndarray  # raw rows on the mel grid


def _prepare(data):
    """Precompute per-utterance training inputs; speakers use averaged embeddings."""
    utts = list(data)
    if not utts:
        raise EmptyInputError("training corpus is empty")
    by_speaker = {}
    for u in utts:
        by_speaker.setdefault(u.speaker, []).append(u.embedding)
    averaged = {spk: guidance.average_speaker(vecs) for spk, vecs in by_speaker.items()}
    prepared = []
    for u in utts:
        frames = u.mel.shape[0]
        frame_ids = length_regulate(u.units)
        if frame_ids.size != frames:
            raise ValueError(f"utterance {u.id}: {frame_ids.size} unit frames for {frames} mel frames")
        prepared.append(_Prepared(u.mel, frame_ids, averaged[u.speaker],
                                  guidance.resample_emotion(u.emotion, frames)))
    return prepared


def _cfm_batch(model, items, rng, cfg):
    path = cfg.path
    xs, ts, targets, weights = [], [], [], []
    ids, spk_raw, emo_raw, prompts = [], [], [], []
    for item in items:
        state, target = sample_training_point(item.mel, rng, path)
        frames = item.mel.shape[0]
        xs.append(state.x)
        ts.append(np.full(frames, state.t))
        targets.append(target)
        weights.append(np.full(frames, 1.0 / (len(items) * target.size)))
        ids.append(item.frame_ids)
        spk_raw.append(np.broadcast_to(item.speaker.vec, (frames, item.speaker.vec.size)))
        emo_raw.append(item.emotion)
        prompts.append(guidance.mask_prompt(item.mel, rng, cfg.mask_fraction_range))
    frame_ids = np.concatenate(ids)
    spk_rows = np.concatenate(spk_raw)
    emo_rows = np.concatenate(emo_raw)
    bundle = guidance.assemble(
        model.embed_units(frame_ids),
        guidance.project(model.spk_proj, spk_rows),
        guidance.project(model.emo_proj, emo_rows),
        np.concatenate(prompts), cfg.audio_guidance, cfg.visual_guidance)
    pred, acts = forward_rows(model.field, np.concatenate(xs), np.concatenate(ts), bundle.rows)
    w = np.concatenate(weights)[:, None]
    diff = pred - np.concatenate(targets)
    loss = float(np.sum(w * diff ** 2))
    fg = backward_rows(model.field, acts, 2.0 * w * diff)
    grads = {f"field.{k}": v for k, v in fg.params.items()}
    grads.update(model.route_bundle_grad(fg.bundle, frame_ids, spk_rows, emo_rows,
                                         cfg.audio_guidance, cfg.visual_guidance))
    return loss, grads


def train_cfm(data, cfg, model):
    """Fit the renderer (field, guidance projections, unit table) in place.

    ``data`` is a sequence of utterances exposing ``speaker``, ``units``
    (with durations), ``mel``, ``emotion`` and ``embedding``. Speaker
    conditioning during training always uses the per-speaker average.
    """
    items = _prepare(data)
    rng = Rng(cfg.seed)
    params = model.renderer_parameters()
    opt = make_optimizer(cfg)
    losses = []
    start = time.perf_counter()
    for step in range(cfg.steps):
        picks = rng.integers(0, len(items), size=cfg.batch)
        loss, grads = _cfm_batch(model, [items[i] for i in picks], rng, cfg)
        if not np.isfinite(loss):
            raise DivergenceError("flow-matching loss is not finite", step)
        losses.append(loss)
        opt.step(params, grads)
    sources = {it.speaker.source for it in items}
    return TrainReport(losses, model, time.perf_counter() - start,
                       extra={"speaker_sources": sources})


def train_duration(data, cfg, model):
    """Fit the duration predictor of ``model`` on log-domain MSE, in place."""
    seqs = [getattr(u, "units", u) for u in data]
    if not seqs:
        raise EmptyInputError("training corpus is empty")
    pred = model.duration
    rng = Rng(cfg.seed)
    params = pred.parameters()
    opt = make_optimizer(cfg)
    losses = []
    start = time.perf_counter()
    for step in range(cfg.steps):
        picks = rng.integers(0, len(seqs), size=cfg.batch)
        total = 0.0
        grads = {k: np.zeros_like(v) for k, v in params.items()}
        for i in picks:
            units = seqs[i]
            out, cache = pred.forward(units.ids)
            total += duration_loss(out, units.durations)
            g = pred.backward(cache, duration_loss_grad(out, units.durations))
            for k in grads:
                grads[k] += g[k]
        loss = total / cfg.batch
        if not np.isfinite(loss):
            raise DivergenceError("duration loss is not finite", step)
        losses.append(loss)
        for k in grads:
            grads[k] /= cfg.batch
        opt.step(params, grads)
    return TrainReport(losses, model, time.perf_counter() - start)


def format_loss_trace(losses):
    return "".join(f"{i} {loss!r}\n" for i, loss in enumerate(losses))
