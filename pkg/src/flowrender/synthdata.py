"""Synthetic speaker/emotion/unit corpus with known ground truth.

Every mel frame is::

    template[unit at frame] + speaker signature + emotion offset + noise

so the noiseless target of any (units, speaker, emotion) request is known
exactly and a speaker's signature can be read back from a mel matrix.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .duration import UnitSequence, format_units, length_regulate, parse_units
from .errors import ConfigError, FormatError
from .guidance import EMOTION_DIM, SPEAKER_DIM, EmotionTrack, nearest_indices
from .numerics import Rng, load_matrix, save_matrix

MEL_FPS = 50.0
EMOTION_FPS = 25.0
DURATION_RANGE = (2, 8)
HELD_OUT_ROUND = 5


@dataclass
class ToySpeaker:
    id: str
    signature: np.ndarray
    raw_embedding: np.ndarray


@dataclass
class ToyUtterance:
    id: str
    speaker: str
    units: UnitSequence
    mel: np.ndarray
    emotion: EmotionTrack
    embedding: np.ndarray
    clean: np.ndarray
    held_out: bool = False


@dataclass
class Corpus:
    speakers: list
    utterances: list
    templates: np.ndarray  # (V, D)
    emotion_direction: np.ndarray  # (D,)
    emotion_lift: np.ndarray  # (emotion_dim,)
    noise: float
    seed: int = 0
    _by_id: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_id = {s.id: s for s in self.speakers}

    @property
    def mel_dim(self):
        return self.templates.shape[1]

    @property
    def vocab(self):
        return self.templates.shape[0]

    def speaker(self, speaker_id):
        return self._by_id[speaker_id]

    def train(self):
        return [u for u in self.utterances if not u.held_out]

    def held_out(self):
        return [u for u in self.utterances if u.held_out]

    def emotion_offsets(self, utt, frames=None):
        frames = utt.mel.shape[0] if frames is None else frames
        # scalar emotion intensity per video frame, recovered from the lifted track
        level = utt.emotion.frames @ self.emotion_lift / (self.emotion_lift @ self.emotion_lift)
        idx = nearest_indices(level.size, frames)
        return np.outer(level[idx], self.emotion_direction)

    def content_mean(self, utt):
        """Time-averaged template and emotion contribution, i.e. everything but the speaker."""
        frame_ids = length_regulate(utt.units)
        return self.templates[frame_ids].mean(axis=0) + self.emotion_offsets(utt).mean(axis=0)


def speaker_signature_probe(mel, template_means):
    return np.asarray(mel, dtype=np.float64).mean(axis=0) - np.asarray(template_means, dtype=np.float64)


def _signatures(rng, count, dim, scale=0.4, max_cos=0.5):
    while True:
        sig = rng.normal((count, dim)) * scale
        unit = sig / np.linalg.norm(sig, axis=1, keepdims=True)
        cos = unit @ unit.T
        if np.all(cos[~np.eye(count, dtype=bool)] < max_cos):
            return sig


def _lift(rng, out_dim, in_dim):
    q, _ = np.linalg.qr(rng.normal((out_dim, in_dim)))
    return q


def _unit_ids(rng, length, vocab):
    ids = [int(rng.integers(0, vocab))]
    while len(ids) < length:
        nxt = int(rng.integers(0, vocab - 1))
        ids.append(nxt if nxt < ids[-1] else nxt + 1)  # never repeat the previous unit
    return np.array(ids)


def generate_corpus(speakers, units_vocab, utterances, seed=0, out=None, mel_dim=80, noise=0.1,
                    emotion_levels=5, duration_jitter=1, units_range=(4, 10)):
    """Build (and optionally write) a deterministic synthetic corpus.

    Every vocabulary entry owns a spectral template and a base duration in
    [2, 8]; each occurrence jitters that duration by up to
    ``duration_jitter`` frames. Utterance ``i`` belongs to speaker
    ``i % speakers``; every fifth round of speakers is held out.
    """
    if speakers < 2 or units_vocab < 2 or utterances < speakers:
        raise ConfigError("need speakers >= 2, units_vocab >= 2 and utterances >= speakers")
    if noise < 0 or emotion_levels < 1 or duration_jitter < 0:
        raise ConfigError("noise, emotion_levels and duration_jitter must be non-negative")
    rng = Rng(seed)
    templates = rng.uniform((units_vocab, mel_dim), 2.0, 4.0)
    base_dur = rng.integers(DURATION_RANGE[0], DURATION_RANGE[1] + 1, size=units_vocab)
    signatures = _signatures(rng, speakers, mel_dim)
    spk_lift = _lift(rng, SPEAKER_DIM, mel_dim)
    emotion_direction = rng.normal(mel_dim) * 0.3
    emotion_lift = rng.normal(EMOTION_DIM)
    levels = np.linspace(-1.0, 1.0, emotion_levels) if emotion_levels > 1 else np.zeros(1)
    spk_list = [ToySpeaker(f"spk{s}", signatures[s], spk_lift @ signatures[s]) for s in range(speakers)]

    utts = []
    for i in range(utterances):
        spk = spk_list[i % speakers]
        length = int(rng.integers(units_range[0], units_range[1] + 1))
        ids = _unit_ids(rng, length, units_vocab)
        jitter = rng.integers(-duration_jitter, duration_jitter + 1, size=length)
        durations = np.clip(base_dur[ids] + jitter, *DURATION_RANGE)
        units = UnitSequence(ids, durations)
        frames = int(durations.sum())
        n_video = int(np.ceil(frames * EMOTION_FPS / MEL_FPS))
        label = levels[int(rng.integers(0, levels.size))]
        intensity = label * np.sin(np.pi * (np.arange(n_video) + 0.5) / n_video)
        track = EmotionTrack(np.outer(intensity, emotion_lift), EMOTION_FPS)
        offsets = np.outer(intensity[nearest_indices(n_video, frames)], emotion_direction)
        clean = templates[length_regulate(units)] + spk.signature + offsets
        mel = clean + noise * rng.normal((frames, mel_dim)) if noise > 0 else clean.copy()
        embedding = spk.raw_embedding + 0.05 * rng.normal(SPEAKER_DIM)
        utts.append(ToyUtterance(f"utt{i:04d}", spk.id, units, mel, track, embedding, clean,
                                 held_out=(i // speakers) % HELD_OUT_ROUND == HELD_OUT_ROUND - 1))
    corpus = Corpus(spk_list, utts, templates, emotion_direction, emotion_lift, noise, seed)
    if out is not None:
        write_corpus(corpus, out)
    return corpus


def write_corpus(corpus, out):
    out = Path(out)
    for sub in ("units", "mel", "emotion", "embed", "clean"):
        (out / sub).mkdir(parents=True, exist_ok=True)
    save_matrix(out / "templates.txt", corpus.templates)
    save_matrix(out / "signatures.txt", np.stack([s.signature for s in corpus.speakers]))
    save_matrix(out / "speaker_embeddings.txt", np.stack([s.raw_embedding for s in corpus.speakers]))
    save_matrix(out / "emotion_direction.txt", corpus.emotion_direction)
    save_matrix(out / "emotion_lift.txt", corpus.emotion_lift)
    (out / "corpus.txt").write_text(
        f"seed={corpus.seed}\nnoise={corpus.noise!r}\nmel_fps={MEL_FPS!r}\n"
        f"speakers={','.join(s.id for s in corpus.speakers)}\n")
    lines = []
    for u in corpus.utterances:
        files = [f"units/{u.id}.txt", f"mel/{u.id}.txt", f"emotion/{u.id}.txt", f"embed/{u.id}.txt"]
        (out / files[0]).write_text(format_units(u.units))
        save_matrix(out / files[1], u.mel)
        save_matrix(out / files[2], u.emotion.frames)
        save_matrix(out / files[3], u.embedding)
        save_matrix(out / "clean" / f"{u.id}.txt", u.clean)
        split = "heldout" if u.held_out else "train"
        lines.append(" ".join([u.id, u.speaker, *files, repr(u.emotion.frame_rate), split]))
    (out / "manifest.txt").write_text("\n".join(lines) + "\n")


def _read_meta(path):
    meta = {}
    for line in path.read_text().splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            meta[key.strip()] = value.strip()
    return meta


def load_corpus(root):
    root = Path(root)
    try:
        meta = _read_meta(root / "corpus.txt")
        signatures = load_matrix(root / "signatures.txt")
        raw = load_matrix(root / "speaker_embeddings.txt")
        speakers = [ToySpeaker(sid, signatures[k], raw[k])
                    for k, sid in enumerate(meta["speakers"].split(","))]
        utts = []
        for n, line in enumerate((root / "manifest.txt").read_text().splitlines()):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) not in (7, 8):
                raise FormatError(f"manifest line {n + 1}: expected 7 or 8 fields")
            uid, spk, unit_f, mel_f, emo_f, emb_f, fps = fields[:7]
            held = len(fields) == 8 and fields[7] == "heldout"
            utts.append(ToyUtterance(
                uid, spk,
                parse_units((root / unit_f).read_text(), unit_f),
                load_matrix(root / mel_f),
                EmotionTrack(load_matrix(root / emo_f), float(fps)),
                load_matrix(root / emb_f).ravel(),
                load_matrix(root / "clean" / f"{uid}.txt"),
                held_out=held))
        return Corpus(speakers, utts, load_matrix(root / "templates.txt"),
                      load_matrix(root / "emotion_direction.txt").ravel(),
                      load_matrix(root / "emotion_lift.txt").ravel(),
                      float(meta["noise"]), int(meta["seed"]))
    except KeyError as exc:
        raise FormatError(f"{root}: corpus metadata missing {exc}") from exc
