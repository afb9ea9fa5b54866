"""Command-line entry point.

Exit codes: 0 success, 2 configuration/validation error, 3 I/O or parse
error, 4 numerical divergence.
"""

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import metrics
from .checkpoint import load_checkpoint, save_checkpoint
from .config import Config
from .duration import parse_units
from .errors import ConfigError, DivergenceError, FlowRenderError, FormatError
from .guidance import EmotionTrack, SpeakerEmbedding, SpeakerSource
from .model import RenderModel
from .numerics import load_matrix, save_matrix
from .sampler import synthesize
from .synthdata import generate_corpus, load_corpus
from .trainer import format_loss_trace, train_cfm, train_duration

log = logging.getLogger("flowrender")

METRICS = ("mcd-dtw", "mcd-dtw-sl", "ss")


def _load_config(path):
    return Config.load(path) if path else Config()


def _check_corpus(cfg, corpus):
    if corpus.mel_dim != cfg.mel_dim:
        raise ConfigError(f"corpus mel dim {corpus.mel_dim} != config mel_dim {cfg.mel_dim}")
    if corpus.vocab > cfg.unit_vocab:
        raise ConfigError(f"corpus vocabulary {corpus.vocab} exceeds unit_vocab {cfg.unit_vocab}")


def _trace_path(args):
    return Path(args.loss_trace) if args.loss_trace else Path(str(args.out) + ".loss.txt")


def cmd_gen_data(args):
    corpus = generate_corpus(args.speakers, args.units, args.utterances, seed=args.seed,
                             out=args.out, mel_dim=args.mel_dim, noise=args.noise)
    log.info("wrote %d utterances for %d speakers to %s",
             len(corpus.utterances), len(corpus.speakers), args.out)


def cmd_train(args):
    cfg = _load_config(args.config)
    corpus = load_corpus(args.data)
    _check_corpus(cfg, corpus)
    model = load_checkpoint(args.init) if args.init else RenderModel.init(cfg.seed, **cfg.model_kwargs())
    report = train_cfm(corpus.train(), cfg.train_config(), model)
    save_checkpoint(args.out, model)
    _trace_path(args).write_text(format_loss_trace(report.losses))
    log.info("trained %d steps in %.1fs, loss %.4f -> %.4f", len(report.losses),
             report.wall_clock, report.losses[0], report.losses[-1])


def cmd_train_duration(args):
    cfg = _load_config(args.config)
    corpus = load_corpus(args.data)
    _check_corpus(cfg, corpus)
    model = load_checkpoint(args.ckpt) if args.ckpt else RenderModel.init(cfg.seed, **cfg.model_kwargs())
    report = train_duration(corpus.train(), cfg.duration_config(), model)
    save_checkpoint(args.out, model)
    _trace_path(args).write_text(format_loss_trace(report.losses))
    log.info("duration loss %.4f -> %.4f", report.losses[0], report.losses[-1])


def cmd_synth(args):
    model = load_checkpoint(args.ckpt)
    units = parse_units(Path(args.units).read_text(), args.units)
    spk = SpeakerEmbedding(load_matrix(args.speaker_emb).ravel(), SpeakerSource.SINGLE_UTTERANCE)
    emo = EmotionTrack(load_matrix(args.emotion))
    prompt = load_matrix(args.prompt) if args.prompt else None
    cfg = Config(sampler_method=args.method).sample_config(steps=args.steps, seed=args.seed)
    mel = synthesize(model, units, spk, emo, args.target_length, cfg, prompt=prompt,
                     audio_guidance=not args.no_audio_guidance,
                     visual_guidance=not args.no_visual_guidance)
    save_matrix(args.out, mel)


def cmd_eval(args):
    ref = load_matrix(args.ref)
    hyp = load_matrix(args.hyp)
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in wanted if m not in METRICS]
    if unknown:
        raise ConfigError(f"unknown metrics {unknown}; choose from {', '.join(METRICS)}")
    for name in wanted:
        print(f"{name} {evaluate_metric(name, ref, hyp, args.cepstra, args.offset):.6f}")


def evaluate_metric(name, ref, hyp, cepstra=metrics.DEFAULT_CEPSTRA, offset=None):
    """One metric value, exactly as the ``eval`` command computes it."""
    if name == "mcd-dtw":
        return metrics.mcd_dtw(ref, hyp, cepstra)
    if name == "mcd-dtw-sl":
        return metrics.mcd_dtw_sl(ref, hyp, cepstra)
    shift = 0.0 if offset is None else (load_matrix(offset).ravel() if isinstance(offset, (str, Path))
                                        else np.asarray(offset))
    return metrics.cosine_ss(ref.mean(axis=0) - shift, hyp.mean(axis=0) - shift)


def build_parser():
    p = argparse.ArgumentParser(prog="flowrender", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="write a synthetic corpus")
    g.add_argument("--out", required=True)
    g.add_argument("--speakers", type=int, default=4)
    g.add_argument("--units", type=int, default=50)
    g.add_argument("--utterances", type=int, default=200)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--mel-dim", type=int, default=80)
    g.add_argument("--noise", type=float, default=0.1)
    g.set_defaults(func=cmd_gen_data)

    t = sub.add_parser("train-cfm", aliases=["train"], help="train the renderer")
    t.add_argument("--data", required=True)
    t.add_argument("--config")
    t.add_argument("--out", required=True)
    t.add_argument("--init", help="start from this checkpoint instead of a fresh init")
    t.add_argument("--loss-trace")
    t.set_defaults(func=cmd_train)

    d = sub.add_parser("train-duration", help="train the duration regulator")
    d.add_argument("--data", required=True)
    d.add_argument("--config")
    d.add_argument("--ckpt", help="checkpoint whose duration blocks are trained")
    d.add_argument("--out", required=True)
    d.add_argument("--loss-trace")
    d.set_defaults(func=cmd_train_duration)

    s = sub.add_parser("synth", help="render a mel matrix")
    s.add_argument("--ckpt", required=True)
    s.add_argument("--units", required=True)
    s.add_argument("--speaker-emb", required=True)
    s.add_argument("--emotion", required=True)
    s.add_argument("--target-length", type=int, required=True)
    s.add_argument("--steps", type=int, default=32)
    s.add_argument("--method", choices=("euler", "midpoint"), default="euler")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--prompt", help="reference mel used as the acoustic prompt")
    s.add_argument("--out", required=True)
    s.add_argument("--no-audio-guidance", action="store_true")
    s.add_argument("--no-visual-guidance", action="store_true")
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="print objective metrics")
    e.add_argument("--ref", required=True)
    e.add_argument("--hyp", required=True)
    e.add_argument("--metrics", default=",".join(METRICS))
    e.add_argument("--cepstra", type=int, default=metrics.DEFAULT_CEPSTRA)
    e.add_argument("--offset", help="1xD vector subtracted from both time averages before ss")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except DivergenceError as exc:
        log.error("%s", exc)
        return 4
    except (FormatError, OSError) as exc:
        log.error("%s", exc)
        return 3
    except FlowRenderError as exc:
        log.error("%s", exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
