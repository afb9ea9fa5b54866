import sys
from types import SimpleNamespace

import pytest

from flowrender.duration import UnitSequence
from flowrender.guidance import EmotionTrack
from flowrender.numerics import Rng


def toy_items(count=6, mel_dim=4, vocab=5, seed=0, speakers=2, speaker_dim=5, emotion_dim=6):
    """Small stand-in utterances with the attributes the trainer reads."""
    rng = Rng(seed)
    items = []
    for i in range(count):
        length = int(rng.integers(2, 5))
        units = UnitSequence(rng.integers(0, vocab, size=length), rng.integers(1, 4, size=length))
        frames = int(units.durations.sum())
        items.append(SimpleNamespace(
            id=f"u{i}", speaker=f"s{i % speakers}", units=units,
            mel=rng.normal((frames, mel_dim)),
            emotion=EmotionTrack(rng.normal((int(rng.integers(1, 4)), emotion_dim))),
            embedding=rng.normal(speaker_dim)))
    return items


def central_difference(objective, arr, idx, eps=1e-6):
    orig = arr[idx]
    arr[idx] = orig + eps
    fp = objective()
    arr[idx] = orig - eps
    fm = objective()
    arr[idx] = orig
    return (fp - fm) / (2 * eps)


@pytest.fixture
def items():
    return toy_items()


@pytest.fixture(scope="session")
def trained_toy():
    """A renderer fitted on the default synthetic corpus (shared, about half a minute)."""
    from flowrender.model import RenderModel
    from flowrender.synthdata import generate_corpus
    from flowrender.trainer import TrainConfig, train_cfm

    corpus = generate_corpus(4, 50, 200, seed=0)
    model = RenderModel.init(0)
    report = train_cfm(corpus.train(), TrainConfig(steps=3000, learning_rate=2e-3), model)
    return corpus, model, report


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
