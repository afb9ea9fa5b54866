import filecmp

import numpy as np
import pytest

from flowrender.duration import length_regulate
from flowrender.errors import ConfigError, FormatError
from flowrender.numerics import load_matrix
from flowrender.synthdata import generate_corpus, load_corpus, speaker_signature_probe


def tree_equal(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    return not mismatch and not errors and all(tree_equal(a / d, b / d) for d in cmp.common_dirs)


class TestGenerate:
    def test_same_seed_byte_identical(self, tmp_path):
        generate_corpus(3, 10, 12, seed=4, out=tmp_path / "a", mel_dim=6)
        generate_corpus(3, 10, 12, seed=4, out=tmp_path / "b", mel_dim=6)
        assert tree_equal(tmp_path / "a", tmp_path / "b")

    def test_other_seed_differs(self):
        a = generate_corpus(2, 5, 4, seed=0, mel_dim=4)
        b = generate_corpus(2, 5, 4, seed=1, mel_dim=4)
        assert not np.array_equal(a.templates, b.templates)

    def test_noiseless_is_exact_construction(self):
        corpus = generate_corpus(2, 6, 10, seed=2, mel_dim=5, noise=0.0, emotion_levels=1)
        for u in corpus.utterances:
            sig = corpus.speaker(u.speaker).signature
            np.testing.assert_array_equal(u.mel, corpus.templates[length_regulate(u.units)] + sig)

    def test_counts_and_split(self):
        corpus = generate_corpus(4, 50, 40, seed=0, mel_dim=8)
        assert len(corpus.utterances) == 40
        assert len(corpus.held_out()) == 8
        assert {u.speaker for u in corpus.held_out()} == {f"spk{s}" for s in range(4)}
        for u in corpus.utterances:
            assert u.mel.shape[0] == u.units.durations.sum()
            assert u.units.durations.min() >= 2 and u.units.durations.max() <= 8
            assert u.embedding.shape == (192,)
            assert u.emotion.frames.shape[1] == 256

    def test_signature_separation(self):
        corpus = generate_corpus(8, 10, 8, seed=3, mel_dim=80)
        sigs = np.stack([s.signature for s in corpus.speakers])
        unit = sigs / np.linalg.norm(sigs, axis=1, keepdims=True)
        cos = unit @ unit.T
        assert cos[~np.eye(8, dtype=bool)].max() < 0.5

    def test_raw_embedding_is_isometric_lift(self):
        corpus = generate_corpus(3, 5, 3, seed=4, mel_dim=10)
        a, b = corpus.speakers[0], corpus.speakers[1]
        assert a.raw_embedding @ b.raw_embedding == pytest.approx(a.signature @ b.signature, rel=1e-10)

    def test_durations_fixed_per_unit_without_jitter(self):
        corpus = generate_corpus(2, 7, 30, seed=5, mel_dim=3, duration_jitter=0)
        seen = {}
        for u in corpus.utterances:
            for i, d in zip(u.units.ids, u.units.durations):
                assert seen.setdefault(int(i), int(d)) == d

    @pytest.mark.parametrize("args", [(1, 10, 10), (2, 1, 10), (3, 10, 2)])
    def test_config_errors(self, args):
        with pytest.raises(ConfigError):
            generate_corpus(*args, mel_dim=4)


class TestProbe:
    def test_noiseless_recovers_signature_exactly(self):
        corpus = generate_corpus(2, 6, 4, seed=6, mel_dim=5, noise=0.0, emotion_levels=1)
        u = corpus.utterances[0]
        probe = speaker_signature_probe(u.mel, corpus.content_mean(u))
        np.testing.assert_allclose(probe, corpus.speaker(u.speaker).signature, atol=1e-12)

    def test_zero(self):
        np.testing.assert_array_equal(speaker_signature_probe(np.zeros((3, 4)), np.zeros(4)), np.zeros(4))

    def test_noisy_within_clt_bound(self):
        corpus = generate_corpus(4, 50, 100, seed=7, noise=0.1)
        for u in corpus.utterances:
            probe = speaker_signature_probe(u.mel, corpus.content_mean(u))
            bound = 3 * corpus.noise / np.sqrt(u.mel.shape[0])
            # 80 dims per utterance: allow the 3-sigma tail its expected share of misses
            misses = np.sum(np.abs(probe - corpus.speaker(u.speaker).signature) > bound)
            assert misses <= 3

    def test_cosine_to_signature(self):
        corpus = generate_corpus(4, 50, 100, seed=8, noise=0.1)
        cos = []
        for u in corpus.utterances:
            probe = speaker_signature_probe(u.mel, corpus.content_mean(u))
            sig = corpus.speaker(u.speaker).signature
            cos.append(probe @ sig / (np.linalg.norm(probe) * np.linalg.norm(sig)))
        assert np.mean(cos) > 0.95


class TestFiles:
    def test_manifest_self_consistent(self, tmp_path):
        generate_corpus(2, 8, 10, seed=9, out=tmp_path, mel_dim=4)
        lines = (tmp_path / "manifest.txt").read_text().splitlines()
        assert len(lines) == 10
        for line in lines:
            fields = line.split()
            for rel in fields[2:6]:
                assert (tmp_path / rel).is_file()
            assert float(fields[6]) == 25.0
            assert fields[7] in ("train", "heldout")
            frames = load_matrix(tmp_path / fields[3]).shape[0]
            assert load_matrix(tmp_path / fields[5]).shape == (1, 192)
            assert frames >= 1

    def test_load_roundtrip(self, tmp_path):
        corpus = generate_corpus(3, 8, 9, seed=10, out=tmp_path, mel_dim=4)
        back = load_corpus(tmp_path)
        assert [u.id for u in back.utterances] == [u.id for u in corpus.utterances]
        for a, b in zip(corpus.utterances, back.utterances):
            np.testing.assert_array_equal(a.mel, b.mel)
            np.testing.assert_array_equal(a.units.durations, b.units.durations)
            np.testing.assert_array_equal(a.emotion.frames, b.emotion.frames)
            assert a.held_out == b.held_out
        np.testing.assert_array_equal(back.templates, corpus.templates)

    def test_bad_manifest(self, tmp_path):
        generate_corpus(2, 4, 2, seed=0, out=tmp_path, mel_dim=3)
        (tmp_path / "manifest.txt").write_text("utt0000 spk0 units/utt0000.txt\n")
        with pytest.raises(FormatError):
            load_corpus(tmp_path)
