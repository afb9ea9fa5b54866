import numpy as np
import pytest

from flowrender.errors import EmptyInputError, ShapeError
from flowrender.guidance import (EmotionTrack, Projection, SpeakerSource, assemble, average_speaker,
                                 mask_prompt, project, resample_emotion)
from flowrender.numerics import Rng


class TestAverageSpeaker:
    def test_single(self):
        v = np.array([0.3, -1.0, 2.0])
        out = average_speaker([v])
        np.testing.assert_array_equal(out.vec, v)
        assert out.source is SpeakerSource.AVERAGED

    def test_two_vectors(self):
        np.testing.assert_array_equal(average_speaker([[1.0, 0.0], [0.0, 1.0]]).vec, [0.5, 0.5])

    def test_accumulate_and_divide(self):
        vs = np.random.default_rng(0).normal(size=(3, 192))
        acc = np.zeros(192)
        for v in vs:
            acc = acc + v
        np.testing.assert_allclose(average_speaker(list(vs)).vec, acc / 3, atol=1e-12)

    def test_errors(self):
        with pytest.raises(EmptyInputError):
            average_speaker([])
        with pytest.raises(ShapeError):
            average_speaker([np.ones(3), np.ones(4)])


class TestProject:
    def test_zero(self):
        p = Projection(np.zeros((80, 192)), np.zeros(80))
        np.testing.assert_array_equal(project(p, np.ones(192)), np.zeros(80))

    def test_selector(self):
        w = np.zeros((80, 192))
        w[:, :80] = np.eye(80)
        v = np.arange(192.0)
        np.testing.assert_array_equal(project(Projection(w, np.zeros(80)), v), v[:80])

    def test_matmul_oracle(self):
        rng = Rng(1)
        p = Projection.init(rng, 256)
        p.bias[:] = rng.normal(80)
        v = rng.normal(256)
        expected = [sum(p.weight[i, k] * v[k] for k in range(256)) + p.bias[i] for i in range(80)]
        np.testing.assert_allclose(project(p, v), expected, atol=1e-12)

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            project(Projection.init(Rng(0), 192), np.ones(191))


class TestResampleEmotion:
    def test_same_length(self):
        frames = np.random.default_rng(2).normal(size=(6, 256))
        np.testing.assert_array_equal(resample_emotion(EmotionTrack(frames), 6), frames)

    def test_constant_extension(self):
        f = np.random.default_rng(3).normal(size=(1, 4))
        np.testing.assert_array_equal(resample_emotion(EmotionTrack(f), 5), np.repeat(f, 5, axis=0))

    def test_nearest_index_oracle(self):
        a, b = np.full(3, 1.0), np.full(3, 2.0)
        out = resample_emotion(EmotionTrack(np.stack([a, b])), 4)
        np.testing.assert_array_equal(out, [a, a, b, b])

    def test_empty_track(self):
        with pytest.raises(EmptyInputError):
            EmotionTrack(np.zeros((0, 256)))


class TestMaskPrompt:
    x1 = np.arange(1.0, 41.0).reshape(10, 4)

    def test_full_mask(self):
        assert not mask_prompt(self.x1, Rng(0), (1.0, 1.0)).any()

    def test_no_mask(self):
        np.testing.assert_array_equal(mask_prompt(self.x1, Rng(0), (0.0, 0.0)), self.x1)

    def test_half_mask_contiguous(self):
        out = mask_prompt(self.x1, Rng(5), (0.5, 0.5))
        zero_rows = np.flatnonzero(~out.any(axis=1))
        assert zero_rows.size == 5
        assert np.all(np.diff(zero_rows) == 1)
        kept = np.setdiff1d(np.arange(10), zero_rows)
        np.testing.assert_array_equal(out[kept], self.x1[kept])

    def test_original_untouched(self):
        before = self.x1.copy()
        mask_prompt(self.x1, Rng(1))
        np.testing.assert_array_equal(self.x1, before)


class TestAssemble:
    def parts(self, frames=3):
        rng = np.random.default_rng(4)
        return (rng.normal(size=(frames, 32)), rng.normal(size=80), rng.normal(size=(frames, 80)),
                rng.normal(size=(frames, 16)))

    def test_width(self):
        b = assemble(*self.parts())
        assert b.width == 32 + 80 + 80 + 16
        assert b.frames == 3

    def test_both_flags_off(self):
        units, spk, emo, prompt = self.parts()
        b = assemble(units, spk, emo, prompt, audio_guidance=False, visual_guidance=False)
        assert not b.block("speaker").any()
        assert not b.block("emotion").any()
        np.testing.assert_array_equal(b.block("unit"), units)
        np.testing.assert_array_equal(b.block("prompt"), prompt)
        assert not b.audio_guidance and not b.visual_guidance

    def test_speaker_block_frame_constant(self):
        b = assemble(*self.parts())
        block = b.block("speaker")
        assert all(block[i].tobytes() == block[0].tobytes() for i in range(3))

    def test_emotion_block_varies(self):
        b = assemble(*self.parts())
        assert not np.array_equal(b.block("emotion")[0], b.block("emotion")[1])

    def test_zeroing_equals_ablation(self):
        units, spk, emo, prompt = self.parts()
        ablated = assemble(units, spk, emo, prompt, audio_guidance=False)
        zeroed = assemble(units, np.zeros(80), emo, prompt)
        np.testing.assert_array_equal(ablated.rows, zeroed.rows)
        ablated = assemble(units, spk, emo, prompt, visual_guidance=False)
        zeroed = assemble(units, spk, np.zeros_like(emo), prompt)
        np.testing.assert_array_equal(ablated.rows, zeroed.rows)

    def test_length_mismatch(self):
        units, spk, emo, prompt = self.parts()
        with pytest.raises(ShapeError):
            assemble(units, spk, emo[:2], prompt)
