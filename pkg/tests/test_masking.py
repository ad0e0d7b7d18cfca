import numpy as np
import pytest

from posefill.errors import ConfigError, PartUnanchoredError, ShapeError
from posefill.geometry import PartFrame, PartKind, forward_transform
from posefill.masking import (
    MaskSet,
    draw_hint,
    draw_hint_batch,
    draw_mask,
    draw_mask_batch,
    hint_from_uniform,
    mask_from_presence,
    mask_from_uniform,
    mask_observe,
    masked_noise,
    noise_fill,
    sample_mask_set,
    duplicate_halves,
)
from posefill.pose import Keypoint
from posefill.rng import RngStream

from conftest import random_pose


class TestDrawMask:
    def test_threshold_example(self):
        half = mask_from_uniform([0.1, 0.5, 0.9], 0.2)
        assert np.array_equal(half, [0, 1, 1])
        assert np.array_equal(duplicate_halves(half), [0, 1, 1, 0, 1, 1])

    def test_tiny_rate_keeps_everything(self):
        half = mask_from_uniform([0.3, 0.0001, 0.9], 1e-9)
        assert np.array_equal(half, [1, 1, 1])

    def test_rate_out_of_range(self):
        for p in (0.0, 1.0, -0.2, 1.3):
            with pytest.raises(ConfigError):
                mask_from_uniform([0.5], p)

    def test_halves_paired(self, rng):
        for _ in range(100):
            m = draw_mask(13, 0.2, rng)
            assert np.array_equal(m[:13], m[13:])

    def test_monte_carlo_missing_rate(self):
        # 1e5 draws at p_m = 0.2: empirical zero-rate within [0.19, 0.21].
        rng = RngStream(2024)
        masks = draw_mask_batch(100_000, 13, 0.2, rng)
        rate = 1.0 - masks[:, :13].mean()
        assert 0.19 <= rate <= 0.21

    def test_batch_matches_sequential_singles(self):
        batch = draw_mask_batch(8, 5, 0.2, RngStream(7))
        seq_rng = RngStream(7)
        singles = np.stack([draw_mask(5, 0.2, seq_rng) for _ in range(8)])
        assert np.array_equal(batch, singles)


class TestMaskObserve:
    def test_example(self):
        assert np.array_equal(mask_observe([0.3, 0.7, 0.2], [1, 0, 1]), [0.3, 0, 0.2])

    def test_all_ones_identity(self):
        v = np.array([0.1, 0.9, 0.5])
        assert np.array_equal(mask_observe(v, np.ones(3)), v)

    def test_all_zeros(self):
        assert np.array_equal(mask_observe([0.1, 0.9], [0, 0]), [0, 0])

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            mask_observe([0.1], [1, 0])


class TestNoise:
    def test_example(self):
        assert np.array_equal(masked_noise([1, 0], [0.9, 0.4]), [0, 0.4])

    def test_all_observed_means_no_noise(self):
        assert np.array_equal(masked_noise(np.ones(4), np.full(4, 0.7)), np.zeros(4))

    def test_random_mode_deterministic_per_seed(self):
        m = np.array([1.0, 0, 1, 0, 1, 1, 0, 1, 0, 1])
        a = noise_fill(m, RngStream(5), "random")
        b = noise_fill(m, RngStream(5), "random")
        assert np.array_equal(a, b)
        assert np.array_equal(a[m == 1.0], np.zeros((m == 1.0).sum()))

    def test_random_mode_requires_stream(self):
        with pytest.raises(ConfigError):
            noise_fill(np.ones(4), None, "random")

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            noise_fill(np.ones(4), RngStream(0), "fancy")


def _head_frame(present_slots, nx=None):
    present = np.zeros(18, dtype=bool)
    present[list(present_slots)] = True
    pose = random_pose(np.random.default_rng(3), present)
    return forward_transform(pose, PartKind.HEAD, 0.0)


class TestNearestNoise:
    def test_single_candidate(self):
        # Missing left ear; its only observed neighbor chain leads to the
        # left eye, whose normalized coordinates must seed the noise.
        frame = _head_frame({int(Keypoint.NOSE), int(Keypoint.RIGHT_EYE), int(Keypoint.LEFT_EYE)})
        m = mask_from_presence(frame)
        r = noise_fill(m, None, "nearest", frame=frame)
        # head order: nose, r-eye, l-eye, r-ear, l-ear -> l-ear local index 4
        assert r[4] == frame.nx[2]
        assert r[4 + 5] == frame.ny[2]

    def test_tie_broken_by_lower_keypoint_id(self):
        # Missing nose: eyes are both one hop away; the right eye (id 14)
        # beats the left eye (id 15).
        frame = _head_frame(
            {int(Keypoint.RIGHT_EYE), int(Keypoint.LEFT_EYE), int(Keypoint.RIGHT_EAR), int(Keypoint.LEFT_EAR)}
        )
        m = mask_from_presence(frame)
        r = noise_fill(m, None, "nearest", frame=frame)
        assert r[0] == frame.nx[1]
        assert r[0 + 5] == frame.ny[1]

    def test_unanchored(self):
        frame = _head_frame({int(Keypoint.NOSE)})
        empty = PartFrame(
            kind=PartKind.HEAD,
            nx=np.zeros(5),
            ny=np.zeros(5),
            mask=np.zeros(5, dtype=bool),
            transform=frame.transform,
        )
        with pytest.raises(PartUnanchoredError):
            noise_fill(np.zeros(10), None, "nearest", frame=empty)


class TestHint:
    def test_threshold_example(self):
        half = hint_from_uniform([0.95, 0.05], [1, 1], 0.9)
        assert np.array_equal(half, [1, 0])

    def test_rate_near_one_reveals_mask(self):
        rng = RngStream(11)
        m = draw_mask(13, 0.3, rng)
        hint = draw_hint(m, 1.0 - 1e-12, rng)
        assert np.array_equal(hint, m)

    def test_zero_mask_gives_zero_hint(self):
        hint = draw_hint(np.zeros(10), 0.9, RngStream(1))
        assert np.array_equal(hint, np.zeros(10))

    def test_halves_paired(self, rng):
        for _ in range(100):
            m = draw_mask(5, 0.4, rng)
            h = draw_hint(m, 0.9, rng)
            assert np.array_equal(h[:5], h[5:])

    def test_reveal_rate(self):
        rng = RngStream(88)
        masks = draw_mask_batch(100_000, 13, 0.5, rng)
        hints = draw_hint_batch(masks[:, :13], 0.9, rng)
        observed_bits = masks[:, :13] == 1.0
        reveal = (hints[:, :13][observed_bits] == 1.0).mean()
        assert 0.89 <= reveal <= 0.91

    def test_rate_out_of_range(self):
        with pytest.raises(ConfigError):
            hint_from_uniform([0.5], [1.0], 1.0)


class TestMaskFromPresence:
    def test_example(self):
        frame = _head_frame(
            {int(Keypoint.NOSE), int(Keypoint.LEFT_EYE), int(Keypoint.RIGHT_EAR), int(Keypoint.LEFT_EAR)}
        )
        # head order nose, r-eye, l-eye, r-ear, l-ear -> [1, 0, 1, 1, 1]
        assert np.array_equal(mask_from_presence(frame), [1, 0, 1, 1, 1, 1, 0, 1, 1, 1])

    def test_all_observed(self):
        frame = forward_transform(random_pose(np.random.default_rng(4)), PartKind.BODY, 0.0)
        assert np.array_equal(mask_from_presence(frame), np.ones(26))


class TestMaskSet:
    def test_invariants(self):
        rng = RngStream(21)
        values = rng.uniform(26)
        for _ in range(200):
            ms = sample_mask_set(values, 0.25, 0.9, rng)
            assert isinstance(ms, MaskSet)
            assert np.array_equal(ms.mask[:13], ms.mask[13:])
            assert np.array_equal(ms.hint[:13], ms.hint[13:])
            assert np.all(ms.noise * ms.mask == 0)
            assert np.all(ms.observed * (1 - ms.mask) == 0)

    def test_fixed_seed_bit_identical(self):
        values = np.linspace(0, 1, 26)
        a = sample_mask_set(values, 0.2, 0.9, RngStream(9))
        b = sample_mask_set(values, 0.2, 0.9, RngStream(9))
        for x, y in zip((a.mask, a.observed, a.noise, a.hint), (b.mask, b.observed, b.noise, b.hint)):
            assert np.array_equal(x, y)
