import math

import numpy as np
import pytest

from posefill.errors import (
    ConfigError,
    DegenerateReferenceError,
    InvalidCoordinateError,
    NoScaleError,
    PartUnanchoredError,
    UnboundedAngleError,
)
from posefill.geometry import (
    PartFrame,
    PartKind,
    TransformRecord,
    angle_error_bound,
    denormalize,
    forward_transform,
    inverse_transform,
    merge,
    normalize,
    project_axes,
    rotate_about,
    rotation_angle,
    separate,
)
from posefill.pose import BODY_SLOTS, HEAD_SLOTS, Keypoint, Pose18

from conftest import random_pose


class TestSeparate:
    def test_complete_pose_counts(self):
        pose = random_pose(np.random.default_rng(0))
        head, body = separate(pose)
        assert head.present.sum() == 5
        assert body.present.sum() == 13

    def test_nose_only(self):
        present = np.zeros(18, dtype=bool)
        present[Keypoint.NOSE] = True
        pose = random_pose(np.random.default_rng(1), present)
        head, body = separate(pose)
        assert head.present.sum() == 1
        assert body.present.sum() == 0

    def test_merge_round_trip(self):
        pose = random_pose(np.random.default_rng(2))
        assert merge(*separate(pose)) == pose

    def test_intra_part_order_is_ascending_keypoint_id(self):
        pose = random_pose(np.random.default_rng(3))
        head, body = separate(pose)
        assert np.array_equal(head.points, pose.points[list(HEAD_SLOTS)])
        assert np.array_equal(body.points, pose.points[list(BODY_SLOTS)])


class TestRotationAngle:
    def test_horizontal(self):
        assert rotation_angle((0, 0), (1, 0)) == 0.0

    def test_diagonal(self):
        assert rotation_angle((0, 0), (1, 1)) == pytest.approx(math.pi / 4, abs=1e-15)

    def test_vertical_convention(self):
        assert rotation_angle((0, 0), (0, 1)) == pytest.approx(math.pi / 2, abs=1e-15)
        assert rotation_angle((0, 0), (0, -1)) == pytest.approx(math.pi / 2, abs=1e-15)

    def test_always_in_half_open_interval(self):
        gen = np.random.default_rng(4)
        for _ in range(500):
            a, b = gen.normal(scale=50, size=(2, 2))
            if np.array_equal(a, b):
                continue
            theta = rotation_angle(a, b)
            assert -math.pi / 2 < theta <= math.pi / 2

    def test_rotating_pair_levels_reference_line(self):
        gen = np.random.default_rng(5)
        for _ in range(200):
            a, b = gen.normal(scale=50, size=(2, 2))
            if np.allclose(a, b):
                continue
            theta = rotation_angle(a, b)
            ra, rb = rotate_about(np.stack([a, b]), a, theta)
            assert abs(ra[1] - rb[1]) < 1e-12 * (1 + np.abs([a, b]).max())

    def test_coincident_points(self):
        with pytest.raises(DegenerateReferenceError):
            rotation_angle((3, 3), (3, 3))


class TestRotateAbout:
    def test_levels_diagonal(self):
        out = rotate_about([(0, 0), (1, 1)], (0, 0), math.pi / 4)
        assert np.allclose(out, [(0, 0), (math.sqrt(2), 0)], atol=1e-15)

    def test_zero_angle_identity(self):
        pts = np.random.default_rng(6).normal(size=(7, 2))
        assert np.array_equal(rotate_about(pts, (1, 2), 0.0), pts)

    def test_inverse_pair(self):
        gen = np.random.default_rng(7)
        pts = gen.normal(scale=100, size=(10, 2))
        pivot = gen.normal(size=2)
        theta = gen.uniform(-math.pi / 2, math.pi / 2)
        back = rotate_about(rotate_about(pts, pivot, theta), pivot, -theta)
        assert np.abs(back - pts).max() < 1e-12 * (1 + np.abs(pts).max())

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidCoordinateError):
            rotate_about([(np.nan, 0)], (0, 0), 0.1)


class TestAngleErrorBound:
    @staticmethod
    def _oracle(dx, dy):
        base = math.atan(dy / dx)
        return max(
            abs(math.atan((dy + ey) / (dx + ex)) - base)
            for ex in (-2.0, 2.0)
            for ey in (-2.0, 2.0)
        )

    def test_flat_reference(self):
        expected = self._oracle(100.0, 0.0)
        assert expected == pytest.approx(math.atan(2 / 98), abs=1e-15)
        assert angle_error_bound(100.0, 0.0) == pytest.approx(expected, abs=1e-15)
        assert angle_error_bound(100.0, 0.0) == pytest.approx(0.020405, abs=5e-7)

    def test_diagonal_reference(self):
        expected = self._oracle(10.0, 10.0)
        assert expected == pytest.approx(math.atan(12 / 8) - math.atan(1.0), abs=1e-15)
        assert angle_error_bound(10.0, 10.0) == pytest.approx(expected, abs=1e-15)
        assert angle_error_bound(10.0, 10.0) == pytest.approx(0.19740, abs=5e-6)

    def test_vanishes_for_wide_references(self):
        assert angle_error_bound(1e9, 17.0) < 1e-8

    def test_non_increasing_in_dx_for_wide_references(self):
        # Monotone in dx once dx >= dy (the wide-reference regime the bound
        # argues for); below that the bound can grow with dx.
        for dy in range(0, 51, 5):
            prev = math.inf
            for dx in range(max(3, dy), 201):
                bound = angle_error_bound(float(dx), float(dy))
                assert bound <= prev + 1e-15
                prev = bound

    def test_non_increasing_when_separation_scales(self):
        # Scaling both gaps (wider reference pair, same direction) never
        # worsens the bound, anywhere on the grid.
        for dy in range(0, 51, 5):
            for dx in range(3, 201, 7):
                b1 = angle_error_bound(float(dx), float(dy))
                b2 = angle_error_bound(2.0 * dx, 2.0 * dy)
                assert b2 <= b1 + 1e-15

    def test_small_dx_unbounded(self):
        with pytest.raises(UnboundedAngleError):
            angle_error_bound(2.0, 5.0)
        with pytest.raises(UnboundedAngleError):
            angle_error_bound(-1.5, 5.0)


class TestProjectAxes:
    def test_example(self):
        xs, ys = project_axes([(1, 2), (3, 4)])
        assert np.array_equal(xs, [1, 3])
        assert np.array_equal(ys, [2, 4])

    def test_empty(self):
        xs, ys = project_axes(np.empty((0, 2)))
        assert xs.size == 0 and ys.size == 0

    def test_zip_inverse(self):
        pts = np.random.default_rng(8).normal(size=(9, 2))
        xs, ys = project_axes(pts)
        assert np.array_equal(np.column_stack([xs, ys]), pts)


class TestNormalize:
    def test_plain(self):
        nv, scale = normalize([2, 4, 6], [True] * 3)
        assert np.array_equal(nv, [0, 0.5, 1])
        assert scale == (2, 6)

    def test_with_margin(self):
        nv, scale = normalize([2, 4, 6], [True] * 3, margin=0.1)
        assert scale == pytest.approx((1.6, 6.4), abs=1e-15)
        assert nv == pytest.approx([1 / 12, 0.5, 11 / 12], abs=1e-15)

    def test_degenerate_span(self):
        nv, scale = normalize([5, 5], [True, True])
        assert np.array_equal(nv, [0.5, 0.5])
        assert scale == (4, 6)

    def test_unobserved_entries_zero(self):
        nv, _ = normalize([2, 99, 6], [True, False, True])
        assert nv[1] == 0.0

    def test_zero_observed(self):
        with pytest.raises(NoScaleError):
            normalize([1, 2], [False, False])

    def test_bad_margin(self):
        with pytest.raises(ConfigError):
            normalize([1, 2], [True, True], margin=-0.1)

    def test_strictly_monotone_when_span_positive(self):
        gen = np.random.default_rng(9)
        for _ in range(100):
            v = gen.normal(scale=30, size=8)
            nv, _ = normalize(v, [True] * 8, margin=gen.uniform(0, 0.5))
            order = np.argsort(v)
            assert np.all(np.diff(nv[order]) >= 0)
            assert np.all((nv >= 0) & (nv <= 1))


class TestDenormalize:
    def test_inverse_pair(self):
        assert np.array_equal(denormalize([0, 0.5, 1], (2, 6)), [2, 4, 6])

    def test_single(self):
        assert np.array_equal(denormalize([0.5], (4, 6)), [5])

    def test_round_trip_property(self):
        gen = np.random.default_rng(10)
        for _ in range(1000):
            n = int(gen.integers(1, 20))
            v = gen.normal(scale=200, size=n)
            margin = float(gen.uniform(0, 0.4))
            nv, scale = normalize(v, [True] * n, margin)
            back = denormalize(nv, scale)
            assert np.abs(back - v).max() <= 1e-12 * (1 + np.abs(v).max())

    def test_degenerate_scale(self):
        with pytest.raises(NoScaleError):
            denormalize([0.5], (2, 2))


def _pose_with(present_slots):
    gen = np.random.default_rng(11)
    present = np.zeros(18, dtype=bool)
    present[list(present_slots)] = True
    return random_pose(gen, present)


class TestForwardTransform:
    def test_complete_pose(self):
        pose = random_pose(np.random.default_rng(12))
        for kind in PartKind:
            frame = forward_transform(pose, kind, 0.0)
            assert frame.mask.all()
            assert np.all((frame.nx >= 0) & (frame.nx <= 1))
            assert np.all((frame.ny >= 0) & (frame.ny <= 1))

    def test_head_reference_ladder_ears_first(self):
        pose = random_pose(np.random.default_rng(13))
        frame = forward_transform(pose, PartKind.HEAD, 0.0)
        assert frame.transform.reference_used == "ears"
        expected = rotation_angle(pose.points[Keypoint.RIGHT_EAR], pose.points[Keypoint.LEFT_EAR])
        assert frame.transform.angle == expected
        assert frame.transform.pivot == tuple(pose.points[Keypoint.RIGHT_EAR])

    def test_head_falls_back_to_eyes(self):
        slots = set(int(k) for k in HEAD_SLOTS) - {int(Keypoint.RIGHT_EAR)}
        frame = forward_transform(_pose_with(slots), PartKind.HEAD, 0.0)
        assert frame.transform.reference_used == "eyes"

    def test_head_falls_back_to_no_rotation(self):
        frame = forward_transform(
            _pose_with({int(Keypoint.NOSE), int(Keypoint.LEFT_EYE)}), PartKind.HEAD, 0.0
        )
        assert frame.transform.reference_used == "none"
        assert frame.transform.angle == 0.0

    def test_body_reference_is_shoulders(self):
        pose = random_pose(np.random.default_rng(14))
        frame = forward_transform(pose, PartKind.BODY, 0.0)
        assert frame.transform.reference_used == "shoulders"

    def test_unanchored_part(self):
        with pytest.raises(PartUnanchoredError):
            forward_transform(_pose_with(set(int(k) for k in BODY_SLOTS)), PartKind.HEAD, 0.0)

    def test_mask_mirrors_presence(self):
        slots = {int(Keypoint.NOSE), int(Keypoint.RIGHT_EYE), int(Keypoint.LEFT_EYE)}
        frame = forward_transform(_pose_with(slots), PartKind.HEAD, 0.0)
        assert np.array_equal(frame.mask, [True, True, True, False, False])


class TestInverseTransform:
    def test_identity_transform(self):
        record = TransformRecord(
            kind=PartKind.HEAD,
            pivot=(0.0, 0.0),
            angle=0.0,
            x_scale=(0.0, 1.0),
            y_scale=(0.0, 1.0),
            margin=0.0,
            reference_used="none",
        )
        nx = np.linspace(0.1, 0.9, 5)
        ny = np.linspace(0.2, 0.8, 5)
        frame = PartFrame(kind=PartKind.HEAD, nx=nx, ny=ny, mask=np.ones(5, bool), transform=record)
        pts = inverse_transform(frame)
        assert np.allclose(pts, np.column_stack([nx, ny]), atol=1e-15)

    def test_degenerate_axis_recovers_constant(self):
        nv, scale = normalize([5.0, 5.0], [True, True])
        assert np.array_equal(denormalize(nv, scale), [5.0, 5.0])

    def test_round_trip_small(self):
        gen = np.random.default_rng(15)
        for _ in range(50):
            pose = random_pose(gen)
            for kind in PartKind:
                frame = forward_transform(pose, kind, 0.0)
                pts = inverse_transform(frame)
                truth = pose.points[[int(k) for k in kind.slots]]
                diag = np.linalg.norm(truth.max(axis=0) - truth.min(axis=0))
                assert np.abs(pts - truth).max() <= 1e-9 * diag
