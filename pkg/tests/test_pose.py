import numpy as np
import pytest

from posefill.errors import InvalidCoordinateError, ShapeError
from posefill.pose import (
    BODY_SLOTS,
    HEAD_SLOTS,
    N_KEYPOINTS,
    SKELETON_EDGES,
    Keypoint,
    Pose18,
    neck_from_shoulders,
    skeleton_distance,
    validate_pose,
)

from conftest import random_pose


class TestNeckFromShoulders:
    def test_midpoint(self):
        assert np.array_equal(neck_from_shoulders((2, 2), (4, 4)), [3, 3])

    def test_identity(self):
        assert np.array_equal(neck_from_shoulders((0, 0), (0, 0)), [0, 0])

    def test_arithmetic(self):
        assert np.array_equal(neck_from_shoulders((-1, 5), (3, 1)), [1, 3])

    def test_symmetric_in_arguments(self):
        gen = np.random.default_rng(0)
        for _ in range(50):
            a, b = gen.normal(size=(2, 2))
            assert np.array_equal(neck_from_shoulders(a, b), neck_from_shoulders(b, a))

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidCoordinateError):
            neck_from_shoulders((np.nan, 0), (1, 1))
        with pytest.raises(InvalidCoordinateError):
            neck_from_shoulders((0, 0), (np.inf, 1))


def _floyd_warshall_oracle():
    # Independent all-pairs oracle over the same edge list.
    inf = 10**9
    dist = [[0 if i == j else inf for j in range(N_KEYPOINTS)] for i in range(N_KEYPOINTS)]
    for a, b in SKELETON_EDGES:
        dist[int(a)][int(b)] = 1
        dist[int(b)][int(a)] = 1
    for k in range(N_KEYPOINTS):
        for i in range(N_KEYPOINTS):
            for j in range(N_KEYPOINTS):
                if dist[i][k] + dist[k][j] < dist[i][j]:
                    dist[i][j] = dist[i][k] + dist[k][j]
    return dist


class TestSkeletonDistance:
    def test_self_distance(self):
        assert skeleton_distance(Keypoint.NECK, Keypoint.NECK) == 0

    def test_adjacent_limb(self):
        assert skeleton_distance(Keypoint.NECK, Keypoint.RIGHT_SHOULDER) == 1

    def test_matches_floyd_warshall_on_all_pairs(self):
        oracle = _floyd_warshall_oracle()
        for a in range(N_KEYPOINTS):
            for b in range(N_KEYPOINTS):
                assert skeleton_distance(a, b) == oracle[a][b], (a, b)

    def test_connected_from_neck(self):
        assert all(skeleton_distance(Keypoint.NECK, k) < N_KEYPOINTS for k in range(N_KEYPOINTS))

    def test_symmetry_and_triangle_inequality(self):
        for a in range(N_KEYPOINTS):
            for b in range(N_KEYPOINTS):
                assert skeleton_distance(a, b) == skeleton_distance(b, a)
                for c in range(N_KEYPOINTS):
                    assert skeleton_distance(a, c) <= skeleton_distance(a, b) + skeleton_distance(b, c)

    def test_invalid_ids(self):
        with pytest.raises(ShapeError):
            skeleton_distance(-1, 0)
        with pytest.raises(ShapeError):
            skeleton_distance(0, 18)


def test_head_body_slots_partition_all_keypoints():
    head = set(int(k) for k in HEAD_SLOTS)
    body = set(int(k) for k in BODY_SLOTS)
    assert head | body == set(range(N_KEYPOINTS))
    assert head & body == set()
    assert len(HEAD_SLOTS) == 5 and len(BODY_SLOTS) == 13


class TestValidatePose:
    def test_complete(self):
        pose = random_pose(np.random.default_rng(1))
        report = validate_pose(pose)
        assert report.complete
        assert report.head_observed == 5
        assert report.body_observed == 13
        assert report.invalid_slots == ()

    def test_all_absent(self):
        pose = Pose18(np.zeros((18, 2)), np.zeros(18, dtype=bool))
        report = validate_pose(pose)
        assert not report.complete
        assert report.head_observed == 0
        assert report.body_observed == 0

    def test_nan_with_present_flagged(self):
        points = np.zeros((18, 2))
        points[3, 0] = np.nan
        pose = Pose18(points, np.ones(18, dtype=bool))
        report = validate_pose(pose)
        assert report.invalid_slots == (3,)


class TestPose18:
    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            Pose18(np.zeros((17, 2)), np.ones(17, dtype=bool))
        with pytest.raises(ShapeError):
            Pose18(np.zeros((18, 2)), np.ones(17, dtype=bool))

    def test_equality(self):
        gen = np.random.default_rng(2)
        a = random_pose(gen)
        b = Pose18(a.points.copy(), a.present.copy())
        assert a == b
        c = Pose18(a.points + 1.0, a.present)
        assert a != c

    def test_arrays_read_only(self):
        pose = random_pose(np.random.default_rng(3))
        with pytest.raises(ValueError):
            pose.points[0, 0] = 1.0
        with pytest.raises(ValueError):
            pose.present[0] = False
