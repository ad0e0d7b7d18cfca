"""Canonical 18-keypoint pose model: numbering, skeleton graph, validation.

The keypoint numbering follows the 18-point convention used by bottom-up
pose estimators (nose/neck/limbs plus eyes and ears); the neck is a synthetic
point at the midpoint of the two shoulders. Head keypoints are
{nose, both eyes, both ears}; the remaining thirteen belong to the body.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import InvalidCoordinateError, ShapeError


class Keypoint(IntEnum):
    NOSE = 0
    NECK = 1
    RIGHT_SHOULDER = 2
    RIGHT_ELBOW = 3
    RIGHT_WRIST = 4
    LEFT_SHOULDER = 5
    LEFT_ELBOW = 6
    LEFT_WRIST = 7
    RIGHT_HIP = 8
    RIGHT_KNEE = 9
    RIGHT_ANKLE = 10
    LEFT_HIP = 11
    LEFT_KNEE = 12
    LEFT_ANKLE = 13
    RIGHT_EYE = 14
    LEFT_EYE = 15
    RIGHT_EAR = 16
    LEFT_EAR = 17


N_KEYPOINTS = 18

HEAD_SLOTS = (
    Keypoint.NOSE,
    Keypoint.RIGHT_EYE,
    Keypoint.LEFT_EYE,
    Keypoint.RIGHT_EAR,
    Keypoint.LEFT_EAR,
)

BODY_SLOTS = tuple(Keypoint(i) for i in range(N_KEYPOINTS) if Keypoint(i) not in HEAD_SLOTS)

# Undirected limb connections of the 18-point skeleton. The graph is
# connected: every keypoint is reachable from the neck.
SKELETON_EDGES = (
    (Keypoint.NOSE, Keypoint.NECK),
    (Keypoint.NECK, Keypoint.RIGHT_SHOULDER),
    (Keypoint.NECK, Keypoint.LEFT_SHOULDER),
    (Keypoint.RIGHT_SHOULDER, Keypoint.RIGHT_ELBOW),
    (Keypoint.RIGHT_ELBOW, Keypoint.RIGHT_WRIST),
    (Keypoint.LEFT_SHOULDER, Keypoint.LEFT_ELBOW),
    (Keypoint.LEFT_ELBOW, Keypoint.LEFT_WRIST),
    (Keypoint.NECK, Keypoint.RIGHT_HIP),
    (Keypoint.RIGHT_HIP, Keypoint.RIGHT_KNEE),
    (Keypoint.RIGHT_KNEE, Keypoint.RIGHT_ANKLE),
    (Keypoint.NECK, Keypoint.LEFT_HIP),
    (Keypoint.LEFT_HIP, Keypoint.LEFT_KNEE),
    (Keypoint.LEFT_KNEE, Keypoint.LEFT_ANKLE),
    (Keypoint.NOSE, Keypoint.RIGHT_EYE),
    (Keypoint.NOSE, Keypoint.LEFT_EYE),
    (Keypoint.RIGHT_EYE, Keypoint.RIGHT_EAR),
    (Keypoint.LEFT_EYE, Keypoint.LEFT_EAR),
)


def _hop_table() -> np.ndarray:
    """All-pairs shortest hop counts on the skeleton graph (BFS from each node)."""
    adj = {k: [] for k in range(N_KEYPOINTS)}
    for a, b in SKELETON_EDGES:
        adj[int(a)].append(int(b))
        adj[int(b)].append(int(a))
    table = np.full((N_KEYPOINTS, N_KEYPOINTS), -1, dtype=np.int64)
    for start in range(N_KEYPOINTS):
        table[start, start] = 0
        frontier = [start]
        dist = 0
        while frontier:
            dist += 1
            nxt = []
            for node in frontier:
                for nb in adj[node]:
                    if table[start, nb] < 0:
                        table[start, nb] = dist
                        nxt.append(nb)
            frontier = nxt
    return table


_HOPS = _hop_table()


def skeleton_distance(a: int, b: int) -> int:
    """Shortest path length in limb hops between two keypoints."""
    a = int(a)
    b = int(b)
    if not (0 <= a < N_KEYPOINTS and 0 <= b < N_KEYPOINTS):
        raise ShapeError(f"keypoint ids must be in [0, {N_KEYPOINTS - 1}], got ({a}, {b})")
    return int(_HOPS[a, b])


def neck_from_shoulders(left_shoulder, right_shoulder) -> np.ndarray:
    """Midpoint of the segment joining the two shoulders."""
    left = np.asarray(left_shoulder, dtype=np.float64)
    right = np.asarray(right_shoulder, dtype=np.float64)
    if left.shape != (2,) or right.shape != (2,):
        raise ShapeError("shoulder points must be 2-vectors")
    if not (np.isfinite(left).all() and np.isfinite(right).all()):
        raise InvalidCoordinateError("shoulder coordinates must be finite")
    return (left + right) / 2.0


@dataclass(frozen=True, eq=False)
class Pose18:
    """One pedestrian's 18 keypoints in image pixels plus presence flags.

    ``points[k]`` is meaningful only where ``present[k]`` is true; consumers
    must not read coordinates of absent keypoints.
    """

    points: np.ndarray
    present: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        pres = np.ascontiguousarray(np.asarray(self.present, dtype=bool))
        if pts.shape != (N_KEYPOINTS, 2):
            raise ShapeError(f"points must have shape (18, 2), got {pts.shape}")
        if pres.shape != (N_KEYPOINTS,):
            raise ShapeError(f"present must have shape (18,), got {pres.shape}")
        pts.setflags(write=False)
        pres.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "present", pres)

    def __eq__(self, other):
        if not isinstance(other, Pose18):
            return NotImplemented
        return np.array_equal(self.points, other.points) and np.array_equal(
            self.present, other.present
        )

    @property
    def complete(self) -> bool:
        return bool(self.present.all())

    @classmethod
    def complete_from_points(cls, points) -> "Pose18":
        return cls(points, np.ones(N_KEYPOINTS, dtype=bool))


@dataclass(frozen=True)
class ValidationReport:
    complete: bool
    head_observed: int
    body_observed: int
    invalid_slots: tuple[int, ...]


def validate_pose(pose: Pose18) -> ValidationReport:
    """Count observed keypoints per part and flag present-but-non-finite coordinates."""
    head_idx = np.array(HEAD_SLOTS, dtype=int)
    body_idx = np.array(BODY_SLOTS, dtype=int)
    finite = np.isfinite(pose.points).all(axis=1)
    invalid = np.flatnonzero(pose.present & ~finite)
    return ValidationReport(
        complete=bool(pose.present.all()),
        head_observed=int(pose.present[head_idx].sum()),
        body_observed=int(pose.present[body_idx].sum()),
        invalid_slots=tuple(int(i) for i in invalid),
    )
