import numpy as np
import pytest

from posefill.pose import N_KEYPOINTS, Pose18
from posefill.rng import RngStream


@pytest.fixture
def rng():
    return RngStream(1234)


def random_pose(gen: np.random.Generator, present=None) -> Pose18:
    """An arbitrary finite pose; not anatomically meaningful."""
    points = gen.uniform(0.0, 640.0, size=(N_KEYPOINTS, 2))
    if present is None:
        present = np.ones(N_KEYPOINTS, dtype=bool)
    pts = np.where(np.asarray(present)[:, None], points, 0.0)
    return Pose18(pts, present)
