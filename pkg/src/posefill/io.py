"""Dataset ingestion and result emission: COCO keypoint annotations, pose CSV."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParseError, ShapeError
from .pose import N_KEYPOINTS, Keypoint, Pose18, neck_from_shoulders

# COCO person-keypoints order (17 triplets) mapped onto the 18-slot layout;
# the neck has no COCO counterpart and is synthesized from the shoulders.
_COCO_TO_SLOT = {
    0: Keypoint.NOSE,
    1: Keypoint.LEFT_EYE,
    2: Keypoint.RIGHT_EYE,
    3: Keypoint.LEFT_EAR,
    4: Keypoint.RIGHT_EAR,
    5: Keypoint.LEFT_SHOULDER,
    6: Keypoint.RIGHT_SHOULDER,
    7: Keypoint.LEFT_ELBOW,
    8: Keypoint.RIGHT_ELBOW,
    9: Keypoint.LEFT_WRIST,
    10: Keypoint.RIGHT_WRIST,
    11: Keypoint.LEFT_HIP,
    12: Keypoint.RIGHT_HIP,
    13: Keypoint.LEFT_KNEE,
    14: Keypoint.RIGHT_KNEE,
    15: Keypoint.LEFT_ANKLE,
    16: Keypoint.RIGHT_ANKLE,
}


def load_coco_keypoints(path, visibility_threshold: int = 1, complete_only: bool = False):
    """Read person-keypoint annotations into 18-slot poses.

    A keypoint counts as observed when its v value meets the threshold; the
    neck is present only when both shoulders qualify. With ``complete_only``
    only poses with all 18 slots present are kept.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read annotation document {path}: {exc}") from exc
    if isinstance(doc, dict) and "annotations" in doc:
        annotations = doc["annotations"]
    elif isinstance(doc, list):
        annotations = doc
    else:
        raise ParseError(f"{path} has no 'annotations' list")
    poses = []
    for pos, ann in enumerate(annotations):
        if not isinstance(ann, dict):
            raise ParseError(f"annotation #{pos} is not an object")
        ann_id = ann.get("id", pos)
        kp = ann.get("keypoints")
        if not isinstance(kp, list) or len(kp) != 51:
            n = len(kp) if isinstance(kp, list) else "missing"
            raise ParseError(f"annotation {ann_id}: keypoint array length {n}, expected 51")
        try:
            triplets = np.asarray(kp, dtype=np.float64).reshape(17, 3)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"annotation {ann_id}: non-numeric keypoints") from exc
        points = np.zeros((N_KEYPOINTS, 2))
        present = np.zeros(N_KEYPOINTS, dtype=bool)
        for coco_idx, slot in _COCO_TO_SLOT.items():
            x, y, v = triplets[coco_idx]
            if v > 0 and (x < 0 or y < 0):
                raise ParseError(f"annotation {ann_id}: negative coordinates with v>0")
            if v >= visibility_threshold:
                points[slot] = (x, y)
                present[slot] = True
        if present[Keypoint.LEFT_SHOULDER] and present[Keypoint.RIGHT_SHOULDER]:
            points[Keypoint.NECK] = neck_from_shoulders(
                points[Keypoint.LEFT_SHOULDER], points[Keypoint.RIGHT_SHOULDER]
            )
            present[Keypoint.NECK] = True
        pose = Pose18(points, present)
        if not complete_only or pose.complete:
            poses.append(pose)
    return poses


def _base_header():
    cols = []
    for k in range(N_KEYPOINTS):
        cols += [f"x_{k}", f"y_{k}", f"present_{k}"]
    return cols


def _generated_header():
    return [f"generated_{k}" for k in range(N_KEYPOINTS)]


POSE_CSV_HEADER = _base_header()
POSE_CSV_HEADER_WITH_FLAGS = _base_header() + _generated_header()


def save_pose_csv(poses, path, generated=None) -> None:
    """Write poses as CSV; coordinate cells use shortest round-trip decimals.

    With ``generated`` (one 18-flag vector per pose) 18 generated_k columns
    are appended to the 54 base columns.
    """
    if generated is not None and len(generated) != len(poses):
        raise ShapeError("generated flags must align with poses")
    header = POSE_CSV_HEADER_WITH_FLAGS if generated is not None else POSE_CSV_HEADER
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, pose in enumerate(poses):
            row = []
            for k in range(N_KEYPOINTS):
                row += [repr(float(pose.points[k, 0])), repr(float(pose.points[k, 1])), int(pose.present[k])]
            if generated is not None:
                flags = np.asarray(generated[i], dtype=bool)
                if flags.shape != (N_KEYPOINTS,):
                    raise ShapeError(f"generated flags for pose {i} must have length 18")
                row += [int(f) for f in flags]
            writer.writerow(row)


def load_pose_csv(path):
    """Read a 54- or 72-column pose CSV written by :func:`save_pose_csv`."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path} is empty") from None
        if header == POSE_CSV_HEADER:
            n_cols = 54
        elif header == POSE_CSV_HEADER_WITH_FLAGS:
            n_cols = 72
        else:
            raise ParseError(f"{path}: header does not match the documented pose CSV layout")
        poses = []
        for row_no, row in enumerate(reader, start=2):
            if len(row) != n_cols:
                raise ParseError(f"{path} row {row_no}: expected {n_cols} cells, found {len(row)}")
            points = np.zeros((N_KEYPOINTS, 2))
            present = np.zeros(N_KEYPOINTS, dtype=bool)
            for k in range(N_KEYPOINTS):
                points[k, 0] = _parse_float(row[3 * k], path, row_no, f"x_{k}")
                points[k, 1] = _parse_float(row[3 * k + 1], path, row_no, f"y_{k}")
                present[k] = _parse_flag(row[3 * k + 2], path, row_no, f"present_{k}")
            poses.append(Pose18(points, present))
    return poses


def _parse_float(cell, path, row_no, col):
    try:
        return float(cell)
    except ValueError as exc:
        raise ParseError(f"{path} row {row_no} column {col}: non-numeric value {cell!r}") from exc


def _parse_flag(cell, path, row_no, col):
    if cell == "0":
        return False
    if cell == "1":
        return True
    raise ParseError(f"{path} row {row_no} column {col}: flag must be 0 or 1, got {cell!r}")
