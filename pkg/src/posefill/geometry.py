"""Part separation, rotation, axis projection, normalization, and exact inversion.

A pose is split into a head part (5 keypoints) and a body part (13 keypoints),
each rotated so its reference line (ears, eyes, or shoulders) becomes
horizontal, projected onto the x and y axes, and min-max normalized per axis.
The :class:`TransformRecord` stored alongside the normalized vectors allows an
exact inverse back to image pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import (
    ConfigError,
    DegenerateReferenceError,
    InvalidCoordinateError,
    NoScaleError,
    PartUnanchoredError,
    ShapeError,
    UnboundedAngleError,
)
from .pose import BODY_SLOTS, HEAD_SLOTS, Keypoint, Pose18


class PartKind(Enum):
    HEAD = "head"
    BODY = "body"

    @property
    def length(self) -> int:
        return 5 if self is PartKind.HEAD else 13

    @property
    def slots(self) -> tuple:
        return HEAD_SLOTS if self is PartKind.HEAD else BODY_SLOTS


class PartSplit(NamedTuple):
    """Points and presence of one part, in ascending keypoint-id order."""

    points: np.ndarray  # (l, 2)
    present: np.ndarray  # (l,)


def separate(pose: Pose18) -> tuple[PartSplit, PartSplit]:
    """Split a pose into (head, body), copying presence through."""
    head_idx = np.array(HEAD_SLOTS, dtype=int)
    body_idx = np.array(BODY_SLOTS, dtype=int)
    head = PartSplit(pose.points[head_idx].copy(), pose.present[head_idx].copy())
    body = PartSplit(pose.points[body_idx].copy(), pose.present[body_idx].copy())
    return head, body


def merge(head: PartSplit, body: PartSplit) -> Pose18:
    """Reassemble a pose from its two parts (inverse of :func:`separate`)."""
    if head.points.shape != (5, 2) or body.points.shape != (13, 2):
        raise ShapeError("head must hold 5 points and body 13")
    points = np.zeros((18, 2))
    present = np.zeros(18, dtype=bool)
    points[list(HEAD_SLOTS)] = head.points
    present[list(HEAD_SLOTS)] = head.present
    points[list(BODY_SLOTS)] = body.points
    present[list(BODY_SLOTS)] = body.present
    return Pose18(points, present)


def rotation_angle(right_ref, left_ref) -> float:
    """Angle of the line from the right to the left reference point.

    The result is folded into (-pi/2, pi/2]; a vertical reference line maps
    to exactly pi/2. Coincident points have no defined angle.
    """
    right = np.asarray(right_ref, dtype=np.float64)
    left = np.asarray(left_ref, dtype=np.float64)
    if right.shape != (2,) or left.shape != (2,):
        raise ShapeError("reference points must be 2-vectors")
    if not (np.isfinite(right).all() and np.isfinite(left).all()):
        raise InvalidCoordinateError("reference coordinates must be finite")
    dx = left[0] - right[0]
    dy = left[1] - right[1]
    if dx == 0.0 and dy == 0.0:
        raise DegenerateReferenceError("reference points coincide")
    theta = math.atan2(dy, dx)
    if theta > math.pi / 2:
        theta -= math.pi
    elif theta <= -math.pi / 2:
        theta += math.pi
    return theta


def rotate_about(points, pivot, angle: float) -> np.ndarray:
    """Map each point p to pivot + R(-angle) (p - pivot).

    Rotating by the angle returned by :func:`rotation_angle` levels the
    reference line; passing the negated angle undoes the rotation exactly.
    """
    pts = np.asarray(points, dtype=np.float64)
    pv = np.asarray(pivot, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ShapeError("points must have shape (n, 2)")
    if pv.shape != (2,):
        raise ShapeError("pivot must be a 2-vector")
    if not (np.isfinite(pts).all() and np.isfinite(pv).all() and math.isfinite(angle)):
        raise InvalidCoordinateError("rotation inputs must be finite")
    if angle == 0.0:
        return pts.copy()
    c = math.cos(angle)
    s = math.sin(angle)
    d = pts - pv
    out = np.empty_like(d)
    out[:, 0] = c * d[:, 0] + s * d[:, 1]
    out[:, 1] = -s * d[:, 0] + c * d[:, 1]
    return out + pv


def angle_error_bound(dx: float, dy: float) -> float:
    """Worst-case angle deviation when both coordinate gaps are off by up to 2 pixels.

    Valid only while the sign of dx cannot flip under the perturbation,
    i.e. |dx| > 2.
    """
    if not (math.isfinite(dx) and math.isfinite(dy)):
        raise InvalidCoordinateError("gaps must be finite")
    if abs(dx) <= 2.0:
        raise UnboundedAngleError(f"|dx| must exceed 2 pixels, got {dx}")
    base = math.atan(dy / dx)
    worst = 0.0
    for ex in (-2.0, 2.0):
        for ey in (-2.0, 2.0):
            worst = max(worst, abs(math.atan((dy + ey) / (dx + ex)) - base))
    return worst


def project_axes(points) -> tuple[np.ndarray, np.ndarray]:
    """Project 2-D points onto the coordinate axes: returns (xs, ys)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return np.empty(0), np.empty(0)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ShapeError("points must have shape (n, 2)")
    return pts[:, 0].copy(), pts[:, 1].copy()


def normalize(values, observed, margin: float = 0.0) -> tuple[np.ndarray, tuple[float, float]]:
    """Min-max normalize the observed entries of a vector into [0, 1].

    The scale spans the observed min/max expanded symmetrically by
    ``margin`` times the observed span. Unobserved entries come out as 0.
    When every observed value is identical the scale degenerates to
    (v - 1, v + 1) and the observed entries map to 0.5, which keeps the
    inverse exact.
    """
    v = np.asarray(values, dtype=np.float64)
    obs = np.asarray(observed, dtype=bool)
    if v.shape != obs.shape or v.ndim != 1:
        raise ShapeError("values and observed must be equal-length vectors")
    if not math.isfinite(margin) or margin < 0.0:
        raise ConfigError(f"margin must be a finite fraction >= 0, got {margin}")
    if not obs.any():
        raise NoScaleError("cannot normalize a vector with zero observed entries")
    seen = v[obs]
    if not np.isfinite(seen).all():
        raise InvalidCoordinateError("observed values must be finite")
    lo = float(seen.min())
    hi = float(seen.max())
    span = hi - lo
    out = np.zeros_like(v)
    if span == 0.0:
        scale = (lo - 1.0, lo + 1.0)
        out[obs] = 0.5
        return out, scale
    scale = (lo - margin * span, hi + margin * span)
    out[obs] = (seen - scale[0]) / (scale[1] - scale[0])
    return out, scale


def denormalize(values, scale) -> np.ndarray:
    """Invert :func:`normalize` for a given (min, max) scale."""
    lo, hi = float(scale[0]), float(scale[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise NoScaleError(f"scale must satisfy max > min, got ({lo}, {hi})")
    v = np.asarray(values, dtype=np.float64)
    return v * (hi - lo) + lo


@dataclass(frozen=True)
class TransformRecord:
    """Everything needed to map a normalized part frame back to image pixels."""

    kind: PartKind
    pivot: tuple[float, float]
    angle: float
    x_scale: tuple[float, float]
    y_scale: tuple[float, float]
    margin: float
    reference_used: str  # "ears" | "eyes" | "shoulders" | "none"


@dataclass(frozen=True, eq=False)
class PartFrame:
    """A part after rotation, axis projection, and per-axis normalization.

    ``mask[k]`` is true where the keypoint was observed; unobserved entries
    of ``nx``/``ny`` are placeholder zeros until imputation fills them.
    """

    kind: PartKind
    nx: np.ndarray
    ny: np.ndarray
    mask: np.ndarray
    transform: TransformRecord

    def __post_init__(self):
        l = self.kind.length
        nx = np.ascontiguousarray(np.asarray(self.nx, dtype=np.float64))
        ny = np.ascontiguousarray(np.asarray(self.ny, dtype=np.float64))
        mask = np.ascontiguousarray(np.asarray(self.mask, dtype=bool))
        if nx.shape != (l,) or ny.shape != (l,) or mask.shape != (l,):
            raise ShapeError(f"{self.kind.value} frame vectors must have length {l}")
        for arr in (nx, ny, mask):
            arr.setflags(write=False)
        object.__setattr__(self, "nx", nx)
        object.__setattr__(self, "ny", ny)
        object.__setattr__(self, "mask", mask)

    def values(self) -> np.ndarray:
        """The 2l vector [nx, ny]."""
        return np.concatenate([self.nx, self.ny])


# Reference ladder per part: preferred reference pairs (right, left, label),
# most widely separated first. A rung applies when both points are observed
# and distinct; otherwise the part falls back to angle 0 pivoted on its
# lowest-index observed keypoint.
_REFERENCE_LADDER = {
    PartKind.HEAD: (
        (Keypoint.RIGHT_EAR, Keypoint.LEFT_EAR, "ears"),
        (Keypoint.RIGHT_EYE, Keypoint.LEFT_EYE, "eyes"),
    ),
    PartKind.BODY: ((Keypoint.RIGHT_SHOULDER, Keypoint.LEFT_SHOULDER, "shoulders"),),
}


def _pick_reference(split: PartSplit, kind: PartKind):
    slots = kind.slots
    for right_kp, left_kp, label in _REFERENCE_LADDER[kind]:
        ri = slots.index(right_kp)
        li = slots.index(left_kp)
        if split.present[ri] and split.present[li]:
            right = split.points[ri]
            left = split.points[li]
            if not np.array_equal(right, left):
                return rotation_angle(right, left), (float(right[0]), float(right[1])), label
    anchor = int(np.flatnonzero(split.present)[0])
    p = split.points[anchor]
    return 0.0, (float(p[0]), float(p[1])), "none"


def forward_transform(pose: Pose18, kind: PartKind, margin: float = 0.0) -> PartFrame:
    """Separate, rotate, project, and normalize one part of a pose."""
    head, body = separate(pose)
    split = head if kind is PartKind.HEAD else body
    if not split.present.any():
        raise PartUnanchoredError([kind.value])
    pts = np.where(split.present[:, None], split.points, 0.0)
    if not np.isfinite(pts[split.present]).all():
        raise InvalidCoordinateError(f"{kind.value} has non-finite observed coordinates")
    angle, pivot, reference = _pick_reference(split, kind)
    rotated = rotate_about(pts, pivot, angle)
    xs, ys = project_axes(rotated)
    nx, x_scale = normalize(xs, split.present, margin)
    ny, y_scale = normalize(ys, split.present, margin)
    record = TransformRecord(
        kind=kind,
        pivot=pivot,
        angle=float(angle),
        x_scale=x_scale,
        y_scale=y_scale,
        margin=float(margin),
        reference_used=reference,
    )
    return PartFrame(kind=kind, nx=nx, ny=ny, mask=split.present, transform=record)


def inverse_transform(frame: PartFrame) -> np.ndarray:
    """Map a fully filled part frame back to image-pixel points."""
    if not (np.isfinite(frame.nx).all() and np.isfinite(frame.ny).all()):
        raise InvalidCoordinateError("frame entries must be finite before inversion")
    xs = denormalize(frame.nx, frame.transform.x_scale)
    ys = denormalize(frame.ny, frame.transform.y_scale)
    rotated = np.column_stack([xs, ys])
    return rotate_about(rotated, frame.transform.pivot, -frame.transform.angle)
