"""Mask, observed, noise, and hint vectors for imputer training and inference.

All vectors have length 2l: the x-axis half followed by the y-axis half of a
part. A keypoint is missing in both coordinates at once, so the two halves of
the mask (and of the hint) are always identical copies.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PartUnanchoredError, ShapeError
from .geometry import PartFrame
from .pose import skeleton_distance
from .rng import RngStream

NOISE_MODES = ("random", "nearest")


def _as_vector(arr, name):
    v = np.asarray(arr, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"{name} must be a 1-D vector")
    return v


def duplicate_halves(half: np.ndarray) -> np.ndarray:
    """Tile a length-l half vector into the 2l layout [half, half]."""
    half = np.asarray(half, dtype=np.float64)
    return np.concatenate([half, half])


def mask_from_uniform(draws, p_m: float) -> np.ndarray:
    """Binary half-mask from uniform draws: 1 (observed) where draw > p_m."""
    if not 0.0 < p_m < 1.0:
        raise ConfigError(f"missing rate must lie in (0, 1), got {p_m}")
    return (_as_vector(draws, "draws") > p_m).astype(np.float64)


def draw_mask(l: int, p_m: float, rng: RngStream) -> np.ndarray:
    """Draw one 2l mask: a length-l Bernoulli half duplicated to both axes."""
    if l < 1:
        raise ConfigError("part length must be >= 1")
    half = mask_from_uniform(rng.uniform(l), p_m)
    return duplicate_halves(half)


def draw_mask_batch(n: int, l: int, p_m: float, rng: RngStream) -> np.ndarray:
    """n masks at once, consuming the stream exactly like n draw_mask calls."""
    if not 0.0 < p_m < 1.0:
        raise ConfigError(f"missing rate must lie in (0, 1), got {p_m}")
    half = (rng.uniform((n, l)) > p_m).astype(np.float64)
    return np.concatenate([half, half], axis=1)


def mask_observe(values, mask) -> np.ndarray:
    """Zero out the masked-away entries: out[k] = values[k] where mask[k] = 1."""
    v = _as_vector(values, "values")
    m = _as_vector(mask, "mask")
    if v.shape != m.shape:
        raise ShapeError(f"length mismatch: values {v.shape} vs mask {m.shape}")
    return v * m


def masked_noise(mask, seed_values) -> np.ndarray:
    """Noise placed only at missing entries: (1 - mask) * seed_values."""
    m = _as_vector(mask, "mask")
    s = _as_vector(seed_values, "seed_values")
    if m.shape != s.shape:
        raise ShapeError(f"length mismatch: mask {m.shape} vs seed {s.shape}")
    return (1.0 - m) * s


def noise_fill(mask, rng: RngStream | None, mode: str = "random", frame: PartFrame | None = None):
    """Noise vector for the missing entries of one sample.

    ``random`` seeds missing entries with uniform [0, 1) noise. ``nearest``
    copies, per missing keypoint, the normalized coordinates of the observed
    keypoint at minimal skeleton hop distance (ties broken by lower keypoint
    id); it requires the part frame and at least one observed keypoint.
    """
    m = _as_vector(mask, "mask")
    if m.size % 2 != 0:
        raise ShapeError("mask length must be even (two axis halves)")
    if mode == "random":
        if rng is None:
            raise ConfigError("random noise mode requires an RngStream")
        return masked_noise(m, rng.uniform(m.size))
    if mode != "nearest":
        raise ConfigError(f"unknown noise mode {mode!r}; expected one of {NOISE_MODES}")
    if frame is None:
        raise ConfigError("nearest noise mode requires the part frame")
    l = frame.kind.length
    if m.size != 2 * l:
        raise ShapeError(f"mask length {m.size} does not match part length {l}")
    if not frame.mask.any():
        raise PartUnanchoredError([frame.kind.value])
    slots = frame.kind.slots
    observed_local = np.flatnonzero(frame.mask)
    out = np.zeros(2 * l)
    for local in range(l):
        if m[local] == 1.0:
            continue
        best_local = -1
        best_hops = None
        for cand in observed_local:
            hops = skeleton_distance(slots[local], slots[cand])
            if best_hops is None or hops < best_hops:
                best_hops = hops
                best_local = int(cand)
        out[local] = frame.nx[best_local]
        out[local + l] = frame.ny[best_local]
    return out


def hint_from_uniform(draws, half_mask, p_h: float) -> np.ndarray:
    """Half-hint: reveal each mask bit where its uniform draw > 1 - p_h, else 0."""
    if not 0.0 < p_h < 1.0:
        raise ConfigError(f"hint rate must lie in (0, 1), got {p_h}")
    c = _as_vector(draws, "draws")
    hm = _as_vector(half_mask, "half_mask")
    if c.shape != hm.shape:
        raise ShapeError("draws and half mask must have equal length")
    return np.where(c > 1.0 - p_h, hm, 0.0)


def draw_hint(mask, p_h: float, rng: RngStream) -> np.ndarray:
    """Draw one 2l hint vector from a 2l mask (both halves identical)."""
    m = _as_vector(mask, "mask")
    if m.size % 2 != 0:
        raise ShapeError("mask length must be even (two axis halves)")
    l = m.size // 2
    half = hint_from_uniform(rng.uniform(l), m[:l], p_h)
    return duplicate_halves(half)


def draw_hint_batch(half_masks: np.ndarray, p_h: float, rng: RngStream) -> np.ndarray:
    """Batched hints from (n, l) half masks, stream-compatible with draw_hint."""
    if not 0.0 < p_h < 1.0:
        raise ConfigError(f"hint rate must lie in (0, 1), got {p_h}")
    n, l = half_masks.shape
    c = rng.uniform((n, l))
    half = np.where(c > 1.0 - p_h, half_masks, 0.0)
    return np.concatenate([half, half], axis=1)


def mask_from_presence(frame: PartFrame) -> np.ndarray:
    """Inference-time 2l mask derived from which keypoints are observed."""
    return duplicate_halves(frame.mask.astype(np.float64))


@dataclass(frozen=True)
class MaskSet:
    """Mask, observed, noise, and hint vectors for one training sample."""

    mask: np.ndarray
    observed: np.ndarray
    noise: np.ndarray
    hint: np.ndarray


def sample_mask_set(values, p_m: float, p_h: float, rng: RngStream) -> MaskSet:
    """Draw a full MaskSet for one normalized 2l sample vector."""
    v = _as_vector(values, "values")
    if v.size % 2 != 0:
        raise ShapeError("sample vector length must be even (two axis halves)")
    l = v.size // 2
    mask = draw_mask(l, p_m, rng)
    observed = mask_observe(v, mask)
    noise = noise_fill(mask, rng, "random")
    hint = draw_hint(mask, p_h, rng)
    return MaskSet(mask=mask, observed=observed, noise=noise, hint=hint)
