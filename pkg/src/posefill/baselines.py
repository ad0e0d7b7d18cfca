"""Classical imputers used for comparison: PCHIP, modified Akima, and k-NN.

The interpolation methods treat one normalized axis vector of a part as a
series over its intra-part keypoint index and fill the missing entries from
the observed (index, value) pairs. Exterior gaps are extrapolated with the
boundary cubic because missing feet or heads often sit at the ends of the
vector. k-NN works on the concatenated 2l vector against a reference set of
complete vectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import Akima1DInterpolator, PchipInterpolator

from .errors import ConfigError, InsufficientDataError, ShapeError


@dataclass(frozen=True)
class SeriesWithGaps:
    """A value series over indices 0..n-1 with per-entry observed flags."""

    values: np.ndarray
    observed: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        o = np.ascontiguousarray(np.asarray(self.observed, dtype=bool))
        if v.ndim != 1 or v.shape != o.shape:
            raise ShapeError("values and observed must be equal-length vectors")
        v.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "observed", o)


def _observed_pairs(series: SeriesWithGaps):
    idx = np.flatnonzero(series.observed)
    if idx.size < 2:
        raise InsufficientDataError(f"need at least 2 observed entries, have {idx.size}")
    return idx.astype(np.float64), series.values[series.observed]


def pchip_impute(series: SeriesWithGaps) -> np.ndarray:
    """Fill gaps with the shape-preserving piecewise cubic Hermite interpolant."""
    xs, ys = _observed_pairs(series)
    out = series.values.copy()
    missing = ~series.observed
    if missing.any():
        interp = PchipInterpolator(xs, ys, extrapolate=True)
        out[missing] = interp(np.flatnonzero(missing).astype(np.float64))
    return out


def makima_impute(series: SeriesWithGaps) -> np.ndarray:
    """Fill gaps with the modified-Akima interpolant.

    The modified-Akima slope weights need four secants around a knot; with
    three or fewer observed points the slopes fall back to the PCHIP rule.
    """
    xs, ys = _observed_pairs(series)
    if xs.size <= 3:
        return pchip_impute(series)
    out = series.values.copy()
    missing = ~series.observed
    if missing.any():
        interp = Akima1DInterpolator(xs, ys, method="makima", extrapolate=True)
        out[missing] = interp(np.flatnonzero(missing).astype(np.float64))
    return out


def knn_impute(train, query, mask, k: int) -> np.ndarray:
    """Mean of the k nearest complete training vectors at the missing entries.

    Distance is plain Euclidean over the observed coordinates of the query;
    ties are broken by training-set index. Observed entries pass through.
    """
    train = np.asarray(train, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    m = np.asarray(mask, dtype=np.float64)
    if train.ndim != 2:
        raise ShapeError("train must be a 2-D array of complete vectors")
    if q.ndim != 1 or q.shape != m.shape or train.shape[1] != q.size:
        raise ShapeError("query, mask, and training vectors must share one length")
    if train.shape[0] == 0 or not (1 <= k <= train.shape[0]):
        raise ConfigError(f"k must satisfy 1 <= k <= {train.shape[0]}, got {k}")
    obs = m.astype(bool)
    if not obs.any():
        raise ConfigError("query must have at least one observed entry")
    diffs = train[:, obs] - q[obs]
    dists = np.sqrt((diffs * diffs).sum(axis=1))
    order = np.argsort(dists, kind="stable")[:k]
    out = q.copy()
    missing = ~obs
    if missing.any():
        out[missing] = train[np.sort(order)][:, missing].mean(axis=0)
    return out
