"""Unified-scale RMSE evaluation, latency benchmarking, and synthetic poses.

The comparison protocol mirrors how the imputer is trained: each evaluation
pose is complete, its parts are normalized from the full pose (so the scale
covers every true coordinate), one seeded mask per pose corrupts the
normalized vectors, and every method fills the same corrupted vectors. RMSE
is computed over the generated coordinates only, after mapping both truth
and imputed poses into one dataset-wide per-axis min-max scale so results
are comparable across parts and methods.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .baselines import SeriesWithGaps, knn_impute, makima_impute, pchip_impute
from .errors import ConfigError, DataError, ShapeError, UndefinedMetricError
from .gain import PartModels, generator_impute, impute_pose, splice
from .geometry import PartFrame, PartKind, forward_transform, inverse_transform
from .masking import mask_from_uniform, noise_fill
from .pose import N_KEYPOINTS, Pose18, validate_pose
from .rng import RngStream

# ---------------------------------------------------------------------------
# Unified-scale RMSE
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvalScale:
    """Dataset-wide per-axis (min, max) over all ground-truth coordinates."""

    x: tuple[float, float]
    y: tuple[float, float]


def build_eval_scale(truth_poses) -> EvalScale:
    if len(truth_poses) == 0:
        raise ConfigError("cannot build an evaluation scale from zero poses")
    pts = np.concatenate([p.points for p in truth_poses])
    x = (float(pts[:, 0].min()), float(pts[:, 0].max()))
    y = (float(pts[:, 1].min()), float(pts[:, 1].max()))
    if x[1] <= x[0] or y[1] <= y[0]:
        raise ConfigError("evaluation set is degenerate: per-axis max must exceed min")
    return EvalScale(x=x, y=y)


def unified_rmse(truth, imputed, generated_flags) -> float:
    """RMSE over generated coordinates after mapping both sets into one scale.

    x and y of each generated keypoint count as separate entries.
    """
    if not (len(truth) == len(imputed) == len(generated_flags)):
        raise ShapeError("truth, imputed, and flags must have equal lengths")
    scale = build_eval_scale(truth)
    span_x = scale.x[1] - scale.x[0]
    span_y = scale.y[1] - scale.y[0]
    sq_sum = 0.0
    count = 0
    for t, im, flags in zip(truth, imputed, generated_flags):
        idx = np.flatnonzero(np.asarray(flags, dtype=bool))
        if idx.size == 0:
            continue
        dx = (t.points[idx, 0] - im.points[idx, 0]) / span_x
        dy = (t.points[idx, 1] - im.points[idx, 1]) / span_y
        sq_sum += float((dx * dx).sum() + (dy * dy).sum())
        count += 2 * idx.size
    if count == 0:
        raise UndefinedMetricError("no generated entries to score")
    return math.sqrt(sq_sum / count)


# ---------------------------------------------------------------------------
# Latency benchmark
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LatencyStats:
    mean_s: float
    median_s: float
    p99_s: float
    n_calls: int
    warmup_calls: int


def _latency_stats(times, warmup) -> LatencyStats:
    arr = np.asarray(times, dtype=np.float64)
    return LatencyStats(
        mean_s=float(arr.mean()),
        median_s=float(np.median(arr)),
        p99_s=float(np.percentile(arr, 99)),
        n_calls=int(arr.size),
        warmup_calls=int(warmup),
    )


def latency_bench(
    models: PartModels,
    poses,
    iters: int = 100,
    noise_mode: str = "random",
    margin: float = 0.2,
    seed: int = 0,
) -> LatencyStats:
    """Wall-clock timing of the full completion path, single-threaded.

    Cycles through the pose list ``iters`` times; an extra 10% of calls run
    first as warm-up and are excluded, leaving exactly iters * len(poses)
    timed calls.
    """
    if len(poses) == 0:
        raise ConfigError("latency benchmark needs at least one pose")
    if iters < 1:
        raise ConfigError("iters must be >= 1")
    rng = RngStream(seed)
    timed = iters * len(poses)
    warmup = math.ceil(0.1 * timed)
    times = np.empty(timed)
    n = len(poses)
    for i in range(warmup + timed):
        pose = poses[i % n]
        t0 = time.perf_counter()
        impute_pose(models, pose, noise_mode=noise_mode, margin=margin, rng=rng)
        dt = time.perf_counter() - t0
        if i >= warmup:
            times[i - warmup] = dt
    return _latency_stats(times, warmup)


# ---------------------------------------------------------------------------
# Synthetic pedestrians
# ---------------------------------------------------------------------------

# Parametric upright-pedestrian model. Segment lengths are fixed fractions
# of the torso length (neck to hip-center distance, drawn in pixels). Joint
# angles, in radians, follow a gait model: one stride factor counter-swings
# the arms against the legs, knee and elbow flexion track their parent
# joint, and each joint adds a small independent deviation, the way real
# walking couples the limbs. Swings are deviations from the torso-down
# direction; bends are relative to the parent segment.
POSE_SEGMENT_FRACTIONS = {
    "shoulder_half": 0.26,
    "hip_half": 0.18,
    "upper_arm": 0.57,
    "forearm": 0.52,
    "thigh": 0.77,
    "shin": 0.82,
    "neck_to_nose": 0.35,
    "eye_dx": 0.07,
    "eye_dy": 0.035,
    "ear_dx": 0.125,
    "ear_dy": 0.015,
}

# Sampled latent factors (uniform ranges).
POSE_MODEL_RANGES = {
    "torso_px": (120.0, 220.0),
    "neck_x_px": (250.0, 750.0),
    "neck_y_px": (150.0, 350.0),
    "torso_lean": (-0.25, 0.25),
    "shoulder_tilt": (-0.12, 0.12),
    "hip_tilt": (-0.12, 0.12),
    "stride": (-1.0, 1.0),
    "arm_amp": (0.2, 0.9),
    "leg_amp": (0.15, 0.6),
    "elbow_base": (0.15, 0.7),
    "elbow_gain": (0.3, 0.8),
    "knee_gain": (0.5, 1.0),
    "joint_noise": (-0.22, 0.22),
    "head_tilt_noise": (-0.15, 0.15),
    "global_rotation": (-0.2618, 0.2618),
}

# Resulting per-joint bounds implied by the latent ranges (the scan test
# checks measured angles against these).
POSE_ANGLE_BOUNDS = {
    "shoulder_swing": (-1.12, 1.12),  # arm_amp * stride + joint noise
    "elbow_bend": (-0.87, 1.72),  # elbow_base + elbow_gain * stride + noise
    "hip_swing": (-0.82, 0.82),  # leg_amp * stride + joint noise
    "knee_bend": (-0.90, 0.90),  # -knee_gain * hip swing + joint noise
    "head_tilt": (-0.275, 0.275),  # half the torso lean + head noise
}

JITTER_FRACTION = 0.01  # Gaussian sigma as a fraction of torso length


def _down(angle: float) -> np.ndarray:
    # Unit vector pointing "down" in image coordinates (y grows downward),
    # rotated by the given angle.
    return np.array([math.sin(angle), math.cos(angle)])


def _side(angle: float) -> np.ndarray:
    # Unit vector to the image right, perpendicular to _down(angle).
    return np.array([math.cos(angle), -math.sin(angle)])


def synth_poses(n: int, seed: int, jitter: float = JITTER_FRACTION):
    """Sample complete upright-pedestrian poses from the parametric model.

    Deterministic per seed; the jitter draws are consumed even when
    ``jitter`` is 0 so the underlying skeletons match across jitter settings.
    """
    if n < 1:
        raise ConfigError("need n >= 1 synthetic poses")
    rng = RngStream(seed)
    r = POSE_MODEL_RANGES
    f = POSE_SEGMENT_FRACTIONS

    def draw(name):
        lo, hi = r[name]
        return float(rng.uniform_range(lo, hi))

    poses = []
    for _ in range(n):
        torso = draw("torso_px")
        neck = np.array([draw("neck_x_px"), draw("neck_y_px")])
        lean = draw("torso_lean")
        shoulder_tilt = draw("shoulder_tilt")
        hip_tilt = draw("hip_tilt")
        stride = draw("stride")
        arm_amp = draw("arm_amp")
        leg_amp = draw("leg_amp")
        elbow_base = draw("elbow_base")
        elbow_gain = draw("elbow_gain")
        knee_gain = draw("knee_gain")
        hip_center = neck + torso * _down(lean)
        shoulder_side = _side(lean + shoulder_tilt)
        hip_side = _side(lean + hip_tilt)
        points = np.zeros((N_KEYPOINTS, 2))
        points[1] = neck
        points[2] = neck - f["shoulder_half"] * torso * shoulder_side  # right side faces image left
        points[5] = neck + f["shoulder_half"] * torso * shoulder_side
        points[8] = hip_center - f["hip_half"] * torso * hip_side
        points[11] = hip_center + f["hip_half"] * torso * hip_side
        # Arms counter-swing the stride; the left/right pair is antiphase.
        for phase, (shoulder_slot, elbow_slot, wrist_slot) in ((-1.0, (2, 3, 4)), (1.0, (5, 6, 7))):
            swing = phase * arm_amp * stride + draw("joint_noise")
            bend = elbow_base + elbow_gain * phase * stride + draw("joint_noise")
            points[elbow_slot] = points[shoulder_slot] + f["upper_arm"] * torso * _down(lean + swing)
            points[wrist_slot] = points[elbow_slot] + f["forearm"] * torso * _down(lean + swing + bend)
        for phase, (hip_slot, knee_slot, ankle_slot) in ((1.0, (8, 9, 10)), (-1.0, (11, 12, 13))):
            swing = phase * leg_amp * stride + draw("joint_noise")
            bend = -knee_gain * swing + draw("joint_noise")
            points[knee_slot] = points[hip_slot] + f["thigh"] * torso * _down(lean + swing)
            points[ankle_slot] = points[knee_slot] + f["shin"] * torso * _down(lean + swing + bend)
        head_dir = 0.5 * lean + draw("head_tilt_noise")
        points[0] = neck - f["neck_to_nose"] * torso * _down(head_dir)
        hside = _side(head_dir)
        hdown = _down(head_dir)
        points[14] = points[0] - f["eye_dx"] * torso * hside - f["eye_dy"] * torso * hdown
        points[15] = points[0] + f["eye_dx"] * torso * hside - f["eye_dy"] * torso * hdown
        points[16] = points[0] - f["ear_dx"] * torso * hside - f["ear_dy"] * torso * hdown
        points[17] = points[0] + f["ear_dx"] * torso * hside - f["ear_dy"] * torso * hdown
        gamma = draw("global_rotation")
        c, s = math.cos(gamma), math.sin(gamma)
        rel = points - hip_center
        points = hip_center + rel @ np.array([[c, s], [-s, c]])
        noise = rng.normal((N_KEYPOINTS, 2))
        points = points + jitter * torso * noise
        poses.append(Pose18.complete_from_points(points))
    return poses


# ---------------------------------------------------------------------------
# Comparison protocol
# ---------------------------------------------------------------------------

KNOWN_BASELINES = ("pchip", "makima", "knn")
IMPUTER_METHOD = "gain"


@dataclass(frozen=True)
class BaselineConfig:
    """Which baselines run and how k-NN finds its reference vectors.

    ``knn_train`` holds complete poses whose part vectors form the k-NN
    reference set; when None, the evaluation set itself is used with the
    query pose left out.
    """

    methods: tuple = KNOWN_BASELINES
    knn_k: int = 5
    knn_train: tuple = None

    def validate(self):
        for m in self.methods:
            if m not in KNOWN_BASELINES:
                raise ConfigError(f"unknown baseline {m!r}; expected subset of {KNOWN_BASELINES}")
        if self.knn_k < 1:
            raise ConfigError("knn_k must be >= 1")


@dataclass(frozen=True)
class MethodMetrics:
    rmse_imputed: float
    n_imputed_entries: int
    latency_mean_s: float
    latency_median_s: float
    latency_p99_s: float


@dataclass(frozen=True)
class EvalReport:
    methods: dict
    config: dict
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "config": self.config,
            "methods": {
                name: {
                    "rmse_imputed": m.rmse_imputed,
                    "n_imputed_entries": m.n_imputed_entries,
                    "latency_mean_s": m.latency_mean_s,
                    "latency_median_s": m.latency_median_s,
                    "latency_p99_s": m.latency_p99_s,
                }
                for name, m in self.methods.items()
            },
        }

    def summary_csv(self) -> str:
        lines = ["method,rmse_imputed,n_imputed_entries,latency_mean_s,latency_median_s,latency_p99_s"]
        for name, m in self.methods.items():
            lines.append(
                f"{name},{m.rmse_imputed!r},{m.n_imputed_entries},"
                f"{m.latency_mean_s!r},{m.latency_median_s!r},{m.latency_p99_s!r}"
            )
        return "\n".join(lines) + "\n"


_PARTS = (PartKind.HEAD, PartKind.BODY)
_MASK_RETRIES = 100


@dataclass
class _PosedCase:
    """One evaluation pose: per-part frames, clean vectors, and masks."""

    truth: Pose18
    frames: dict
    clean: dict
    masks: dict  # 2l vectors of 0/1
    flags: np.ndarray  # (18,) generated-keypoint flags


def _draw_part_mask(l: int, p_m: float, rng: RngStream) -> np.ndarray:
    # Interpolation baselines need two observed knots per axis series, so a
    # part keeps at least 2 observed keypoints; redraw the rare violators.
    for _ in range(_MASK_RETRIES):
        half = mask_from_uniform(rng.uniform(l), p_m)
        if half.sum() >= 2:
            return half
    raise ConfigError(f"could not draw a mask keeping 2 observed keypoints at p_m={p_m}")


def _prepare_cases(data, p_m, margin, rng) -> list:
    cases = []
    for pose in data:
        frames = {}
        clean = {}
        masks = {}
        flags = np.zeros(N_KEYPOINTS, dtype=bool)
        for kind in _PARTS:
            frame = forward_transform(pose, kind, margin)
            half = _draw_part_mask(kind.length, p_m, rng)
            frames[kind] = frame
            clean[kind] = frame.values()
            masks[kind] = np.concatenate([half, half])
            missing_local = np.flatnonzero(half == 0.0)
            for local in missing_local:
                flags[int(kind.slots[local])] = True
        cases.append(_PosedCase(truth=pose, frames=frames, clean=clean, masks=masks, flags=flags))
    return cases


def _rebuild_pose(case: _PosedCase, filled: dict) -> Pose18:
    points = np.array(case.truth.points)
    for kind in _PARTS:
        mask_half = case.masks[kind][: kind.length].astype(bool)
        if mask_half.all():
            continue
        l = kind.length
        vec = filled[kind]
        frame = PartFrame(
            kind=kind,
            nx=vec[:l],
            ny=vec[l:],
            mask=np.ones(l, dtype=bool),
            transform=case.frames[kind].transform,
        )
        pixel_points = inverse_transform(frame)
        for local in np.flatnonzero(~mask_half):
            points[int(kind.slots[local])] = pixel_points[local]
    return Pose18.complete_from_points(points)


def _fill_gain(case, models, noise_mode, noise_rng):
    filled = {}
    for kind in _PARTS:
        mask = case.masks[kind]
        clean = case.clean[kind]
        if mask.min() == 1.0:
            filled[kind] = clean
            continue
        observed_vec = clean * mask
        noise = noise_fill(mask, noise_rng, noise_mode, frame=_masked_frame(case, kind))
        corrupted = observed_vec + noise
        generated = generator_impute(models.for_kind(kind), corrupted, mask)
        filled[kind] = splice(clean, generated, mask)
    return filled


def _masked_frame(case, kind):
    # Frame view whose mask reflects the drawn corruption (used by the
    # nearest-observed noise mode).
    frame = case.frames[kind]
    half = case.masks[kind][: kind.length].astype(bool)
    return PartFrame(
        kind=kind,
        nx=frame.nx,
        ny=frame.ny,
        mask=half,
        transform=frame.transform,
    )


def _fill_interp(case, impute_fn):
    filled = {}
    for kind in _PARTS:
        mask = case.masks[kind]
        clean = case.clean[kind]
        if mask.min() == 1.0:
            filled[kind] = clean
            continue
        l = kind.length
        half = mask[:l].astype(bool)
        observed_vec = clean * mask
        nx = impute_fn(SeriesWithGaps(values=observed_vec[:l], observed=half))
        ny = impute_fn(SeriesWithGaps(values=observed_vec[l:], observed=half))
        filled[kind] = splice(clean, np.concatenate([nx, ny]), mask)
    return filled


def _fill_knn(case, train_vectors, k):
    filled = {}
    for kind in _PARTS:
        mask = case.masks[kind]
        clean = case.clean[kind]
        if mask.min() == 1.0:
            filled[kind] = clean
            continue
        query = clean * mask
        result = knn_impute(train_vectors[kind], query, mask, k)
        filled[kind] = splice(clean, result, mask)
    return filled


def compare_report(
    models: PartModels,
    baselines: BaselineConfig,
    data,
    p_m: float,
    seed: int,
    margin: float = 0.0,
    noise_mode: str = "random",
) -> EvalReport:
    """Score the imputer against the configured baselines on complete poses.

    One seeded mask per pose corrupts the normalized part vectors; every
    method fills bit-identical inputs. Reported latencies cover each
    method's fill plus the inverse transform back to pixels.
    """
    baselines.validate()
    if len(data) == 0:
        raise DataError("evaluation set is empty")
    for i, pose in enumerate(data):
        report = validate_pose(pose)
        if not report.complete or report.invalid_slots:
            raise DataError(f"evaluation pose {i} is not complete and finite")
    root = RngStream(seed)
    mask_rng, noise_rng = root.split(2)
    cases = _prepare_cases(data, p_m, margin, mask_rng)

    knn_reference = "none"
    train_vectors = None
    if "knn" in baselines.methods:
        if baselines.knn_train is not None:
            pool = list(baselines.knn_train)
            if len(pool) < baselines.knn_k:
                raise ConfigError("knn_train must hold at least knn_k poses")
            train_vectors = {
                kind: np.stack([forward_transform(p, kind, margin).values() for p in pool])
                for kind in _PARTS
            }
            knn_reference = "train-data"
        else:
            if len(data) - 1 < baselines.knn_k:
                raise ConfigError("leave-one-out k-NN needs more evaluation poses than knn_k")
            train_vectors = {kind: np.stack([c.clean[kind] for c in cases]) for kind in _PARTS}
            knn_reference = "leave-one-out"

    truth = [c.truth for c in cases]
    flags = [c.flags for c in cases]
    methods = {}
    for name in (IMPUTER_METHOD,) + tuple(baselines.methods):
        imputed = []
        times = np.empty(len(cases))
        for i, case in enumerate(cases):
            t0 = time.perf_counter()
            if name == IMPUTER_METHOD:
                filled = _fill_gain(case, models, noise_mode, noise_rng)
            elif name == "pchip":
                filled = _fill_interp(case, pchip_impute)
            elif name == "makima":
                filled = _fill_interp(case, makima_impute)
            else:
                if knn_reference == "leave-one-out":
                    vectors = {
                        kind: np.delete(train_vectors[kind], i, axis=0) for kind in _PARTS
                    }
                else:
                    vectors = train_vectors
                filled = _fill_knn(case, vectors, baselines.knn_k)
            pose_out = _rebuild_pose(case, filled)
            times[i] = time.perf_counter() - t0
            imputed.append(pose_out)
        rmse = unified_rmse(truth, imputed, flags)
        n_entries = int(sum(2 * f.sum() for f in flags))
        methods[name] = MethodMetrics(
            rmse_imputed=rmse,
            n_imputed_entries=n_entries,
            latency_mean_s=float(times.mean()),
            latency_median_s=float(np.median(times)),
            latency_p99_s=float(np.percentile(times, 99)),
        )
    config = {
        "p_m": p_m,
        "margin": margin,
        "noise_mode": noise_mode,
        "methods": [IMPUTER_METHOD, *baselines.methods],
        "knn_k": baselines.knn_k,
        "knn_reference": knn_reference,
        "n_poses": len(data),
        "latency_scope": "fill plus inverse transform; see latency_bench for the full path",
    }
    return EvalReport(methods=methods, config=config, seed=seed)
