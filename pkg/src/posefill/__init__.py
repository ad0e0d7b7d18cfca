"""Completion of partially occluded 2D pedestrian pose keypoints.

Pipeline: split a pose into head and body, rotate each part so its reference
line (ears or shoulders) is horizontal, project onto the axes, min-max
normalize, fill the missing entries with a trained adversarial imputer, and
invert the transform back to image pixels. Classical baselines (PCHIP,
modified Akima, k-NN) and an evaluation/latency harness are included.
"""

from .baselines import SeriesWithGaps, knn_impute, makima_impute, pchip_impute
from .evalbench import (
    BaselineConfig,
    EvalReport,
    EvalScale,
    compare_report,
    latency_bench,
    synth_poses,
    unified_rmse,
)
from .gain import (
    PartModels,
    TrainConfig,
    TrainHistory,
    body_config,
    head_config,
    impute_pose,
    train,
)
from .geometry import PartFrame, PartKind, TransformRecord, forward_transform, inverse_transform
from .io import load_coco_keypoints, load_pose_csv, save_pose_csv
from .neural import MlpArch, MlpParams, load_checkpoint, save_checkpoint
from .pose import Keypoint, Pose18, skeleton_distance, validate_pose
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "BaselineConfig",
    "EvalReport",
    "EvalScale",
    "Keypoint",
    "MlpArch",
    "MlpParams",
    "PartFrame",
    "PartKind",
    "PartModels",
    "Pose18",
    "RngStream",
    "SeriesWithGaps",
    "TrainConfig",
    "TrainHistory",
    "TransformRecord",
    "body_config",
    "compare_report",
    "forward_transform",
    "head_config",
    "impute_pose",
    "inverse_transform",
    "knn_impute",
    "latency_bench",
    "load_checkpoint",
    "load_coco_keypoints",
    "load_pose_csv",
    "makima_impute",
    "pchip_impute",
    "save_checkpoint",
    "save_pose_csv",
    "skeleton_distance",
    "synth_poses",
    "train",
    "unified_rmse",
    "validate_pose",
]
