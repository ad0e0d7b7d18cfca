"""Command-line interface: train, impute, eval, bench, synth.

Every run echoes its fully resolved configuration as one JSON line before
doing any work, so a run can be reproduced from its log. Error classes map
to distinct exit codes (see EXIT_*).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import evalbench, gain, io
from .errors import (
    CheckpointFormatError,
    CheckpointVersionError,
    ConfigError,
    DataError,
    ParseError,
    PoseFillError,
)
from .masking import mask_from_uniform
from .neural import load_checkpoint, save_checkpoint
from .pose import Pose18, validate_pose
from .rng import RngStream

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_USAGE = 2
EXIT_MISSING_FLAG = 3
EXIT_FILE = 4
EXIT_DATA = 5

HEAD_CHECKPOINT = "head.json"
BODY_CHECKPOINT = "body.json"


class _Parser(argparse.ArgumentParser):
    """argparse with distinct exit codes for unknown vs missing flags."""

    def error(self, message):
        self.print_usage(sys.stderr)
        code = EXIT_MISSING_FLAG if "required" in message else EXIT_USAGE
        self.exit(code, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="posefill", description="Complete missing 2D pose keypoints.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_train = sub.add_parser("train", help="train head and body generators")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--format", required=True, choices=("coco", "csv"))
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--epochs", type=int, default=5000)
    p_train.add_argument("--batch", type=int, default=128)
    p_train.add_argument("--pm", type=float, default=0.2)
    p_train.add_argument("--ph", type=float, default=0.9)
    p_train.add_argument("--delta", type=float, default=0.6)
    p_train.add_argument("--alpha", type=float, default=10.0)
    p_train.add_argument("--lambda", dest="l1_lambda", type=float, default=0.001)
    p_train.add_argument("--lr", type=float, default=gain.TrainConfig.learning_rate)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--head-loss", choices=gain.LOSS_KINDS, default="huber")
    p_train.add_argument("--body-loss", choices=gain.LOSS_KINDS, default="huber")
    p_train.add_argument("--head-residual", choices=("on", "off"), default="off")
    p_train.add_argument("--body-residual", choices=("on", "off"), default="on")
    p_train.add_argument("--coco-vis-threshold", type=int, default=1)

    p_impute = sub.add_parser("impute", help="complete poses from a CSV")
    p_impute.add_argument("--models", required=True)
    p_impute.add_argument("--input", required=True)
    p_impute.add_argument("--output", required=True)
    p_impute.add_argument("--noise", choices=("random", "nearest"), default="random")
    p_impute.add_argument("--margin", type=float, default=0.2)
    p_impute.add_argument("--seed", type=int, default=0)

    p_eval = sub.add_parser("eval", help="compare the imputer against baselines")
    p_eval.add_argument("--models", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--format", required=True, choices=("coco", "csv"))
    p_eval.add_argument("--pm", type=float, default=0.2)
    p_eval.add_argument("--baselines", default="pchip,makima,knn")
    p_eval.add_argument("--knn-k", type=int, default=5)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--report", required=True)
    p_eval.add_argument("--train-data", default=None, help="pose CSV for the k-NN reference set")
    p_eval.add_argument("--coco-vis-threshold", type=int, default=1)

    p_bench = sub.add_parser("bench", help="latency of the completion path")
    p_bench.add_argument("--models", required=True)
    p_bench.add_argument("--data", required=True)
    p_bench.add_argument("--iters", type=int, default=100)
    p_bench.add_argument("--report", required=True)
    p_bench.add_argument("--pm", type=float, default=0.2)
    p_bench.add_argument("--seed", type=int, default=0)

    p_synth = sub.add_parser("synth", help="generate synthetic pedestrian poses")
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--out", required=True)

    return parser


def _echo_config(args) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "command"}
    print(f"config: {json.dumps({'command': args.command, **resolved}, sort_keys=True)}")


def _load_dataset(path, fmt, vis_threshold=1, complete_only=False):
    if fmt == "coco":
        return io.load_coco_keypoints(path, visibility_threshold=vis_threshold, complete_only=complete_only)
    poses = io.load_pose_csv(path)
    if complete_only:
        poses = [p for p in poses if p.complete and not validate_pose(p).invalid_slots]
    return poses


def _load_models(models_dir) -> gain.PartModels:
    head, _ = load_checkpoint(Path(models_dir) / HEAD_CHECKPOINT)
    body, _ = load_checkpoint(Path(models_dir) / BODY_CHECKPOINT)
    return gain.PartModels(head=head, body=body)


def _cmd_train(args) -> int:
    data = _load_dataset(args.data, args.format, args.coco_vis_threshold, complete_only=True)
    if not data:
        raise DataError(f"no complete poses in {args.data}")
    common = dict(
        epochs=args.epochs,
        batch_size=args.batch,
        p_m=args.pm,
        p_h=args.ph,
        delta=args.delta,
        alpha=args.alpha,
        l1_lambda=args.l1_lambda,
        learning_rate=args.lr,
        seed=args.seed,
    )
    cfg_head = gain.head_config(loss_kind=args.head_loss, residual=args.head_residual == "on", **common)
    cfg_body = gain.body_config(loss_kind=args.body_loss, residual=args.body_residual == "on", **common)
    models, history = gain.train(data, cfg_head, cfg_body)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checkpoint(
        models.head,
        {"training_config": gain.config_snapshot(cfg_head), "seed": args.seed, "n_poses": len(data)},
        out / HEAD_CHECKPOINT,
    )
    save_checkpoint(
        models.body,
        {"training_config": gain.config_snapshot(cfg_body), "seed": args.seed, "n_poses": len(data)},
        out / BODY_CHECKPOINT,
    )
    (out / "history_head.csv").write_text(gain.history_to_csv(history.head), encoding="utf-8")
    (out / "history_body.csv").write_text(gain.history_to_csv(history.body), encoding="utf-8")
    print(f"trained on {len(data)} poses; checkpoints and histories written to {out}")
    return EXIT_OK


def _cmd_impute(args) -> int:
    models = _load_models(args.models)
    poses = io.load_pose_csv(args.input)
    rng = RngStream(args.seed)
    completed = []
    flags = []
    for i, pose in enumerate(poses):
        try:
            done, generated = gain.impute_pose(
                models, pose, noise_mode=args.noise, margin=args.margin, rng=rng
            )
        except PoseFillError as exc:
            raise DataError(f"pose {i}: {exc}") from exc
        completed.append(done)
        flags.append(generated)
    io.save_pose_csv(completed, args.output, generated=flags)
    n_generated = int(sum(f.sum() for f in flags))
    print(f"completed {len(poses)} poses ({n_generated} generated keypoints) -> {args.output}")
    return EXIT_OK


def _cmd_eval(args) -> int:
    models = _load_models(args.models)
    data = _load_dataset(args.data, args.format, args.coco_vis_threshold, complete_only=True)
    if not data:
        raise DataError(f"no complete poses in {args.data}")
    methods = tuple(m.strip() for m in args.baselines.split(",") if m.strip())
    knn_train = None
    if args.train_data is not None:
        knn_train = tuple(p for p in io.load_pose_csv(args.train_data) if p.complete)
        if not knn_train:
            raise DataError(f"no complete poses in {args.train_data}")
    cfg = evalbench.BaselineConfig(methods=methods, knn_k=args.knn_k, knn_train=knn_train)
    report = evalbench.compare_report(models, cfg, data, p_m=args.pm, seed=args.seed)
    report_path = Path(args.report)
    report_path.write_text(json.dumps(report.to_json_dict(), indent=2, allow_nan=False), encoding="utf-8")
    csv_path = report_path.with_suffix(".csv")
    csv_path.write_text(report.summary_csv(), encoding="utf-8")
    for name, metrics in report.methods.items():
        print(f"{name}: rmse={metrics.rmse_imputed:.6f} mean_latency={metrics.latency_mean_s:.6f}s")
    print(f"report written to {report_path} and {csv_path}")
    return EXIT_OK


def _corrupt_for_bench(poses, p_m, rng):
    """Drop keypoints at rate p_m, keeping every part anchored."""
    corrupted = []
    for pose in poses:
        points = np.array(pose.points)
        present = np.array(pose.present)
        for slots in (evalbench._PARTS[0].slots, evalbench._PARTS[1].slots):
            idx = np.array([int(k) for k in slots])
            if not present[idx].any():
                continue
            for _ in range(100):
                half = mask_from_uniform(rng.uniform(idx.size), p_m).astype(bool)
                keep = present[idx] & half
                if keep.any():
                    break
            present[idx] &= half
            points[idx[~half]] = 0.0
        corrupted.append(Pose18(points, present))
    return corrupted


def _cmd_bench(args) -> int:
    models = _load_models(args.models)
    poses = io.load_pose_csv(args.data)
    if not poses:
        raise DataError(f"no poses in {args.data}")
    rng = RngStream(args.seed)
    bench_poses = _corrupt_for_bench(poses, args.pm, rng)
    stats = evalbench.latency_bench(models, bench_poses, iters=args.iters, seed=args.seed)
    doc = {
        "mean_s": stats.mean_s,
        "median_s": stats.median_s,
        "p99_s": stats.p99_s,
        "n_calls": stats.n_calls,
        "warmup_calls": stats.warmup_calls,
        "scope": "full completion path per pose (preprocess + generate + postprocess)",
    }
    Path(args.report).write_text(json.dumps(doc, indent=2), encoding="utf-8")
    print(
        f"latency over {stats.n_calls} calls: mean={stats.mean_s * 1e3:.3f}ms "
        f"median={stats.median_s * 1e3:.3f}ms p99={stats.p99_s * 1e3:.3f}ms"
    )
    return EXIT_OK


def _cmd_synth(args) -> int:
    poses = evalbench.synth_poses(args.n, args.seed)
    io.save_pose_csv(poses, args.out)
    print(f"wrote {len(poses)} synthetic poses to {args.out}")
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "impute": _cmd_impute,
    "eval": _cmd_eval,
    "bench": _cmd_bench,
    "synth": _cmd_synth,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _echo_config(args)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, CheckpointFormatError, CheckpointVersionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FILE
    except PoseFillError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - unexpected failures
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
