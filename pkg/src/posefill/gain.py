"""Adversarial imputer: losses, training loop, and end-to-end pose completion.

Two generators are trained independently, one per part: the head model uses
the Huber reconstruction loss without the residual skip, the body model uses
Huber with the skip. Per minibatch the discriminator takes one SGD step and
the freshly updated discriminator is then used for the generator's step.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigError, DataError, DivergenceError, PartUnanchoredError, ShapeError
from .geometry import PartFrame, PartKind, forward_transform, inverse_transform
from .masking import (
    draw_hint_batch,
    draw_mask_batch,
    mask_from_presence,
    mask_observe,
    noise_fill,
)
from .neural import MlpArch, MlpParams, backward, forward, init_mlp, l1_penalty, sgd_step
from .neural.model import input_gradient
from .pose import N_KEYPOINTS, Pose18, validate_pose
from .rng import RngStream

# Confidence clamp applied before logarithms; prevents -inf without visibly
# biasing the losses.
CONFIDENCE_EPS = 1e-12

LOSS_KINDS = ("huber", "mse")


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters for training one part's generator/discriminator pair."""

    epochs: int = 5000
    batch_size: int = 128
    p_m: float = 0.2
    p_h: float = 0.9
    delta: float = 0.6
    alpha: float = 10.0
    l1_lambda: float = 0.001
    learning_rate: float = 0.05
    loss_kind: str = "huber"
    residual: bool = False
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ConfigError("epochs and batch_size must be >= 1")
        for name, value in (("p_m", self.p_m), ("p_h", self.p_h)):
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")
        if self.delta <= 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if self.alpha < 0 or self.l1_lambda < 0:
            raise ConfigError("alpha and l1_lambda must be >= 0")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if self.loss_kind not in LOSS_KINDS:
            raise ConfigError(f"loss_kind must be one of {LOSS_KINDS}, got {self.loss_kind!r}")


def head_config(**overrides) -> TrainConfig:
    """Default head configuration: Huber loss, residual skip off."""
    return replace(TrainConfig(loss_kind="huber", residual=False), **overrides)


def body_config(**overrides) -> TrainConfig:
    """Default body configuration: Huber loss, residual skip on."""
    return replace(TrainConfig(loss_kind="huber", residual=True), **overrides)


@dataclass
class PartModels:
    """The two trained generators (head l=5, body l=13)."""

    head: MlpParams
    body: MlpParams

    def __post_init__(self):
        if self.head.arch.part_len != 5:
            raise ShapeError("head model must have part length 5")
        if self.body.arch.part_len != 13:
            raise ShapeError("body model must have part length 13")

    def for_kind(self, kind: PartKind) -> MlpParams:
        return self.head if kind is PartKind.HEAD else self.body


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    loss_d: float
    loss_g: float
    loss_rec: float
    loss_adv: float
    seconds: float


@dataclass
class TrainHistory:
    head: list = field(default_factory=list)
    body: list = field(default_factory=list)

    def for_kind(self, kind: PartKind) -> list:
        return self.head if kind is PartKind.HEAD else self.body


HISTORY_COLUMNS = ("epoch", "loss_d", "loss_g", "loss_rec", "loss_adv", "seconds")


def history_to_csv(rows) -> str:
    lines = [",".join(HISTORY_COLUMNS)]
    for r in rows:
        lines.append(
            f"{r.epoch},{r.loss_d!r},{r.loss_g!r},{r.loss_rec!r},{r.loss_adv!r},{r.seconds!r}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Sample-level operations (vectors of length 2l)
# ---------------------------------------------------------------------------


def generator_impute(g_params: MlpParams, corrupted, mask) -> np.ndarray:
    """Generator output for one corrupted sample conditioned on its mask."""
    corrupted = np.asarray(corrupted, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if corrupted.shape != mask.shape or corrupted.ndim != 1:
        raise ShapeError("corrupted vector and mask must be equal-length vectors")
    y, _ = forward(g_params, np.concatenate([corrupted, mask]))
    return y


def splice(values, generated, mask) -> np.ndarray:
    """Keep observed entries, take generated values elsewhere."""
    v = np.asarray(values, dtype=np.float64)
    g = np.asarray(generated, dtype=np.float64)
    m = np.asarray(mask, dtype=np.float64)
    if not (v.shape == g.shape == m.shape):
        raise ShapeError("values, generated, and mask must have equal length")
    return np.where(m.astype(bool), v, g)


def discriminate(d_params: MlpParams, spliced, hint) -> np.ndarray:
    """Discriminator confidence that each entry of the spliced sample is real."""
    spliced = np.asarray(spliced, dtype=np.float64)
    hint = np.asarray(hint, dtype=np.float64)
    if spliced.shape != hint.shape or spliced.ndim != 1:
        raise ShapeError("spliced vector and hint must be equal-length vectors")
    y, _ = forward(d_params, np.concatenate([spliced, hint]))
    return y


def _clamped_confidence(confidence) -> np.ndarray:
    e = np.asarray(confidence, dtype=np.float64)
    if (e < 0).any() or (e > 1).any():
        raise ConfigError("confidence values must lie in [0, 1]")
    if (e <= 0).any() or (e >= 1).any():
        warnings.warn("confidence saturated at 0/1; clamping before log", RuntimeWarning)
    return np.clip(e, CONFIDENCE_EPS, 1.0 - CONFIDENCE_EPS)


def discriminator_loss(confidence, mask) -> float:
    """Mean cross-entropy between per-entry confidence and the mask."""
    e = _clamped_confidence(confidence)
    m = np.asarray(mask, dtype=np.float64)
    if e.shape != m.shape:
        raise ShapeError("confidence and mask must have equal length")
    ce = -(m * np.log(e) + (1.0 - m) * np.log1p(-e))
    return float(ce.mean())


def missing_confidence_loss(confidence, mask) -> float:
    """Negative mean log-confidence at the missing entries only."""
    e = _clamped_confidence(confidence)
    m = np.asarray(mask, dtype=np.float64)
    if e.shape != m.shape:
        raise ShapeError("confidence and mask must have equal length")
    return float(-((1.0 - m) * np.log(e)).sum() / e.size)


def masked_huber(reference, generated, mask, delta: float) -> float:
    """Huber loss over the observed entries, averaged by the observed count.

    Masked-out entries contribute exactly zero on both branches; with no
    observed entries the loss is defined as 0.
    """
    if delta <= 0:
        raise ConfigError(f"delta must be positive, got {delta}")
    ref = np.asarray(reference, dtype=np.float64)
    gen = np.asarray(generated, dtype=np.float64)
    m = np.asarray(mask, dtype=np.float64)
    if not (ref.shape == gen.shape == m.shape):
        raise ShapeError("reference, generated, and mask must have equal length")
    err = ref - gen
    abs_err = np.abs(err)
    per = np.where(abs_err <= delta, 0.5 * err * err, delta * abs_err - 0.5 * delta * delta)
    total = m.sum()
    if total == 0:
        return 0.0
    return float((m * per).sum() / total)


def masked_mse(reference, generated, mask) -> float:
    """Mean squared error over observed entries; 0 when nothing is observed."""
    ref = np.asarray(reference, dtype=np.float64)
    gen = np.asarray(generated, dtype=np.float64)
    m = np.asarray(mask, dtype=np.float64)
    if not (ref.shape == gen.shape == m.shape):
        raise ShapeError("reference, generated, and mask must have equal length")
    total = m.sum()
    if total == 0:
        return 0.0
    err = ref - gen
    return float((m * err * err).sum() / total)


def generator_loss(reference, generated, mask, confidence, params: MlpParams, cfg: TrainConfig) -> float:
    """Full generator objective: weighted reconstruction + adversarial + L1."""
    if cfg.loss_kind == "mse":
        rec = masked_mse(reference, generated, mask)
    else:
        rec = masked_huber(reference, generated, mask, cfg.delta)
    return float(
        cfg.alpha * rec + missing_confidence_loss(confidence, mask) + cfg.l1_lambda * l1_penalty(params)
    )


# ---------------------------------------------------------------------------
# Batched loss/gradient paths (shared by the training loop and gradient tests)
# ---------------------------------------------------------------------------


def _clip_batch(e):
    return np.clip(e, CONFIDENCE_EPS, 1.0 - CONFIDENCE_EPS)


def discriminator_loss_and_grads(d_params, spliced, hint, mask):
    """Batch-mean discriminator loss and its parameter gradients."""
    d_in = np.concatenate([spliced, hint], axis=1)
    e, cache = forward(d_params, d_in)
    ec = _clip_batch(e)
    n, width = e.shape
    loss = float(-(mask * np.log(ec) + (1.0 - mask) * np.log1p(-ec)).sum() / (n * width))
    grad_e = (-(mask / ec) + (1.0 - mask) / (1.0 - ec)) / (n * width)
    grad_e[(e <= CONFIDENCE_EPS) | (e >= 1.0 - CONFIDENCE_EPS)] = 0.0
    grads, _ = backward(d_params, cache, grad_e)
    return loss, grads


def generator_loss_and_grads(g_params, d_params, values, mask, noise, hint, cfg: TrainConfig, precomputed=None):
    """Batch-mean generator objective and gradients, discriminator frozen.

    ``values`` are the clean normalized vectors; the corrupted input is
    rebuilt internally as mask*values + (1-mask)*noise so the whole path
    from generator input to the objective is differentiated in one place.
    ``precomputed`` may carry (generated, generator cache) from an earlier
    forward on the identical batch to avoid recomputing it.
    Returns (loss_g, loss_rec, loss_adv, grads).
    """
    inv_mask = 1.0 - mask
    corrupted = values * mask + inv_mask * noise
    if precomputed is None:
        ig, g_cache = forward(g_params, np.concatenate([corrupted, mask], axis=1))
    else:
        ig, g_cache = precomputed
    spliced = mask * values + inv_mask * ig
    d_in = np.concatenate([spliced, hint], axis=1)
    e, d_cache = forward(d_params, d_in)
    ec = _clip_batch(e)
    n, width = e.shape

    loss_adv = float(-(inv_mask * np.log(ec)).sum() / (n * width))
    err = corrupted - ig
    if cfg.loss_kind == "mse":
        per = err * err
        dper = 2.0 * err
    else:
        abs_err = np.abs(err)
        quad = abs_err <= cfg.delta
        per = np.where(quad, 0.5 * err * err, cfg.delta * abs_err - 0.5 * cfg.delta**2)
        dper = np.where(quad, err, cfg.delta * np.sign(err))
    denom = mask.sum(axis=1)
    safe = denom > 0
    per_sample = np.zeros(n)
    per_sample[safe] = (mask * per).sum(axis=1)[safe] / denom[safe]
    loss_rec = float(per_sample.mean())
    penalty = l1_penalty(g_params)
    loss_g = cfg.alpha * loss_rec + loss_adv + cfg.l1_lambda * penalty

    grad_e = -(inv_mask / ec) / (n * width)
    grad_e[(e <= CONFIDENCE_EPS) | (e >= 1.0 - CONFIDENCE_EPS)] = 0.0
    d_input_grad = input_gradient(d_params, d_cache, grad_e)
    grad_ig = d_input_grad[:, :width] * inv_mask
    rec_grad = np.zeros_like(err)
    rec_grad[safe] = -(mask * dper)[safe] / denom[safe, None]
    grad_ig = grad_ig + (cfg.alpha / n) * rec_grad
    grads, _ = backward(g_params, g_cache, grad_ig)
    for w, gw in zip(g_params.weights, grads.weights):
        gw += cfg.l1_lambda * np.sign(w)
    return loss_g, loss_rec, loss_adv, grads


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

_PART_SPAWN_KEY = {PartKind.HEAD: 1, PartKind.BODY: 2}


def preprocess_part(poses, kind: PartKind, margin: float = 0.0) -> np.ndarray:
    """Stack the normalized 2l vectors of one part across a pose list."""
    return np.stack([forward_transform(p, kind, margin).values() for p in poses])


def _train_part(data: np.ndarray, cfg: TrainConfig, kind: PartKind):
    cfg.validate()
    n, width = data.shape
    l = kind.length
    if width != 2 * l:
        raise ShapeError(f"{kind.value} vectors must have length {2 * l}, got {width}")
    if n < cfg.batch_size:
        raise DataError(f"dataset size {n} is smaller than batch size {cfg.batch_size}")
    root = RngStream(np.random.SeedSequence(cfg.seed, spawn_key=(_PART_SPAWN_KEY[kind],)))
    g_init, d_init, loop = root.split(3)
    arch = MlpArch(part_len=l, residual=cfg.residual)
    g = init_mlp(arch, g_init)
    d = init_mlp(arch, d_init)
    history = []
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        perm = loop.permutation(n)
        sums = np.zeros(4)
        for start in range(0, n, cfg.batch_size):
            batch_idx = perm[start : start + cfg.batch_size]
            b = batch_idx.size
            values = data[batch_idx]
            # Fresh corruption each epoch: mask, noise, hint, in that order.
            mask = draw_mask_batch(b, l, cfg.p_m, loop)
            noise = (1.0 - mask) * loop.uniform((b, 2 * l))
            hint = draw_hint_batch(mask[:, :l], cfg.p_h, loop)

            corrupted = values * mask + noise
            ig, g_cache = forward(g, np.concatenate([corrupted, mask], axis=1))
            spliced = mask * values + (1.0 - mask) * ig
            loss_d, d_grads = discriminator_loss_and_grads(d, spliced, hint, mask)
            sgd_step(d, d_grads, cfg.learning_rate)

            loss_g, loss_rec, loss_adv, g_grads = generator_loss_and_grads(
                g, d, values, mask, noise, hint, cfg, precomputed=(ig, g_cache)
            )
            sgd_step(g, g_grads, cfg.learning_rate)

            if not (np.isfinite(loss_d) and np.isfinite(loss_g)):
                raise DivergenceError(kind.value, epoch)
            sums += b * np.array([loss_d, loss_g, loss_rec, loss_adv])
        stats = sums / n
        history.append(
            EpochStats(
                epoch=epoch,
                loss_d=float(stats[0]),
                loss_g=float(stats[1]),
                loss_rec=float(stats[2]),
                loss_adv=float(stats[3]),
                seconds=time.perf_counter() - t0,
            )
        )
    return g, history


def train(dataset, cfg_head: TrainConfig, cfg_body: TrainConfig):
    """Train the head and body generators on complete poses.

    Returns (PartModels, TrainHistory). Deterministic: seed, dataset, and
    config fully determine the resulting parameters.
    """
    if len(dataset) == 0:
        raise DataError("training dataset is empty")
    for i, pose in enumerate(dataset):
        report = validate_pose(pose)
        if not report.complete or report.invalid_slots:
            raise DataError(f"training pose {i} is not complete and finite")
    head_data = preprocess_part(dataset, PartKind.HEAD, 0.0)
    body_data = preprocess_part(dataset, PartKind.BODY, 0.0)
    head_model, head_hist = _train_part(head_data, cfg_head, PartKind.HEAD)
    body_model, body_hist = _train_part(body_data, cfg_body, PartKind.BODY)
    return PartModels(head=head_model, body=body_model), TrainHistory(head=head_hist, body=body_hist)


def config_snapshot(cfg: TrainConfig) -> dict:
    return asdict(cfg)


# ---------------------------------------------------------------------------
# Inference
# ---------------------------------------------------------------------------


def impute_pose(
    models: PartModels,
    pose: Pose18,
    noise_mode: str = "random",
    margin: float = 0.2,
    rng: RngStream | None = None,
):
    """Complete a pose: returns (pose with all 18 present, generated flags).

    Observed keypoints pass through bit-exactly; parts with nothing missing
    bypass the generator entirely. Every part that needs imputation must have
    at least one observed keypoint.
    """
    points = np.array(pose.points, dtype=np.float64)
    present = np.array(pose.present, dtype=bool)
    generated = np.zeros(N_KEYPOINTS, dtype=bool)
    todo = []
    unanchored = []
    for kind in (PartKind.HEAD, PartKind.BODY):
        idx = np.array([int(k) for k in kind.slots])
        part_present = pose.present[idx]
        if part_present.all():
            continue
        if not part_present.any():
            unanchored.append(kind.value)
        else:
            todo.append((kind, idx))
    if unanchored:
        raise PartUnanchoredError(unanchored)
    for kind, idx in todo:
        frame = forward_transform(pose, kind, margin)
        mask = mask_from_presence(frame)
        noise = noise_fill(mask, rng, noise_mode, frame=frame)
        corrupted = mask_observe(frame.values(), mask) + noise
        gen_vec = generator_impute(models.for_kind(kind), corrupted, mask)
        filled_vec = splice(frame.values(), gen_vec, mask)
        l = kind.length
        filled = PartFrame(
            kind=kind,
            nx=filled_vec[:l],
            ny=filled_vec[l:],
            mask=np.ones(l, dtype=bool),
            transform=frame.transform,
        )
        pixel_points = inverse_transform(filled)
        for local in np.flatnonzero(~frame.mask):
            slot = idx[local]
            points[slot] = pixel_points[local]
            present[slot] = True
            generated[slot] = True
    return Pose18(points, present), generated
