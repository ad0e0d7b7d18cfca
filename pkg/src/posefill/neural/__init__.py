"""Dense networks with manual backprop, plus kernel backend selection.

The hot forward/backward kernels have two interchangeable implementations: a
compiled Cython extension and a pure-numpy fallback, chosen in
:mod:`posefill.neural.backend` at import time.
"""

from .backend import COMPILED_AVAILABLE, KERNELS_ENV, kernel_mode
from .model import (
    CHECKPOINT_VERSION,
    ForwardCache,
    MlpArch,
    MlpGrads,
    MlpParams,
    backward,
    forward,
    init_mlp,
    l1_penalty,
    load_checkpoint,
    save_checkpoint,
    sgd_step,
)

__all__ = [
    "CHECKPOINT_VERSION",
    "COMPILED_AVAILABLE",
    "KERNELS_ENV",
    "ForwardCache",
    "MlpArch",
    "MlpGrads",
    "MlpParams",
    "backward",
    "forward",
    "init_mlp",
    "kernel_mode",
    "l1_penalty",
    "load_checkpoint",
    "save_checkpoint",
    "sgd_step",
]
