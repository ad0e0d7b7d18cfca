"""Kernel backend selection, fixed at import time.

The compiled extension is used when importable; otherwise every call falls
back to the numpy kernels. ``POSEFILL_KERNELS`` overrides the policy:

* ``auto`` (default) - compiled kernels for small batches, numpy (BLAS)
  for larger ones where vendor matmuls win;
* ``compiled`` - always use the extension (ImportError if it is missing);
* ``numpy`` - never use the extension.

Run ``benchmarks/compare_backends.py`` to see the crossover on your machine.
"""

from __future__ import annotations

import os

from ..errors import ConfigError
from . import _numpy_backend

try:
    from . import _kernels
except ImportError:
    _kernels = None

KERNELS_ENV = "POSEFILL_KERNELS"
_choice = os.environ.get(KERNELS_ENV, "auto").strip().lower()
if _choice not in {"auto", "compiled", "numpy"}:
    raise ConfigError(f"{KERNELS_ENV} must be one of auto|compiled|numpy, got {_choice!r}")
if _choice == "compiled" and _kernels is None:
    raise ImportError(
        "POSEFILL_KERNELS=compiled but the posefill.neural._kernels extension is not built"
    )

COMPILED_AVAILABLE = _kernels is not None

# Batch-size threshold for `auto`: at or below this the fused compiled loops
# beat numpy's per-call dispatch overhead.
SMALL_BATCH_LIMIT = 16


def kernel_mode() -> str:
    return _choice


def active_backend(n_rows: int) -> str:
    return "compiled" if _use_compiled(n_rows) else "numpy"


def _use_compiled(n_rows: int) -> bool:
    if _kernels is None or _choice == "numpy":
        return False
    if _choice == "compiled":
        return True
    return n_rows <= SMALL_BATCH_LIMIT


def forward_batch(weights, biases, x, residual):
    if _use_compiled(x.shape[0]):
        return _kernels.forward_batch(weights, biases, x, residual)
    return _numpy_backend.forward_batch(weights, biases, x, residual)


def backward_batch(weights, acts, skip, y, grad_y, residual, with_param_grads=True):
    if _use_compiled(y.shape[0]):
        return _kernels.backward_batch(weights, acts, skip, y, grad_y, residual, with_param_grads)
    return _numpy_backend.backward_batch(weights, acts, skip, y, grad_y, residual, with_param_grads)
