"""Pure numpy implementation of the dense-network kernels.

The network is eight ReLU layers followed by a sigmoid output layer; when the
residual flag is set, the output of layer 4 is added to the output of layer 8
before the output layer. ``forward_batch`` returns everything ``backward_batch``
needs: the per-layer activations, the merged skip sum, and the output.
"""

from __future__ import annotations

import numpy as np


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward_batch(weights, biases, x, residual):
    """Run the fused forward pass on a (n, d_in) batch.

    Returns (y, activations, skip) where activations[0] is the input and
    activations[j] the post-ReLU output of hidden layer j.
    """
    acts = [x]
    a = x
    for w, b in zip(weights[:-1], biases[:-1]):
        z = a @ w.T
        z += b
        np.maximum(z, 0.0, out=z)
        acts.append(z)
        a = z
    skip = acts[4] + acts[8] if residual else acts[8]
    z = skip @ weights[-1].T
    z += biases[-1]
    y = sigmoid(z)
    return y, acts, skip


def backward_batch(weights, acts, skip, y, grad_y, residual, with_param_grads=True):
    """Exact reverse-mode gradients of :func:`forward_batch`.

    ReLU uses subgradient 0 at exactly 0. Returns (weight grads, bias grads,
    input grad); with the residual flag the skip branch routes gradient to
    both layer 8 and layer 4. ``with_param_grads=False`` skips the parameter
    gradients (the input gradient is all the generator step needs from the
    frozen discriminator).
    """
    n_layers = len(weights)
    gz = grad_y * (y * (1.0 - y))
    dws = [None] * n_layers
    dbs = [None] * n_layers
    if with_param_grads:
        dws[-1] = gz.T @ skip
        dbs[-1] = gz.sum(axis=0)
    gs = gz @ weights[-1]
    ga = gs
    for j in range(n_layers - 1, 0, -1):
        gz = ga * (acts[j] > 0)
        if with_param_grads:
            dws[j - 1] = gz.T @ acts[j - 1]
            dbs[j - 1] = gz.sum(axis=0)
        ga = gz @ weights[j - 1]
        if residual and j == 5:
            ga = ga + gs
    return dws, dbs, ga
