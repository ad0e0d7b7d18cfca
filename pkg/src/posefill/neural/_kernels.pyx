# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled dense-network kernels.

Same contracts and cache layout as ``posefill.neural._numpy_backend``; the
dispatcher in ``posefill.neural.backend`` routes small batches here, where the
fused loops beat numpy's per-call overhead.
"""

from libc.math cimport exp

import numpy as np


cdef void _dense(const double[:, ::1] a, const double[:, ::1] w,
                 const double[::1] b, double[:, ::1] out, bint relu) noexcept nogil:
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t din = a.shape[1]
    cdef Py_ssize_t dout = w.shape[0]
    cdef Py_ssize_t i, o, k
    cdef double acc
    for i in range(n):
        for o in range(dout):
            acc = b[o]
            for k in range(din):
                acc += a[i, k] * w[o, k]
            if relu and acc < 0.0:
                acc = 0.0
            out[i, o] = acc


cdef void _sigmoid_inplace(double[:, ::1] z) noexcept nogil:
    cdef Py_ssize_t i, o
    cdef double v, e
    for i in range(z.shape[0]):
        for o in range(z.shape[1]):
            v = z[i, o]
            if v >= 0.0:
                z[i, o] = 1.0 / (1.0 + exp(-v))
            else:
                e = exp(v)
                z[i, o] = e / (1.0 + e)


cdef void _add_inplace(double[:, ::1] a, const double[:, ::1] b) noexcept nogil:
    cdef Py_ssize_t i, k
    for i in range(a.shape[0]):
        for k in range(a.shape[1]):
            a[i, k] += b[i, k]


cdef void _sigmoid_grad(const double[:, ::1] gy, const double[:, ::1] y,
                        double[:, ::1] gz) noexcept nogil:
    cdef Py_ssize_t i, o
    for i in range(y.shape[0]):
        for o in range(y.shape[1]):
            gz[i, o] = gy[i, o] * y[i, o] * (1.0 - y[i, o])


cdef void _relu_grad(const double[:, ::1] ga, const double[:, ::1] act,
                     double[:, ::1] gz) noexcept nogil:
    cdef Py_ssize_t i, o
    for i in range(act.shape[0]):
        for o in range(act.shape[1]):
            gz[i, o] = ga[i, o] if act[i, o] > 0.0 else 0.0


cdef void _param_grads(const double[:, ::1] gz, const double[:, ::1] a_prev,
                       double[:, ::1] dw, double[::1] db) noexcept nogil:
    # dw[o, k] = sum_i gz[i, o] * a_prev[i, k]; db[o] = sum_i gz[i, o]
    cdef Py_ssize_t n = gz.shape[0]
    cdef Py_ssize_t dout = gz.shape[1]
    cdef Py_ssize_t din = a_prev.shape[1]
    cdef Py_ssize_t i, o, k
    cdef double g
    for i in range(n):
        for o in range(dout):
            g = gz[i, o]
            db[o] += g
            if g != 0.0:
                for k in range(din):
                    dw[o, k] += g * a_prev[i, k]


cdef void _input_grad(const double[:, ::1] gz, const double[:, ::1] w,
                      double[:, ::1] ga) noexcept nogil:
    # ga[i, k] = sum_o gz[i, o] * w[o, k]
    cdef Py_ssize_t n = gz.shape[0]
    cdef Py_ssize_t dout = gz.shape[1]
    cdef Py_ssize_t din = w.shape[1]
    cdef Py_ssize_t i, o, k
    cdef double g
    for i in range(n):
        for o in range(dout):
            g = gz[i, o]
            if g != 0.0:
                for k in range(din):
                    ga[i, k] += g * w[o, k]


def forward_batch(list weights, list biases, x, bint residual):
    cdef Py_ssize_t n_layers = len(weights)
    cdef Py_ssize_t j
    acts = [x]
    a = x
    for j in range(n_layers - 1):
        w = weights[j]
        out = np.empty((a.shape[0], w.shape[0]))
        _dense(a, w, biases[j], out, True)
        acts.append(out)
        a = out
    if residual:
        skip = np.add(acts[4], acts[8])
    else:
        skip = acts[8]
    w = weights[n_layers - 1]
    y = np.empty((skip.shape[0], w.shape[0]))
    _dense(skip, w, biases[n_layers - 1], y, False)
    _sigmoid_inplace(y)
    return y, acts, skip


def backward_batch(list weights, list acts, skip, y, grad_y, bint residual,
                   bint with_param_grads=True):
    cdef Py_ssize_t n_layers = len(weights)
    cdef Py_ssize_t j
    dws = [None] * n_layers
    dbs = [None] * n_layers
    gz = np.empty_like(y)
    _sigmoid_grad(grad_y, y, gz)
    if with_param_grads:
        dws[n_layers - 1] = np.zeros_like(weights[n_layers - 1])
        dbs[n_layers - 1] = np.zeros(y.shape[1])
        _param_grads(gz, skip, dws[n_layers - 1], dbs[n_layers - 1])
    gs = np.zeros((y.shape[0], skip.shape[1]))
    _input_grad(gz, weights[n_layers - 1], gs)
    ga = gs
    for j in range(n_layers - 1, 0, -1):
        act = acts[j]
        gz = np.empty_like(act)
        _relu_grad(ga, act, gz)
        w = weights[j - 1]
        if with_param_grads:
            dws[j - 1] = np.zeros_like(w)
            dbs[j - 1] = np.zeros(w.shape[0])
            _param_grads(gz, acts[j - 1], dws[j - 1], dbs[j - 1])
        ga = np.zeros((act.shape[0], w.shape[1]))
        _input_grad(gz, w, ga)
        if residual and j == 5:
            _add_inplace(ga, gs)
    return dws, dbs, ga
