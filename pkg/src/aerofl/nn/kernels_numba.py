"""Numba-compiled conv kernels: the hot inner loops of local training.

Contracts match kernels_numpy exactly. Per-output accumulation runs in
float64 regardless of the array dtype; loop order is fixed so results
are deterministic.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange


@njit(cache=True, parallel=True)
def conv1d_forward(x, w, b):
    B, Cin, L = x.shape
    Cout = w.shape[0]
    y = np.empty((B, Cout, L), dtype=x.dtype)
    for bi in prange(B):
        for o in range(Cout):
            for t in range(L):
                acc = 0.0
                for i in range(Cin):
                    for k in range(3):
                        src = t + k - 1
                        if 0 <= src < L:
                            acc += x[bi, i, src] * w[o, i, k]
                y[bi, o, t] = acc + b[o]
    return y


@njit(cache=True, parallel=True)
def _conv1d_backward_input(w, dy):
    B, Cout, L = dy.shape
    Cin = w.shape[1]
    dx = np.empty((B, Cin, L), dtype=dy.dtype)
    for bi in prange(B):
        for i in range(Cin):
            for t in range(L):
                acc = 0.0
                for o in range(Cout):
                    for k in range(3):
                        out_pos = t - k + 1
                        if 0 <= out_pos < L:
                            acc += dy[bi, o, out_pos] * w[o, i, k]
                dx[bi, i, t] = acc
    return dx


@njit(cache=True, parallel=True)
def _conv1d_backward_params(x, dy):
    B, Cin, L = x.shape
    Cout = dy.shape[1]
    dw = np.empty((Cout, Cin, 3), dtype=x.dtype)
    db = np.empty(Cout, dtype=x.dtype)
    for o in prange(Cout):
        bacc = 0.0
        for bi in range(B):
            for t in range(L):
                bacc += dy[bi, o, t]
        db[o] = bacc
        for i in range(Cin):
            for k in range(3):
                acc = 0.0
                for bi in range(B):
                    for t in range(L):
                        src = t + k - 1
                        if 0 <= src < L:
                            acc += x[bi, i, src] * dy[bi, o, t]
                dw[o, i, k] = acc
    return dw, db


def conv1d_backward(x, w, dy):
    dw, db = _conv1d_backward_params(x, dy)
    dx = _conv1d_backward_input(w, dy)
    return dx, dw, db


@njit(cache=True)
def maxpool2_forward(x):
    B, C, L = x.shape
    Lp = L // 2
    y = np.empty((B, C, Lp), dtype=x.dtype)
    arg = np.empty((B, C, Lp), dtype=np.int8)
    for bi in range(B):
        for c in range(C):
            for j in range(Lp):
                a = x[bi, c, 2 * j]
                b = x[bi, c, 2 * j + 1]
                # ties break toward the lower index
                if b > a:
                    y[bi, c, j] = b
                    arg[bi, c, j] = 1
                else:
                    y[bi, c, j] = a
                    arg[bi, c, j] = 0
    return y, arg


@njit(cache=True)
def maxpool2_backward(dy, arg, in_len):
    B, C, Lp = dy.shape
    dx = np.zeros((B, C, in_len), dtype=dy.dtype)
    for bi in range(B):
        for c in range(C):
            for j in range(Lp):
                dx[bi, c, 2 * j + arg[bi, c, j]] = dy[bi, c, j]
    return dx
