"""Pure-numpy reference kernels for the 1-D conv layers.

Same contracts as kernels_numba; reductions accumulate in float64 and
results are cast back to the input dtype.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def _windows(x: np.ndarray) -> np.ndarray:
    # (B, C, L) -> zero-padded k=3 windows (B, C, L, 3)
    padded = np.pad(x, ((0, 0), (0, 0), (1, 1)))
    return sliding_window_view(padded, 3, axis=2)


def conv1d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Same-length conv, kernel 3, stride 1, zero padding 1."""
    win = _windows(x)
    y = np.einsum("bilk,oik->bol", win, w, dtype=np.float64)
    return (y + b[None, :, None]).astype(x.dtype)


def conv1d_backward(
    x: np.ndarray, w: np.ndarray, dy: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients (dx, dw, db) of conv1d_forward."""
    win = _windows(x)
    dw = np.einsum("bilk,bol->oik", win, dy, dtype=np.float64).astype(x.dtype)
    db = dy.sum(axis=(0, 2), dtype=np.float64).astype(x.dtype)
    dy_win = _windows(dy)
    w_flipped = w[:, :, ::-1]
    dx = np.einsum("bolk,oik->bil", dy_win, w_flipped, dtype=np.float64).astype(x.dtype)
    return dx, dw, db


def maxpool2_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Non-overlapping k=2,s=2 max pool; ties go to the lower index."""
    B, C, L = x.shape
    pairs = x.reshape(B, C, L // 2, 2)
    arg = (pairs[..., 1] > pairs[..., 0]).astype(np.int8)
    y = np.take_along_axis(pairs, arg[..., None].astype(np.intp), axis=3)[..., 0]
    return y, arg


def maxpool2_backward(dy: np.ndarray, arg: np.ndarray, in_len: int) -> np.ndarray:
    """Route pooled gradient back to the stored argmax position."""
    B, C, Lp = dy.shape
    dx_pairs = np.zeros((B, C, Lp, 2), dtype=dy.dtype)
    np.put_along_axis(dx_pairs, arg[..., None].astype(np.intp), dy[..., None], axis=3)
    return dx_pairs.reshape(B, C, in_len)
