"""The 1-D CNN RUL regressor: forward, hand-derived backward, MSE loss.

Stack (batch B): (B,14,50) -> conv k3 p1 + ReLU -> (B,32,50)
-> maxpool k2 s2 -> (B,32,25) -> conv k3 p1 + ReLU -> (B,64,25)
-> global average pool -> (B,64) -> linear + ReLU -> (B,32)
-> linear -> (B,1). Total parameter count 9,697, asserted at build.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .backend import kernels

TOTAL_PARAMS = 9_697

LAYER_SHAPES = {
    "conv1_w": (32, 14, 3),
    "conv1_b": (32,),
    "conv2_w": (64, 32, 3),
    "conv2_b": (64,),
    "fc1_w": (32, 64),
    "fc1_b": (32,),
    "fc2_w": (1, 32),
    "fc2_b": (1,),
}


@dataclass(frozen=True)
class ModelParams:
    conv1_w: np.ndarray
    conv1_b: np.ndarray
    conv2_w: np.ndarray
    conv2_b: np.ndarray
    fc1_w: np.ndarray
    fc1_b: np.ndarray
    fc2_w: np.ndarray
    fc2_b: np.ndarray

    def __post_init__(self):
        for name, shape in LAYER_SHAPES.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {actual}")
        assert param_count(self) == TOTAL_PARAMS

    def as_dict(self) -> dict[str, np.ndarray]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def astype(self, dtype) -> "ModelParams":
        return ModelParams(**{k: v.astype(dtype) for k, v in self.as_dict().items()})

    def map(self, fn) -> "ModelParams":
        return ModelParams(**{k: fn(v) for k, v in self.as_dict().items()})


def param_count(params: ModelParams) -> int:
    return sum(v.size for v in params.as_dict().values())


def zeros_like(params: ModelParams) -> ModelParams:
    return params.map(np.zeros_like)


def subtract(a: ModelParams, b: ModelParams) -> ModelParams:
    return ModelParams(**{k: va - vb for (k, va), vb
                          in zip(a.as_dict().items(), b.as_dict().values())})


def init_params(seed: int) -> ModelParams:
    """Seeded uniform fan-in initialization; biases start at zero."""
    rng = np.random.default_rng(seed)
    arrays = {}
    for name, shape in LAYER_SHAPES.items():
        if name.endswith("_b"):
            arrays[name] = np.zeros(shape, dtype=np.float32)
        else:
            fan_in = int(np.prod(shape[1:]))
            bound = np.sqrt(1.0 / fan_in)
            arrays[name] = rng.uniform(-bound, bound, size=shape).astype(np.float32)
    return ModelParams(**arrays)


@dataclass
class ForwardCache:
    x: np.ndarray
    h1: np.ndarray       # conv1 pre-activation (B,32,50)
    pool: np.ndarray     # pooled activations (B,32,25)
    pool_arg: np.ndarray
    h2: np.ndarray       # conv2 pre-activation (B,64,25)
    gap: np.ndarray      # global average pool (B,64)
    h3: np.ndarray       # fc1 pre-activation (B,32)
    a3: np.ndarray
    params: ModelParams


def forward(params: ModelParams, x: np.ndarray) -> tuple[np.ndarray, ForwardCache]:
    """Predict RUL for a (B, 14, 50) batch; cache is consumed by backward."""
    x = np.ascontiguousarray(x)
    if x.ndim != 3 or x.shape[1:] != (14, 50):
        raise ValueError(f"expected batch of shape (B, 14, 50), got {x.shape}")
    dtype = x.dtype
    p = params if params.conv1_w.dtype == dtype else params.astype(dtype)

    h1 = kernels.conv1d_forward(x, p.conv1_w, p.conv1_b)
    a1 = np.maximum(h1, 0)
    pool, pool_arg = kernels.maxpool2_forward(a1)
    h2 = kernels.conv1d_forward(pool, p.conv2_w, p.conv2_b)
    a2 = np.maximum(h2, 0)
    gap = a2.mean(axis=2, dtype=np.float64).astype(dtype)
    h3 = (np.einsum("bi,oi->bo", gap, p.fc1_w, dtype=np.float64)
          .astype(dtype) + p.fc1_b)
    a3 = np.maximum(h3, 0)
    out = (np.einsum("bi,oi->bo", a3, p.fc2_w, dtype=np.float64)
           .astype(dtype) + p.fc2_b)
    cache = ForwardCache(x=x, h1=h1, pool=pool, pool_arg=pool_arg,
                         h2=h2, gap=gap, h3=h3, a3=a3, params=p)
    return out, cache


def backward(cache: ForwardCache, upstream_grad: np.ndarray) -> ModelParams:
    """Parameter gradients for a cached forward pass and (B, 1) upstream."""
    B = cache.x.shape[0]
    if upstream_grad.shape != (B, 1):
        raise ValueError(
            f"upstream grad must be ({B}, 1) to match the cache, "
            f"got {upstream_grad.shape}"
        )
    dtype = cache.x.dtype
    dy = upstream_grad.astype(dtype)
    p = cache.params

    dfc2_w = np.einsum("bo,bi->oi", dy, cache.a3, dtype=np.float64).astype(dtype)
    dfc2_b = dy.sum(axis=0, dtype=np.float64).astype(dtype)
    da3 = np.einsum("bo,oi->bi", dy, p.fc2_w, dtype=np.float64).astype(dtype)

    dh3 = da3 * (cache.h3 > 0)
    dfc1_w = np.einsum("bo,bi->oi", dh3, cache.gap, dtype=np.float64).astype(dtype)
    dfc1_b = dh3.sum(axis=0, dtype=np.float64).astype(dtype)
    dgap = np.einsum("bo,oi->bi", dh3, p.fc1_w, dtype=np.float64).astype(dtype)

    # global average pool spreads 1/L to every position
    L2 = cache.h2.shape[2]
    da2 = np.repeat(dgap[:, :, None] / L2, L2, axis=2).astype(dtype)
    dh2 = np.ascontiguousarray(da2 * (cache.h2 > 0))
    dpool, dconv2_w, dconv2_b = kernels.conv1d_backward(cache.pool, p.conv2_w, dh2)

    da1 = kernels.maxpool2_backward(dpool, cache.pool_arg, cache.h1.shape[2])
    dh1 = np.ascontiguousarray(da1 * (cache.h1 > 0))
    _, dconv1_w, dconv1_b = kernels.conv1d_backward(cache.x, p.conv1_w, dh1)

    return ModelParams(
        conv1_w=dconv1_w, conv1_b=dconv1_b,
        conv2_w=dconv2_w, conv2_b=dconv2_b,
        fc1_w=dfc1_w, fc1_b=dfc1_b,
        fc2_w=dfc2_w, fc2_b=dfc2_b,
    )


def mse_loss_and_grad(
    pred: np.ndarray, target: np.ndarray
) -> tuple[float, np.ndarray]:
    """Mean squared error and its gradient 2(pred-target)/B."""
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred.astype(np.float64) - target.astype(np.float64)
    loss = float(np.mean(diff * diff))
    grad = (2.0 * diff / pred.shape[0]).astype(pred.dtype)
    return loss, grad


def params_to_npz_dict(params: ModelParams) -> dict[str, np.ndarray]:
    return {k: v.copy() for k, v in params.as_dict().items()}


def params_from_npz_dict(arrays) -> ModelParams:
    return ModelParams(**{name: np.asarray(arrays[name]) for name in LAYER_SHAPES})
