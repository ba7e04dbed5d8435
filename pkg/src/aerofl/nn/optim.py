"""Adam with bias-corrected moments, operating on whole parameter sets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, zeros_like


@dataclass
class AdamState:
    m: ModelParams
    v: ModelParams
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def fresh(cls, params: ModelParams, lr: float = 1e-3, **kwargs) -> "AdamState":
        return cls(m=zeros_like(params), v=zeros_like(params), lr=lr, **kwargs)


def adam_step(
    params: ModelParams, grads: ModelParams, state: AdamState
) -> tuple[ModelParams, AdamState]:
    """One Adam update; returns new params and advanced state."""
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    corr1 = 1.0 - b1 ** t
    corr2 = 1.0 - b2 ** t
    new_p, new_m, new_v = {}, {}, {}
    for name, p in params.as_dict().items():
        g = getattr(grads, name)
        m = b1 * getattr(state.m, name) + (1.0 - b1) * g
        v = b2 * getattr(state.v, name) + (1.0 - b2) * g * g
        m_hat = m / corr1
        v_hat = v / corr2
        new_p[name] = (p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(p.dtype)
        new_m[name] = m.astype(p.dtype)
        new_v[name] = v.astype(p.dtype)
    next_state = AdamState(
        m=ModelParams(**new_m), v=ModelParams(**new_v), t=t,
        lr=state.lr, beta1=b1, beta2=b2, eps=state.eps,
    )
    return ModelParams(**new_p), next_state
