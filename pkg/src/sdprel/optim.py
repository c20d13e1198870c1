"""Gradient-based parameter updates: Adam and Adadelta.

Parameters and gradients are dicts of name -> float64 ndarray; updates happen
in place.  Callers own exclusivity (no concurrent steps on one state).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatch


def _check_shapes(params, grads):
    if set(params) != set(grads):
        missing = set(params) ^ set(grads)
        raise ShapeMismatch(f"parameter/gradient keys differ: {sorted(missing)}")
    for name, p in params.items():
        if grads[name].shape != p.shape:
            raise ShapeMismatch(
                f"{name}: parameter shape {p.shape} vs gradient shape {grads[name].shape}"
            )


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(state: AdamState, params: dict, grads: dict) -> None:
    """One Adam update with bias correction."""
    _check_shapes(params, grads)
    state.step += 1
    t = state.step
    for name, p in params.items():
        g = grads[name]
        m = state.m.setdefault(name, np.zeros_like(p))
        v = state.v.setdefault(name, np.zeros_like(p))
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        p -= state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


@dataclass
class AdadeltaState:
    rho: float = 0.95
    eps: float = 1e-6
    avg_sq_grad: dict = field(default_factory=dict)
    avg_sq_delta: dict = field(default_factory=dict)


def adadelta_step(state: AdadeltaState, params: dict, grads: dict) -> None:
    """One Adadelta update (running RMS of gradients and of updates)."""
    _check_shapes(params, grads)
    for name, p in params.items():
        g = grads[name]
        eg2 = state.avg_sq_grad.setdefault(name, np.zeros_like(p))
        ed2 = state.avg_sq_delta.setdefault(name, np.zeros_like(p))
        eg2 *= state.rho
        eg2 += (1.0 - state.rho) * g * g
        delta = -np.sqrt(ed2 + state.eps) / np.sqrt(eg2 + state.eps) * g
        ed2 *= state.rho
        ed2 += (1.0 - state.rho) * delta * delta
        p += delta
