"""Batch Adam over flat parameter vectors and seeded mini-batch index draws."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


class NumericError(ArithmeticError):
    """A loss or gradient became non-finite."""


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n: int, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        if lr <= 0:
            raise ValueError("learning rate must be positive")
        return cls(np.zeros(n), np.zeros(n), 0, lr, beta1, beta2, eps)


def adam_step(state: AdamState, params: np.ndarray, grad: np.ndarray) -> tuple[AdamState, np.ndarray]:
    """One bias-corrected Adam update; returns the new state and parameters."""
    grad = np.asarray(grad, dtype=float)
    if grad.shape != params.shape or grad.shape != state.m.shape:
        raise ValueError(f"shape mismatch: params {params.shape}, grad {grad.shape}, state {state.m.shape}")
    bad = np.flatnonzero(~np.isfinite(grad))
    if bad.size:
        raise NumericError(f"non-finite gradient entry at index {int(bad[0])}: {grad[bad[0]]}")
    t = state.t + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * (grad * grad)
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    new = params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, t=t), new


def minibatch_indices(n: int, b: int, seed: int, step: int) -> np.ndarray:
    """min(b, n) distinct indices in [0, n), fresh for every (seed, step)."""
    if n <= 0:
        raise ValueError("cannot draw a mini-batch from an empty set")
    if b < 1:
        raise ValueError("batch size must be at least 1")
    if b >= n:
        return np.arange(n)
    rng = np.random.default_rng([int(seed), int(step)])
    return np.sort(rng.choice(n, size=b, replace=False))
