"""Central finite-difference validation of analytic gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

LossFn = Callable[[np.ndarray], tuple[float, np.ndarray]]


def sum_loss(out: np.ndarray) -> tuple[float, np.ndarray]:
    """Plain sum: the simplest scalar to attach downstream of a layer."""
    return float(out.sum()), np.ones_like(out)


def grad_check(
    layer,
    x: np.ndarray,
    h: float = 1e-5,
    loss_fn: LossFn = sum_loss,
) -> float:
    """Max relative error between analytic and numerical parameter gradients.

    Perturbs every parameter entry by +-h, recomputes the downstream scalar
    loss, and compares (f(t+h) - f(t-h)) / 2h against the layer's analytic
    gradient. Relative error uses max(|analytic|, |numeric|, 1e-8) as the
    denominator.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError(f"step h={h} outside [1e-7, 1e-3]")
    out = layer.forward(x)
    loss, dout = loss_fn(out)
    layer.backward(dout)
    analytic = {name: g.copy() for name, g in layer.grads().items()}

    worst = 0.0
    for name, param in layer.params().items():
        flat = param.reshape(-1)
        ana = analytic[name].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            lp, _ = loss_fn(layer.forward(x))
            flat[i] = orig - h
            lm, _ = loss_fn(layer.forward(x))
            flat[i] = orig
            numeric = (lp - lm) / (2.0 * h)
            denom = max(abs(numeric), abs(ana[i]), 1e-8)
            worst = max(worst, abs(numeric - ana[i]) / denom)
    return worst
