"""AdamW: Adam moments with decoupled weight decay.

Update per step (defaults lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8,
weight_decay=0.01):

    t <- t + 1
    m <- beta1*m + (1-beta1)*g         mhat = m / (1 - beta1^t)
    v <- beta2*v + (1-beta2)*g^2       vhat = v / (1 - beta2^t)
    theta <- theta - lr * (mhat / (sqrt(vhat) + eps) + weight_decay*theta)

The decay term multiplies theta directly instead of entering the
gradient, which is the whole point of the decoupling.
"""

from __future__ import annotations

import numpy as np

from ..core.errors import ShapeMismatch

LR = 1e-3
BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-8
WEIGHT_DECAY = 0.01


def adamw_update(
    theta,
    grad,
    m,
    v,
    t: int,
    lr: float = LR,
    beta1: float = BETA1,
    beta2: float = BETA2,
    eps: float = EPS,
    weight_decay: float = WEIGHT_DECAY,
):
    """Pure single update; works on scalars and arrays alike.

    Returns (theta, m, v, t) with t already incremented.
    """
    t = t + 1
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    mhat = m / (1.0 - beta1**t)
    vhat = v / (1.0 - beta2**t)
    theta = theta - lr * (mhat / (np.sqrt(vhat) + eps) + weight_decay * theta)
    return theta, m, v, t


class AdamW:
    """Stateful optimizer over a dict of named parameter arrays.

    Parameters are updated in place so model code keeps its references.
    """

    def __init__(
        self,
        params: dict[str, np.ndarray],
        lr: float = LR,
        beta1: float = BETA1,
        beta2: float = BETA2,
        eps: float = EPS,
        weight_decay: float = WEIGHT_DECAY,
    ):
        self.params = params
        self.lr, self.beta1, self.beta2 = lr, beta1, beta2
        self.eps, self.weight_decay = eps, weight_decay
        self.m = {k: np.zeros_like(p) for k, p in params.items()}
        self.v = {k: np.zeros_like(p) for k, p in params.items()}
        self.t = 0

    def step(self, grads: dict[str, np.ndarray]) -> None:
        for name, param in self.params.items():
            if name not in grads or grads[name].shape != param.shape:
                raise ShapeMismatch(f"gradient missing or misshaped for {name!r}")
        self.t += 1
        bias1 = 1.0 - self.beta1**self.t
        bias2 = 1.0 - self.beta2**self.t
        for name, param in self.params.items():
            g = grads[name]
            m, v = self.m[name], self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            step = (m / bias1) / (np.sqrt(v / bias2) + self.eps)
            param -= self.lr * (step + self.weight_decay * param)
