"""Adam optimizer and global-norm gradient clipping."""

import numpy as np

from ..errors import ShapeError
from . import kernels


class Adam:
    """Standard Adam with bias correction over a fixed parameter list."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.t = 0
        self._m = [np.zeros_like(p.data) for p in self.params]
        self._v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        """One update from each param's .grad (missing grads count as zero)."""
        self.t += 1
        for p, m, v in zip(self.params, self._m, self._v):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            if g.shape != p.data.shape:
                raise ShapeError(f"grad shape {g.shape} != param shape {p.data.shape}")
            kernels.adam_update(
                p.data.ravel(),
                np.ascontiguousarray(g).ravel(),
                m.ravel(),
                v.ravel(),
                self.lr,
                self.beta1,
                self.beta2,
                self.eps,
                self.t,
            )

    def zero_grads(self):
        for p in self.params:
            p.grad = None


def clip_global_norm(params, max_norm):
    """Scale all grads in place so their joint L2 norm is at most max_norm."""
    if max_norm is None or max_norm <= 0:
        return 1.0
    sq = 0.0
    for p in params:
        if p.grad is not None:
            sq += float((p.grad * p.grad).sum())
    norm = np.sqrt(sq)
    if norm <= max_norm:
        return 1.0
    factor = max_norm / (norm + 1e-12)
    for p in params:
        if p.grad is not None:
            p.grad *= factor
    return factor
