"""Finite-difference gradient oracle shared by the numeric test modules.

Central differences with h = 1e-5 on f64. The error measure is
|analytic - fd| / max(1, |analytic|, |fd|) per entry: relative for large
gradients, absolute for small ones, where plain relative error would be
dominated by the ~1e-10 noise floor of central differences.
"""

import numpy as np


def fd_gradient(f, param, h=1e-5):
    """Central-difference d f / d param, perturbing one entry at a time.

    ``f`` is a zero-argument callable returning a python float and must
    re-read ``param.data`` on every call.
    """
    base = param.data
    grad = np.zeros_like(base)
    flat = base.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        keep = flat[i]
        flat[i] = keep + h
        up = f()
        flat[i] = keep - h
        down = f()
        flat[i] = keep
        gflat[i] = (up - down) / (2.0 * h)
    return grad


def max_rel_err(analytic, fd):
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(fd)))
    return float(np.max(np.abs(analytic - fd) / denom))


def check_gradients(f, params, analytic_grads, h=1e-5, tol=1e-5):
    """Assert every analytic gradient matches its finite-difference oracle."""
    worst = 0.0
    for p, g in zip(params, analytic_grads):
        fd = fd_gradient(f, p, h=h)
        err = max_rel_err(g, fd)
        worst = max(worst, err)
        assert err < tol, (
            f"gradient mismatch for {p.name or 'param'}: rel err {err:.3e} >= {tol}"
        )
    return worst
