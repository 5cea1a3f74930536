"""Hot numeric kernels, compiled with numba or run as pure numpy.

The backend is chosen once at import time from the EMOGRAPH_BACKEND
environment variable:

    auto  (default)  use numba when importable, else fall back to numpy
    numba            require numba, fail if missing
    numpy            force the pure-numpy path

Both backends implement the same functions on contiguous float64 buffers.
Integer kernels (the RNG block) are bit-identical across backends; float
kernels agree to the last few ulps but are not guaranteed bitwise equal,
so determinism promises hold per backend. Matrix products stay on numpy's
BLAS in both backends.

Run ``python benchmarks/bench_backends.py`` for a side-by-side timing.
"""

import math
import os
import warnings

import numpy as np

from ..errors import ConfigError

ENV_VAR = "EMOGRAPH_BACKEND"

# SplitMix64 constants (Steele, Lea, Flood 2014). The generator for a
# stream with 64-bit seed s yields, for draw index i >= 0:
#   z = s + (i + 1) * 0x9E3779B97F4A7C15      (mod 2^64)
#   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9  (mod 2^64)
#   z = (z ^ (z >> 27)) * 0x94D049BB133111EB  (mod 2^64)
#   z = z ^ (z >> 31)
#   u = (z >> 11) * 2^-53                     (uniform in [0, 1))
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)
_MASK64 = (1 << 64) - 1


def available_backends():
    out = ["numpy"]
    try:
        import numba  # noqa: F401

        out.insert(0, "numba")
    except ImportError:
        pass
    return out


def _select_backend():
    choice = os.environ.get(ENV_VAR, "auto").strip().lower() or "auto"
    if choice == "numpy":
        return "numpy"
    if choice in ("auto", "numba"):
        try:
            import numba  # noqa: F401
        except ImportError:
            if choice == "numba":
                raise ConfigError(
                    f"{ENV_VAR}=numba requested but numba is not importable"
                )
            warnings.warn(
                "numba is not available; falling back to the pure-numpy "
                "backend (slower, same results)",
                RuntimeWarning,
            )
            return "numpy"
        return "numba"
    raise ConfigError(f"unknown {ENV_VAR} value {choice!r} (use auto, numba, or numpy)")


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _sigmoid_np(x):
    # stable two-branch form: exp is only ever taken of a non-positive value
    out = np.empty_like(x)
    pos = x >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _sigmoid_grad_np(s, g):
    return g * s * (1.0 - s)


def _relu_np(x):
    return np.maximum(x, 0.0)


def _relu_grad_np(x, g):
    return np.where(x > 0.0, g, 0.0)


def _leaky_relu_np(x, slope):
    return np.where(x >= 0.0, x, slope * x)


def _leaky_relu_grad_np(x, g, slope):
    return np.where(x >= 0.0, g, slope * g)


def _bce_terms_np(z, y):
    # -[y log sigma(z) + (1-y) log(1-sigma(z))] = max(z,0) - z y + log1p(exp(-|z|))
    return np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))


def _bce_grad_np(z, y):
    return _sigmoid_np(z) - y


def _adam_update_np(p, g, m, v, lr, b1, b2, eps, t):
    m *= b1
    m += (1.0 - b1) * g
    v *= b2
    v += (1.0 - b2) * g * g
    mhat = m / (1.0 - b1**t)
    vhat = v / (1.0 - b2**t)
    p -= lr * mhat / (np.sqrt(vhat) + eps)


def _softmax_rows_np(x, mask):
    # mask: True = entry participates; masked entries are exactly 0 on output.
    neg = np.where(mask, x, -np.inf)
    mx = neg.max(axis=1, keepdims=True)
    ex = np.where(mask, np.exp(x - mx), 0.0)
    return ex / ex.sum(axis=1, keepdims=True)


def _softmax_rows_grad_np(p, g):
    dot = (p * g).sum(axis=1, keepdims=True)
    return p * (g - dot)


def _uniform_block_np(seed, start, n):
    idx = np.arange(1, n + 1, dtype=np.uint64) + np.uint64(start)
    z = np.uint64(seed) + idx * np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * _INV53


# ---------------------------------------------------------------------------
# numba loop implementations (compiled only when the numba backend is active)
# ---------------------------------------------------------------------------


def _sigmoid_loop(x):
    out = np.empty_like(x)
    for i in range(x.size):
        v = x[i]
        if v >= 0.0:
            out[i] = 1.0 / (1.0 + math.exp(-v))
        else:
            e = math.exp(v)
            out[i] = e / (1.0 + e)
    return out


def _sigmoid_grad_loop(s, g):
    out = np.empty_like(s)
    for i in range(s.size):
        out[i] = g[i] * s[i] * (1.0 - s[i])
    return out


def _relu_loop(x):
    out = np.empty_like(x)
    for i in range(x.size):
        v = x[i]
        out[i] = v if v > 0.0 else 0.0
    return out


def _relu_grad_loop(x, g):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = g[i] if x[i] > 0.0 else 0.0
    return out


def _leaky_relu_loop(x, slope):
    out = np.empty_like(x)
    for i in range(x.size):
        v = x[i]
        out[i] = v if v >= 0.0 else slope * v
    return out


def _leaky_relu_grad_loop(x, g, slope):
    out = np.empty_like(x)
    for i in range(x.size):
        out[i] = g[i] if x[i] >= 0.0 else slope * g[i]
    return out


def _bce_terms_loop(z, y):
    out = np.empty_like(z)
    for i in range(z.size):
        v = z[i]
        hi = v if v > 0.0 else 0.0
        out[i] = hi - v * y[i] + math.log1p(math.exp(-abs(v)))
    return out


def _bce_grad_loop(z, y):
    out = np.empty_like(z)
    for i in range(z.size):
        v = z[i]
        if v >= 0.0:
            s = 1.0 / (1.0 + math.exp(-v))
        else:
            e = math.exp(v)
            s = e / (1.0 + e)
        out[i] = s - y[i]
    return out


def _adam_update_loop(p, g, m, v, lr, b1, b2, eps, t):
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for i in range(p.size):
        gi = g[i]
        m[i] = b1 * m[i] + (1.0 - b1) * gi
        v[i] = b2 * v[i] + (1.0 - b2) * gi * gi
        p[i] -= lr * (m[i] / c1) / (math.sqrt(v[i] / c2) + eps)


def _softmax_rows_loop(x, mask):
    rows, cols = x.shape
    out = np.zeros_like(x)
    for r in range(rows):
        mx = -np.inf
        for c in range(cols):
            if mask[r, c] and x[r, c] > mx:
                mx = x[r, c]
        total = 0.0
        for c in range(cols):
            if mask[r, c]:
                e = math.exp(x[r, c] - mx)
                out[r, c] = e
                total += e
        for c in range(cols):
            out[r, c] /= total
    return out


def _softmax_rows_grad_loop(p, g):
    rows, cols = p.shape
    out = np.empty_like(p)
    for r in range(rows):
        dot = 0.0
        for c in range(cols):
            dot += p[r, c] * g[r, c]
        for c in range(cols):
            out[r, c] = p[r, c] * (g[r, c] - dot)
    return out


def _uniform_block_loop(seed, start, n):
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        z = (seed + (start + np.uint64(i) + np.uint64(1)) * np.uint64(_GOLDEN)) & np.uint64(_MASK64)
        z = ((z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)) & np.uint64(_MASK64)
        z = ((z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)) & np.uint64(_MASK64)
        z = z ^ (z >> np.uint64(31))
        out[i] = float(z >> np.uint64(11)) * _INV53
    return out


BACKEND = _select_backend()

if BACKEND == "numba":
    from numba import njit

    _jit = njit(cache=True, fastmath=False)
    sigmoid = _jit(_sigmoid_loop)
    sigmoid_grad = _jit(_sigmoid_grad_loop)
    relu = _jit(_relu_loop)
    relu_grad = _jit(_relu_grad_loop)
    leaky_relu = _jit(_leaky_relu_loop)
    leaky_relu_grad = _jit(_leaky_relu_grad_loop)
    bce_terms = _jit(_bce_terms_loop)
    bce_grad = _jit(_bce_grad_loop)
    adam_update = _jit(_adam_update_loop)
    softmax_rows = _jit(_softmax_rows_loop)
    softmax_rows_grad = _jit(_softmax_rows_grad_loop)
    uniform_block = _jit(_uniform_block_loop)
else:
    sigmoid = _sigmoid_np
    sigmoid_grad = _sigmoid_grad_np
    relu = _relu_np
    relu_grad = _relu_grad_np
    leaky_relu = _leaky_relu_np
    leaky_relu_grad = _leaky_relu_grad_np
    bce_terms = _bce_terms_np
    bce_grad = _bce_grad_np
    adam_update = _adam_update_np
    softmax_rows = _softmax_rows_np
    softmax_rows_grad = _softmax_rows_grad_np
    uniform_block = _uniform_block_np
