"""Tensors and the reverse-mode tape.

A Tensor wraps a float64 numpy array. While a Tape is active (``with
Tape() as t:``), every primitive op whose inputs require gradients
appends one record (output tensor, backward closure) in execution
order; execution order is a topological order, so ``t.backward(loss)``
replays the records once in reverse, accumulating ``.grad`` arrays.
With no active tape, ops compute values only (inference mode).

Backward closures hold the partials they need; elementwise math and the
masked row softmax run through the backend kernels (see kernels.py).
Value semantics: ops never mutate their inputs, and every output owns a
fresh contiguous buffer.
"""

import numpy as np

from ..errors import ConfigError, ContractError, DegenerateRowError, ShapeError
from . import kernels

_ACTIVE = []


def _active_tape():
    return _ACTIVE[-1] if _ACTIVE else None


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self.name = name

    @staticmethod
    def param(data, name=None):
        return Tensor(data, requires_grad=True, name=name)

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self):
        return float(self.data)

    def _accum(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.data.shape}{tag}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape:
    """Ordered op record for one forward pass; context manager."""

    def __init__(self):
        self._records = []
        self._out_ids = set()

    def __enter__(self):
        _ACTIVE.append(self)
        return self

    def __exit__(self, *exc):
        _ACTIVE.pop()
        return False

    def _record(self, out, backward_fn):
        out.requires_grad = True
        self._records.append((out, backward_fn))
        self._out_ids.add(id(out))

    def __len__(self):
        return len(self._records)

    def backward(self, loss):
        """Accumulate d(loss)/d(leaf) into .grad of every reachable tensor."""
        if not isinstance(loss, Tensor) or loss.data.shape != ():
            raise ContractError("backward requires a scalar loss tensor")
        if id(loss) not in self._out_ids:
            raise ContractError("loss was not produced by ops recorded on this tape")
        for out, _ in self._records:
            out.grad = None
        loss.grad = np.ones((), dtype=np.float64)
        for out, fn in reversed(self._records):
            if out.grad is not None:
                fn(out.grad)


def gradients(tape, loss, params):
    """Gradients of ``loss`` for each param; unreachable params get zeros."""
    for p in params:
        p.grad = None
    tape.backward(loss)
    return [
        p.grad if p.grad is not None else np.zeros_like(p.data) for p in params
    ]


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _flat(a):
    return np.ascontiguousarray(a).ravel()


# ---------------------------------------------------------------------------
# primitive ops
# ---------------------------------------------------------------------------


def matmul(a, b):
    """Matrix product; 1-D operands follow numpy's vector conventions."""
    a, b = _as_tensor(a), _as_tensor(b)
    ad, bd = a.data, b.data
    if ad.ndim not in (1, 2) or bd.ndim not in (1, 2):
        raise ShapeError(f"matmul supports 1-D/2-D operands, got {ad.shape} x {bd.shape}")
    if ad.shape[-1] != bd.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {ad.shape} x {bd.shape}")
    out = Tensor(ad @ bd)
    tape = _active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):
        a2 = ad if ad.ndim == 2 else ad[None, :]
        b2 = bd if bd.ndim == 2 else bd[:, None]

        def bwd(g):
            g2 = g.reshape(a2.shape[0], b2.shape[1])
            if a.requires_grad:
                da = g2 @ b2.T
                a._accum(da if ad.ndim == 2 else da.ravel())
            if b.requires_grad:
                db = a2.T @ g2
                b._accum(db if bd.ndim == 2 else db.ravel())

        tape._record(out, bwd)
    return out


def _binary_shapes(a, b, op_name):
    if a.data.shape == b.data.shape:
        return
    if a.data.shape == () or b.data.shape == ():
        return
    raise ShapeError(
        f"{op_name} supports equal shapes or scalar-vs-tensor, "
        f"got {a.data.shape} and {b.data.shape}"
    )


def _reduce_to(g, shape):
    return g.sum() if shape == () and g.shape != () else g


def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _binary_shapes(a, b, "add")
    out = Tensor(a.data + b.data)
    tape = _active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):

        def bwd(g):
            if a.requires_grad:
                a._accum(_reduce_to(g, a.data.shape))
            if b.requires_grad:
                b._accum(_reduce_to(g, b.data.shape))

        tape._record(out, bwd)
    return out


def sub(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _binary_shapes(a, b, "sub")
    out = Tensor(a.data - b.data)
    tape = _active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):

        def bwd(g):
            if a.requires_grad:
                a._accum(_reduce_to(g, a.data.shape))
            if b.requires_grad:
                b._accum(_reduce_to(-g, b.data.shape))

        tape._record(out, bwd)
    return out


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _binary_shapes(a, b, "mul")
    out = Tensor(a.data * b.data)
    tape = _active_tape()
    if tape is not None and (a.requires_grad or b.requires_grad):
        ad, bd = a.data, b.data

        def bwd(g):
            if a.requires_grad:
                a._accum(_reduce_to(g * bd, a.data.shape))
            if b.requires_grad:
                b._accum(_reduce_to(g * ad, b.data.shape))

        tape._record(out, bwd)
    return out


def scale(x, c):
    """Multiply by a python constant (no gradient for the constant)."""
    x = _as_tensor(x)
    c = float(c)
    out = Tensor(x.data * c)
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        tape._record(out, lambda g: x._accum(g * c))
    return out


def relu(x):
    x = _as_tensor(x)
    xf = _flat(x.data)
    out = Tensor(kernels.relu(xf).reshape(x.data.shape))
    tape = _active_tape()
    if tape is not None and x.requires_grad:

        def bwd(g):
            x._accum(kernels.relu_grad(xf, _flat(g)).reshape(x.data.shape))

        tape._record(out, bwd)
    return out


def leaky_relu(x, slope=0.2):
    x = _as_tensor(x)
    xf = _flat(x.data)
    out = Tensor(kernels.leaky_relu(xf, float(slope)).reshape(x.data.shape))
    tape = _active_tape()
    if tape is not None and x.requires_grad:

        def bwd(g):
            x._accum(
                kernels.leaky_relu_grad(xf, _flat(g), float(slope)).reshape(x.data.shape)
            )

        tape._record(out, bwd)
    return out


def sigmoid(x):
    x = _as_tensor(x)
    s = kernels.sigmoid(_flat(x.data)).reshape(x.data.shape)
    out = Tensor(s)
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        sf = _flat(s)

        def bwd(g):
            x._accum(kernels.sigmoid_grad(sf, _flat(g)).reshape(x.data.shape))

        tape._record(out, bwd)
    return out


def dropout(x, p, stream, train):
    """Zero entries with probability p and scale survivors by 1/(1-p).

    Identity at eval time. In train mode the mask consumes ``x.size``
    draws from ``stream``; with p == 0 no draws are consumed.
    """
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    x = _as_tensor(x)
    if not train or p == 0.0:
        return x
    u = stream.uniforms(x.data.size).reshape(x.data.shape)
    keep = (u >= p).astype(np.float64) / (1.0 - p)
    out = Tensor(x.data * keep)
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        tape._record(out, lambda g: x._accum(g * keep))
    return out


def softmax_rows(x, mask=None):
    """Row-wise softmax of a 2-D tensor; masked entries are exactly 0."""
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError(f"softmax_rows expects a 2-D tensor, got shape {x.data.shape}")
    if mask is None:
        m = np.ones(x.data.shape, dtype=bool)
    else:
        m = np.asarray(mask, dtype=bool)
        if m.shape != x.data.shape:
            raise ShapeError(f"mask shape {m.shape} != input shape {x.data.shape}")
        alive = m.any(axis=1)
        if not alive.all():
            row = int(np.flatnonzero(~alive)[0])
            raise DegenerateRowError(f"softmax row {row} is fully masked")
    p = kernels.softmax_rows(np.ascontiguousarray(x.data), m)
    out = Tensor(p)
    tape = _active_tape()
    if tape is not None and x.requires_grad:

        def bwd(g):
            x._accum(kernels.softmax_rows_grad(p, np.ascontiguousarray(g)))

        tape._record(out, bwd)
    return out


def sum_all(x):
    x = _as_tensor(x)
    out = Tensor(x.data.sum())
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        tape._record(out, lambda g: x._accum(np.full(x.data.shape, float(g))))
    return out


def mean_all(x):
    x = _as_tensor(x)
    out = Tensor(x.data.mean())
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        n = x.data.size
        tape._record(out, lambda g: x._accum(np.full(x.data.shape, float(g) / n)))
    return out


def mean_over_rows(x):
    """Column means of a 2-D tensor: (m, n) -> (n,)."""
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError(f"mean_over_rows expects 2-D, got {x.data.shape}")
    m = x.data.shape[0]
    out = Tensor(x.data.mean(axis=0))
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        tape._record(out, lambda g: x._accum(np.tile(g / m, (m, 1))))
    return out


def add_n(tensors):
    """Sum of same-shaped tensors in one record."""
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise ContractError("add_n needs at least one tensor")
    shape = tensors[0].data.shape
    for t in tensors[1:]:
        if t.data.shape != shape:
            raise ShapeError("add_n operands must share a shape")
    total = tensors[0].data.copy()
    for t in tensors[1:]:
        total += t.data
    out = Tensor(total)
    tape = _active_tape()
    if tape is not None and any(t.requires_grad for t in tensors):

        def bwd(g):
            for t in tensors:
                if t.requires_grad:
                    t._accum(g)

        tape._record(out, bwd)
    return out


def gather_rows(table, ids):
    """Row lookup (embedding fetch); backward scatter-adds."""
    table = _as_tensor(table)
    idx = np.asarray(ids, dtype=np.int64)
    out = Tensor(table.data[idx])
    tape = _active_tape()
    if tape is not None and table.requires_grad:

        def bwd(g):
            dt = np.zeros_like(table.data)
            np.add.at(dt, idx, g)
            table._accum(dt)

        tape._record(out, bwd)
    return out


def add_bias(x, b):
    """x + b with b broadcast along rows; backward sums b's grad over rows."""
    x, b = _as_tensor(x), _as_tensor(b)
    if b.data.ndim != 1 or x.data.shape[-1] != b.data.shape[0]:
        raise ShapeError(f"add_bias got {x.data.shape} and {b.data.shape}")
    out = Tensor(x.data + b.data)
    tape = _active_tape()
    if tape is not None and (x.requires_grad or b.requires_grad):
        two_d = x.data.ndim == 2

        def bwd(g):
            if x.requires_grad:
                x._accum(g)
            if b.requires_grad:
                b._accum(g.sum(axis=0) if two_d else g)

        tape._record(out, bwd)
    return out


def transpose(x):
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError(f"transpose expects 2-D, got {x.data.shape}")
    out = Tensor(np.ascontiguousarray(x.data.T))
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        tape._record(out, lambda g: x._accum(np.ascontiguousarray(g.T)))
    return out


def reshape(x, shape):
    x = _as_tensor(x)
    out = Tensor(x.data.reshape(shape).copy())
    tape = _active_tape()
    if tape is not None and x.requires_grad:
        tape._record(out, lambda g: x._accum(g.reshape(x.data.shape)))
    return out


def concat_cols(parts):
    """Concatenate 2-D tensors along columns."""
    parts = [_as_tensor(p) for p in parts]
    rows = parts[0].data.shape[0]
    for p in parts:
        if p.data.ndim != 2 or p.data.shape[0] != rows:
            raise ShapeError("concat_cols operands must be 2-D with equal row counts")
    out = Tensor(np.concatenate([p.data for p in parts], axis=1))
    tape = _active_tape()
    if tape is not None and any(p.requires_grad for p in parts):
        widths = [p.data.shape[1] for p in parts]

        def bwd(g):
            lo = 0
            for p, w in zip(parts, widths):
                if p.requires_grad:
                    p._accum(g[:, lo : lo + w])
                lo += w

        tape._record(out, bwd)
    return out


def slice_cols(x, lo, hi):
    x = _as_tensor(x)
    if x.data.ndim != 2:
        raise ShapeError(f"slice_cols expects 2-D, got {x.data.shape}")
    out = Tensor(x.data[:, lo:hi].copy())
    tape = _active_tape()
    if tape is not None and x.requires_grad:

        def bwd(g):
            dx = np.zeros_like(x.data)
            dx[:, lo:hi] = g
            x._accum(dx)

        tape._record(out, bwd)
    return out


def outer_add(col, row):
    """out[i, j] = col[i] + row[j] for 1-D col (n,) and row (m,)."""
    col, row = _as_tensor(col), _as_tensor(row)
    if col.data.ndim != 1 or row.data.ndim != 1:
        raise ShapeError("outer_add expects two 1-D tensors")
    out = Tensor(col.data[:, None] + row.data[None, :])
    tape = _active_tape()
    if tape is not None and (col.requires_grad or row.requires_grad):

        def bwd(g):
            if col.requires_grad:
                col._accum(g.sum(axis=1))
            if row.requires_grad:
                row._accum(g.sum(axis=0))

        tape._record(out, bwd)
    return out


def layer_norm(x, gain, bias, eps=1e-5):
    """Row-wise layer normalization with learned gain and bias."""
    x, gain, bias = _as_tensor(x), _as_tensor(gain), _as_tensor(bias)
    if x.data.ndim != 2:
        raise ShapeError(f"layer_norm expects 2-D input, got {x.data.shape}")
    d = x.data.shape[1]
    if gain.data.shape != (d,) or bias.data.shape != (d,):
        raise ShapeError("layer_norm gain/bias must match the row width")
    mu = x.data.mean(axis=1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = Tensor(xhat * gain.data + bias.data)
    tape = _active_tape()
    if tape is not None and (x.requires_grad or gain.requires_grad or bias.requires_grad):

        def bwd(g):
            if gain.requires_grad:
                gain._accum((g * xhat).sum(axis=0))
            if bias.requires_grad:
                bias._accum(g.sum(axis=0))
            if x.requires_grad:
                gg = g * gain.data
                mean_gg = gg.mean(axis=1, keepdims=True)
                mean_ggx = (gg * xhat).mean(axis=1, keepdims=True)
                x._accum(inv * (gg - mean_gg - xhat * mean_ggx))

        tape._record(out, bwd)
    return out


def bce_with_logits(logits, targets):
    """Mean sigmoid cross-entropy of a logits vector against 0/1 targets.

    Computed as max(z,0) - z*y + log1p(exp(-|z|)) per entry so large
    positive and negative logits never overflow.
    """
    logits = _as_tensor(logits)
    y = np.asarray(targets, dtype=np.float64)
    if y.shape != logits.data.shape:
        raise ShapeError(f"targets shape {y.shape} != logits shape {logits.data.shape}")
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ContractError("multilabel targets must be 0 or 1")
    zf = _flat(logits.data)
    yf = _flat(y)
    out = Tensor(kernels.bce_terms(zf, yf).mean())
    tape = _active_tape()
    if tape is not None and logits.requires_grad:
        n = zf.size

        def bwd(g):
            logits._accum(
                (float(g) / n) * kernels.bce_grad(zf, yf).reshape(logits.data.shape)
            )

        tape._record(out, bwd)
    return out


def masked_softmax_xent(logits, keep_indices, gold_index):
    """Softmax cross-entropy restricted to the kept logit positions.

    Positions outside ``keep_indices`` receive exactly zero gradient from
    this node.
    """
    logits = _as_tensor(logits)
    if logits.data.ndim != 1:
        raise ShapeError(f"expects a logits vector, got shape {logits.data.shape}")
    keep = np.asarray(keep_indices, dtype=np.int64)
    gold = int(gold_index)
    hits = np.flatnonzero(keep == gold)
    if hits.size == 0:
        raise ContractError(f"gold index {gold} is not among the kept indices")
    pos = int(hits[0])
    z = logits.data[keep]
    m = z.max()
    lse = m + np.log(np.exp(z - m).sum())
    out = Tensor(np.asarray(lse - z[pos]))
    tape = _active_tape()
    if tape is not None and logits.requires_grad:
        p = np.exp(z - lse)

        def bwd(g):
            dz = p.copy()
            dz[pos] -= 1.0
            dx = np.zeros_like(logits.data)
            np.add.at(dx, keep, float(g) * dz)
            logits._accum(dx)

        tape._record(out, bwd)
    return out
