"""Dense tensors with reverse-mode autodiff for the layer set the models need.

Two levels live here:

* numpy "kernel" functions (``conv2d_forward``, ``maxpool2d_forward``, ...)
  that do the raw array math and return plain ndarrays, and
* tape-building ops (``conv2d``, ``maxpool2d``, ``dense``, ``relu``,
  ``flatten``, ``dropout``, ``softmax_cross_entropy``, ``tsum``) that wrap
  the kernels into :class:`Tensor` nodes so ``backward()`` can run.

Layout is NCHW row-major everywhere. Convolutions are fixed 3x3, stride 1,
padding 1; pools are 2x2 stride 2 — the only configurations the VGG-style
models use.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, LabelError, NumericError, RangeError, StateError

__all__ = [
    "Tensor",
    "conv2d",
    "conv2d_forward",
    "maxpool2d",
    "maxpool2d_forward",
    "dense",
    "dense_forward",
    "relu",
    "flatten",
    "dropout",
    "softmax",
    "softmax_cross_entropy",
    "tsum",
    "weighted_sum",
    "he_normal",
]


def _check_finite(name, arr):
    if not np.isfinite(arr).all():
        raise NumericError(f"{name} contains non-finite values")


class Tensor:
    """A node in the autodiff tape.

    ``data`` is always a float64 (or float32) ndarray. Leaf tensors created
    with ``requires_grad=True`` accumulate gradients in ``.grad`` after
    ``backward()`` runs on a downstream scalar.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, dtype=None):
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype)
        elif arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        self.data = arr
        self.grad = None
        self.requires_grad = bool(requires_grad)
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def zero_grad(self):
        self.grad = None

    def backward(self):
        """Reverse-mode sweep from this scalar through the recorded tape."""
        if self.data.size != 1:
            raise StateError("backward requires a scalar loss tensor")
        if self._backward is None and not self._parents:
            raise StateError("backward called without a recorded forward pass")

        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))

        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)


def _make_node(data, parents, backward_fn):
    out = Tensor(data)
    if any(p.requires_grad or p._parents for p in parents):
        out.requires_grad = any(p.requires_grad for p in parents)
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _accumulate(tensor, grad):
    if tensor.grad is None:
        tensor.grad = grad.astype(tensor.data.dtype, copy=True)
    else:
        tensor.grad = tensor.grad + grad


def he_normal(rng, shape, fan_in, dtype=np.float64):
    """He-normal initialization: std = sqrt(2 / fan_in)."""
    std = np.sqrt(2.0 / fan_in)
    return (rng.standard_normal(shape) * std).astype(dtype)


# ---------------------------------------------------------------------------
# convolution (3x3, stride 1, padding 1)
# ---------------------------------------------------------------------------

def _im2col3x3(xp):
    """Columns of 3x3 windows of a padded NCHW array: (N, H*W, C*9)."""
    n, c, hp, wp = xp.shape
    h, w = hp - 2, wp - 2
    s = xp.strides
    windows = np.lib.stride_tricks.as_strided(
        xp, (n, c, h, w, 3, 3), (s[0], s[1], s[2], s[3], s[2], s[3]), writeable=False
    )
    return np.ascontiguousarray(windows.transpose(0, 2, 3, 1, 4, 5)).reshape(n, h * w, c * 9)


def _conv_check(x, w, b):
    if x.ndim != 4 or w.ndim != 4 or b.ndim != 1:
        raise DimensionError(
            f"conv2d expects input NCHW, weights FC33, bias F; got {x.shape}, {w.shape}, {b.shape}"
        )
    if w.shape[2:] != (3, 3):
        raise DimensionError(f"conv2d kernels must be 3x3, got {w.shape[2:]}")
    if x.shape[1] != w.shape[1]:
        raise DimensionError(
            f"conv2d channel mismatch: input has {x.shape[1]}, weights expect {w.shape[1]}"
        )
    if b.shape[0] != w.shape[0]:
        raise DimensionError(f"conv2d bias length {b.shape[0]} != filter count {w.shape[0]}")
    _check_finite("conv2d input", x)


def conv2d_forward(x, w, b, method="im2col"):
    """3x3/stride-1/pad-1 convolution of NCHW ``x`` with filters ``w`` (F,C,3,3).

    ``method`` selects the vectorized im2col path or the direct loop path;
    the two agree elementwise to float64 roundoff.
    """
    _conv_check(x, w, b)
    n, c, h, wd = x.shape
    f = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    if method == "im2col":
        cols = _im2col3x3(xp)
        wm = w.reshape(f, c * 9)
        out = cols @ wm.T + b
        return out.reshape(n, h, wd, f).transpose(0, 3, 1, 2)
    if method == "direct":
        out = np.empty((n, f, h, wd), dtype=x.dtype)
        for ni in range(n):
            for fi in range(f):
                for i in range(h):
                    for j in range(wd):
                        out[ni, fi, i, j] = np.sum(xp[ni, :, i : i + 3, j : j + 3] * w[fi]) + b[fi]
        return out
    raise ValueError(f"unknown conv2d method {method!r}")


def conv2d_backward(x, w, dout):
    """Gradients (dx, dw, db) of the pad-1 3x3 convolution."""
    n, c, h, wd = x.shape
    f = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    cols = _im2col3x3(xp)
    dr = dout.transpose(0, 2, 3, 1).reshape(n, h * wd, f)
    db = dout.sum(axis=(0, 2, 3))
    dwm = np.tensordot(dr, cols, axes=([0, 1], [0, 1]))
    dw = dwm.reshape(f, c, 3, 3)
    dcols = dr @ w.reshape(f, c * 9)
    dc = dcols.reshape(n, h, wd, c, 3, 3).transpose(0, 3, 1, 2, 4, 5)
    dxp = np.zeros_like(xp)
    for kh in range(3):
        for kw in range(3):
            dxp[:, :, kh : kh + h, kw : kw + wd] += dc[:, :, :, :, kh, kw]
    return dxp[:, :, 1 : h + 1, 1 : wd + 1], dw, db


def conv2d(x, w, b, method="im2col"):
    out = conv2d_forward(x.data, w.data, b.data, method=method)

    def backward(grad):
        dx, dw, db = conv2d_backward(x.data, w.data, grad)
        if x.requires_grad or x._parents:
            _accumulate(x, dx)
        if w.requires_grad:
            _accumulate(w, dw)
        if b.requires_grad:
            _accumulate(b, db)

    return _make_node(out, (x, w, b), backward)


# ---------------------------------------------------------------------------
# max pooling (2x2, stride 2)
# ---------------------------------------------------------------------------

def maxpool2d_forward(x):
    """2x2/stride-2 max pool. Returns (pooled, argmax) where argmax holds the
    within-window winner index (0..3, first occurrence wins ties)."""
    if x.ndim != 4:
        raise DimensionError(f"maxpool2d expects NCHW input, got shape {x.shape}")
    n, c, h, w = x.shape
    if h < 2 or w < 2:
        raise DimensionError(f"maxpool2d needs H,W >= 2, got {h}x{w}")
    _check_finite("maxpool2d input", x)
    ho, wo = h // 2, w // 2
    v = x[:, :, : 2 * ho, : 2 * wo]
    windows = v.reshape(n, c, ho, 2, wo, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, ho, wo, 4)
    idx = windows.argmax(axis=-1)
    out = np.take_along_axis(windows, idx[..., None], axis=-1)[..., 0]
    return out, idx


def maxpool2d_backward(x_shape, idx, dout):
    n, c, h, w = x_shape
    ho, wo = h // 2, w // 2
    dwin = np.zeros((n, c, ho, wo, 4), dtype=dout.dtype)
    np.put_along_axis(dwin, idx[..., None], dout[..., None], axis=-1)
    dx = np.zeros(x_shape, dtype=dout.dtype)
    dx[:, :, : 2 * ho, : 2 * wo] = (
        dwin.reshape(n, c, ho, wo, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, 2 * ho, 2 * wo)
    )
    return dx


def maxpool2d(x):
    out, idx = maxpool2d_forward(x.data)

    def backward(grad):
        if x.requires_grad or x._parents:
            _accumulate(x, maxpool2d_backward(x.data.shape, idx, grad))

    return _make_node(out, (x,), backward)


# ---------------------------------------------------------------------------
# dense, relu, flatten, dropout
# ---------------------------------------------------------------------------

def dense_forward(x, w, b):
    """Affine map: (N,D) @ (D,K) + (K,)."""
    if x.ndim != 2 or w.ndim != 2 or b.ndim != 1:
        raise DimensionError(
            f"dense expects input ND, weights DK, bias K; got {x.shape}, {w.shape}, {b.shape}"
        )
    if x.shape[1] != w.shape[0] or w.shape[1] != b.shape[0]:
        raise DimensionError(f"dense shape mismatch: {x.shape} @ {w.shape} + {b.shape}")
    _check_finite("dense input", x)
    return x @ w + b


def dense(x, w, b):
    out = dense_forward(x.data, w.data, b.data)

    def backward(grad):
        if x.requires_grad or x._parents:
            _accumulate(x, grad @ w.data.T)
        if w.requires_grad:
            _accumulate(w, x.data.T @ grad)
        if b.requires_grad:
            _accumulate(b, grad.sum(axis=0))

    return _make_node(out, (x, w, b), backward)


def relu(x):
    out = np.maximum(x.data, 0.0)

    def backward(grad):
        if x.requires_grad or x._parents:
            _accumulate(x, grad * (x.data > 0))

    return _make_node(out, (x,), backward)


def flatten(x):
    """Collapse all but the leading (batch) axis."""
    n = x.data.shape[0]
    out = x.data.reshape(n, -1)

    def backward(grad):
        if x.requires_grad or x._parents:
            _accumulate(x, grad.reshape(x.data.shape))

    return _make_node(out, (x,), backward)


def dropout(x, rate, rng=None, training=False):
    """Inverted dropout. Identity when not training or rate == 0."""
    if not 0.0 <= rate < 1.0:
        raise RangeError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        out = x.data

        def backward_id(grad):
            if x.requires_grad or x._parents:
                _accumulate(x, grad)

        return _make_node(out, (x,), backward_id)

    if rng is None:
        raise StateError("dropout in training mode requires an rng")
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)
    out = x.data * mask

    def backward(grad):
        if x.requires_grad or x._parents:
            _accumulate(x, grad * mask)

    return _make_node(out, (x,), backward)


# ---------------------------------------------------------------------------
# softmax / cross entropy / sum
# ---------------------------------------------------------------------------

def softmax(logits):
    """Row softmax with max subtraction. Plain ndarray in, ndarray out."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Mean cross entropy of row-softmax probabilities against integer labels.

    Returns (scalar loss Tensor, probs ndarray). Log-probabilities are
    computed as shifted-logit minus log-sum-exp, never as log(softmax).
    """
    labels = np.asarray(labels)
    if labels.ndim != 1 or logits.data.ndim != 2 or labels.shape[0] != logits.data.shape[0]:
        raise DimensionError(
            f"softmax_cross_entropy expects logits (N,K) with labels (N,); got "
            f"{logits.data.shape} and {labels.shape}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        raise LabelError("labels must be integers")
    n, k = logits.data.shape
    if labels.min() < 0 or labels.max() >= k:
        raise LabelError(f"labels must lie in [0, {k}), got range "
                         f"[{labels.min()}, {labels.max()}]")
    _check_finite("softmax_cross_entropy logits", logits.data)

    z = logits.data - logits.data.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(z).sum(axis=1, keepdims=True))
    logprobs = z - logsumexp
    probs = np.exp(logprobs)
    loss_value = -logprobs[np.arange(n), labels].mean()

    def backward(grad):
        if logits.requires_grad or logits._parents:
            d = probs.copy()
            d[np.arange(n), labels] -= 1.0
            _accumulate(logits, d * (grad / n))

    loss = _make_node(np.asarray(loss_value), (logits,), backward)
    return loss, probs


def tsum(x):
    """Sum of all elements, as a scalar tape node."""
    out = np.asarray(x.data.sum())

    def backward(grad):
        if x.requires_grad or x._parents:
            _accumulate(x, np.full(x.data.shape, grad, dtype=x.data.dtype))

    return _make_node(out, (x,), backward)


def weighted_sum(x, weights):
    """Scalar sum(x * weights) for a constant weight array; projects any
    layer output to a scalar so its full Jacobian is exercised."""
    weights = np.asarray(weights)
    if weights.shape != x.data.shape:
        raise DimensionError(f"weights shape {weights.shape} != tensor shape {x.data.shape}")
    out = np.asarray((x.data * weights).sum())

    def backward(grad):
        if x.requires_grad or x._parents:
            _accumulate(x, grad * weights)

    return _make_node(out, (x,), backward)
