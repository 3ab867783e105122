"""Numpy building blocks with hand-written backward passes.

Every ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
takes the upstream gradient and the cache and returns input gradients (plus
parameter gradients where the layer has parameters). Images are
channels-last: (N, H, W, C).
"""

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import erf

# plain floats so float32 arrays stay float32
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


# -- activations -------------------------------------------------------------------

def gelu(x):
    """Exact GELU, x·Φ(x)."""
    return gelu_forward(x)[0]


def gelu_forward(x):
    cdf = 0.5 * (1.0 + erf(x / _SQRT2))
    return x * cdf, (x, cdf)


def gelu_backward(dy, cache):
    x, cdf = cache
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    return dy * (cdf + x * pdf)


def softmax(x, axis=-1):
    e = np.exp(x - x.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def softmax_backward(dy, y, axis=-1):
    return y * (dy - (dy * y).sum(axis=axis, keepdims=True))


# -- dense / normalization / dropout ---------------------------------------------------

def linear_forward(x, w, b=None):
    y = x @ w
    if b is not None:
        y = y + b
    return y, x


def linear_backward(dy, x, w, has_bias=True):
    """Returns (dx, dw, db) for y = x @ w + b over any leading batch axes."""
    x2 = x.reshape(-1, x.shape[-1])
    dy2 = dy.reshape(-1, dy.shape[-1])
    dw = x2.T @ dy2
    db = dy2.sum(axis=0) if has_bias else None
    return dy @ w.T, dw, db


def layer_norm_forward(x, gamma, beta, eps=1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    return xhat * gamma + beta, (xhat, inv, gamma)


def layer_norm_backward(dy, cache):
    xhat, inv, gamma = cache
    d = xhat.shape[-1]
    dgamma = (dy * xhat).reshape(-1, d).sum(axis=0)
    dbeta = dy.reshape(-1, d).sum(axis=0)
    dxhat = dy * gamma
    dx = inv * (dxhat - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True))
    return dx, dgamma, dbeta


def dropout_forward(x, rate, rng):
    """Inverted dropout. ``rng`` None (or rate 0) means evaluation mode."""
    if rng is None or rate <= 0:
        return x, None
    keep = ((rng.random(x.shape) >= rate) / (1.0 - rate)).astype(x.dtype)
    return x * keep, keep


def dropout_backward(dy, mask):
    return dy if mask is None else dy * mask


# -- convolution / pooling ---------------------------------------------------------

def conv3x3_forward(x, w, b):
    """Same-padded 3x3 convolution. x (N,H,W,Cin), w (Cout,Cin,3,3), b (Cout,)."""
    n, h, wd, cin = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    # columns ordered (kh, kw, cin) so that col2im adds contiguous runs
    cols = sliding_window_view(xp, (3, 3), axis=(1, 2)).transpose(0, 1, 2, 4, 5, 3).reshape(n * h * wd, 9 * cin)
    y = cols @ _kernel_matrix(w) + b
    return y.reshape(n, h, wd, -1), (cols, x.shape)


def _kernel_matrix(w):
    """(Cout, Cin, 3, 3) -> (9·Cin, Cout) matching the column order."""
    return w.transpose(2, 3, 1, 0).reshape(-1, w.shape[0])


def conv3x3_backward(dy, cache, w):
    cols, (n, h, wd, cin) = cache
    cout = w.shape[0]
    dy2 = dy.reshape(-1, cout)
    dw = (cols.T @ dy2).reshape(3, 3, cin, cout).transpose(3, 2, 0, 1)
    db = dy2.sum(axis=0)
    dcols = (dy2 @ _kernel_matrix(w).T).reshape(n, h, wd, 3, 3, cin)
    dxp = np.zeros((n, h + 2, wd + 2, cin), dtype=dy.dtype)
    for i in range(3):
        for j in range(3):
            dxp[:, i:i + h, j:j + wd, :] += dcols[:, :, :, i, j, :]
    return dxp[:, 1:-1, 1:-1, :], dw, db


def maxpool2_forward(x):
    """2x2 stride-2 max pooling; odd sizes are padded with -inf (ceil mode)."""
    n, h, wd, c = x.shape
    h2, w2 = -(-h // 2), -(-wd // 2)
    xp = np.full((n, 2 * h2, 2 * w2, c), -np.inf, dtype=x.dtype)
    xp[:, :h, :wd] = x
    blocks = xp.reshape(n, h2, 2, w2, 2, c).transpose(0, 1, 3, 5, 2, 4).reshape(n, h2, w2, c, 4)
    arg = blocks.argmax(axis=-1)
    y = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return y, (arg, x.shape)


def maxpool2_backward(dy, cache):
    arg, (n, h, wd, c) = cache
    h2, w2 = arg.shape[1:3]
    blocks = np.zeros((n, h2, w2, c, 4), dtype=dy.dtype)
    np.put_along_axis(blocks, arg[..., None], dy[..., None], axis=-1)
    dxp = blocks.reshape(n, h2, w2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3).reshape(n, 2 * h2, 2 * w2, c)
    return dxp[:, :h, :wd]


def pooled_size(size: int, n_pools: int) -> int:
    for _ in range(n_pools):
        size = -(-size // 2)
    return size
