"""Scaled dot-product self attention and its multi-head form.

The fused projection ``w_qkv`` has shape (d_model, 3·d_model): columns
[0, d) give q, [d, 2d) give k and [2d, 3d) give v, and head j owns columns
j·d_h .. (j+1)·d_h of each third. ``split_heads`` turns it into the per-head
(d_model, 3·d_h) matrices [U_q | U_k | U_v].
"""

import math

import numpy as np

from mp3splice.errors import ShapeMismatch
from mp3splice.model.layers import softmax, softmax_backward


def split_heads(w_qkv, n_heads: int) -> list:
    d = w_qkv.shape[0]
    dh = d // n_heads
    q, k, v = w_qkv[:, :d], w_qkv[:, d:2 * d], w_qkv[:, 2 * d:]
    return [np.concatenate([q[:, j * dh:(j + 1) * dh], k[:, j * dh:(j + 1) * dh],
                            v[:, j * dh:(j + 1) * dh]], axis=1) for j in range(n_heads)]


def fuse_heads(per_head: list):
    dh = per_head[0].shape[1] // 3
    parts = [np.concatenate([u[:, i * dh:(i + 1) * dh] for u in per_head], axis=1) for i in range(3)]
    return np.concatenate(parts, axis=1)


def self_attention(z, u_qkv, d_h: int, return_map: bool = False):
    """One head: [q|k|v] = Z·U, A = softmax(q·kᵀ/√d_h), SA(Z) = A·v."""
    z = np.asarray(z)
    if z.ndim != 2 or u_qkv.shape != (z.shape[1], 3 * d_h):
        raise ShapeMismatch(f"Z {z.shape} and U_qkv {u_qkv.shape} with d_h={d_h}")
    qkv = z @ u_qkv
    q, k, v = qkv[:, :d_h], qkv[:, d_h:2 * d_h], qkv[:, 2 * d_h:]
    a = softmax(q @ k.T / np.sqrt(d_h))
    out = a @ v
    return (out, a) if return_map else out


def multi_head_self_attention(z, u_qkv_heads: list, u_msa, return_maps: bool = False):
    """[SA_1(Z) | ... | SA_h(Z)]·U_msa."""
    z = np.asarray(z)
    h = len(u_qkv_heads)
    d = z.shape[-1]
    if d % h or u_msa.shape != (d, d):
        raise ShapeMismatch(f"{h} heads, d_model={d}, U_msa {u_msa.shape}")
    y, cache = msa_forward(z[None], fuse_heads(list(u_qkv_heads)), u_msa, h)
    return (y[0], cache["a"][0]) if return_maps else y[0]


def msa_forward(z, w_qkv, u_msa, n_heads: int):
    """Batched MSA. z (B, N, d) -> (B, N, d); cache keeps the attention maps."""
    b, n, d = z.shape
    if d % n_heads or w_qkv.shape != (d, 3 * d) or u_msa.shape != (d, d):
        raise ShapeMismatch(f"z {z.shape}, w_qkv {w_qkv.shape}, u_msa {u_msa.shape}, h={n_heads}")
    dh = d // n_heads
    qkv = (z @ w_qkv).reshape(b, n, 3, n_heads, dh).transpose(2, 0, 3, 1, 4)  # (3, B, h, N, dh)
    q, k, v = qkv[0], qkv[1], qkv[2]
    scale = 1.0 / math.sqrt(dh)
    a = softmax(q @ k.transpose(0, 1, 3, 2) * scale)
    heads = a @ v                                     # (B, h, N, dh)
    concat = heads.transpose(0, 2, 1, 3).reshape(b, n, d)
    y = concat @ u_msa
    return y, {"z": z, "q": q, "k": k, "v": v, "a": a, "concat": concat, "scale": scale}


def msa_backward(dy, cache, w_qkv, u_msa):
    """Returns (dz, dw_qkv, du_msa)."""
    z, q, k, v, a, concat, scale = (cache[key] for key in ("z", "q", "k", "v", "a", "concat", "scale"))
    b, n, d = z.shape
    h, dh = q.shape[1], q.shape[3]
    du_msa = concat.reshape(-1, d).T @ dy.reshape(-1, d)
    dheads = (dy @ u_msa.T).reshape(b, n, h, dh).transpose(0, 2, 1, 3)
    da = dheads @ v.transpose(0, 1, 3, 2)
    dv = a.transpose(0, 1, 3, 2) @ dheads
    ds = softmax_backward(da, a) * scale
    dq = ds @ k
    dk = ds.transpose(0, 1, 3, 2) @ q
    dqkv = np.stack([dq, dk, dv]).transpose(1, 3, 0, 2, 4).reshape(b, n, 3 * d)
    dw_qkv = z.reshape(-1, d).T @ dqkv.reshape(-1, 3 * d)
    dz = dqkv @ w_qkv.T
    return dz, dw_qkv, du_msa
