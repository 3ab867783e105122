"""Straight-line reference forward pass, written from the equations with
explicit loops. It shares no code with the package: the only inputs are
the parameter dict and the raw window arrays."""

import math

import numpy as np


def gelu(x):
    return np.vectorize(lambda t: 0.5 * t * (1.0 + math.erf(t / math.sqrt(2.0))))(x)


def softmax_row(r):
    e = np.exp(r - r.max())
    return e / e.sum()


def conv_same(img, w, b):
    """img (H, W, cin), w (cout, cin, 3, 3): cross-correlation, zero padding 1."""
    h, wd, cin = img.shape
    cout = w.shape[0]
    pad = np.zeros((h + 2, wd + 2, cin))
    pad[1:-1, 1:-1] = img
    out = np.zeros((h, wd, cout))
    for o in range(cout):
        for i in range(h):
            for j in range(wd):
                out[i, j, o] = b[o] + np.sum(pad[i:i + 3, j:j + 3, :] * w[o].transpose(1, 2, 0))
    return out


def maxpool(img):
    """2x2, stride 2; odd edges keep their partial window."""
    h, wd, c = img.shape
    oh, ow = -(-h // 2), -(-wd // 2)
    out = np.zeros((oh, ow, c))
    for i in range(oh):
        for j in range(ow):
            out[i, j] = img[2 * i:2 * i + 2, 2 * j:2 * j + 2].reshape(-1, c).max(axis=0)
    return out


def cnn(p, name, grid, n_stages=3):
    x = grid[:, :, None]
    for s in range(n_stages):
        for k in range(2):
            x = gelu(conv_same(x, p[f"{name}.conv{s}{k}.w"], p[f"{name}.conv{s}{k}.b"]))
        x = maxpool(x)
    v = x.reshape(-1)   # row-major over (H, W, C)
    for j in range(2):
        v = gelu(v @ p[f"{name}.fc{j}.w"] + p[f"{name}.fc{j}.b"])
    return v


def layer_norm(x, g, b, eps):
    mu = x.mean()
    var = ((x - mu) ** 2).mean()
    return (x - mu) / math.sqrt(var + eps) * g + b


def positional(length, d):
    pe = np.zeros((length, d))
    for pos in range(length):
        for i in range(0, d, 2):
            angle = pos / 10000.0 ** (i / d)
            pe[pos, i] = math.sin(angle)
            if i + 1 < d:
                pe[pos, i + 1] = math.cos(angle)
    return pe


def sa(z, u, dh):
    """[q|k|v] = Z U; A = softmax(q kᵀ / √d_h); SA(Z) = A v."""
    qkv = z @ u
    q, k, v = qkv[:, :dh], qkv[:, dh:2 * dh], qkv[:, 2 * dh:]
    s = q @ k.T / math.sqrt(dh)
    a = np.stack([softmax_row(r) for r in s])
    return a @ v


def msa(z, w_qkv, u_msa, h):
    d = z.shape[1]
    dh = d // h
    heads = []
    for j in range(h):
        cols = [c for third in range(3) for c in range(third * d + j * dh, third * d + (j + 1) * dh)]
        heads.append(sa(z, w_qkv[:, cols], dh))
    return np.concatenate(heads, axis=1) @ u_msa


def forward_window(p, cfg, mdct, sf, sc):
    """One window: mdct (L, 32, 18), sf (L, 5, 12), sc (L, n_scalars) -> (L, 2)."""
    length, d = cfg["L"], cfg["d_model"]
    pe = positional(length, d)
    rows = []
    for l in range(length):
        z = np.concatenate([cnn(p, "cnn1", mdct[l]), cnn(p, "cnn2", sf[l]), sc[l]])
        rows.append(p["class_tokens"][l])
        rows.append(z + pe[l])
    x = np.stack(rows)                              # Z = [c_1 | z'_1 | ... | c_L | z'_L]
    eps = cfg["ln_eps"]
    for i in range(cfg["n_layers"]):
        q = f"block{i}."
        hln = np.stack([layer_norm(r, p[q + "ln1.g"], p[q + "ln1.b"], eps) for r in x])
        x = x + msa(hln, p[q + "w_qkv"], p[q + "u_msa"], cfg["n_heads"])
        hln = np.stack([layer_norm(r, p[q + "ln2.g"], p[q + "ln2.b"], eps) for r in x])
        x = x + gelu(hln @ p[q + "ffn0.w"] + p[q + "ffn0.b"]) @ p[q + "ffn1.w"] + p[q + "ffn1.b"]
    out = []
    for l in range(length):
        c = layer_norm(x[2 * l], p["final_ln.g"], p["final_ln.b"], eps)
        hidden = gelu(c @ p["head.fc0.w"] + p["head.fc0.b"])
        out.append(softmax_row(hidden @ p["head.fc1.w"] + p["head.fc1.b"]))
    return np.stack(out)
