"""CNN encoders, class-token transformer and per-token MLP head.

Parameters live in a flat name -> array dict so that optimizers, gradient
checks and the weight file can treat them uniformly. ``forward`` keeps a
cache of every intermediate; ``backward`` walks it in reverse.
"""

from dataclasses import dataclass

import numpy as np

from mp3splice.errors import ShapeMismatch
from mp3splice.model import layers as nn
from mp3splice.model.attention import msa_backward, msa_forward
from mp3splice.model.config import ModelConfig

PROB_FLOOR = 1e-12


def cnn_flat_size(shape, channels) -> int:
    return channels[-1] * nn.pooled_size(shape[0], len(channels)) * nn.pooled_size(shape[1], len(channels))


def parameter_shapes(cfg: ModelConfig) -> dict:
    shapes = {}
    for name, shape, chans, fc in (("cnn1", cfg.mdct_shape, cfg.cnn1_channels, cfg.cnn1_fc),
                                   ("cnn2", cfg.scalefac_shape, cfg.cnn2_channels, cfg.cnn2_fc)):
        cin = 1
        for s, c in enumerate(chans):
            for k in range(2):
                shapes[f"{name}.conv{s}{k}.w"] = (c, cin, 3, 3)
                shapes[f"{name}.conv{s}{k}.b"] = (c,)
                cin = c
        shapes[f"{name}.fc0.w"] = (cnn_flat_size(shape, chans), fc)
        shapes[f"{name}.fc0.b"] = (fc,)
        shapes[f"{name}.fc1.w"] = (fc, fc)
        shapes[f"{name}.fc1.b"] = (fc,)
    d = cfg.d_model
    shapes["class_tokens"] = (cfg.L, d)
    for i in range(cfg.n_layers):
        p = f"block{i}."
        shapes.update({
            p + "ln1.g": (d,), p + "ln1.b": (d,),
            p + "w_qkv": (d, 3 * d), p + "u_msa": (d, d),
            p + "ln2.g": (d,), p + "ln2.b": (d,),
            p + "ffn0.w": (d, cfg.ffn_hidden), p + "ffn0.b": (cfg.ffn_hidden,),
            p + "ffn1.w": (cfg.ffn_hidden, d), p + "ffn1.b": (d,),
        })
    shapes.update({
        "final_ln.g": (d,), "final_ln.b": (d,),
        "head.fc0.w": (d, cfg.mlp_hidden), "head.fc0.b": (cfg.mlp_hidden,),
        "head.fc1.w": (cfg.mlp_hidden, cfg.n_classes), "head.fc1.b": (cfg.n_classes,),
    })
    return shapes


@dataclass
class ModelParameters:
    config: ModelConfig
    tensors: dict

    def __getitem__(self, name):
        return self.tensors[name]

    def __iter__(self):
        return iter(self.tensors)

    def audit(self):
        """Check every tensor against the shapes implied by the config."""
        expected = parameter_shapes(self.config)
        if set(expected) != set(self.tensors):
            missing = sorted(set(expected) - set(self.tensors))
            extra = sorted(set(self.tensors) - set(expected))
            raise ShapeMismatch(f"missing {missing[:3]}, unexpected {extra[:3]}")
        for k, shape in expected.items():
            if self.tensors[k].shape != shape:
                raise ShapeMismatch(f"{k}: {self.tensors[k].shape}, expected {shape}")

    def copy(self) -> "ModelParameters":
        return ModelParameters(self.config, {k: v.copy() for k, v in self.tensors.items()})

    def astype(self, dtype) -> "ModelParameters":
        return ModelParameters(self.config, {k: v.astype(dtype) for k, v in self.tensors.items()})

    def count(self) -> int:
        return sum(v.size for v in self.tensors.values())


def init_params(cfg: ModelConfig, rng: np.random.Generator, dtype=np.float64) -> ModelParameters:
    """He-uniform for layers feeding a GELU, LeCun-uniform for the rest;
    zero biases, unit LayerNorm gains, N(0, 0.02²) class tokens."""
    t = {}
    for name, shape in parameter_shapes(cfg).items():
        if name == "class_tokens":
            t[name] = rng.normal(0.0, 0.02, shape)
        elif name.endswith(".g"):
            t[name] = np.ones(shape)
        elif name.endswith(".b"):
            t[name] = np.zeros(shape)
        else:
            fan_in = int(np.prod(shape[1:])) if len(shape) == 4 else shape[0]
            gelu_follows = not (name.endswith("u_msa") or name.endswith("w_qkv")
                                or name.endswith("ffn1.w") or name == "head.fc1.w")
            bound = np.sqrt((6.0 if gelu_follows else 3.0) / fan_in)
            t[name] = rng.uniform(-bound, bound, shape)
    return ModelParameters(cfg, {k: v.astype(dtype) for k, v in t.items()})


def positional_encoding(length: int, d_model: int) -> np.ndarray:
    """Sinusoidal encoding: sin on even dims, cos on odd dims, positions 0..L-1."""
    pos = np.arange(length)[:, None]
    i = np.arange(d_model)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / d_model)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))


# -- CNN encoders -----------------------------------------------------------------

def cnn_forward(params: ModelParameters, which: str, grid, rng=None):
    """grid (N, H, W) -> (N, fc). Returns (features, cache)."""
    cfg = params.config
    chans = cfg.cnn1_channels if which == "cnn1" else cfg.cnn2_channels
    shape = cfg.mdct_shape if which == "cnn1" else cfg.scalefac_shape
    grid = np.asarray(grid)
    if grid.shape[1:] != tuple(shape):
        raise ShapeMismatch(f"{which} expects (N, {shape[0]}, {shape[1]}), got {grid.shape}")
    x = grid[..., None]
    steps = []
    for s in range(len(chans)):
        for k in range(2):
            w, b = params[f"{which}.conv{s}{k}.w"], params[f"{which}.conv{s}{k}.b"]
            y, conv_cache = nn.conv3x3_forward(x, w, b)
            x, act_cache = nn.gelu_forward(y)
            steps.append(("conv", f"{which}.conv{s}{k}", conv_cache, act_cache))
        x, pool_cache = nn.maxpool2_forward(x)
        steps.append(("pool", None, pool_cache, None))
    pooled_shape = x.shape
    x = x.reshape(x.shape[0], -1)
    for j in range(2):
        name = f"{which}.fc{j}"
        y, lin_cache = nn.linear_forward(x, params[name + ".w"], params[name + ".b"])
        x, act_cache = nn.gelu_forward(y)
        x, mask = nn.dropout_forward(x, cfg.dropout, rng)
        steps.append(("fc", name, (lin_cache, act_cache), mask))
    return x, (steps, pooled_shape)


def cnn_backward(params: ModelParameters, dy, cache, grads: dict):
    steps, pooled_shape = cache
    for kind, name, c1, c2 in reversed(steps):
        if kind == "fc":
            lin_cache, act_cache = c1
            dy = nn.dropout_backward(dy, c2)
            dy = nn.gelu_backward(dy, act_cache)
            dy, dw, db = nn.linear_backward(dy, lin_cache, params[name + ".w"])
            grads[name + ".w"], grads[name + ".b"] = dw, db
            if name.endswith("fc0"):
                dy = dy.reshape(pooled_shape)
        elif kind == "pool":
            dy = nn.maxpool2_backward(dy, c1)
        else:
            dy = nn.gelu_backward(dy, c2)
            dy, dw, db = nn.conv3x3_backward(dy, c1, params[name + ".w"])
            grads[name + ".w"], grads[name + ".b"] = dw, db
    return dy[..., 0]


# -- input assembly ------------------------------------------------------------------

def frame_vectors(params: ModelParameters, mdct, scalefac, scalars, rng=None):
    """Per-frame z_l = [CNN-1(mdct) | CNN-2(scalefac) | scalars]; inputs carry (B, L) axes."""
    cfg = params.config
    b, length = scalars.shape[:2]
    if scalars.shape[2:] != (cfg.n_scalars,):
        raise ShapeMismatch(f"scalars {scalars.shape}, expected (B, L, {cfg.n_scalars})")
    f1, c1 = cnn_forward(params, "cnn1", mdct.reshape(b * length, *mdct.shape[2:]), rng)
    f2, c2 = cnn_forward(params, "cnn2", scalefac.reshape(b * length, *scalefac.shape[2:]), rng)
    z = np.concatenate([f1, f2, scalars.reshape(b * length, -1)], axis=1).reshape(b, length, cfg.d_model)
    return z, (c1, c2)


def interleave(class_tokens, z_prime):
    """[c_1 | z'_1 | c_2 | z'_2 | ...] along the token axis."""
    b, length, d = z_prime.shape
    out = np.empty((b, 2 * length, d), dtype=np.result_type(class_tokens, z_prime))
    out[:, 0::2] = class_tokens
    out[:, 1::2] = z_prime
    return out


def assemble_input(params: ModelParameters, mdct, scalefac, scalars, rng=None, pe=None):
    """(B, 2L, d_model) transformer input plus the cache for backward."""
    cfg = params.config
    length = scalars.shape[1]
    if length != cfg.L:
        raise ShapeMismatch(f"window has {length} frames, model expects L={cfg.L}")
    pe = positional_encoding(cfg.L, cfg.d_model) if pe is None else pe
    z, cnn_caches = frame_vectors(params, mdct, scalefac, scalars, rng)
    return interleave(params["class_tokens"], z + pe.astype(z.dtype)), cnn_caches


# -- transformer + head ------------------------------------------------------------

def block_forward(params: ModelParameters, i: int, x, rng=None):
    cfg = params.config
    p = f"block{i}."
    h1, ln1 = nn.layer_norm_forward(x, params[p + "ln1.g"], params[p + "ln1.b"], cfg.ln_eps)
    a, att = msa_forward(h1, params[p + "w_qkv"], params[p + "u_msa"], cfg.n_heads)
    a, m1 = nn.dropout_forward(a, cfg.dropout, rng)
    x = x + a
    h2, ln2 = nn.layer_norm_forward(x, params[p + "ln2.g"], params[p + "ln2.b"], cfg.ln_eps)
    f, lin0 = nn.linear_forward(h2, params[p + "ffn0.w"], params[p + "ffn0.b"])
    g, act = nn.gelu_forward(f)
    o, lin1 = nn.linear_forward(g, params[p + "ffn1.w"], params[p + "ffn1.b"])
    o, m2 = nn.dropout_forward(o, cfg.dropout, rng)
    return x + o, (ln1, att, m1, ln2, lin0, act, lin1, m2)


def block_backward(params: ModelParameters, i: int, dy, cache, grads: dict):
    p = f"block{i}."
    ln1, att, m1, ln2, lin0, act, lin1, m2 = cache
    do = nn.dropout_backward(dy, m2)
    dg, grads[p + "ffn1.w"], grads[p + "ffn1.b"] = nn.linear_backward(do, lin1, params[p + "ffn1.w"])
    df = nn.gelu_backward(dg, act)
    dh2, grads[p + "ffn0.w"], grads[p + "ffn0.b"] = nn.linear_backward(df, lin0, params[p + "ffn0.w"])
    dx2, grads[p + "ln2.g"], grads[p + "ln2.b"] = nn.layer_norm_backward(dh2, ln2)
    dy = dy + dx2
    da = nn.dropout_backward(dy, m1)
    dh1, grads[p + "w_qkv"], grads[p + "u_msa"] = msa_backward(da, att, params[p + "w_qkv"], params[p + "u_msa"])
    dx1, grads[p + "ln1.g"], grads[p + "ln1.b"] = nn.layer_norm_backward(dh1, ln1)
    return dy + dx1


def forward(params: ModelParameters, mdct, scalefac, scalars, rng=None, keep_cache: bool = False):
    """Class-token probabilities (B, L, n_classes).

    ``rng`` enables dropout (training mode); None is evaluation mode.
    Unbatched inputs (L, ...) are accepted and give (L, n_classes).
    """
    cfg = params.config
    single = np.ndim(scalars) == 2
    if single:
        mdct, scalefac, scalars = mdct[None], scalefac[None], scalars[None]
    x, cnn_caches = assemble_input(params, mdct, scalefac, scalars, rng)
    block_caches = []
    for i in range(cfg.n_layers):
        x, c = block_forward(params, i, x, rng)
        block_caches.append(c)
    xf, lnf = nn.layer_norm_forward(x, params["final_ln.g"], params["final_ln.b"], cfg.ln_eps)
    tokens = xf[:, 0::2]
    hid, lin0 = nn.linear_forward(tokens, params["head.fc0.w"], params["head.fc0.b"])
    act, act_cache = nn.gelu_forward(hid)
    logits, lin1 = nn.linear_forward(act, params["head.fc1.w"], params["head.fc1.b"])
    probs = nn.softmax(logits)
    out = probs[0] if single else probs
    if not keep_cache:
        return out
    return out, {"cnn": cnn_caches, "blocks": block_caches, "lnf": lnf, "lin0": lin0,
                 "act": act_cache, "lin1": lin1, "probs": probs, "shape": x.shape}


def backward(params: ModelParameters, dlogits, cache) -> dict:
    """Gradients of every parameter given d(loss)/d(logits) of shape (B, L, C)."""
    cfg = params.config
    grads = {}
    dact, grads["head.fc1.w"], grads["head.fc1.b"] = nn.linear_backward(dlogits, cache["lin1"], params["head.fc1.w"])
    dhid = nn.gelu_backward(dact, cache["act"])
    dtok, grads["head.fc0.w"], grads["head.fc0.b"] = nn.linear_backward(dhid, cache["lin0"], params["head.fc0.w"])
    dxf = np.zeros(cache["shape"], dtype=dtok.dtype)
    dxf[:, 0::2] = dtok
    dx, grads["final_ln.g"], grads["final_ln.b"] = nn.layer_norm_backward(dxf, cache["lnf"])
    for i in reversed(range(cfg.n_layers)):
        dx = block_backward(params, i, dx, cache["blocks"][i], grads)
    grads["class_tokens"] = dx[:, 0::2].sum(axis=0)
    dz = dx[:, 1::2]
    b, length, _ = dz.shape
    dz = dz.reshape(b * length, cfg.d_model)
    c1, c2 = cache["cnn"]
    cnn_backward(params, dz[:, :cfg.cnn1_fc], c1, grads)
    cnn_backward(params, dz[:, cfg.cnn1_fc:cfg.cnn1_fc + cfg.cnn2_fc], c2, grads)
    return grads


def cross_entropy(probs, labels) -> float:
    """Mean of -log p(label) over all frames, with p floored at 1e-12."""
    p = np.take_along_axis(probs, labels[..., None], axis=-1)[..., 0]
    return float(-np.log(np.maximum(p, PROB_FLOOR)).mean())


def loss_and_grads(params: ModelParameters, mdct, scalefac, scalars, labels, rng=None):
    probs, cache = forward(params, mdct, scalefac, scalars, rng, keep_cache=True)
    loss = cross_entropy(probs, labels)
    onehot = np.eye(params.config.n_classes, dtype=probs.dtype)[labels]
    p = np.take_along_axis(probs, labels[..., None], axis=-1)
    # below the floor the loss is constant, so its gradient vanishes there
    live = (p >= PROB_FLOOR).astype(probs.dtype)
    dlogits = (probs - onehot) * live / labels.size
    return loss, backward(params, dlogits, cache), probs


def predict_labels(probs) -> np.ndarray:
    """Class 1 only when its probability strictly exceeds class 0's."""
    probs = np.asarray(probs)
    return (probs[..., 1] > probs[..., 0]).astype(np.int64)
