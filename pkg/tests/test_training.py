import dataclasses
import json

import numpy as np
import pytest

from mp3splice.errors import EmptyDataset, NonFiniteLoss, ShapeMismatch
from mp3splice.features import WindowDataset
from mp3splice.model import ModelConfig, ModelParameters, forward, init_params, load_weights
from mp3splice.training import AdamState, TrainConfig, adam_step, gradients, loss, train

GRAD_CFG = ModelConfig(d_model=12, n_heads=3, L=4, n_layers=2, mlp_hidden=10, ffn_hidden=16, dropout=0.0,
                       cnn1_channels=(2, 2, 3), cnn1_fc=4, cnn2_channels=(2, 2, 2), cnn2_fc=4, n_scalars=4)
FD_STEP = 1e-5


def make_instance(seed, cfg=GRAD_CFG, batch=2):
    rng = np.random.default_rng(seed)
    p = init_params(cfg, rng)
    for k, v in p.tensors.items():
        if k.endswith(".b") or k == "class_tokens":
            p.tensors[k] = rng.normal(0, 0.2, v.shape)
        elif k.endswith(".g"):
            p.tensors[k] = rng.uniform(0.5, 1.5, v.shape)
    batch_arrays = (rng.normal(size=(batch, cfg.L) + cfg.mdct_shape), rng.normal(size=(batch, cfg.L) + cfg.scalefac_shape),
                    rng.normal(size=(batch, cfg.L, cfg.n_scalars)), rng.integers(0, 2, (batch, cfg.L)))
    return p, batch_arrays


def fd_check(p, batch, dropout_seed=None, per_group=6, seed=0):
    """Central differences on random entries of every parameter group."""
    _, grads = gradients(p, batch, dropout_seed)
    rng = np.random.default_rng(seed)
    failures = []
    for name, tensor in p.tensors.items():
        flat = tensor.reshape(-1)
        for idx in rng.choice(flat.size, min(per_group, flat.size), replace=False):
            keep = flat[idx]
            flat[idx] = keep + FD_STEP
            up = gradients(p, batch, dropout_seed)[0]
            flat[idx] = keep - FD_STEP
            down = gradients(p, batch, dropout_seed)[0]
            flat[idx] = keep
            fd = (up - down) / (2 * FD_STEP)
            g = grads[name].reshape(-1)[idx]
            if abs(g - fd) > 1e-7 + 1e-4 * max(abs(g), abs(fd)):
                failures.append((name, int(idx), g, fd))
    return failures


@pytest.mark.parametrize("seed", range(5))
def test_gradients_match_finite_differences(seed):
    p, batch = make_instance(seed)
    assert fd_check(p, batch, seed=seed) == []


def test_gradients_with_fixed_dropout_masks():
    cfg = dataclasses.replace(GRAD_CFG, dropout=0.3)
    p, batch = make_instance(7, cfg)
    assert fd_check(p, batch, dropout_seed=11, per_group=3) == []


def test_every_parameter_gets_a_gradient():
    p, batch = make_instance(0)
    _, grads = gradients(p, batch)
    assert set(grads) == set(p.tensors)
    assert all(grads[k].shape == p[k].shape for k in grads)


def test_duplicated_batch_gives_the_same_gradient():
    p, (m, s, c, y) = make_instance(1, batch=1)
    l1, g1 = gradients(p, (m, s, c, y))
    l2, g2 = gradients(p, tuple(np.concatenate([a, a]) for a in (m, s, c, y)))
    assert l1 == pytest.approx(l2, rel=1e-12)
    for k in g1:
        np.testing.assert_allclose(g1[k], g2[k], rtol=1e-9, atol=1e-14)


def test_loss_is_mean_negative_log_likelihood():
    probs = np.array([[[0.9, 0.1], [0.3, 0.7]]])
    assert loss(probs, np.array([[0, 1]])) == pytest.approx(-(np.log(0.9) + np.log(0.7)) / 2)
    assert loss(np.array([[[1.0, 0.0]]]), np.array([[1]])) == pytest.approx(-np.log(1e-12))
    with pytest.raises(ShapeMismatch):
        loss(probs, np.array([0, 1, 1]))


def test_non_finite_and_empty_batches_raise():
    p, (m, s, c, y) = make_instance(2)
    m = m.copy()
    m[0, 0, 0, 0] = np.nan
    with pytest.raises(NonFiniteLoss):
        gradients(p, (m, s, c, y))
    with pytest.raises(EmptyDataset):
        gradients(p, (m[:0], s[:0], c[:0], y[:0]))


def test_adam_matches_hand_computation():
    cfg = TrainConfig(learning_rate=0.1)
    p = ModelParameters(GRAD_CFG, {"w": np.array([1.0, -2.0])})
    state = AdamState.zeros_like(p)
    m = v = np.zeros(2)
    w = np.array([1.0, -2.0])
    for t, g in enumerate([np.array([0.5, -1.0]), np.array([0.2, 0.3]), np.array([-0.4, 0.1])], start=1):
        adam_step(p, state, {"w": g.copy()}, cfg)
        m = 0.9 * m + 0.1 * g
        v = 0.999 * v + 0.001 * g * g
        w = w - 0.1 * (m / (1 - 0.9 ** t)) / (np.sqrt(v / (1 - 0.999 ** t)) + 1e-8)
        np.testing.assert_allclose(p["w"], w, rtol=1e-14)
    assert state.step == 3


def tiny_dataset(n, cfg=GRAD_CFG, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, (n, cfg.L))
    mdct = rng.normal(size=(n, cfg.L) + cfg.mdct_shape) + 2.0 * y[..., None, None]
    return WindowDataset.from_arrays(mdct, rng.normal(size=(n, cfg.L) + cfg.scalefac_shape),
                                     rng.normal(size=(n, cfg.L, cfg.n_scalars)), y)


def test_patience_stops_after_twenty_stale_epochs():
    ds = tiny_dataset(4)
    state = train(ds, ds, TrainConfig(batch_size=4), GRAD_CFG, evaluator=lambda p: 50.0)
    assert state.epoch == 21 and state.best_epoch == 1


def test_epoch_cap_and_stop_at():
    ds = tiny_dataset(4)
    scores = iter([10.0, 20.0, 30.0, 40.0, 95.0, 99.0])
    assert train(ds, ds, TrainConfig(epoch_cap=3), GRAD_CFG, evaluator=lambda p: next(scores)).epoch == 3
    state = train(ds, ds, TrainConfig(stop_at=95.0), GRAD_CFG, evaluator=lambda p: next(scores))
    assert state.epoch == 2 and state.best_score == 95.0


def test_training_learns_a_separable_toy_task(tmp_path):
    ds = tiny_dataset(16)
    cfg = TrainConfig(learning_rate=3e-3, batch_size=8, patience=5, epoch_cap=40, dropout=0.0)
    state = train(ds, ds, cfg, GRAD_CFG, out_dir=tmp_path)
    assert state.best_score > 90.0
    rows = [json.loads(line) for line in (tmp_path / "history.jsonl").read_text().splitlines()]
    assert len(rows) == state.epoch and rows[0]["epoch"] == 1
    best, extra = load_weights(tmp_path / "best.npz")
    assert extra["epoch"] == state.best_epoch
    mdct, sf, sc, _ = ds.batch(np.arange(len(ds)))
    np.testing.assert_allclose(forward(best, mdct, sf, sc), forward(state.best_params, mdct, sf, sc))


def test_training_is_deterministic():
    ds = tiny_dataset(6)
    cfg = TrainConfig(learning_rate=1e-3, batch_size=3, epoch_cap=3, dropout=0.2, seed=5)
    a, b = train(ds, ds, cfg, GRAD_CFG), train(ds, ds, cfg, GRAD_CFG)
    assert [r["train_loss"] for r in a.history] == [r["train_loss"] for r in b.history]


def test_float32_training_runs():
    ds = tiny_dataset(4)
    state = train(ds, ds, TrainConfig(epoch_cap=2, dtype="float32"), GRAD_CFG)
    assert state.params["head.fc0.w"].dtype == np.float32


def test_empty_sets_are_rejected():
    ds = tiny_dataset(2)
    with pytest.raises(EmptyDataset):
        train(ds.subset([]), ds, TrainConfig(), GRAD_CFG)
    with pytest.raises(EmptyDataset):
        train(ds, ds.subset([]), TrainConfig(), GRAD_CFG)
