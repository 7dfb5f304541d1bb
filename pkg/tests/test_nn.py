"""GRU stack, batch norm, Adam, losses, and checkpoint file format."""
import numpy as np
import pytest

from markerdec.nn import (Adam, BatchNorm, BiGruModel, bce_loss, gradcheck_model,
                          load_checkpoint, mse_loss, save_checkpoint, sha256_file)
from markerdec.nn.core import Parameter, sigmoid
from markerdec.nn.layers import BiGruLayer, Dense, GruDirection, gru_cell_forward


def test_sigmoid_stable_at_extremes():
    x = np.array([-1000.0, -20.0, 0.0, 20.0, 1000.0])
    s = sigmoid(x)
    assert np.all(np.isfinite(s))
    assert s[0] == 0.0 or s[0] < 1e-300
    assert s[2] == 0.5
    assert s[-1] == 1.0 or s[-1] > 1 - 1e-12


def test_gru_cell_zero_weights_halves_state():
    # all-zero weights: z = r = 1/2, candidate = tanh(0) = 0, so h -> h/2
    h = np.array([[2.0, -4.0]])
    u = np.array([[0.3, 0.7, -1.0]])
    W = np.zeros((2, 5))
    out = gru_cell_forward(h, u, W, W, W)
    assert np.allclose(out, [[1.0, -2.0]])


def test_gru_cell_update_gate_law():
    # a large z bias saturates the update gate so h equals the candidate
    rng = np.random.default_rng(0)
    h = rng.normal(size=(3, 4))
    u = rng.normal(size=(3, 2))
    Wzr = np.zeros((4, 6))
    Wh = rng.normal(size=(4, 6), scale=0.3)
    bz = np.full(4, 50.0)
    out = gru_cell_forward(h, u, Wzr, Wzr, Wh, bz, np.zeros(4), np.zeros(4))
    b = np.concatenate([0.5 * h, u], axis=1)  # r stays at 1/2
    assert np.allclose(out, np.tanh(b @ Wh.T), atol=1e-9)


@pytest.mark.parametrize("reverse", [False, True])
def test_gru_direction_matches_cell_scan(reverse):
    rng = np.random.default_rng(1)
    gd = GruDirection("g", 3, 4, rng, reverse=reverse, bias=True, dtype=np.float64)
    x = rng.normal(size=(7, 2, 3))
    out = gd.forward(x, train=False)
    h = np.zeros((2, 4))
    order = range(6, -1, -1) if reverse else range(7)
    for t in order:
        h = gru_cell_forward(h, x[t], gd.Wz.value, gd.Wr.value, gd.Wh.value,
                             gd.bz.value, gd.br.value, gd.bh.value)
        assert np.allclose(out[t], h, atol=1e-12)


def test_bigru_layer_concatenates_directions():
    rng = np.random.default_rng(2)
    layer = BiGruLayer("b", 3, 5, rng, dtype=np.float64)
    x = rng.normal(size=(6, 2, 3))
    out = layer.forward(x, train=False)
    assert out.shape == (6, 2, 10)
    assert np.allclose(out[:, :, :5], layer.fwd.forward(x, train=False))
    assert np.allclose(out[:, :, 5:], layer.bwd.forward(x, train=False))


def test_batchnorm_train_statistics():
    bn = BatchNorm("bn", 4, dtype=np.float64)
    x = np.random.default_rng(3).normal(3.0, 2.5, size=(10, 8, 4))
    out = bn.forward(x, train=True)
    assert np.allclose(out.mean(axis=(0, 1)), 0.0, atol=1e-10)
    assert np.allclose(out.var(axis=(0, 1)), 1.0, atol=1e-4)  # eps shifts it slightly


def test_batchnorm_running_update_law():
    bn = BatchNorm("bn", 2, momentum=0.1, dtype=np.float64)
    x = np.random.default_rng(4).normal(1.0, 2.0, size=(5, 3, 2))
    bn.forward(x, train=True)
    assert np.allclose(bn.running_mean, 0.1 * x.mean(axis=(0, 1)))
    assert np.allclose(bn.running_var, 0.9 * 1.0 + 0.1 * x.var(axis=(0, 1)))


def test_batchnorm_eval_uses_running_stats():
    bn = BatchNorm("bn", 3, dtype=np.float64)
    rng = np.random.default_rng(5)
    for _ in range(20):
        bn.forward(rng.normal(2.0, 1.5, size=(4, 6, 3)), train=True)
    x = rng.normal(2.0, 1.5, size=(4, 2, 3))
    out = bn.forward(x, train=False)
    # eval output is per-element, so each batch column is independent
    solo = bn.forward(x[:, :1], train=False)
    assert np.allclose(out[:, :1], solo)
    assert abs(out.mean()) < 0.5  # roughly standardized by the running stats


def test_batchnorm_buffer_names_prefixed():
    bn = BatchNorm("gru1.bn", 4)
    names = [name for name, _ in bn.buffers()]
    assert names == ["gru1.bn.running_mean", "gru1.bn.running_var"]


def test_dense_affine():
    rng = np.random.default_rng(6)
    d = Dense("d", 3, 2, rng, dtype=np.float64)
    x = rng.normal(size=(4, 5, 3))
    assert np.allclose(d.forward(x, train=False), x @ d.W.value.T + d.b.value)


def test_model_forward_shape_and_eval_batch_independence():
    model = BiGruModel(2, 6, 2, (4, 1), init_seed=7)
    rng = np.random.default_rng(7)
    x = rng.normal(size=(9, 4, 2)).astype(np.float32)
    p = model.forward(x, train=False)
    assert p.shape == (9, 4)
    assert np.all((p > 0) & (p < 1))
    # eval-mode output for one sequence ignores its batch companions
    solo = model.forward(x[:, 2:3], train=False)
    assert np.allclose(p[:, 2:3], solo, atol=1e-6)


def test_model_small_gradcheck():
    model = BiGruModel(2, 3, 2, (3, 1), bias=True, dtype=np.float64, init_seed=8)
    rng = np.random.default_rng(8)
    x = rng.normal(size=(5, 2, 2))
    labels = rng.integers(0, 2, (5, 2)).astype(np.float64)
    worst, per_param = gradcheck_model(model, x, labels, "bce")
    assert worst < 1e-4
    assert set(per_param) == {p.name for p in model.parameters()}


def test_gradcheck_requires_float64():
    model = BiGruModel(2, 3, 1, (1,), dtype=np.float32)
    x = np.zeros((3, 1, 2), dtype=np.float32)
    labels = np.zeros((3, 1), dtype=np.float32)
    with pytest.raises(ValueError):
        gradcheck_model(model, x, labels)


def test_mse_loss_value_and_grad():
    pred = np.array([[0.2, 0.9]])
    labels = np.array([[0.0, 1.0]])
    loss, grad = mse_loss(pred, labels)
    assert loss == pytest.approx((0.04 + 0.01) / 2)
    assert np.allclose(grad, [[0.4 / 2, -0.2 / 2]])


def test_bce_loss_value_and_grad():
    pred = np.array([[0.3]])
    labels = np.array([[1.0]])
    loss, grad = bce_loss(pred, labels)
    assert loss == pytest.approx(-np.log(0.3), rel=1e-9)
    assert grad[0, 0] == pytest.approx(-1.0 / 0.3, rel=1e-6)


def test_bce_loss_guards_saturation():
    pred = np.array([[0.0, 1.0]])
    labels = np.array([[1.0, 0.0]])
    loss, grad = bce_loss(pred, labels)
    assert np.isfinite(loss)
    assert np.all(np.isfinite(grad))


def make_param(value):
    p = Parameter("p", np.asarray(value, dtype=np.float64))
    p.grad = np.zeros_like(p.value)
    return p


def test_adam_staircase_schedule():
    p = make_param([0.0])
    opt = Adam([p], 9e-5, decay=0.95, decay_every=1000)
    assert opt.lr == pytest.approx(9e-5)
    for lo, hi, want in ((0, 1000, 9e-5), (1000, 2000, 9e-5 * 0.95), (2000, 2001, 9e-5 * 0.95 ** 2)):
        opt.step_count = lo
        assert opt.lr == pytest.approx(want)
        opt.step_count = hi - 1
        assert opt.lr == pytest.approx(want)


def test_adam_first_step_is_signed_lr():
    # bias correction makes the first update lr * g/(|g| + eps') ~ lr * sign(g)
    p = make_param([1.0, -2.0, 3.0])
    opt = Adam([p], 1e-2, clip=1e9)
    p.grad[:] = [4.0, -0.5, 1e-3]
    opt.step()
    assert np.allclose(p.value, [1.0 - 1e-2, -2.0 + 1e-2, 3.0 - 1e-2], atol=1e-6)


def test_adam_norm_clip_and_reported_norm():
    p = make_param(np.zeros(4))
    opt = Adam([p], 1e-2, clip=0.1)
    p.grad[:] = [3.0, 0.0, 4.0, 0.0]  # norm 5
    norm = opt.step()
    assert norm == pytest.approx(5.0)
    q = make_param(np.zeros(4))
    opt2 = Adam([q], 1e-2, clip=1e9)
    q.grad[:] = np.array([3.0, 0.0, 4.0, 0.0]) * (0.1 / 5.0)
    opt2.step()
    assert np.allclose(p.value, q.value)


def test_adam_value_clip_mode():
    p = make_param(np.zeros(3))
    opt = Adam([p], 1e-2, clip=0.1, clip_mode="value")
    p.grad[:] = [5.0, -5.0, 0.01]
    opt.step()
    q = make_param(np.zeros(3))
    opt2 = Adam([q], 1e-2, clip=1e9)
    q.grad[:] = [0.1, -0.1, 0.01]
    opt2.step()
    assert np.allclose(p.value, q.value)


def test_adam_rejects_non_finite_gradients():
    p = make_param([0.0])
    opt = Adam([p], 1e-3)
    p.grad[:] = [np.nan]
    with pytest.raises(FloatingPointError):
        opt.step()


def test_adam_zero_grad_step_keeps_params():
    p = make_param([1.5])
    opt = Adam([p], 1e-2)
    opt.step()
    assert p.value[0] == pytest.approx(1.5)


def test_checkpoint_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(9)
    arrays = [("layer.W", rng.normal(size=(7, 3)).astype(np.float32)),
              ("layer.b", rng.normal(size=7).astype(np.float32)),
              ("bn.running_mean", rng.normal(size=4).astype(np.float32))]
    meta = {"kind": "estimator", "hidden": "64", "mlp_dims": "32,1"}
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, meta, arrays)
    meta2, arrays2 = load_checkpoint(path)
    assert meta2 == meta
    assert list(arrays2) == [n for n, _ in arrays]
    for name, a in arrays:
        got = arrays2[name]
        assert got.dtype == np.float32
        assert got.tobytes() == a.tobytes()


def test_checkpoint_rejects_corruption(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, {"kind": "x"}, [("w", np.ones(3, dtype=np.float32))])
    raw = path.read_bytes()
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"NOT-A-CKPT" + raw[10:])
    with pytest.raises(ValueError):
        load_checkpoint(bad)
    bad.write_bytes(raw[:-4])
    with pytest.raises(ValueError):
        load_checkpoint(bad)
    bad.write_bytes(raw + b"garbage")
    with pytest.raises(ValueError):
        load_checkpoint(bad)


def test_sha256_file_stable(tmp_path):
    path = tmp_path / "model.ckpt"
    save_checkpoint(path, {"kind": "x"}, [("w", np.arange(4, dtype=np.float32))])
    h1 = sha256_file(path)
    assert len(h1) == 64
    assert h1 == sha256_file(path)


def test_model_state_roundtrip(tmp_path):
    model = BiGruModel(2, 5, 2, (3, 1), init_seed=10)
    rng = np.random.default_rng(10)
    x = rng.normal(size=(6, 3, 2)).astype(np.float32)
    model.forward(x, train=True)  # move BN running stats off their init
    before = model.forward(x, train=False)
    path = tmp_path / "m.ckpt"
    save_checkpoint(path, model.hyper(), model.state())
    meta, arrays = load_checkpoint(path)
    clone = BiGruModel.from_hyper(meta)
    clone.load_state(arrays)
    assert np.array_equal(clone.forward(x, train=False), before)


def test_load_state_shape_mismatch():
    model = BiGruModel(2, 5, 1, (1,), init_seed=11)
    other = BiGruModel(2, 4, 1, (1,), init_seed=11)
    state = dict(other.state())
    with pytest.raises(ValueError):
        model.load_state(state)
