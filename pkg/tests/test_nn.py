import numpy as np
import pytest

import oracles
from nomalink.nn import Dense, Mlp, Relu, mse_loss
from nomalink.rng import stream_rng


def _loss_of(mlp, x, target):
    pred = mlp.forward(x)
    loss, _ = mse_loss(pred, target)
    return loss


def test_dense_forward_is_affine():
    layer = Dense(3, 2, stream_rng(0))
    x = stream_rng(1).standard_normal((5, 3))
    assert np.allclose(layer.forward(x), x @ layer.W + layer.b)


def test_relu_masks_negative():
    r = Relu()
    x = np.array([[-1.0, 0.0, 2.0]])
    assert np.array_equal(r.forward(x), [[0.0, 0.0, 2.0]])
    assert np.array_equal(r.backward(np.ones((1, 3))), [[0.0, 0.0, 1.0]])


def test_mlp_gradients_match_finite_differences():
    rng = stream_rng(3)
    mlp = Mlp([2, 5, 4, 3], rng)
    x = rng.standard_normal((6, 2))
    target = rng.standard_normal((6, 3))

    pred = mlp.forward(x)
    _, g = mse_loss(pred, target)
    mlp.zero_grad()
    g_in = mlp.backward(g)

    for layer in mlp.dense_layers():
        for arr, got in ((layer.W, layer.gW), (layer.b, layer.gb)):
            fd = oracles.fd_gradient(lambda: _loss_of(mlp, x, target), arr)
            assert np.allclose(got, fd, rtol=1e-6, atol=1e-8)
    fd_x = oracles.fd_gradient(lambda: _loss_of(mlp, x, target), x)
    assert np.allclose(g_in, fd_x, rtol=1e-6, atol=1e-8)


def test_gradients_accumulate_until_zero_grad():
    mlp = Mlp([2, 3, 1], stream_rng(4))
    x = np.ones((2, 2))
    g = np.ones((2, 1))
    mlp.forward(x)
    mlp.backward(g)
    once = mlp.dense_layers()[0].gW.copy()
    mlp.forward(x)
    mlp.backward(g)
    assert np.allclose(mlp.dense_layers()[0].gW, 2 * once)
    mlp.zero_grad()
    assert np.all(mlp.dense_layers()[0].gW == 0)


def test_sgd_step_moves_against_gradient():
    layer = Dense(1, 1, stream_rng(5))
    layer.gW[:] = 2.0
    w0 = layer.W.copy()
    layer.sgd_step(0.1)
    assert np.allclose(layer.W, w0 - 0.2)


def test_macs_counts_weights_only():
    mlp = Mlp([2, 32, 32, 32, 2])
    assert mlp.macs == 2 * 32 + 32 * 32 + 32 * 32 + 32 * 2
    assert Dense(7, 3).macs == 21


def test_mse_loss_value_and_gradient():
    pred = np.array([[1.0, 2.0], [3.0, 4.0]])
    target = np.zeros((2, 2))
    loss, grad = mse_loss(pred, target)
    assert loss == pytest.approx((1 + 4 + 9 + 16) / 2)
    assert np.allclose(grad, pred)  # 2 * diff / n with n = 2


def test_zero_init_without_rng():
    layer = Dense(4, 4)
    assert np.all(layer.W == 0) and np.all(layer.b == 0)
    with pytest.raises(ValueError):
        Mlp([3])
