import numpy as np
import pytest

import oracles
from nomalink.modem import (ROLE_FAR, ROLE_NEAR, SUPERPOSE_LITERAL,
                            SUPERPOSE_SQRT, ModemModel, TrainConfig,
                            amplitudes, count_macs, demodulate, load_model,
                            mean_symbol_power, modulate, pair_backward,
                            pair_forward, save_model, target_scale,
                            train_modem, tx_symbols, _init_model)
from nomalink.quant import fit_quantizer
from nomalink.rng import stream_rng


@pytest.fixture()
def q22():
    return fit_quantizer(2, 5.0, 1.0)


def _random_pair(q, seed=0):
    near = _init_model(ROLE_NEAR, 2, (6, 5), q, stream_rng(seed, 0, 4))
    far = _init_model(ROLE_FAR, 1, (6, 5), q, stream_rng(seed, 1, 4))
    return near, far


def test_amplitudes_conventions():
    a_n, a_f = amplitudes(0.3, 0.7, SUPERPOSE_SQRT)
    assert (a_n, a_f) == pytest.approx((np.sqrt(0.3), np.sqrt(0.7)))
    assert amplitudes(0.3, 0.7, SUPERPOSE_LITERAL) == (0.3, 0.7)
    with pytest.raises(ValueError):
        amplitudes(0.3, 0.7, "weird")


def test_modulator_is_affine(q22):
    near, _ = _random_pair(q22)
    v = np.array([-2.0, 0.0, 3.0])
    s = modulate(v, near)
    # affine in v: s(v) = v * (w0 + j w1) + (b0 + j b1)
    slope = complex(near.mod_w[0], near.mod_w[1])
    inter = complex(near.mod_b[0], near.mod_b[1])
    assert np.allclose(s, v * slope + inter)


def test_normalized_constellation_has_unit_mean_power(q22):
    near, _ = _random_pair(q22)
    near.mean_power = mean_symbol_power(near)
    s = tx_symbols(q22.constellation_deq, near)
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_tx_requires_frozen_power(q22):
    near, _ = _random_pair(q22)
    with pytest.raises(ValueError):
        tx_symbols(np.array([0.0]), near)


def test_target_scale_is_constellation_std(q22):
    assert target_scale(q22) == pytest.approx(float(np.std(q22.constellation_deq)))


def test_pair_forward_loss_decomposition(q22):
    # raw losses equal hand-computed squared errors; scaled divide by variance
    near, far = _random_pair(q22, seed=1)
    rng = stream_rng(9)
    vn = q22.constellation_deq[rng.integers(0, 4, size=8)]
    vf = q22.constellation_deq[rng.integers(0, 4, size=8)]
    noise_n = (rng.standard_normal(8) + 1j * rng.standard_normal(8)) * 0.05
    noise_f = (rng.standard_normal(8) + 1j * rng.standard_normal(8)) * 0.05
    amp_n, amp_f = amplitudes(0.3, 0.7)
    losses, _ = pair_forward(near, far, vn, vf, amp_n, amp_f,
                             (1.0, 1.0, noise_n), (1.0, 1.0, noise_f))

    def norm_tx(model, v):
        raw = modulate(v, model)
        return raw / np.sqrt(np.mean(np.abs(modulate(q22.constellation_deq, model)) ** 2))

    x = amp_n * norm_tx(near, vn) + amp_f * norm_tx(far, vf)
    out_n = demodulate(x + noise_n, near)
    out_f = demodulate(x + noise_f, far)
    want_near = np.mean((out_n[:, 0] - vn) ** 2) + np.mean((out_n[:, 1] - vf) ** 2)
    want_far = np.mean((out_f[:, 0] - vf) ** 2)
    assert losses.near == pytest.approx(want_near, rel=1e-12)
    assert losses.far == pytest.approx(want_far, rel=1e-12)
    var = target_scale(q22) ** 2
    assert losses.near_scaled == pytest.approx(want_near / var, rel=1e-12)
    assert losses.far_scaled == pytest.approx(want_far / var, rel=1e-12)


def test_pair_backward_matches_finite_differences(q22):
    near, far = _random_pair(q22, seed=2)
    rng = stream_rng(11)
    vn = q22.constellation_deq[rng.integers(0, 4, size=5)]
    vf = q22.constellation_deq[rng.integers(0, 4, size=5)]
    # mismatched channel estimate exercises the conj(h / h_hat) chain rule
    chan_n = (0.9 - 0.2j, 0.85 - 0.16j, 0.03 * rng.standard_normal(5) + 0.01j)
    chan_f = (1.1 + 0.4j, 1.02 + 0.44j, 0.03 * rng.standard_normal(5) - 0.02j)
    amp_n, amp_f = amplitudes(0.3, 0.7)

    def near_loss():
        losses, _ = pair_forward(near, far, vn, vf, amp_n, amp_f, chan_n, chan_f)
        return losses.near_scaled

    def far_loss():
        losses, _ = pair_forward(near, far, vn, vf, amp_n, amp_f, chan_n, chan_f)
        return losses.far_scaled

    _, cache = pair_forward(near, far, vn, vf, amp_n, amp_f, chan_n, chan_f)
    near.demod.zero_grad()
    far.demod.zero_grad()
    (gw_n, gb_n), (gw_f, gb_f) = pair_backward(near, far, vf, cache)

    assert np.allclose(gw_n, oracles.fd_gradient(near_loss, near.mod_w), rtol=1e-5, atol=1e-8)
    assert np.allclose(gb_n, oracles.fd_gradient(near_loss, near.mod_b), rtol=1e-5, atol=1e-8)
    assert np.allclose(gw_f, oracles.fd_gradient(far_loss, far.mod_w), rtol=1e-5, atol=1e-8)
    assert np.allclose(gb_f, oracles.fd_gradient(far_loss, far.mod_b), rtol=1e-5, atol=1e-8)
    first_n = near.demod.dense_layers()[0]
    assert np.allclose(first_n.gW, oracles.fd_gradient(near_loss, first_n.W),
                       rtol=1e-5, atol=1e-8)
    last_f = far.demod.dense_layers()[-1]
    assert np.allclose(last_f.gW, oracles.fd_gradient(far_loss, last_f.W),
                       rtol=1e-5, atol=1e-8)


def test_training_reduces_loss_and_freezes_power(q22):
    cfg = TrainConfig(epochs=120, dataset_size=16, seed=1)
    near, far, trace = train_modem(cfg, q22, q22)
    assert trace.shape == (120, 2)
    # epoch-mean raw losses drop by an order of magnitude from the start
    assert trace[-1, 0] < 0.1 * trace[0, 0]
    assert trace[-1, 1] < 0.1 * trace[0, 1]
    assert near.mean_power is not None and far.mean_power is not None
    assert near.input_clip_radius is not None
    s = tx_symbols(q22.constellation_deq, near)
    assert np.mean(np.abs(s) ** 2) == pytest.approx(1.0, abs=1e-9)


def test_training_is_deterministic(q22):
    cfg = TrainConfig(epochs=20, dataset_size=8, seed=3)
    n1, f1, t1 = train_modem(cfg, q22, q22)
    n2, f2, t2 = train_modem(cfg, q22, q22)
    assert np.array_equal(t1, t2)
    assert np.array_equal(n1.mod_w, n2.mod_w)
    assert np.array_equal(f1.demod.dense_layers()[0].W,
                          f2.demod.dense_layers()[0].W)


def test_save_load_round_trip(tmp_path, q22):
    cfg = TrainConfig(epochs=15, dataset_size=8, seed=4)
    near, _, _ = train_modem(cfg, q22, q22)
    path = tmp_path / "near.json"
    save_model(near, path)
    back = load_model(path)
    assert back.role == ROLE_NEAR
    assert np.array_equal(back.mod_w, near.mod_w)
    assert back.mean_power == near.mean_power
    assert back.input_clip_radius == near.input_clip_radius
    for a, b in zip(back.demod.dense_layers(), near.demod.dense_layers()):
        assert np.array_equal(a.W, b.W) and np.array_equal(a.b, b.b)
    # byte-identical re-serialization
    path2 = tmp_path / "again.json"
    save_model(back, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_save_refuses_unfrozen_model(tmp_path, q22):
    near, _ = _random_pair(q22)
    with pytest.raises(ValueError):
        save_model(near, tmp_path / "nope.json")


def test_load_rejects_foreign_json(tmp_path):
    p = tmp_path / "other.json"
    p.write_text('{"format": "something-else"}')
    with pytest.raises(ValueError):
        load_model(p)


def test_count_macs_default_architecture(q22):
    near, far = _random_pair(q22)
    # these use hidden (6, 5); the shipped architecture is checked elsewhere
    assert count_macs(near) == 2 + 2 * 6 + 6 * 5 + 5 * 2
    assert count_macs(far) == 2 + 2 * 6 + 6 * 5 + 5 * 1


def test_demodulate_clips_large_inputs(q22):
    near, _ = _random_pair(q22)
    near.input_clip_radius = 1.0
    big = np.array([100.0 + 0.0j])
    small = np.array([1.0 + 0.0j])
    assert np.allclose(demodulate(big, near), demodulate(small, near))


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(rho_near=0.6, rho_far=0.4)  # near above far
    with pytest.raises(ValueError):
        TrainConfig(rho_near=0.5, rho_far=0.6)  # does not sum to 1
    with pytest.raises(ValueError):
        TrainConfig(batch_size=100, dataset_size=10)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=0.0)
