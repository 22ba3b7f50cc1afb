import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from tgalign.globalmod import (GlobalState, enhance_node, film_modulation, sequential_global,
                               update_global)
from tgalign.params import init_params

f64 = torch.float64


def _t(*v):
    return torch.tensor(v, dtype=f64)


def _film_params(d, seed=0):
    return init_params(3, None, d, 1, seed=seed, dtype=f64)


def test_update_global_examples():
    g = GlobalState(_t(0.2, -0.1))
    assert torch.equal(update_global(g, _t(5.0, 7.0), 0.0, 4).z_g, g.z_g)
    out = update_global(GlobalState.zeros(2, f64), _t(1.0, 2.0), 0.1, 3)
    assert out.z_g.tolist() == pytest.approx([0.3, 0.6], abs=1e-15)
    with pytest.raises(ValueError):
        update_global(g, _t(float("nan"), 0.0), 0.1, 1)
    with pytest.raises(ValueError):
        update_global(g, _t(1.0, 0.0), 0.1, 0)


def test_enhance_node_examples():
    z = _t(0.4, -0.3)
    assert torch.equal(enhance_node(z, GlobalState.zeros(2, f64), 0.7, 2), z)
    assert enhance_node(_t(0.0, 0.0), GlobalState(_t(1.0, 1.0)), 0.1, 1).tolist() == pytest.approx([0.1, 0.1])
    with pytest.raises(ValueError):
        enhance_node(z, GlobalState(_t(1.0, 1.0)), 0.1, 0)


def test_less_active_nodes_borrow_more():
    g = GlobalState(_t(1.0, -2.0))
    shift_rare = enhance_node(_t(0.0, 0.0), g, 0.5, 1)
    shift_busy = enhance_node(_t(0.0, 0.0), g, 0.5, 4)
    assert torch.all(shift_rare.abs() > shift_busy.abs())


def test_film_neutral_example():
    p = _film_params(2)
    with torch.no_grad():
        for name in ("W_alpha", "W_beta", "b_alpha", "b_beta"):
            p[name].zero_()
        p["theta_l"].fill_(1.0)
    out = film_modulation(_t(0.3, 1.0), _t(-2.0, 0.5), p)
    assert out.alpha.tolist() == [0.5, 0.5] and out.beta.tolist() == [0.5, 0.5]
    assert out.omega_g.tolist() == [2.0, 2.0]


def test_film_zero_theta_gives_beta():
    p = _film_params(3, seed=4)
    with torch.no_grad():
        p["theta_l"].zero_()
    out = film_modulation(_t(0.3, 1.0, 0.1), _t(-2.0, 0.5, 0.9), p)
    assert torch.equal(out.omega_g, out.beta)


def test_film_shape_mismatch():
    with pytest.raises(ValueError):
        film_modulation(_t(0.3, 1.0), _t(1.0, 2.0, 3.0), _film_params(2))


def test_film_matches_dense_oracle(rng):
    d = 4
    p = _film_params(d, seed=9)
    with torch.no_grad():
        for name in ("b_alpha", "b_beta", "theta_l"):
            p[name].copy_(torch.from_numpy(rng.standard_normal(d)))
    zx, zy = rng.standard_normal(d), rng.standard_normal(d)
    joint = np.concatenate([zx, zy])
    npy = {k: v.detach().numpy() for k, v in p}
    alpha = oracles.sigmoid(oracles.vec_mat(joint, npy["W_alpha"]) + npy["b_alpha"])
    beta = oracles.sigmoid(oracles.vec_mat(joint, npy["W_beta"]) + npy["b_beta"])
    out = film_modulation(torch.from_numpy(zx), torch.from_numpy(zy), p)
    assert np.allclose(out.alpha.detach().numpy(), alpha, rtol=0, atol=1e-14)
    assert np.allclose(out.beta.detach().numpy(), beta, rtol=0, atol=1e-14)
    assert np.allclose(out.omega_g.detach().numpy(), (alpha + 1) * npy["theta_l"] + beta, rtol=0, atol=1e-14)


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 10_000), scale=st.floats(0.01, 5.0))
def test_film_bounds(seed, scale):
    rng = np.random.default_rng(seed)
    p = _film_params(4, seed=seed % 50)
    with torch.no_grad():
        p["theta_l"].copy_(torch.from_numpy(rng.uniform(0.01, 3.0, 4)))
    out = film_modulation(*(torch.from_numpy(scale * rng.standard_normal(4)) for _ in range(2)), p)
    theta = p["theta_l"].detach()
    assert torch.all((out.alpha > 0) & (out.alpha < 1) & (out.beta > 0) & (out.beta < 1))
    assert torch.all(out.omega_g > theta) and torch.all(out.omega_g < 2 * theta + 1)
    assert torch.equal(out.omega_g, (out.alpha + 1) * p["theta_l"] + out.beta)


def test_sequential_global_is_serial_and_matches_scalar_updates(rng):
    B, d = 4, 3
    zs, zd = torch.from_numpy(rng.standard_normal((B, d))), torch.from_numpy(rng.standard_normal((B, d)))
    ds, dd = _t(1, 2, 1, 3), _t(2, 1, 1, 1)
    theta = _t(0.2)[0]
    seen, final = sequential_global(torch.zeros(d, dtype=f64), zs, zd, ds, dd, theta)
    g = GlobalState.zeros(d, f64)
    for p in range(B):
        g = update_global(g, zs[p], theta, int(ds[p]))
        g = update_global(g, zd[p], theta, int(dd[p]))
        assert torch.allclose(seen[p], g.z_g, rtol=0, atol=1e-14)
    assert torch.allclose(final, g.z_g, rtol=0, atol=1e-14)
    frozen, final_f = sequential_global(torch.zeros(d, dtype=f64), zs, zd, ds, dd, theta, freeze=True)
    assert torch.count_nonzero(frozen) == 0 and torch.allclose(final_f, final)
