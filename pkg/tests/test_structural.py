import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_instance, weights_np
from tgalign.graph import NeighborSequence, SequenceStore, parse_edge_list
from tgalign.params import base_embedding, init_params
from tgalign.structural import (batch_representations, gnn_layer, interval_weights,
                                local_intensity, masked_interval_weights, node_representation)
from tgalign.temporal import base_intensity

f64 = torch.float64


def _seq(*entries):
    seq = NeighborSequence(max(len(entries), 1) + 1)
    for n, t in entries:
        seq.record(n, t)
    return seq


def _sig(v):
    return 1.0 / (1.0 + np.exp(-v))


def test_interval_weights_examples():
    # intervals (1, 3)
    w = masked_interval_weights(torch.tensor(3.0, dtype=f64), torch.tensor([2.0, 0.0], dtype=f64),
                                torch.tensor([True, True]))
    assert w.tolist() == pytest.approx([0.25, 0.75], abs=1e-15)
    assert interval_weights(_seq((1, 0.0), (2, 2.0)), 3.0).tolist() == pytest.approx([0.75, 0.25])
    assert interval_weights(_seq((4, 0.5)), 0.9).tolist() == [1.0]
    assert interval_weights(_seq((1, 0.5), (2, 0.5), (3, 0.5)), 0.5).tolist() == pytest.approx([1 / 3] * 3)
    with pytest.raises(ValueError):
        interval_weights(_seq((1, 0.8)), 0.5)
    with pytest.raises(ValueError):
        interval_weights(NeighborSequence(3), 0.5)


@settings(max_examples=200)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=8), st.floats(0.0, 1.0), st.integers(0, 3))
def test_interval_weights_normalized_and_mask_neutral(times, extra, pad):
    t_c = max(times) + extra
    n = len(times)
    t = torch.tensor(times + [5.0] * pad, dtype=f64)
    mask = torch.arange(n + pad) < n
    w = masked_interval_weights(torch.tensor(t_c, dtype=f64), t, mask)
    assert abs(w.sum().item() - 1.0) <= 1e-9
    assert torch.all(w[n:] == 0) and torch.all(w >= 0)


def test_gnn_layer_examples():
    d = 3
    out = gnn_layer(torch.zeros(d, dtype=f64), torch.zeros(0, d, dtype=f64), torch.zeros(0, dtype=f64),
                    torch.randn(d, d, dtype=f64), torch.randn(d, d, dtype=f64))
    assert out.tolist() == [0.5] * d
    a, b = torch.tensor([0.3, -1.0, 2.0], dtype=f64), torch.tensor([1.0, 0.5, -0.1], dtype=f64)
    eye = torch.eye(d, dtype=f64)
    out = gnn_layer(a, b[None], torch.ones(1, dtype=f64), eye, eye)
    assert torch.allclose(out, torch.sigmoid(a + b), rtol=0, atol=1e-15)
    with pytest.raises(ValueError):
        gnn_layer(a, b[None], torch.ones(1, dtype=f64), torch.eye(2, dtype=f64), eye)


def test_gnn_layer_matches_dense_oracle(rng):
    d, n = 4, 3
    z, nb = rng.standard_normal(d), rng.standard_normal((n, d))
    w = rng.dirichlet(np.ones(n))
    WS, WN = rng.standard_normal((d, d)), rng.standard_normal((d, d))
    out = gnn_layer(*(torch.from_numpy(v) for v in (z, nb, w, WS, WN)))
    pre = oracles.vec_mat(z, WS) + sum(w[k] * oracles.vec_mat(nb[k], WN) for k in range(n))
    assert np.allclose(out.numpy(), oracles.sigmoid(pre), rtol=0, atol=1e-14)


def test_single_layer_without_neighbors():
    g = parse_edge_list(["0 1 1"])
    store = SequenceStore.from_graph(g, 3)
    p = init_params(3, None, 4, 1, seed=2, dtype=f64)
    got = node_representation(2, 1.0, 1, store, p)
    expected = torch.sigmoid(p["W0"][2] @ p.W_S(1))
    assert torch.equal(got, expected)


def test_two_layer_chain_closed_form():
    g = parse_edge_list(["0 1 4", "2 3 10"])  # times normalize to 0.0 and 1.0
    store = SequenceStore.from_graph(g, 3)
    p = init_params(4, None, 2, 2, seed=5, dtype=f64)
    W0, W_S, W_N = weights_np(p)
    zi1 = _sig(W0[1] @ W_S[1])                      # i has no history before its event
    zx1 = _sig(W0[0] @ W_S[1] + 1.0 * (W0[1] @ W_N[1]))
    zx2 = _sig(zx1 @ W_S[2] + 1.0 * (zi1 @ W_N[2]))
    got = node_representation(0, 1.0, 2, store, p).detach().numpy()
    assert np.allclose(got, zx2, rtol=0, atol=1e-14)


def test_depth_zero_is_base_embedding(small_store, small_params):
    for x in range(small_params["W0"].shape[0]):
        assert torch.equal(node_representation(x, 1.0, 0, small_store, small_params),
                           base_embedding(small_params, x))


def test_memoized_is_bitwise_equal(small_store, small_params):
    memo = {}
    for x in range(6):
        plain = node_representation(x, 1.0, 2, small_store, small_params)
        cached = node_representation(x, 1.0, 2, small_store, small_params, memo=memo)
        assert torch.equal(plain, cached)
    assert memo


def test_depth_beyond_layers_rejected(small_store, small_params):
    with pytest.raises(ValueError):
        node_representation(0, 1.0, 3, small_store, small_params)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_recursive_batched_and_oracle_agree(seed):
    inst = random_instance(seed)
    p, store, upto, t = inst["params"], inst["store"], inst["upto"], inst["t"]
    W0, W_S, W_N = weights_np(p)
    tables = store.tables()
    n = W0.shape[0]
    nodes = np.arange(n)
    rows = tables.row_before(nodes, np.full(n, 2 * upto))
    batched = batch_representations(p, tables, nodes, rows, torch.full((n,), t, dtype=f64), 2)
    for x in range(n):
        rec = node_representation(x, t, 2, store, p, upto=upto).detach().numpy()
        ref = oracles.node_representation(inst["events"], x, upto, t, 2, inst["S"], W0, W_S, W_N)
        assert np.allclose(rec, ref, rtol=0, atol=1e-10)
        assert np.allclose(batched[x].detach().numpy(), ref, rtol=0, atol=1e-10)
        assert np.all((rec > 0) & (rec < 1))


def test_batched_handles_duplicate_queries(small_graph, small_store, small_params):
    tables = small_store.tables()
    nodes = np.array([0, 1, 0, 1, 2])
    rows = tables.row_before(nodes, np.full(5, 2 * len(small_graph)))
    out = batch_representations(small_params, tables, nodes, rows, torch.ones(5, dtype=f64), 2)
    assert torch.equal(out[0], out[2]) and torch.equal(out[1], out[3])


def test_local_intensity_examples():
    z = torch.tensor([0.4, -0.1], dtype=f64)
    assert torch.count_nonzero(local_intensity(z, z, torch.tensor([3.0, -2.0], dtype=f64)).vec) == 0
    a, b = torch.tensor([1.0, 2.0], dtype=f64), torch.tensor([0.0, 0.0], dtype=f64)
    assert torch.equal(local_intensity(a, b, torch.ones(2, dtype=f64)).vec, base_intensity(a, b).vec)
    # base vec (-1, -4) modulated by (2, 0.5)
    lam = local_intensity(a, b, torch.tensor([2.0, 0.5], dtype=f64))
    assert lam.vec.tolist() == [-2.0, -2.0] and lam.scalar.item() == -4.0
    with pytest.raises(ValueError):
        local_intensity(a, b, torch.ones(3, dtype=f64))


@given(st.floats(-10, 10), st.integers(0, 2))
def test_local_intensity_linear_in_omega(scale, coord):
    a = torch.tensor([0.3, 1.0, -0.5], dtype=f64)
    b = torch.tensor([1.1, -0.2, 0.4], dtype=f64)
    omega = torch.tensor([0.7, 1.3, 2.0], dtype=f64)
    scaled = omega.clone()
    scaled[coord] *= scale
    base, mod = local_intensity(a, b, omega).vec, local_intensity(a, b, scaled).vec
    assert mod[coord].item() == pytest.approx(scale * base[coord].item(), abs=1e-12)
