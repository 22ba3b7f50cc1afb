"""Time-weighted multi-layer GNN representations and the local structural intensity."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np
import torch

from .graph import HistoryTables, NeighborSequence, SequenceStore
from .params import ModelParams, base_embedding
from .temporal import IntensityVector, _check_dims

ACTIVATIONS: dict[str, Callable[[torch.Tensor], torch.Tensor]] = {
    "sigmoid": torch.sigmoid,
    "tanh": torch.tanh,
    "relu": torch.relu,
}


def masked_interval_weights(t_c: torch.Tensor, t_nbr: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Normalized intervals ``(t_c - t_i) / sum(t_c - t_i')`` over the last axis.

    Falls back to uniform weights when every interval is zero; rows with no
    valid entry get all-zero weights.
    """
    gap = (t_c.unsqueeze(-1) - t_nbr).masked_fill(~mask, 0.0)
    total = gap.sum(-1, keepdim=True)
    count = mask.sum(-1, keepdim=True).to(gap.dtype)
    uniform = mask.to(gap.dtype) / count.clamp(min=1.0)
    return torch.where(total > 0, gap / torch.where(total > 0, total, torch.ones_like(total)), uniform)


def interval_weights(seq: NeighborSequence, t_c: float) -> torch.Tensor:
    if seq.valid_count == 0:
        raise ValueError("empty neighbor sequence has no interval weights")
    times = torch.as_tensor(seq.times[: seq.valid_count], dtype=torch.float64)
    if torch.any(times > t_c):
        raise ValueError("neighbor time lies in the future of the query time")
    mask = torch.ones(seq.valid_count, dtype=torch.bool)
    return masked_interval_weights(torch.tensor(t_c, dtype=torch.float64), times, mask)


def gnn_layer(z_self_prev: torch.Tensor, neighbor_prevs: torch.Tensor, w: torch.Tensor,
              W_S: torch.Tensor, W_N: torch.Tensor,
              activation: str = "sigmoid") -> torch.Tensor:
    """``act(z_self W_S + sum_i w_i (z_i W_N))`` for one node.

    ``neighbor_prevs`` is [n, d] (n may be 0) and ``w`` has n entries.
    """
    if W_S.shape[0] != z_self_prev.shape[-1] or W_N.shape[0] != z_self_prev.shape[-1]:
        raise ValueError("weight matrices do not match the representation width")
    pre = z_self_prev @ W_S
    if len(neighbor_prevs):
        if neighbor_prevs.shape[0] != w.shape[0]:
            raise ValueError("one weight per neighbor required")
        pre = pre + (w.unsqueeze(-1) * (neighbor_prevs @ W_N)).sum(0)
    return ACTIVATIONS[activation](pre)


def node_representation(x: int, t: float, depth: int, store: SequenceStore, params: ModelParams,
                        upto: Optional[int] = None, features: Optional[torch.Tensor] = None,
                        memo: Optional[dict] = None, activation: str = "sigmoid") -> torch.Tensor:
    """Recursive per-node evaluation of the GNN stack.

    The node's sequence is taken after the first ``upto`` interactions (all
    recorded ones by default). Each neighbor i is evaluated one layer down at
    its own interaction time t_i, using i's sequence from just before that
    interaction. ``memo`` (keyed on history row, time, depth) caches results.
    """
    if depth > params.num_layers:
        raise ValueError(f"depth {depth} exceeds {params.num_layers} layers")
    tables = store.tables()
    upto = store.processed if upto is None else upto
    row = int(tables.row_before(np.array([x]), np.array([2 * upto]))[0])
    return _node_rep(x, row, float(t), depth, tables, params, features, memo, activation)


def _node_rep(x, row, t, depth, tables: HistoryTables, params, features, memo, activation):
    key = (x, row, t, depth)
    if memo is not None and key in memo:
        return memo[key]
    if depth == 0:
        out = base_embedding(params, x, features)
    else:
        prev = _node_rep(x, row, t, depth - 1, tables, params, features, memo, activation)
        n_valid = int(tables.mask[row].sum())
        nbrs = []
        for s in range(n_valid):
            i, t_i, sub = int(tables.nbr[row, s]), float(tables.time[row, s]), int(tables.sub_row[row, s])
            nbrs.append(_node_rep(i, sub, t_i, depth - 1, tables, params, features, memo, activation))
        if nbrs:
            seq = NeighborSequence(tables.nbr.shape[1], tables.nbr[row].copy(),
                                   tables.time[row].copy(), valid_count=n_valid)
            w = interval_weights(seq, t).to(prev.dtype)
            stacked = torch.stack(nbrs)
        else:
            w = torch.zeros(0, dtype=prev.dtype)
            stacked = prev.new_zeros((0, prev.shape[-1]))
        out = gnn_layer(prev, stacked, w, params.W_S(depth), params.W_N(depth), activation)
    if memo is not None:
        memo[key] = out
    return out


def batch_representations(params: ModelParams, tables: HistoryTables, nodes: np.ndarray,
                          rows: np.ndarray, t_c: torch.Tensor, depth: int,
                          features: Optional[torch.Tensor] = None,
                          activation: str = "sigmoid") -> torch.Tensor:
    """Vectorized :func:`node_representation` for many (node, history row, time) queries.

    Repeated queries are evaluated once. The neighbor sum is aggregated
    before multiplying by ``W_N`` (the same linear map, applied once).
    """
    if depth == 0:
        return base_embedding(params, torch.from_numpy(np.asarray(nodes)), features)
    nodes, rows = np.asarray(nodes), np.asarray(rows)
    keys = np.stack([nodes, rows, t_c.detach().to(torch.float64).numpy().view(np.int64)], axis=1)
    uniq, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    if len(uniq) < len(nodes):
        out = _batch_reps(params, tables, nodes[first], rows[first], t_c[torch.from_numpy(first)],
                          depth, features, activation)
        return out[torch.from_numpy(inverse.reshape(-1))]
    return _batch_reps(params, tables, nodes, rows, t_c, depth, features, activation)


def _batch_reps(params, tables, nodes, rows, t_c, depth, features, activation):
    prev = batch_representations(params, tables, nodes, rows, t_c, depth - 1, features, activation)
    nbr = tables.nbr[rows]
    shape = nbr.shape
    t_nbr = torch.from_numpy(tables.time[rows]).to(prev.dtype)
    mask = torch.from_numpy(tables.mask[rows])
    w = masked_interval_weights(t_c, t_nbr, mask)
    if depth == 1:
        agg = _aggregate_base(params, nbr, w, features)
    else:
        sub = batch_representations(params, tables, nbr.reshape(-1), tables.sub_row[rows].reshape(-1),
                                    t_nbr.reshape(-1), depth - 1, features, activation)
        agg = (w.unsqueeze(-1) * sub.reshape(*shape, -1)).sum(-2)
    pre = prev @ params.W_S(depth) + agg @ params.W_N(depth)
    return ACTIVATIONS[activation](pre)


def _aggregate_base(params: ModelParams, nbr: np.ndarray, w: torch.Tensor,
                    features: Optional[torch.Tensor]) -> torch.Tensor:
    """``sum_s w[q, s] * base_embedding(nbr[q, s])`` as one sparse product.

    The interval weights carry no gradient, so the sum is a constant sparse
    matrix applied to the embedding table (or to the features, then ``W0``).
    """
    n_query, n_slot = nbr.shape
    keep = (w != 0).numpy()
    q_idx = np.repeat(np.arange(n_query), n_slot).reshape(n_query, n_slot)[keep]
    index = torch.from_numpy(np.stack([q_idx, nbr[keep]]))
    table = features if params.has_features else params["W0"]
    sparse = torch.sparse_coo_tensor(index, w.detach()[torch.from_numpy(keep)],
                                     (n_query, table.shape[0]), dtype=table.dtype,
                                     check_invariants=False)
    out = torch.sparse.mm(sparse, table)
    return out @ params["W0"] if params.has_features else out


def local_intensity(z_x_t: torch.Tensor, z_y_t: torch.Tensor, omega_g: torch.Tensor) -> IntensityVector:
    """``-(z_x - z_y)^2 * omega_g`` per dimension."""
    _check_dims(z_x_t, z_y_t)
    _check_dims(z_x_t, omega_g)
    diff = z_x_t - z_y_t
    return IntensityVector(-diff * diff * omega_g)
