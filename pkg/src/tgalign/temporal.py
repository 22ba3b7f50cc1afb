"""Hawkes-process temporal intensity between node pairs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from .graph import NeighborSequence, SequenceStore
from .params import ModelParams, base_embedding


@dataclass
class IntensityVector:
    """Per-dimension intensity; works for a single pair or a leading batch shape."""

    vec: torch.Tensor

    @property
    def scalar(self) -> torch.Tensor:
        return self.vec.sum(-1)

    def reduce(self, how: str = "sum") -> torch.Tensor:
        if how == "sum":
            return self.vec.sum(-1)
        if how == "mean":
            return self.vec.mean(-1)
        raise ValueError(f"unknown reduction {how!r}")


def _check_dims(a: torch.Tensor, b: torch.Tensor) -> None:
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def base_intensity(z_x: torch.Tensor, z_y: torch.Tensor) -> IntensityVector:
    """Negative squared difference per dimension; its sum is -||z_x - z_y||^2."""
    _check_dims(z_x, z_y)
    diff = z_x - z_y
    return IntensityVector(-diff * diff)


def time_decay(t_c, t_i, delta_t) -> torch.Tensor:
    # plain Python numbers are evaluated in double precision
    dtype = next((v.dtype for v in (t_c, t_i, delta_t) if torch.is_tensor(v)), torch.float64)
    t_c, t_i = torch.as_tensor(t_c, dtype=dtype), torch.as_tensor(t_i, dtype=dtype)
    if torch.any(t_c < t_i):
        raise ValueError("neighbor time lies in the future of the query time")
    return torch.exp(-torch.as_tensor(delta_t, dtype=dtype) * (t_c - t_i))


def masked_softmax(logits: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
    """Softmax over the last axis restricted to ``mask``; all-masked rows give zeros."""
    floor = torch.finfo(logits.dtype).min / 2
    filled = logits.masked_fill(~mask, floor)
    top = filled.amax(-1, keepdim=True).detach()
    e = torch.exp(filled - top) * mask
    denom = e.sum(-1, keepdim=True)
    return e / torch.where(denom > 0, denom, torch.ones_like(denom))


def neighbor_similarity_weights(seq: NeighborSequence, z_owner: torch.Tensor,
                                embeddings: torch.Tensor) -> torch.Tensor:
    """Softmax of base intensities between each valid neighbor and the owner.

    ``embeddings`` holds one row per sequence slot (padding rows are ignored).
    Returns weights for the ``valid_count`` valid entries.
    """
    if seq.valid_count == 0:
        raise ValueError("empty neighbor sequence has no similarity weights")
    mask = torch.as_tensor(seq.mask)
    logits = base_intensity(embeddings, z_owner).scalar
    return masked_softmax(logits, mask)[: seq.valid_count]


def hawkes_excitation(z_owner: torch.Tensor, z_other: torch.Tensor, z_nbr: torch.Tensor,
                      t_nbr: torch.Tensor, mask: torch.Tensor, t_c: torch.Tensor,
                      delta_t: torch.Tensor) -> torch.Tensor:
    """Sum over the owner's neighbors i of s_(i,owner) f(t_c - t_i) mu_(i,other).

    Shapes: ``z_owner``, ``z_other`` [..., d]; ``z_nbr`` [..., S, d];
    ``t_nbr``, ``mask`` [..., S]; ``t_c`` [...]. Empty sequences give zeros.
    """
    sim = masked_softmax(base_intensity(z_nbr, z_owner.unsqueeze(-2)).scalar, mask)
    gap = (t_c.unsqueeze(-1) - t_nbr).masked_fill(~mask, 0.0)
    alpha = sim * torch.exp(-delta_t * gap)
    cross = base_intensity(z_nbr, z_other.unsqueeze(-2)).vec
    return (alpha.unsqueeze(-1) * cross).sum(-2)


def hawkes_intensity(z_x, z_y, nx, ny, t_c, delta_t) -> IntensityVector:
    """Batched temporal intensity.

    ``nx``/``ny`` are (embeddings [..., S, d], times [..., S], mask [..., S])
    triples for the neighbor sequences of x and y.
    """
    vec = (base_intensity(z_x, z_y).vec
           + hawkes_excitation(z_x, z_y, *nx, t_c, delta_t)
           + hawkes_excitation(z_y, z_x, *ny, t_c, delta_t))
    return IntensityVector(vec)


def _gather_sequence(seq: NeighborSequence, params: ModelParams, features):
    z = base_embedding(params, torch.as_tensor(seq.neighbors), features)
    return (z, torch.as_tensor(seq.times, dtype=z.dtype), torch.as_tensor(seq.mask))


def temporal_intensity(x: int, y: int, t: float, store: SequenceStore, params: ModelParams,
                       upto: Optional[int] = None,
                       features: Optional[torch.Tensor] = None) -> IntensityVector:
    """Temporal intensity of (x, y) at time t using sequences after ``upto`` interactions."""
    seq_x = store.neighbors_at(x, upto)
    seq_y = store.neighbors_at(y, upto)
    for seq in (seq_x, seq_y):
        if seq.valid_count and seq.times[: seq.valid_count].max() > t:
            raise ValueError("neighbor sequence contains interactions after the query time")
    z_x = base_embedding(params, x, features)
    z_y = base_embedding(params, y, features)
    t_c = torch.tensor(t, dtype=z_x.dtype)
    return hawkes_intensity(z_x, z_y, _gather_sequence(seq_x, params, features),
                            _gather_sequence(seq_y, params, features), t_c, params["delta_t"])


def sequence_tensors(tables, rows: np.ndarray, params: ModelParams, features=None):
    """Gather (embeddings, times, mask) for history rows of a :class:`HistoryTables`."""
    z = base_embedding(params, torch.from_numpy(tables.nbr[rows]), features)
    return (z, torch.from_numpy(tables.time[rows]).to(z.dtype), torch.from_numpy(tables.mask[rows]))
