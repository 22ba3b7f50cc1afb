"""Batch forward pass: GNN -> global update -> enhancement -> FiLM -> intensities -> losses."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch

from .config import RunConfig
from .globalmod import film_modulation, sequential_global
from .graph import Batch, HistoryTables
from .objective import LossBreakdown, alignment_loss, global_loss, task_loss, total_loss
from .params import ModelParams, base_embedding
from .structural import batch_representations, local_intensity
from .temporal import hawkes_intensity, sequence_tensors


@dataclass
class BatchPlan:
    """Index arrays for one batch; every sequence lookup is causal.

    Rows point into :class:`HistoryTables` and hold each node's sequence
    just before the batch row it belongs to.
    """

    src: np.ndarray
    dst: np.ndarray
    time: np.ndarray
    negs: np.ndarray
    rows_src: np.ndarray
    rows_dst: np.ndarray
    rows_neg: np.ndarray
    dyn_src: np.ndarray
    dyn_dst: np.ndarray
    dyn_neg: np.ndarray

    def __len__(self) -> int:
        return len(self.src)


def plan_batch(tables: HistoryTables, batch: Batch, negs: np.ndarray) -> BatchPlan:
    negs = np.asarray(negs, dtype=np.int64).reshape(len(batch), -1)
    before = 2 * batch.events
    Q = negs.shape[1]
    return BatchPlan(
        batch.src, batch.dst, batch.time, negs,
        tables.row_before(batch.src, before),
        tables.row_before(batch.dst, before),
        tables.row_before(negs.ravel(), np.repeat(before, Q)).reshape(negs.shape),
        batch.dynamics_of(batch.src), batch.dynamics_of(batch.dst),
        np.maximum(batch.dynamics_of(negs), 1),
    )


def _zero(dtype) -> torch.Tensor:
    return torch.zeros((), dtype=dtype)


def batch_loss(params: ModelParams, tables: HistoryTables, plan: BatchPlan, z_g0: torch.Tensor,
               cfg: RunConfig, features: Optional[torch.Tensor] = None,
               trace: Optional[list] = None) -> tuple[LossBreakdown, torch.Tensor]:
    """Mean losses over the batch's pairs and the global representation after it.

    ``trace``, when given, collects the pipeline stage names in execution order.
    """
    def mark(stage):
        if trace is not None:
            trace.append(stage)

    dtype = params.dtype
    B, Q = plan.negs.shape
    t = torch.from_numpy(plan.time).to(dtype)
    delta_t = params["delta_t"]
    align = glob = _zero(dtype)
    z_g_new = z_g0

    def temporal(x_nodes, y_nodes, x_rows, y_rows, t_c):
        z_x = base_embedding(params, torch.from_numpy(x_nodes), features)
        z_y = base_embedding(params, torch.from_numpy(y_nodes), features)
        return hawkes_intensity(z_x, z_y, sequence_tensors(tables, x_rows, params, features),
                                sequence_tensors(tables, y_rows, params, features), t_c, delta_t)

    if not cfg.uses_gnn:
        mark("temporal")
        lam_pos = temporal(plan.src, plan.dst, plan.rows_src, plan.rows_dst, t)
        src_q = np.repeat(plan.src[:, None], Q, 1)
        rows_q = np.repeat(plan.rows_src[:, None], Q, 1)
        lam_neg = temporal(src_q, plan.negs, rows_q, plan.rows_neg, t.unsqueeze(-1).expand(B, Q))
        task = task_loss(lam_pos, lam_neg, cfg.neg_form, cfg.reduction).mean()
    else:
        mark("gnn")
        nodes = np.concatenate([plan.src, plan.dst, plan.negs.ravel()])
        rows = np.concatenate([plan.rows_src, plan.rows_dst, plan.rows_neg.ravel()])
        t_all = torch.cat([t, t, t.repeat_interleave(Q)])
        reps = batch_representations(params, tables, nodes, rows, t_all, cfg.layers,
                                     features, cfg.activation)
        z_x, z_y, z_k = reps[:B], reps[B:2 * B], reps[2 * B:].reshape(B, Q, -1)

        if cfg.uses_global:
            theta_d = params["theta_d"]
            dyn_x = torch.from_numpy(plan.dyn_src).to(dtype)
            dyn_y = torch.from_numpy(plan.dyn_dst).to(dtype)
            dyn_k = torch.from_numpy(plan.dyn_neg).to(dtype)
            mark("update_global")
            z_g_seen, z_g_new = sequential_global(z_g0, z_x, z_y, dyn_x, dyn_y, theta_d,
                                                  cfg.global_freeze_batch)
            mark("enhance")
            z_x = z_x + (theta_d / dyn_x).unsqueeze(-1) * z_g_seen
            z_y = z_y + (theta_d / dyn_y).unsqueeze(-1) * z_g_seen
            z_k = z_k + (theta_d / dyn_k).unsqueeze(-1) * z_g_seen.unsqueeze(1)
            mark("film")
            film_pos = film_modulation(z_x, z_y, params)
            film_neg = film_modulation(z_x.unsqueeze(1).expand_as(z_k), z_k, params)
            omega_pos, omega_neg = film_pos.omega_g, film_neg.omega_g
        else:
            omega_pos = omega_neg = torch.ones(params.d, dtype=dtype)

        mark("local")
        lam_s_pos = local_intensity(z_x, z_y, omega_pos)
        lam_s_neg = local_intensity(z_x.unsqueeze(1), z_k, omega_neg)
        task = task_loss(lam_s_pos, lam_s_neg, cfg.neg_form, cfg.reduction).mean()

        if cfg.uses_align:
            mark("temporal")
            lam_t_pos = temporal(plan.src, plan.dst, plan.rows_src, plan.rows_dst, t)
            align = alignment_loss(lam_t_pos, lam_s_pos).mean()
        if cfg.uses_global:
            glob = global_loss(z_x, z_y, z_g_seen, film_pos.alpha, film_pos.beta,
                               literal=cfg.lg_literal).mean()

    mark("loss")
    eta1, eta2 = params.etas()
    return total_loss(task, align, glob, eta1, eta2), z_g_new


def final_representations(params: ModelParams, tables: HistoryTables, num_nodes: int,
                          upto_row: int, t_c: float, z_g: torch.Tensor, cfg: RunConfig,
                          features: Optional[torch.Tensor] = None,
                          chunk: int = 4096) -> torch.Tensor:
    """End-of-training representation of every node.

    GNN output from each node's full training-time sequence, enhanced by the
    final z_g with unit dynamics; the temporal-only arm uses base embeddings.
    """
    with torch.no_grad():
        nodes = np.arange(num_nodes)
        if not cfg.uses_gnn:
            return base_embedding(params, torch.from_numpy(nodes), features).detach().clone()
        rows = tables.row_before(nodes, np.full(num_nodes, upto_row))
        out = []
        for lo in range(0, num_nodes, chunk):
            sl = slice(lo, lo + chunk)
            t = torch.full((len(nodes[sl]),), t_c, dtype=params.dtype)
            out.append(batch_representations(params, tables, nodes[sl], rows[sl], t,
                                             cfg.layers, features, cfg.activation))
        reps = torch.cat(out)
        if cfg.uses_global:
            reps = reps + params["theta_d"] * z_g
        return reps
