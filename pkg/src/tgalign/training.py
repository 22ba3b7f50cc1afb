"""Epoch/batch training loop."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import torch

from .config import RunConfig
from .graph import SequenceStore, TemporalGraph, make_batches
from .model import batch_loss, plan_batch
from .objective import NegativeSampler
from .params import ModelParams, OptimizerState, adam_step, init_params

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ("epoch", "batch", "task", "align", "global", "total")


class NonFiniteLoss(FloatingPointError):
    """Training hit a NaN/inf loss; ``dump`` describes the offending batch."""

    def __init__(self, message: str, dump: dict):
        super().__init__(message)
        self.dump = dump


@dataclass
class TrainResult:
    params: ModelParams
    optimizer: OptimizerState
    z_g: torch.Tensor
    store: SequenceStore
    trace: list[dict] = field(default_factory=list)
    epochs_run: int = 0

    def epoch_means(self, key: str = "total") -> list[float]:
        by_epoch: dict[int, list[float]] = {}
        for row in self.trace:
            by_epoch.setdefault(row["epoch"], []).append(row[key])
        return [float(np.mean(v)) for _, v in sorted(by_epoch.items())]


def torch_dtype(cfg: RunConfig) -> torch.dtype:
    return torch.float64 if cfg.double else torch.float32


def feature_tensor(g: TemporalGraph, cfg: RunConfig) -> Optional[torch.Tensor]:
    if g.features is None:
        return None
    return torch.as_tensor(g.features, dtype=torch_dtype(cfg))


def write_loss_csv(path, trace: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=LOSS_COLUMNS, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(trace)


def _dump(epoch, index, batch, parts, params) -> dict:
    return {
        "epoch": epoch,
        "batch": index,
        "pairs": batch.pairs,
        "losses": {k: float(v) for k, v in parts.items()},
        "param_norms": {k: float(v.detach().norm()) for k, v in params},
    }


def train(cfg: RunConfig, g: TemporalGraph,
          on_batch: Optional[Callable[[dict], None]] = None) -> TrainResult:
    """Run the training loop: one Adam step per chronological batch.

    Stops after ``cfg.epochs`` epochs, or earlier once the mean total loss
    changes by less than ``cfg.early_stop_tol`` (relative) between epochs.
    """
    if len(g) == 0:
        raise ValueError("cannot train on an empty graph")
    dtype = torch_dtype(cfg)
    params = init_params(g.num_nodes, g.feature_dim, cfg.d, cfg.layers, cfg.seed, dtype,
                         cfg.learn_etas, (cfg.eta1, cfg.eta2))
    optimizer = OptimizerState(lr=cfg.lr)
    features = feature_tensor(g, cfg)
    store = SequenceStore.from_graph(g, cfg.seq_len)
    tables = store.tables()
    sampler = NegativeSampler(g.degrees(), cfg.neg_power, seed=cfg.seed)
    batches = make_batches(g, cfg.batch_size)
    z_g = torch.zeros(cfg.d, dtype=dtype)
    result = TrainResult(params, optimizer, z_g, store)

    prev_mean = None
    for epoch in range(1, cfg.epochs + 1):
        totals = []
        for index, batch in enumerate(batches):
            negs = sampler.sample_batch(batch.src, cfg.Q, batch.dst)
            plan = plan_batch(tables, batch, negs)
            params.zero_grad()
            if cfg.global_scope == "batch":
                z_g = torch.zeros_like(z_g)
            parts, z_g_next = batch_loss(params, tables, plan, z_g, cfg, features)
            row = {"epoch": epoch, "batch": index, **parts.as_floats()}
            if not all(math.isfinite(v) for v in parts.as_floats().values()):
                raise NonFiniteLoss(f"non-finite loss at epoch {epoch}, batch {index}",
                                    _dump(epoch, index, batch, row, params))
            parts.total.backward()
            adam_step(params, {k: v.grad for k, v in params}, optimizer)
            z_g = z_g_next.detach()
            result.trace.append(row)
            totals.append(row["total"])
            if on_batch is not None:
                on_batch(row)
        result.epochs_run = epoch
        mean = float(np.mean(totals))
        logger.info("epoch %d  mean total loss %.6f", epoch, mean)
        if prev_mean is not None and abs(mean - prev_mean) <= cfg.early_stop_tol * abs(prev_mean):
            logger.info("early stop: relative change below %g", cfg.early_stop_tol)
            break
        prev_mean = mean
    params.zero_grad()
    result.z_g = z_g
    return result
