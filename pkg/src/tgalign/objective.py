"""Degree-proportional negative sampling and the loss terms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F

from .temporal import IntensityVector, _check_dims


class NegativeSampler:
    """Draws nodes with probability proportional to ``degree ** power``."""

    def __init__(self, degrees: np.ndarray, power: float = 1.0, seed: int = 0,
                 max_retries: int = 10):
        degrees = np.asarray(degrees, dtype=np.float64)
        if len(degrees) < 2:
            raise ValueError("negative sampling needs at least two nodes")
        weights = np.where(degrees > 0, degrees ** power, 0.0)
        if weights.sum() <= 0:
            raise ValueError("no node has positive degree")
        self.probs = weights / weights.sum()
        self.cdf = np.cumsum(self.probs)
        self.cdf[-1] = 1.0
        self.rng = np.random.default_rng(seed)
        self.max_retries = max_retries

    def draw(self, size) -> np.ndarray:
        u = self.rng.random(size)
        return np.searchsorted(self.cdf, u, side="right")

    def sample(self, x: int, Q: int, partner: Optional[int] = None) -> list[int]:
        return self.sample_batch(np.array([x]), Q,
                                 None if partner is None else np.array([partner]))[0].tolist()

    def sample_batch(self, x: np.ndarray, Q: int, partner: Optional[np.ndarray] = None) -> np.ndarray:
        """[len(x), Q] draws; hits on x or its partner are redrawn a bounded number of times."""
        if Q < 1:
            raise ValueError("Q must be >= 1")
        x = np.asarray(x)[:, None]
        out = self.draw((len(x), Q))
        for _ in range(self.max_retries):
            bad = out == x
            if partner is not None:
                bad |= out == np.asarray(partner)[:, None]
            if not bad.any():
                break
            out[bad] = self.draw(int(bad.sum()))
        return out


def sample_negatives(sampler: NegativeSampler, x: int, Q: int, partner: Optional[int] = None) -> list[int]:
    return sampler.sample(x, Q, partner)


@dataclass
class LossBreakdown:
    task: torch.Tensor
    align: torch.Tensor
    global_: torch.Tensor
    total: torch.Tensor
    eta1: torch.Tensor
    eta2: torch.Tensor

    def as_floats(self) -> dict[str, float]:
        return {"task": self.task.item(), "align": self.align.item(),
                "global": self.global_.item(), "total": self.total.item()}


def task_loss(lambda_pos, lambda_negs, neg_form: str = "paper", reduction: str = "sum") -> torch.Tensor:
    """Link-prediction loss ``-log s(pos) - sum_k log s(1 - neg_k)``.

    ``lambda_pos`` is an :class:`IntensityVector` (or a precomputed scalar
    tensor); ``lambda_negs`` a sequence of them or one vector with a
    negatives axis just before the dimension axis. ``neg_form='conventional'``
    uses ``s(-neg_k)`` instead.
    """
    pos = lambda_pos.reduce(reduction) if isinstance(lambda_pos, IntensityVector) else lambda_pos
    if isinstance(lambda_negs, IntensityVector):
        neg = lambda_negs.reduce(reduction)
    else:
        if len(lambda_negs) == 0:
            raise ValueError("at least one negative is required")
        neg = torch.stack([n.reduce(reduction) if isinstance(n, IntensityVector) else n
                           for n in lambda_negs], dim=-1)
    if neg_form == "paper":
        neg_arg = 1.0 - neg
    elif neg_form == "conventional":
        neg_arg = -neg
    else:
        raise ValueError(f"unknown neg_form {neg_form!r}")
    return -F.logsigmoid(pos) - F.logsigmoid(neg_arg).sum(-1)


def smooth_l1(e: torch.Tensor, threshold: float = 1.0) -> torch.Tensor:
    a = e.abs()
    return torch.where(a < threshold, 0.5 * e * e / threshold, a - 0.5 * threshold)


def alignment_loss(lambda_T: IntensityVector, lambda_S: IntensityVector) -> torch.Tensor:
    """Mean smooth-L1 (threshold 1) between the two intensity vectors."""
    _check_dims(lambda_T.vec, lambda_S.vec)
    return smooth_l1(lambda_T.vec - lambda_S.vec).mean(-1)


def global_loss(z_x_t, z_y_t, z_g, alpha, beta, literal: bool = False) -> torch.Tensor:
    """Pull node representations toward z_g and keep the FiLM operators small.

    The default minimizes ``-log s(-||z_x - z_g||^2 - ||z_y - z_g||^2)``;
    ``literal=True`` keeps the ``+log s(.)`` sign, which is unbounded below.
    """
    dist = ((z_x_t - z_g) ** 2).sum(-1) + ((z_y_t - z_g) ** 2).sum(-1)
    fit = F.logsigmoid(-dist)
    fit = fit if literal else -fit
    return fit + (alpha ** 2).sum(-1) + (beta ** 2).sum(-1)


def total_loss(task, align, global_, eta1, eta2) -> LossBreakdown:
    values = (task, align, global_, eta1, eta2)
    # plain Python numbers are combined in double precision
    dtype = next((v.dtype for v in values if torch.is_tensor(v)), torch.float64)
    task, align, global_, eta1, eta2 = (torch.as_tensor(v, dtype=dtype) for v in values)
    if eta1 < 0 or eta2 < 0:
        raise ValueError("loss weights must be non-negative")
    return LossBreakdown(task, align, global_, task + eta1 * align + eta2 * global_, eta1, eta2)
