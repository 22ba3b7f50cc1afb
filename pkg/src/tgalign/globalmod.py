"""Global representation, activity-gated enhancement and FiLM global parameter."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .params import ModelParams


@dataclass
class GlobalState:
    z_g: torch.Tensor

    @classmethod
    def zeros(cls, d: int, dtype=torch.float32) -> "GlobalState":
        return cls(torch.zeros(d, dtype=dtype))


@dataclass
class FiLMOutput:
    alpha: torch.Tensor
    beta: torch.Tensor
    omega_g: torch.Tensor


def _check_dynamics(dynamics, like: torch.Tensor) -> torch.Tensor:
    dyn = torch.as_tensor(dynamics).to(like.dtype)
    if torch.any(dyn < 1):
        raise ValueError("node dynamics must be >= 1")
    return dyn


def update_global(g: GlobalState, z_x_t: torch.Tensor, theta_d, dynamics: int) -> GlobalState:
    """``z_g + theta_d * dynamics * z_x_t`` (scalar gate broadcast over dimensions)."""
    dyn = _check_dynamics(dynamics, z_x_t)
    if not torch.isfinite(z_x_t).all() or not torch.isfinite(torch.as_tensor(theta_d)).all():
        raise ValueError("non-finite input to global update")
    return GlobalState(g.z_g + theta_d * dyn * z_x_t)


def enhance_node(z_x_t: torch.Tensor, g: GlobalState, theta_d, dynamics) -> torch.Tensor:
    """``z_x_t + (theta_d / dynamics) * z_g``; less active nodes borrow more."""
    dyn = _check_dynamics(dynamics, z_x_t)
    if dyn.dim():
        dyn = dyn.unsqueeze(-1)
    return z_x_t + (theta_d / dyn) * g.z_g


def film_modulation(z_x_t: torch.Tensor, z_y_t: torch.Tensor, params: ModelParams) -> FiLMOutput:
    if z_x_t.shape != z_y_t.shape:
        raise ValueError(f"shape mismatch {tuple(z_x_t.shape)} vs {tuple(z_y_t.shape)}")
    joint = torch.cat([z_x_t, z_y_t], dim=-1)
    alpha = torch.sigmoid(joint @ params["W_alpha"] + params["b_alpha"])
    beta = torch.sigmoid(joint @ params["W_beta"] + params["b_beta"])
    return FiLMOutput(alpha, beta, (alpha + 1) * params["theta_l"] + beta)


def sequential_global(z_g0: torch.Tensor, z_src: torch.Tensor, z_dst: torch.Tensor,
                      dyn_src: torch.Tensor, dyn_dst: torch.Tensor, theta_d: torch.Tensor,
                      freeze: bool = False) -> tuple[torch.Tensor, torch.Tensor]:
    """Apply the global update for every pair of a batch in order.

    Returns (z_g seen by each pair [B, d], z_g after the batch [d]). In serial
    mode pair p sees the updates of pairs 0..p; with ``freeze`` every pair sees
    the batch-start value and all updates land at the end.
    """
    contrib = theta_d * (dyn_src.unsqueeze(-1) * z_src + dyn_dst.unsqueeze(-1) * z_dst)
    running = z_g0 + torch.cumsum(contrib, dim=0)
    final = running[-1] if len(running) else z_g0
    if freeze:
        return z_g0.expand_as(z_src), final
    return running, final
