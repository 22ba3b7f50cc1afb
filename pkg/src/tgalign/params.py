"""Learnable parameters, Adam, gradient checking and checkpoints."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import torch
import torch.nn.functional as F

CHECKPOINT_VERSION = 1
_SOFTPLUS_ONE = math.log(math.e - 1.0)  # softplus(x) == 1


@dataclass
class ModelParams:
    """Every learnable tensor of the model, keyed by name.

    ``W0`` maps node features to d dimensions, or is a free ``num_nodes x d``
    table when the graph has no features (``has_features`` False).
    Layer weights are stored as ``W_S.1 .. W_S.l`` and ``W_N.1 .. W_N.l``.
    """

    tensors: dict[str, torch.Tensor]
    num_layers: int
    has_features: bool
    learn_etas: bool = False
    fixed_etas: tuple[float, float] = (1.0, 1.0)

    def __getitem__(self, name: str) -> torch.Tensor:
        return self.tensors[name]

    def __iter__(self):
        return iter(self.tensors.items())

    @property
    def d(self) -> int:
        return self.tensors["theta_l"].shape[0]

    @property
    def dtype(self) -> torch.dtype:
        return self.tensors["theta_l"].dtype

    def W_S(self, layer: int) -> torch.Tensor:
        return self.tensors[f"W_S.{layer}"]

    def W_N(self, layer: int) -> torch.Tensor:
        return self.tensors[f"W_N.{layer}"]

    def etas(self) -> tuple[torch.Tensor, torch.Tensor]:
        if self.learn_etas:
            return F.softplus(self.tensors["eta1_raw"]), F.softplus(self.tensors["eta2_raw"])
        one = torch.ones((), dtype=self.dtype)
        return one * self.fixed_etas[0], one * self.fixed_etas[1]

    def clone(self, dtype: Optional[torch.dtype] = None) -> "ModelParams":
        tensors = {k: v.detach().clone().to(dtype or v.dtype).requires_grad_(True)
                   for k, v in self.tensors.items()}
        return ModelParams(tensors, self.num_layers, self.has_features,
                           self.learn_etas, self.fixed_etas)

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.grad = None


def _xavier(gen: torch.Generator, fan_in: int, fan_out: int, dtype) -> torch.Tensor:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return (torch.rand(fan_in, fan_out, generator=gen, dtype=dtype) * 2 - 1) * bound


def init_params(num_nodes: int, F_dim: Optional[int], d: int, l: int, seed: int,
                dtype: torch.dtype = torch.float32, learn_etas: bool = False,
                etas: tuple[float, float] = (1.0, 1.0)) -> ModelParams:
    """Xavier-uniform weights; ``delta_t`` 1, ``theta_d`` 0.1, ``theta_l`` ones, FiLM biases 0."""
    if d < 1 or l < 1:
        raise ValueError("d and l must be >= 1")
    gen = torch.Generator().manual_seed(seed)
    rows = F_dim if F_dim else num_nodes
    tensors = {"W0": _xavier(gen, rows, d, dtype)}
    for k in range(1, l + 1):
        tensors[f"W_S.{k}"] = _xavier(gen, d, d, dtype)
        tensors[f"W_N.{k}"] = _xavier(gen, d, d, dtype)
    tensors["W_alpha"] = _xavier(gen, 2 * d, d, dtype)
    tensors["W_beta"] = _xavier(gen, 2 * d, d, dtype)
    tensors["b_alpha"] = torch.zeros(d, dtype=dtype)
    tensors["b_beta"] = torch.zeros(d, dtype=dtype)
    tensors["theta_l"] = torch.ones(d, dtype=dtype)
    tensors["delta_t"] = torch.tensor(1.0, dtype=dtype)
    tensors["theta_d"] = torch.tensor(0.1, dtype=dtype)
    if learn_etas:
        tensors["eta1_raw"] = torch.tensor(_SOFTPLUS_ONE, dtype=dtype)
        tensors["eta2_raw"] = torch.tensor(_SOFTPLUS_ONE, dtype=dtype)
    for t in tensors.values():
        t.requires_grad_(True)
    return ModelParams(tensors, l, bool(F_dim), learn_etas, tuple(etas))


def base_embedding(params: ModelParams, node, features: Optional[torch.Tensor] = None) -> torch.Tensor:
    """Layer-0 representation: ``features[node] @ W0`` or the node's table row.

    ``node`` may be an int or an index tensor; the result has a trailing d axis.
    """
    W0 = params["W0"]
    idx = torch.as_tensor(node, dtype=torch.long)
    if params.has_features:
        if features is None:
            raise ValueError("params expect node features")
        if idx.numel() and (idx.min() < 0 or idx.max() >= features.shape[0]):
            raise IndexError(f"unknown node in {node}")
        return features[idx].to(W0.dtype) @ W0
    if idx.numel() and (idx.min() < 0 or idx.max() >= W0.shape[0]):
        raise IndexError(f"unknown node in {node}")
    return W0[idx]


# ---------------------------------------------------------------------------
# Adam

@dataclass
class OptimizerState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, torch.Tensor] = field(default_factory=dict)
    v: dict[str, torch.Tensor] = field(default_factory=dict)


class NonFiniteGradient(FloatingPointError):
    pass


@torch.no_grad()
def adam_step(params: ModelParams, grads: dict[str, Optional[torch.Tensor]],
              state: OptimizerState) -> tuple[ModelParams, OptimizerState]:
    """One bias-corrected Adam update in place; ``delta_t`` is clamped at 0 afterwards.

    Missing gradients count as zero.
    """
    for name, g in grads.items():
        if g is not None and not torch.isfinite(g).all():
            raise NonFiniteGradient(f"non-finite gradient for parameter {name!r}")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1 - b1 ** state.step
    c2 = 1 - b2 ** state.step
    for name, p in params:
        g = grads.get(name)
        if g is None:
            g = torch.zeros_like(p)
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {tuple(g.shape)} != {tuple(p.shape)} for {name!r}")
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = torch.zeros_like(p)
            state.v[name] = torch.zeros_like(p)
        v = state.v[name]
        m.mul_(b1).add_(g, alpha=1 - b1)
        v.mul_(b2).addcmul_(g, g, value=1 - b2)
        p.sub_(state.lr * (m / c1) / ((v / c2).sqrt() + state.eps))
    params["delta_t"].clamp_(min=0.0)
    return params, state


# ---------------------------------------------------------------------------
# finite differences

@dataclass
class GradReport:
    max_rel_error: dict[str, float]
    tolerance: float
    checked: dict[str, int]

    @property
    def passed(self) -> bool:
        return all(e < self.tolerance for e in self.max_rel_error.values())

    @property
    def worst(self) -> float:
        return max(self.max_rel_error.values(), default=0.0)

    def __str__(self) -> str:
        lines = [f"{name:>10s}  n={self.checked[name]:3d}  max_rel_err={err:.3e}"
                 for name, err in self.max_rel_error.items()]
        lines.append(f"{'PASS' if self.passed else 'FAIL'} (tol {self.tolerance:g})")
        return "\n".join(lines)


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(1.0, abs(analytic), abs(numeric))


def finite_difference_check(loss_eval: Callable[[], torch.Tensor], params: ModelParams,
                            eps: float = 1e-5, n_coords: int = 32, tol: float = 1e-4,
                            seed: int = 0, names: Optional[list[str]] = None) -> GradReport:
    """Compare autograd gradients with central differences.

    ``loss_eval`` must be deterministic (frozen batch, negatives and global
    state). For each tensor up to ``n_coords`` coordinates are probed: half
    drawn among coordinates with a nonzero analytic gradient, the rest
    uniformly. Tensors with fewer coordinates are checked exhaustively.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    rng = np.random.default_rng(seed)
    params.zero_grad()
    loss = loss_eval()
    loss.backward()
    analytic = {k: (t.grad.detach().clone() if t.grad is not None else torch.zeros_like(t))
                for k, t in params}
    params.zero_grad()

    errors, counts = {}, {}
    for name, tensor in params:
        if names is not None and name not in names:
            continue
        flat_grad = analytic[name].reshape(-1)
        size = flat_grad.numel()
        if size <= n_coords:
            coords = np.arange(size)
        else:
            nz = torch.nonzero(flat_grad).reshape(-1).numpy()
            k = min(len(nz), n_coords // 2)
            picked = rng.choice(nz, size=k, replace=False) if k else np.empty(0, dtype=np.int64)
            rest = np.setdiff1d(np.arange(size), picked)
            coords = np.concatenate([picked, rng.choice(rest, size=n_coords - k, replace=False)])
        worst = 0.0
        with torch.no_grad():
            flat = tensor.view(-1)
            for c in coords.tolist():
                orig = flat[c].item()
                flat[c] = orig + eps
                up = loss_eval().item()
                flat[c] = orig - eps
                down = loss_eval().item()
                flat[c] = orig
                numeric = (up - down) / (2 * eps)
                worst = max(worst, relative_error(flat_grad[c].item(), numeric))
        errors[name] = worst
        counts[name] = len(coords)
    return GradReport(errors, tol, counts)


# ---------------------------------------------------------------------------
# checkpoints

def save_checkpoint(path, params: ModelParams, state: OptimizerState,
                    z_g: torch.Tensor, config: dict) -> None:
    """Write a portable ``.npz`` archive: tensors, Adam moments, z_g, config echo."""
    arrays = {f"param/{k}": v.detach().cpu().numpy() for k, v in params}
    arrays.update({f"adam_m/{k}": v.cpu().numpy() for k, v in state.m.items()})
    arrays.update({f"adam_v/{k}": v.cpu().numpy() for k, v in state.v.items()})
    arrays["z_g"] = z_g.detach().cpu().numpy()
    meta = {
        "version": CHECKPOINT_VERSION,
        "num_layers": params.num_layers,
        "has_features": params.has_features,
        "learn_etas": params.learn_etas,
        "fixed_etas": list(params.fixed_etas),
        "adam": {"lr": state.lr, "beta1": state.beta1, "beta2": state.beta2,
                 "eps": state.eps, "step": state.step},
        "config": config,
    }
    arrays["meta"] = np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> tuple[ModelParams, OptimizerState, torch.Tensor, dict]:
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        tensors, m, v = {}, {}, {}
        for key in data.files:
            kind, _, name = key.partition("/")
            if kind == "param":
                tensors[name] = torch.from_numpy(data[key].copy()).requires_grad_(True)
            elif kind == "adam_m":
                m[name] = torch.from_numpy(data[key].copy())
            elif kind == "adam_v":
                v[name] = torch.from_numpy(data[key].copy())
        z_g = torch.from_numpy(data["z_g"].copy())
    params = ModelParams(tensors, meta["num_layers"], meta["has_features"],
                         meta["learn_etas"], tuple(meta["fixed_etas"]))
    state = OptimizerState(m=m, v=v, **meta["adam"])
    return params, state, z_g, meta["config"]
