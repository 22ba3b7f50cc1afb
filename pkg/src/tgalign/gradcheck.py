"""Finite-difference verification of every loss term on a small random problem."""

from __future__ import annotations

import numpy as np
import torch

from .config import RunConfig
from .graph import SequenceStore, make_batches
from .model import batch_loss, plan_batch
from .objective import NegativeSampler
from .params import GradReport, finite_difference_check, init_params
from .synthetic import uniform_stream

TERMS = ("task", "align", "global_", "total")


def gradient_check(d: int = 8, seq_len: int = 4, layers: int = 2, n_batches: int = 3,
                   batch_size: int = 4, num_nodes: int = 7, seed: int = 0, eps: float = 1e-5,
                   tol: float = 1e-4, n_coords: int = 32, **overrides) -> dict[str, GradReport]:
    """Per-term gradient reports, worst case over ``n_batches`` consecutive batches.

    Only the terms active in the chosen mode are checked.

    Few nodes keep the sequences of later pairs non-empty, and batches after
    the first see a non-zero global representation. Negatives and z_g are
    frozen per batch, so each loss is a deterministic function of the
    parameters.
    """
    cfg = RunConfig(d=d, seq_len=seq_len, layers=layers, batch_size=batch_size,
                    seed=seed, double=True, **{"mode": "full", **overrides})
    g = uniform_stream(num_nodes, n_batches * batch_size, seed=seed)
    params = init_params(g.num_nodes, None, d, layers, seed, torch.float64,
                         cfg.learn_etas, (cfg.eta1, cfg.eta2))
    # move off the symmetric initialization so no gradient is trivially zero
    gen = torch.Generator().manual_seed(seed + 1)
    with torch.no_grad():
        for name in ("b_alpha", "b_beta", "theta_l"):
            params[name].add_(0.3 * torch.randn(d, generator=gen, dtype=torch.float64))
        params["delta_t"].fill_(1.7)
        params["theta_d"].fill_(0.05)

    tables = SequenceStore.from_graph(g, seq_len).tables()
    sampler = NegativeSampler(g.degrees(), seed=seed)
    z_g = torch.zeros(d, dtype=torch.float64)
    reports: dict[str, GradReport] = {}
    for k, batch in enumerate(make_batches(g, batch_size)):
        plan = plan_batch(tables, batch, sampler.sample_batch(batch.src, cfg.Q, batch.dst))
        for term in active_terms(cfg):
            def loss_eval(term=term, plan=plan, z_g=z_g):
                return getattr(batch_loss(params, tables, plan, z_g, cfg)[0], term)
            rep = finite_difference_check(loss_eval, params, eps=eps, n_coords=n_coords,
                                          tol=tol, seed=seed + k)
            reports[term] = _merge(reports.get(term), rep)
        with torch.no_grad():
            z_g = batch_loss(params, tables, plan, z_g, cfg)[1].detach()
    return reports


def active_terms(cfg: RunConfig) -> tuple[str, ...]:
    """Loss terms that depend on the parameters in ``cfg.mode``; the rest are constant zero."""
    skip = set()
    if not cfg.uses_align:
        skip.add("align")
    if not cfg.uses_global:
        skip.add("global_")
    return tuple(t for t in TERMS if t not in skip)


def _merge(a: GradReport | None, b: GradReport) -> GradReport:
    if a is None:
        return b
    errs = {k: max(a.max_rel_error.get(k, 0.0), v) for k, v in b.max_rel_error.items()}
    counts = {k: a.checked.get(k, 0) + v for k, v in b.checked.items()}
    return GradReport(errs, b.tolerance, counts)


def all_passed(reports: dict[str, GradReport]) -> bool:
    return all(r.passed for r in reports.values())
