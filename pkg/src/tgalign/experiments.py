"""Multi-seed runs, the five-arm ablation and the S/Q sensitivity sweeps."""

from __future__ import annotations

import logging
from typing import Iterable, Optional, Sequence

from .config import MODES, RunConfig
from .evaluation import EvalReport, evaluate_link_prediction, summarize
from .graph import Interaction, TemporalGraph, chronological_split
from .training import TrainResult, train

logger = logging.getLogger(__name__)

SWEEPS = {"S": ("seq_len", (5, 10, 15, 20, 25)), "Q": ("Q", (1, 2, 3, 4, 5))}


def run_once(cfg: RunConfig, train_g: TemporalGraph, test: Sequence[Interaction]
             ) -> tuple[TrainResult, EvalReport]:
    result = train(cfg, train_g)
    return result, evaluate_link_prediction(result, train_g, test, cfg)


def run_seeds(cfg: RunConfig, g: TemporalGraph, seeds: Iterable[int]) -> list[EvalReport]:
    train_g, test = chronological_split(g, cfg.train_frac)
    reports = []
    for seed in seeds:
        _, report = run_once(cfg.replace(seed=seed), train_g, test)
        logger.info("%s seed=%d acc=%.4f f1=%.4f", cfg.mode, seed, report.accuracy, report.f1)
        reports.append(report)
    return reports


def run_ablation(base: RunConfig, g: TemporalGraph, seeds: Optional[Sequence[int]] = None,
                 modes: Sequence[str] = MODES) -> dict[str, list[EvalReport]]:
    """Every arm on the same split and seeds."""
    seeds = [base.seed] if seeds is None else list(seeds)
    return {mode: run_seeds(base.replace(mode=mode), g, seeds) for mode in modes}


def sweep(base: RunConfig, g: TemporalGraph, param: str, values: Optional[Sequence[int]] = None,
          seeds: Optional[Sequence[int]] = None) -> dict[int, list[EvalReport]]:
    if param not in SWEEPS:
        raise ValueError(f"sweep parameter must be one of {sorted(SWEEPS)}")
    field, default_values = SWEEPS[param]
    seeds = [base.seed] if seeds is None else list(seeds)
    return {v: run_seeds(base.replace(**{field: v}), g, seeds)
            for v in (default_values if values is None else values)}


def format_table(results: dict, label: str) -> str:
    lines = [f"{label:>12s}  {'ACC':>15s}  {'F1':>15s}  runs"]
    for key, reports in results.items():
        s = summarize(reports)
        lines.append(f"{str(key):>12s}  {100 * s['acc_mean']:6.2f} ± {100 * s['acc_std']:5.2f}"
                     f"  {100 * s['f1_mean']:6.2f} ± {100 * s['f1_std']:5.2f}  {s['runs']:4d}")
    return "\n".join(lines)
