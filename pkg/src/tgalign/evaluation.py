"""Link-prediction evaluation with a logistic-regression pair classifier."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import torch
from sklearn.linear_model import LogisticRegression
from sklearn.metrics import accuracy_score, f1_score
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from .config import RunConfig
from .graph import Interaction, TemporalGraph
from .model import final_representations
from .training import TrainResult, feature_tensor


@dataclass
class EvalReport:
    accuracy: float
    f1: float
    n_pos: int
    n_neg: int
    seed: int
    wall_time: float

    def to_dict(self) -> dict:
        return asdict(self)


def pair_features(reps: np.ndarray, a: np.ndarray, b: np.ndarray, kind: str = "product") -> np.ndarray:
    za, zb = reps[a], reps[b]
    if kind == "product":
        return za * zb
    if kind == "absdiff":
        return np.abs(za - zb)
    if kind == "concat":
        return np.concatenate([za, zb], axis=1)
    raise ValueError(f"unknown pair feature {kind!r}")


def _pair_keys(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    return lo.astype(np.int64) * n + hi


def sample_non_edges(num_nodes: int, count: int, forbidden: np.ndarray,
                     rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``count`` uniform node pairs (u != v) whose unordered key is not in ``forbidden``."""
    forbidden = np.unique(forbidden)
    if num_nodes * (num_nodes - 1) // 2 - len(forbidden) < 1:
        raise ValueError("graph has no non-interacting node pair left")
    us, vs = [], []
    need = count
    while need > 0:
        u = rng.integers(0, num_nodes, size=2 * need + 16)
        v = rng.integers(0, num_nodes, size=2 * need + 16)
        ok = u != v
        keys = _pair_keys(u, v, num_nodes)
        ok &= ~np.isin(keys, forbidden)
        take = min(int(ok.sum()), need)
        us.append(u[ok][:take])
        vs.append(v[ok][:take])
        need -= take
    return np.concatenate(us), np.concatenate(vs)


def _as_arrays(test: Sequence[Interaction] | TemporalGraph):
    if isinstance(test, TemporalGraph):
        return test.src, test.dst
    if len(test) == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    arr = np.asarray([(i.src, i.dst) for i in test], dtype=np.int64)
    return arr[:, 0], arr[:, 1]


def evaluate_embeddings(reps: np.ndarray, train_g: TemporalGraph,
                        test: Sequence[Interaction], seed: int,
                        pair_feature: str = "product") -> EvalReport:
    """Fit the classifier on training pairs, score balanced test pairs.

    Training negatives avoid training links only; test negatives avoid every
    link seen in train or test.
    """
    started = time.perf_counter()
    n = train_g.num_nodes
    reps = np.asarray(reps, dtype=np.float64)
    if len(reps) < n:
        raise ValueError("one representation per node required")
    test_src, test_dst = _as_arrays(test)
    if len(test_src) == 0:
        raise ValueError("empty test set")
    rng = np.random.default_rng(seed)

    train_keys = _pair_keys(train_g.src, train_g.dst, n)
    n_train = len(train_g)
    neg_u, neg_v = sample_non_edges(n, n_train, train_keys, rng)
    X_train = np.concatenate([pair_features(reps, train_g.src, train_g.dst, pair_feature),
                              pair_features(reps, neg_u, neg_v, pair_feature)])
    y_train = np.concatenate([np.ones(n_train), np.zeros(len(neg_u))])
    if len(np.unique(y_train)) < 2:
        raise ValueError("training set for the classifier has a single class")

    all_keys = np.concatenate([train_keys, _pair_keys(test_src, test_dst, n)])
    t_u, t_v = sample_non_edges(n, len(test_src), all_keys, rng)
    X_test = np.concatenate([pair_features(reps, test_src, test_dst, pair_feature),
                             pair_features(reps, t_u, t_v, pair_feature)])
    y_test = np.concatenate([np.ones(len(test_src)), np.zeros(len(t_u))])

    clf = make_pipeline(StandardScaler(), LogisticRegression(max_iter=1000))
    clf.fit(X_train, y_train)
    pred = clf.predict(X_test)
    return EvalReport(float(accuracy_score(y_test, pred)), float(f1_score(y_test, pred)),
                      len(test_src), len(t_u), seed, time.perf_counter() - started)


def model_representations(result: TrainResult, train_g: TemporalGraph, cfg: RunConfig) -> np.ndarray:
    tables = result.store.tables()
    t_end = float(train_g.time[-1]) if len(train_g) else 0.0
    reps = final_representations(result.params, tables, train_g.num_nodes, tables.empty_row,
                                 t_end, result.z_g, cfg, feature_tensor(train_g, cfg))
    return reps.numpy()


def evaluate_link_prediction(result: TrainResult, train_g: TemporalGraph,
                             test: Sequence[Interaction], cfg: RunConfig,
                             seed: Optional[int] = None) -> EvalReport:
    reps = model_representations(result, train_g, cfg)
    return evaluate_embeddings(reps, train_g, test, cfg.seed if seed is None else seed,
                               cfg.pair_feature)


def null_model_report(train_g: TemporalGraph, test: Sequence[Interaction], d: int,
                      seed: int, pair_feature: str = "product") -> EvalReport:
    """Same protocol with random Gaussian node representations."""
    reps = np.random.default_rng(seed).standard_normal((train_g.num_nodes, d))
    return evaluate_embeddings(reps, train_g, test, seed, pair_feature)


def summarize(reports: Iterable[EvalReport]) -> dict:
    reports = list(reports)
    acc = np.array([r.accuracy for r in reports])
    f1 = np.array([r.f1 for r in reports])
    return {"acc_mean": float(acc.mean()), "acc_std": float(acc.std()),
            "f1_mean": float(f1.mean()), "f1_std": float(f1.std()), "runs": len(reports)}
