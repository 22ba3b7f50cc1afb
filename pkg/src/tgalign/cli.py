"""Command-line entry point: train, eval, ablate, gradcheck, sweep."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .config import MODES, RunConfig
from .evaluation import evaluate_link_prediction, summarize
from .experiments import SWEEPS, format_table, run_ablation, sweep
from .gradcheck import all_passed, gradient_check
from .graph import SequenceStore, chronological_split, load_edge_list
from .params import load_checkpoint, save_checkpoint
from .synthetic import community_stream
from .training import TrainResult, train, write_loss_csv

logger = logging.getLogger("tgalign")


def _data_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--data", type=Path, help="edge list with 'src dst timestamp' lines")
    src.add_argument("--synthetic", type=int, metavar="EVENTS",
                     help="use a synthetic community stream with this many events")
    p.add_argument("--synthetic-nodes", type=int, default=1899)
    p.add_argument("--features", type=Path, help=".npy array of node features (one row per node id)")
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--no-time-norm", action="store_true", help="keep raw timestamps")
    p.add_argument("--keep-ids", action="store_true",
                   help="use node ids as given instead of compacting them to 0..n-1")


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, default=128)
    p.add_argument("--batch-size", type=int, default=128)
    p.add_argument("--seq-len", type=int, default=10)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--Q", type=int, default=1, help="negatives per positive")
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--learn-etas", action="store_true")
    p.add_argument("--eta1", type=float, default=1.0)
    p.add_argument("--eta2", type=float, default=1.0)
    p.add_argument("--lg-literal", action="store_true", help="use the unbounded +log sigmoid global loss")
    p.add_argument("--neg-form", choices=("paper", "conventional"), default="paper")
    p.add_argument("--reduction", choices=("sum", "mean"), default="sum")
    p.add_argument("--activation", choices=("sigmoid", "tanh", "relu"), default="sigmoid")
    p.add_argument("--global-freeze-batch", action="store_true")
    p.add_argument("--global-scope", choices=("batch", "stream"), default="batch")
    p.add_argument("--pair-feature", choices=("product", "absdiff", "concat"), default="product")
    p.add_argument("--double", action="store_true")
    p.add_argument("--out", type=Path, default=Path("runs"))


def _config(args) -> RunConfig:
    return RunConfig(
        d=args.d, batch_size=args.batch_size, Q=args.Q, seq_len=args.seq_len, layers=args.layers,
        lr=args.lr, epochs=args.epochs, train_frac=args.train_frac, seed=args.seed,
        mode=args.mode, neg_form=args.neg_form, reduction=args.reduction,
        lg_literal=args.lg_literal, learn_etas=args.learn_etas, eta1=args.eta1, eta2=args.eta2,
        activation=args.activation, global_freeze_batch=args.global_freeze_batch,
        global_scope=args.global_scope, double=args.double, pair_feature=args.pair_feature)


def _graph(args):
    features = np.load(args.features) if args.features else None
    if args.data is not None:
        return load_edge_list(args.data, normalize=not args.no_time_norm, features=features,
                              relabel=not args.keep_ids)
    if args.synthetic:
        return community_stream(args.synthetic_nodes, args.synthetic, seed=0)
    raise SystemExit("one of --data or --synthetic is required")


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2))


def cmd_train(args) -> int:
    cfg = _config(args)
    g = _graph(args)
    train_g, test = chronological_split(g, cfg.train_frac)
    args.out.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    result = train(cfg, train_g)
    write_loss_csv(args.out / "loss.csv", result.trace)
    ckpt = args.save or args.out / "checkpoint.bin"
    save_checkpoint(ckpt, result.params, result.optimizer, result.z_g, cfg.to_dict())
    report = evaluate_link_prediction(result, train_g, test, cfg)
    _write_json(args.out / "metrics.json", report.to_dict())
    means = result.epoch_means()
    print(f"mode={cfg.mode} epochs={result.epochs_run} batches={len(result.trace)} "
          f"time={time.perf_counter() - started:.1f}s")
    if means:
        print(f"mean total loss: first epoch {means[0]:.4f}, last epoch {means[-1]:.4f}")
    print(f"ACC={report.accuracy:.4f} F1={report.f1:.4f} (n_pos={report.n_pos}, n_neg={report.n_neg})")
    print(f"wrote {args.out / 'loss.csv'}, {args.out / 'metrics.json'}, {ckpt}")
    return 0


def cmd_eval(args) -> int:
    params, optimizer, z_g, cfg_dict = load_checkpoint(args.load)
    cfg = RunConfig.from_dict(cfg_dict)
    g = _graph(args)
    train_g, test = chronological_split(g, cfg.train_frac)
    store = SequenceStore.from_graph(train_g, cfg.seq_len)
    result = TrainResult(params, optimizer, z_g, store)
    reports = [evaluate_link_prediction(result, train_g, test, cfg, seed=cfg.seed + k)
               for k in range(args.seeds)]
    _write_json(args.out / "metrics.json", [r.to_dict() for r in reports])
    s = summarize(reports)
    print(f"ACC={s['acc_mean']:.4f}±{s['acc_std']:.4f} F1={s['f1_mean']:.4f}±{s['f1_std']:.4f} "
          f"over {s['runs']} evaluation seeds")
    return 0


def cmd_ablate(args) -> int:
    cfg = _config(args)
    results = run_ablation(cfg, _graph(args), seeds=range(cfg.seed, cfg.seed + args.seeds))
    _write_json(args.out / "ablation.json",
                {m: [r.to_dict() for r in reps] for m, reps in results.items()})
    print(format_table(results, "arm"))
    return 0


def cmd_sweep(args) -> int:
    cfg = _config(args)
    values = [int(v) for v in args.values.split(",")] if args.values else None
    results = sweep(cfg, _graph(args), args.param, values, seeds=range(cfg.seed, cfg.seed + args.seeds))
    _write_json(args.out / f"sweep_{args.param}.json",
                {str(v): [r.to_dict() for r in reps] for v, reps in results.items()})
    print(format_table(results, args.param))
    return 0


def cmd_gradcheck(args) -> int:
    reports = gradient_check(d=args.d, seq_len=args.seq_len, layers=args.layers,
                             n_batches=args.batches, batch_size=args.batch_size,
                             seed=args.seed, eps=args.eps, tol=args.tol,
                             mode=args.mode, learn_etas=args.learn_etas)
    for term, report in reports.items():
        print(f"[{term.rstrip('_')}]")
        print(report)
    ok = all_passed(reports)
    print("gradient check", "PASSED" if ok else "FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tgalign", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train, evaluate, write loss.csv/metrics.json/checkpoint")
    _data_args(p)
    _model_args(p)
    p.add_argument("--save", type=Path, help="checkpoint path (default OUT/checkpoint.bin)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved checkpoint")
    _data_args(p)
    p.add_argument("--load", type=Path, required=True)
    p.add_argument("--seeds", type=int, default=5, help="evaluation seeds")
    p.add_argument("--out", type=Path, default=Path("runs"))
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="run all five arms")
    _data_args(p)
    _model_args(p)
    p.add_argument("--seeds", type=int, default=3)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("sweep", help="sensitivity over S or Q")
    _data_args(p)
    _model_args(p)
    p.add_argument("--param", choices=sorted(SWEEPS), required=True)
    p.add_argument("--values", help="comma-separated override of the swept values")
    p.add_argument("--seeds", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gradcheck", help="finite-difference check of every loss term")
    p.add_argument("--d", type=int, default=8)
    p.add_argument("--seq-len", type=int, default=4)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--batches", type=int, default=3)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--mode", choices=MODES, default="full")
    p.add_argument("--learn-etas", action="store_true")
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
