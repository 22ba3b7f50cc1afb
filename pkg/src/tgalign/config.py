from __future__ import annotations

from dataclasses import asdict, dataclass, fields

MODES = ("hawkes", "gnn", "gnn_global", "gnn_hawkes", "full")


@dataclass
class RunConfig:
    d: int = 128
    batch_size: int = 128
    Q: int = 1
    seq_len: int = 10
    layers: int = 2
    lr: float = 1e-3
    epochs: int = 50
    train_frac: float = 0.8
    seed: int = 1
    mode: str = "full"
    # objective variants
    neg_form: str = "paper"
    reduction: str = "sum"
    lg_literal: bool = False
    learn_etas: bool = False
    eta1: float = 1.0
    eta2: float = 1.0
    neg_power: float = 1.0
    # model variants
    activation: str = "sigmoid"
    global_freeze_batch: bool = False
    global_scope: str = "batch"
    double: bool = False
    # training loop
    early_stop_tol: float = 1e-4
    # evaluation
    pair_feature: str = "product"
    eval_seeds: int = 5

    def __post_init__(self):
        for name in ("d", "batch_size", "Q", "seq_len", "layers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.train_frac < 1:
            raise ValueError("train_frac must lie in (0, 1)")
        if self.neg_form not in ("paper", "conventional"):
            raise ValueError(f"unknown neg_form {self.neg_form!r}")
        if self.reduction not in ("sum", "mean"):
            raise ValueError(f"unknown reduction {self.reduction!r}")
        if self.pair_feature not in ("product", "absdiff", "concat"):
            raise ValueError(f"unknown pair_feature {self.pair_feature!r}")
        if self.global_scope not in ("batch", "stream"):
            raise ValueError(f"unknown global_scope {self.global_scope!r}")
        if self.eta1 < 0 or self.eta2 < 0:
            raise ValueError("eta1 and eta2 must be non-negative")

    @property
    def uses_gnn(self) -> bool:
        return self.mode != "hawkes"

    @property
    def uses_global(self) -> bool:
        return self.mode in ("gnn_global", "full")

    @property
    def uses_align(self) -> bool:
        return self.mode in ("gnn_hawkes", "full")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in known})

    def replace(self, **changes) -> "RunConfig":
        return self.from_dict({**self.to_dict(), **changes})
