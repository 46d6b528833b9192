"""Run configuration: flat key = value files with typed validation."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .optim import AdamHyper
from .tasks import LambdaSchedule, TrainConfig


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    """Everything a CLI pipeline needs; unknown keys are rejected."""

    # training
    lambda_: float = 0.0
    lambda_start: float | None = None
    lambda_end: float | None = None
    lambda_steps: int | None = None
    batch_pairs: int = 1024
    negatives: int = 16
    batch_users: int = 64
    epochs: int = 10
    steps_per_epoch: int = 100
    seed: int = 0
    lr: float = 0.01
    lr_b: float | None = None
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    baseline: bool = True
    baseline_decay: float = 0.99
    init_prob: float = 0.9
    d_max: float | None = None
    d_max_factor: float = 2.0
    # graph builders
    k: int = 32
    r: int = 32
    k_sim: int = 16
    variant: str = "normal"
    anchors: int = 0
    links_per_anchor: int = 8
    # Euclidean baseline
    dim: int = 8
    # datasets / artifacts
    vectors: str | None = None
    vectors_format: str = "csv"
    vectors_n: int | None = None
    vectors_dim: int | None = None
    interactions: str | None = None
    graph: str | None = None
    out: str | None = None
    # reconstruction bench
    runs: int = 100
    n_min: int = 10
    n_max: int = 25
    p: float = 0.25
    eval_candidates: int = 100

    def to_train_config(self) -> TrainConfig:
        schedule = None
        sched_parts = (self.lambda_start, self.lambda_end, self.lambda_steps)
        if any(x is not None for x in sched_parts):
            if any(x is None for x in sched_parts):
                raise ValueError("lambda_start, lambda_end, lambda_steps must be set together")
            schedule = LambdaSchedule(self.lambda_start, self.lambda_end, self.lambda_steps)
        return TrainConfig(
            lambda_=self.lambda_,
            lambda_schedule=schedule,
            batch_pairs=self.batch_pairs,
            n_negatives=self.negatives,
            batch_users=self.batch_users,
            epochs=self.epochs,
            steps_per_epoch=self.steps_per_epoch,
            seed=self.seed,
            hyper=AdamHyper(self.lr, self.beta1, self.beta2, self.eps),
            lr_b=self.lr_b,
            baseline=self.baseline,
            baseline_decay=self.baseline_decay,
            init_prob=self.init_prob,
            d_max=self.d_max,
            d_max_factor=self.d_max_factor,
        )


_KEY_TO_ATTR = {("lambda" if f.name == "lambda_" else f.name): f.name for f in fields(RunConfig)}

_PARSERS = {}
for _f in fields(RunConfig):
    _key = "lambda" if _f.name == "lambda_" else _f.name
    if _f.type in ("bool",):
        _PARSERS[_key] = _parse_bool
    elif _f.type in ("int", "int | None"):
        _PARSERS[_key] = int
    elif _f.type in ("float", "float | None"):
        _PARSERS[_key] = float
    else:
        _PARSERS[_key] = str


def parse_flat_config(text: str) -> dict[str, str]:
    """Parse "key = value" lines; '#' starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ValueError(f"line {lineno}: empty key or value")
        if key in out:
            raise ValueError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def apply_updates(config: RunConfig, updates: dict[str, str]) -> RunConfig:
    for key, value in updates.items():
        if key not in _KEY_TO_ATTR:
            raise ValueError(f"unknown config key {key!r}")
        try:
            parsed = _PARSERS[key](value)
        except ValueError as exc:
            raise ValueError(f"config key {key!r}: {exc}") from None
        setattr(config, _KEY_TO_ATTR[key], parsed)
    return config


def load_run_config(path) -> RunConfig:
    return apply_updates(RunConfig(), parse_flat_config(Path(path).read_text()))


def dump_run_config(config: RunConfig) -> str:
    lines = []
    for f in fields(RunConfig):
        value = getattr(config, f.name)
        if value is None:
            continue
        key = "lambda" if f.name == "lambda_" else f.name
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
