"""Experiment configuration: flat key-value files, flag overrides, hashing."""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, replace
from pathlib import Path

from .classifier import ClassifierConfig
from .harmony import HSParams

SEED_ENV_VAR = "REGIONHARVEST_SEED"
VARIANTS = ("enhanced", "basic", "both")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "synthetic"   # "synthetic" or a manifest CSV path
    classes: int = 10
    per_class: int = 100
    noise: float = 0.05
    image_size: int = 32
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)
    classifier: str = "linear"
    epochs: int = 50
    regularization: float = 1e-3
    variant: str = "both"
    hmcr: float = 0.85
    par: float = 0.45
    bw: float = 1.0
    ni: int = 25
    hms: int = 16
    seed: int = 0
    out_dir: str = "runs/out"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.image_size < 4:
            raise ValueError("image_size must be at least 4")

    def classifier_config(self) -> ClassifierConfig:
        return ClassifierConfig(kind=self.classifier, epochs=self.epochs,
                                regularization=self.regularization)

    def hs_params(self) -> HSParams:
        return HSParams(hms=self.hms, hmcr=self.hmcr, par=self.par, bw=self.bw,
                        ni=self.ni, seed=self.seed)

    def variants(self) -> tuple[str, ...]:
        return ("enhanced", "basic") if self.variant == "both" else (self.variant,)

    def dataset_name(self) -> str:
        if self.dataset == "synthetic":
            return f"synthetic-k{self.classes}"
        return Path(self.dataset).stem


_FIELD_PARSERS = {
    "dataset": str,
    "classes": int,
    "per_class": int,
    "noise": float,
    "image_size": int,
    "ratios": lambda s: tuple(float(x) for x in s.split(",")),
    "classifier": str,
    "epochs": int,
    "regularization": float,
    "variant": str,
    "hmcr": float,
    "par": float,
    "bw": float,
    "ni": int,
    "hms": int,
    "seed": int,
    "out_dir": str,
}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno} is not `key = value`: {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FIELD_PARSERS:
            raise ValueError(f"unknown config key {key!r} on line {lineno}")
        values[key] = _FIELD_PARSERS[key](value)
    return values


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults <- config file <- REGIONHARVEST_SEED <- explicit overrides."""
    values: dict = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    if "seed" not in values and os.environ.get(SEED_ENV_VAR):
        values["seed"] = int(os.environ[SEED_ENV_VAR])
    for key, value in (overrides or {}).items():
        if value is not None:
            if key not in _FIELD_PARSERS:
                raise ValueError(f"unknown config override {key!r}")
            values[key] = value
    return ExperimentConfig(**values)


def config_text(config: ExperimentConfig) -> str:
    """Canonical flat key-value rendering (also the hashing input)."""
    lines = []
    for key in sorted(_FIELD_PARSERS):
        value = getattr(config, key)
        if key == "ratios":
            value = ",".join(repr(v) for v in value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_hash(config: ExperimentConfig) -> str:
    """Identity of everything except the output location and timing."""
    hashed = config_text(replace(config, out_dir=""))
    return hashlib.sha256(hashed.encode("utf-8")).hexdigest()[:16]
