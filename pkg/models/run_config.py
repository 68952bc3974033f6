"""Validated configurations of the CLI subcommands.

Values come from an optional JSON file and from command-line flags; flags
that were given override the file. Validation failures surface as pydantic
``ValidationError`` (exit code 2 in the CLI).
"""

import json
from enum import StrEnum
from pathlib import Path
from typing import Any, Literal, TypeVar

from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import ConfigError
from models.herd_state import Variant

ModelKind = Literal["rbm", "enumerated", "sincos"]


class Method(StrEnum):
    """Classifiers compared by ``herd classify``."""

    PIXEL_MLR = "pixel_mlr"
    KNN1 = "knn1"
    HERDING_H = "herding_h"
    HERDING_SH = "herding_sh"


class CommandConfig(BaseModel):
    """Fields shared by every subcommand."""

    model_config = ConfigDict(extra="forbid")

    out: Path = Field(default=Path("out"), description="Output directory")
    seed: int | None = Field(default=None, description="Seed of the default initial weights")
    max_sweeps: int | None = Field(default=None, ge=1, description="Coordinate-ascent sweep limit")


class RunConfig(CommandConfig):
    """One herding chain: model, data, variant, transform and recording."""

    model: ModelKind = "rbm"
    visible: int | None = Field(
        default=None, ge=1, description="RBM visible units (default: data dimension)"
    )
    hidden: int = Field(default=0, ge=0, description="RBM hidden units")
    model_file: Path | None = None
    grid_step: float = Field(default=1.0, gt=0.0, description="Grid spacing of the sin/cos system")

    data: Path | None = None
    binary: bool = False
    threshold: float = Field(default=0.2, ge=0.0, le=1.0)

    variant: Variant = Variant.LOCAL
    steps: int = Field(default=1000, ge=1)
    record_every: int = Field(default=1, ge=1)

    eta: float = Field(default=1.0, gt=0.0)
    gamma: float = Field(default=1.0, gt=0.0)
    offset_file: Path | None = None
    w0_file: Path | None = None
    rates_file: Path | None = None
    freeze_hidden_bias: bool = False

    @model_validator(mode="after")
    def check_sources(self) -> "RunConfig":
        if self.model == "enumerated" and self.model_file is None:
            raise ValueError("an enumerated model needs model_file")
        if self.model == "rbm" and self.visible is None and self.data is None:
            raise ValueError("an RBM needs visible units or a data file")
        if self.variant is Variant.DECOUPLED and self.rates_file is None:
            raise ValueError("decoupled herding needs rates_file")
        needs_data = self.variant is not Variant.DECOUPLED and self.model != "sincos"
        if needs_data and self.data is None:
            raise ValueError(f"{self.variant} herding needs a data file")
        if self.freeze_hidden_bias and self.model != "rbm":
            raise ValueError("freeze_hidden_bias applies to RBM models only")
        return self


class RatesConfig(RunConfig):
    """Rate learning from a data-driven chain, optionally followed by a decoupled run."""

    phase: Literal["positive", "negative"] = "positive"
    decoupled_steps: int = Field(default=0, ge=0)
    export_filters: bool = False
    filter_height: int | None = Field(default=None, ge=1)
    filter_width: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def check_rates(self) -> "RatesConfig":
        if self.variant is Variant.DECOUPLED:
            raise ValueError("rates are learned from a data-driven chain, not a decoupled one")
        if self.export_filters:
            if self.model != "rbm":
                raise ValueError("rate filters need an RBM model")
            if self.filter_height is None or self.filter_width is None:
                raise ValueError("filter export needs filter_height and filter_width")
        return self


class SampleConfig(RunConfig):
    """Decoupled chain from a weight snapshot and a rate file."""

    variant: Variant = Variant.DECOUPLED

    @model_validator(mode="after")
    def check_sample(self) -> "SampleConfig":
        if self.variant is not Variant.DECOUPLED:
            raise ValueError("sample always runs a decoupled chain")
        if self.w0_file is None:
            raise ValueError("sample needs a weight snapshot (w0_file)")
        return self


class DemoTipiConfig(CommandConfig):
    """Objective surface and herding orbit of the sin/cos system."""

    grid_points: int = Field(default=41, ge=3, description="Surface points per weight axis")
    weight_range: float = Field(default=3.0, gt=0.0, description="Surface half-width")
    grid_step: float = Field(default=1.0, gt=0.0)
    variant: Variant = Variant.IDEALIZED
    steps: int = Field(default=10_000, ge=1)
    record_every: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def check_variant(self) -> "DemoTipiConfig":
        if self.variant is Variant.DECOUPLED:
            raise ValueError("the demo runs a data-driven chain")
        return self


class ClassifyConfig(CommandConfig):
    """Energy-feature classification over per-class data files.

    ``data_dir`` holds ``train_<label>.txt``, ``valid_<label>.txt`` and
    ``test_<label>.txt`` for every class label.
    """

    data_dir: Path
    binary: bool = False
    threshold: float = Field(default=0.2, ge=0.0, le=1.0)
    hidden: int = Field(default=8, ge=1)
    iters: int = Field(default=2000, ge=1)
    window_start: int | None = Field(default=None, ge=1)
    window_end: int | None = Field(default=None, ge=1)
    freeze_hidden_bias: bool = True
    eta: float = Field(default=1.0, gt=0.0)
    methods: list[Method] = Field(default_factory=lambda: list(Method))
    mlr_iters: int = Field(default=500, ge=0)
    mlr_lr: float = Field(default=0.1, gt=0.0)
    mlr_reg: float = Field(default=1e-4, ge=0.0)

    @model_validator(mode="after")
    def check_window(self) -> "ClassifyConfig":
        first = self.window_start if self.window_start is not None else self.iters // 2 + 1
        last = self.window_end if self.window_end is not None else self.iters
        if not 1 <= first <= last <= self.iters:
            raise ValueError(f"evaluation window ({first}, {last}) outside [1, {self.iters}]")
        if not self.methods:
            raise ValueError("at least one method is required")
        return self

    @property
    def eval_window(self) -> tuple[int, int]:
        first = self.window_start if self.window_start is not None else self.iters // 2 + 1
        last = self.window_end if self.window_end is not None else self.iters
        return first, last


ConfigT = TypeVar("ConfigT", bound=CommandConfig)


def load_config(cls: type[ConfigT], path: Path | None, overrides: dict[str, Any]) -> ConfigT:
    """
    Build a command configuration from a JSON file and flag overrides.

    Args:
        cls: Configuration model
        path: Optional JSON file
        overrides: Flag values; ``None`` means "not given" and keeps the file value

    Returns:
        Validated configuration
    """
    values: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        values.update(loaded)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return cls.model_validate(values)
