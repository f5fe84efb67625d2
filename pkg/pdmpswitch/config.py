"""Run records for each command and their JSON round trip."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Annotated, Literal, Union

from pydantic import Field, TypeAdapter, ValidationError, model_validator

from pdmpswitch.errors import ConfigError
from pdmpswitch.records import Record
from pdmpswitch.trajectory import StopCondition, SwitchingSpec


class HistogramSettings(Record):
    bins: int = Field(50, ge=1)
    lo: float | None = None
    hi: float | None = None
    burn_in: float | None = Field(None, ge=0)
    sample_dt: float | None = Field(None, gt=0)


class ClassifyConfig(Record):
    command: Literal["classify"] = "classify"
    switching: SwitchingSpec


class SimulateConfig(Record):
    command: Literal["simulate"] = "simulate"
    switching: SwitchingSpec
    x0: float
    i0: Literal[-1, 1] = -1
    stop: StopCondition
    seed: int = Field(0, ge=0)
    out: str | None = Field(None, description="trajectory CSV")
    histogram: HistogramSettings | None = None
    hist_out: str | None = Field(None, description="occupation histogram CSV")


class DensityConfig(Record):
    command: Literal["density"] = "density"
    switching: SwitchingSpec
    grid: int = Field(1000, ge=1)
    tol: float = Field(1e-10, gt=0)
    out: str | None = None


class BlowupConfig(Record):
    command: Literal["blowup"] = "blowup"
    switching: SwitchingSpec
    x0: float | None = None
    x_range: tuple[float, float] | None = Field(None, description="uniform initial states on (lo, hi)")
    i0: Literal[-1, 1] = -1
    stop: StopCondition
    n: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0)
    out: str | None = Field(None, description="JSON with blow-up times")

    @model_validator(mode="after")
    def _one_initial(self) -> BlowupConfig:
        if (self.x0 is None) == (self.x_range is None):
            raise ValueError("give exactly one of x0 and xRange")
        if self.x_range is not None and not self.x_range[0] < self.x_range[1]:
            raise ValueError("xRange must satisfy lo < hi")
        return self


class HopfConfig(Record):
    command: Literal["hopf"] = "hopf"
    switching: SwitchingSpec
    theta0: float = 0.0
    r0: float = Field(..., gt=0)
    i0: Literal[-1, 1] = -1
    stop: StopCondition
    seed: int = Field(0, ge=0)
    burn_in: float | None = Field(None, ge=0)
    sample_dt: float | None = Field(None, gt=0)
    bins: int = Field(50, ge=1)
    out: str | None = Field(None, description="(t, theta, r, mode) samples CSV")

    @model_validator(mode="after")
    def _hopf_kind(self) -> HopfConfig:
        if not self.switching.kind.is_hopf:
            raise ValueError("hopf needs kind sup-hopf-radial or sub-hopf-radial")
        return self


class AppConfig(Record):
    command: Literal["app"] = "app"
    model: Literal["rm", "vdp", "swarm"]
    scan: bool = Field(False, description="write a bifurcation scan instead of a trajectory")
    scan_lo: float | None = None
    scan_hi: float | None = None
    scan_points: int = Field(200, ge=2)
    p_minus: float | None = Field(None, description="switched parameter below the bifurcation")
    p_plus: float | None = Field(None, description="switched parameter above the bifurcation")
    lambda_minus: float = Field(1.0, gt=0)
    lambda_plus: float = Field(1.0, gt=0)
    x0: list[float] | None = None
    i0: Literal[-1, 1] = -1
    stop: StopCondition | None = None
    seed: int = Field(0, ge=0)
    step_size: float = Field(1e-3, gt=0)
    record_dt: float | None = Field(None, gt=0)
    beta: float = Field(3.0, gt=0)
    m: float = Field(1.0, gt=0)
    q: float = Field(1.0, ge=0)
    w2: float = Field(0.0, ge=0)
    w3: float = Field(2.0, ge=0)
    d0: float = Field(1.0, ge=0)
    symmetrized: bool = False
    out: str | None = None

    @model_validator(mode="after")
    def _run_fields(self) -> AppConfig:
        if not self.scan:
            missing = [name for name in ("p_minus", "p_plus", "x0", "stop")
                       if getattr(self, name) is None]
            if missing:
                raise ValueError(f"trajectory runs need {', '.join(missing)}")
        return self


RunConfig = Annotated[
    Union[ClassifyConfig, SimulateConfig, DensityConfig, BlowupConfig, HopfConfig, AppConfig],
    Field(discriminator="command"),
]

_ADAPTER = TypeAdapter(RunConfig)


def describe_validation_error(e: ValidationError, source: str = "") -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    prefix = f"{source}: " if source else ""
    return prefix + "; ".join(parts)


def validate_run_config(data: dict, source: str = "") -> RunConfig:
    try:
        return _ADAPTER.validate_python(data)
    except ValidationError as e:
        raise ConfigError("validate_run_config()", source or None,
                          describe_validation_error(e, source)) from e


def read_config_dict(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("load_run_config()", str(path),
                          f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError("load_run_config()", str(path), f"{path}: top level must be an object")
    return data


def load_run_config(path: str | Path) -> RunConfig:
    return validate_run_config(read_config_dict(path), str(path))


def dump_run_config(config) -> str:
    return json.dumps(config.model_dump(mode="json", by_alias=True, exclude_none=True),
                      indent=2) + "\n"
