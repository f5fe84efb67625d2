"""Switching parameters, stop conditions and recorded trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from pydantic import Field, model_validator

from pdmpswitch.errors import DomainError
from pdmpswitch.normal_forms import NormalFormKind, NormalFormSpec
from pdmpswitch.records import Record


class SwitchingSpec(Record):
    """Two parameter values of one normal form and the rates of the mode chain.

    lambda_minus is the rate of leaving mode -1, lambda_plus of leaving +1.
    """

    kind: NormalFormKind
    p_minus: float = Field(..., lt=0)
    p_plus: float = Field(..., gt=0)
    lambda_minus: float = Field(..., gt=0)
    lambda_plus: float = Field(..., gt=0)

    @model_validator(mode="after")
    def _finite(self) -> SwitchingSpec:
        for name in ("p_minus", "p_plus", "lambda_minus", "lambda_plus"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        return self

    def p(self, mode: int) -> float:
        return self.p_minus if mode < 0 else self.p_plus

    def rate(self, mode: int) -> float:
        return self.lambda_minus if mode < 0 else self.lambda_plus

    def mode_spec(self, mode: int) -> NormalFormSpec:
        return NormalFormSpec(kind=self.kind, p=self.p(mode))


class StopCondition(Record):
    horizon: float = Field(..., gt=0)
    blowup_guard: float = Field(1e6, gt=0, description="level used to time numeric escape diagnostics")
    absorption_guard: float = Field(1e-12, ge=0, description="report absorption when |x| drops below")

    def check_against(self, spec: SwitchingSpec) -> None:
        bound = max(abs(spec.p_minus), spec.p_plus, 1.0)
        if not self.blowup_guard > bound:
            raise DomainError("StopCondition", self.blowup_guard,
                              f"blowupGuard must exceed {bound!r}")


class Status(str, Enum):
    HORIZON_REACHED = "horizon_reached"
    BLEW_UP = "blew_up"
    ABSORBED = "absorbed"
    NUMERIC_ESCAPE = "numeric_escape"


@dataclass(frozen=True)
class Trajectory:
    """Contiguous flow segments of one run.

    Segment k starts at t_start[k] in state x_start[k], follows mode[k] for
    duration[k]. The last segment ends at end_time, which is the horizon, the
    analytic blow-up time or the absorption time.
    """

    spec: SwitchingSpec
    t_start: np.ndarray
    x_start: np.ndarray
    mode: np.ndarray
    duration: np.ndarray
    status: Status
    end_time: float
    x_end: float
    rng_seed: int
    direction: int = 0
    guard_time: float | None = None

    @property
    def n_segments(self) -> int:
        return len(self.t_start)

    def status_record(self) -> dict:
        out = {"status": self.status.value, "t": self.end_time}
        if self.status is Status.BLEW_UP:
            out["direction"] = self.direction
        return out


@dataclass(frozen=True)
class PlanarTrajectory:
    radial: Trajectory
    theta0: float

    def theta_at(self, t: float | np.ndarray):
        return np.mod(self.theta0 + np.asarray(t, dtype=float), 2.0 * math.pi) \
            if isinstance(t, np.ndarray) else math.fmod(self.theta0 + t, 2.0 * math.pi)


@dataclass(frozen=True)
class Histogram:
    """Occupation densities per mode and marginal over common bin edges.

    Each per-mode density integrates to the fraction of samples spent in that
    mode; the marginal is their sum.
    """

    edges: np.ndarray
    counts_minus: np.ndarray
    counts_plus: np.ndarray
    n_samples: int
    density_minus: np.ndarray = field(init=False)
    density_plus: np.ndarray = field(init=False)

    def __post_init__(self):
        width = np.diff(self.edges)
        scale = self.n_samples * width if self.n_samples else np.ones_like(width)
        object.__setattr__(self, "density_minus", self.counts_minus / scale)
        object.__setattr__(self, "density_plus", self.counts_plus / scale)

    @property
    def density(self) -> np.ndarray:
        return self.density_minus + self.density_plus

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def mode_density(self, mode: int | None) -> np.ndarray:
        if mode is None:
            return self.density
        return self.density_minus if mode < 0 else self.density_plus

    def total_mass(self) -> float:
        return float(np.sum(self.density * self.widths))
