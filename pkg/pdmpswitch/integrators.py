"""Fixed-step RK4 integration of switched vector fields on R^d."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from pydantic import ConfigDict, Field

from pdmpswitch.errors import FieldEvaluationError
from pdmpswitch.records import Record
from pdmpswitch.rng import RandomStream, sample_switch_time
from pdmpswitch.trajectory import Status, StopCondition

logger = logging.getLogger(__name__)

VectorField = Callable[[np.ndarray], np.ndarray]


def rk4_step(field: VectorField, x: np.ndarray, h: float) -> np.ndarray:
    k1 = field(x)
    k2 = field(x + 0.5 * h * k1)
    k3 = field(x + 0.5 * h * k2)
    k4 = field(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4_solve(field: VectorField, x0, t: float, h: float) -> np.ndarray:
    """Unswitched RK4 solution at time t (last step shortened to land on t)."""
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    n = int(math.floor(t / h))
    for _ in range(n):
        x = rk4_step(field, x, h)
    rest = t - n * h
    if rest > 0:
        x = rk4_step(field, x, rest)
    return x


class GeneralSwitchedSpec(Record):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    field_minus: Callable[[np.ndarray], np.ndarray]
    field_plus: Callable[[np.ndarray], np.ndarray]
    lambda_minus: float = Field(..., gt=0)
    lambda_plus: float = Field(..., gt=0)
    step_size: float = Field(1e-3, gt=0)
    escape_radius: float = Field(1e6, gt=0)
    record_dt: float | None = Field(None, gt=0)
    record_start: float = Field(0.0, ge=0)

    def field(self, mode: int) -> VectorField:
        return self.field_minus if mode < 0 else self.field_plus

    def rate(self, mode: int) -> float:
        return self.lambda_minus if mode < 0 else self.lambda_plus


@dataclass(frozen=True)
class GeneralTrajectory:
    """Switch events plus states on the record grid of one RK4 run."""

    switch_times: np.ndarray
    switch_states: np.ndarray
    switch_modes: np.ndarray
    record_times: np.ndarray
    record_states: np.ndarray
    record_modes: np.ndarray
    status: Status
    end_time: float
    x_end: np.ndarray
    rng_seed: int

    @property
    def dimension(self) -> int:
        return self.x_end.shape[0]


def _evaluate(field: VectorField, x: np.ndarray, t: float, mode: int) -> np.ndarray:
    try:
        v = np.asarray(field(x), dtype=float)
    except Exception as e:
        raise FieldEvaluationError("switched_simulate_general()", None, str(e),
                                   time=t, position=x.tolist(), mode=mode) from e
    if v.shape != x.shape or not np.all(np.isfinite(v)):
        raise FieldEvaluationError("switched_simulate_general()", None,
                                   "field returned a non-finite or misshaped value",
                                   time=t, position=x.tolist(), mode=mode)
    return v


def switched_simulate_general(spec: GeneralSwitchedSpec, x0, i0: int,
                              stop: StopCondition, seed: int) -> GeneralTrajectory:
    """
    RK4 between exponential switch events.

    Holding times are drawn exactly as in the scalar exact engine (one draw
    per segment from the same stream), so both engines switch at the same
    times for the same seed. Steps are shortened to land on switch times and
    on record times.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    rng = RandomStream(seed)
    h = spec.step_size
    horizon = stop.horizon

    sw_t, sw_x, sw_m = [], [], []
    rec_t, rec_x, rec_m = [], [], []
    record_k = 0

    def next_record() -> float:
        if spec.record_dt is None:
            return math.inf
        return spec.record_start + record_k * spec.record_dt

    t, i = 0.0, i0
    status = Status.HORIZON_REACHED
    while True:
        sw_t.append(t)
        sw_x.append(x.copy())
        sw_m.append(i)
        tau = sample_switch_time(spec.rate(i), rng)
        seg_end = t + tau if tau < horizon - t else horizon
        field = spec.field(i)

        def rhs(y, _f=field, _i=i):
            return _evaluate(_f, y, t, _i)

        while True:
            while next_record() <= t and next_record() < seg_end:
                if next_record() == t:
                    rec_t.append(t)
                    rec_x.append(x.copy())
                    rec_m.append(i)
                record_k += 1
            if t >= seg_end:
                break
            target = min(seg_end, next_record())
            if target - t <= h * (1.0 + 1e-12):
                x = rk4_step(rhs, x, target - t)
                t = target
            else:
                x = rk4_step(rhs, x, h)
                t += h
            if not np.linalg.norm(x) <= spec.escape_radius:
                status = Status.NUMERIC_ESCAPE
                break
        if status is Status.NUMERIC_ESCAPE:
            logger.debug("seed %d: numeric escape at t=%r", seed, t)
            break
        if seg_end >= horizon:
            t = horizon
            break
        i = -i

    d = x.shape[0]
    return GeneralTrajectory(
        switch_times=np.array(sw_t),
        switch_states=np.array(sw_x).reshape(-1, d),
        switch_modes=np.array(sw_m, dtype=np.int8),
        record_times=np.array(rec_t),
        record_states=np.array(rec_x).reshape(-1, d),
        record_modes=np.array(rec_m, dtype=np.int8),
        status=status,
        end_time=t,
        x_end=x,
        rng_seed=seed,
    )
