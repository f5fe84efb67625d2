"""Scalar bifurcation normal forms and their exact flow maps.

Every flow is written in closed form. The pitchfork, transcritical and fold
(p >= 0) cases all reduce to the Bernoulli equation y' = a*y + b*y**2 after a
substitution, so they share one solver; the fold with p < 0 is a tangent.
The Hopf radial kinds reuse the pitchfork code on r >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np
from pydantic import field_validator

from pdmpswitch.errors import DomainError
from pdmpswitch.records import Record

# Values below this magnitude are clamped to exactly 0 after a flow.
UNDERFLOW = 1e-300


class NormalFormKind(str, Enum):
    SUP_PITCHFORK = "sup-pitchfork"
    SUB_PITCHFORK = "sub-pitchfork"
    TRANSCRITICAL = "transcritical"
    FOLD = "fold"
    SUP_HOPF_RADIAL = "sup-hopf-radial"
    SUB_HOPF_RADIAL = "sub-hopf-radial"

    @property
    def is_hopf(self) -> bool:
        return self in (NormalFormKind.SUP_HOPF_RADIAL, NormalFormKind.SUB_HOPF_RADIAL)

    @property
    def pitchfork_sign(self) -> int:
        """-1 for x' = px - x^3 (and its radial twin), +1 for x' = px + x^3, 0 otherwise."""
        if self in (NormalFormKind.SUP_PITCHFORK, NormalFormKind.SUP_HOPF_RADIAL):
            return -1
        if self in (NormalFormKind.SUB_PITCHFORK, NormalFormKind.SUB_HOPF_RADIAL):
            return 1
        return 0

    @property
    def has_zero_equilibrium(self) -> bool:
        return self is not NormalFormKind.FOLD


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"


class NormalFormSpec(Record):
    kind: NormalFormKind
    p: float

    @field_validator("p")
    @classmethod
    def _finite(cls, v: float) -> float:
        if not math.isfinite(v):
            raise ValueError("p must be finite")
        return v


class Equilibrium(Record):
    x: float
    stability: Stability
    degenerate: bool = False


@dataclass(frozen=True, slots=True)
class FlowValue:
    x: float


@dataclass(frozen=True, slots=True)
class BlowUp:
    t_star: float
    direction: int


FlowResult = Union[FlowValue, BlowUp]


def bifurcation_value(kind: NormalFormKind) -> float:
    """All six normal forms bifurcate at p = 0."""
    return 0.0


def _check_domain(kind: NormalFormKind, x: float, op: str) -> None:
    if kind.is_hopf and x < 0:
        raise DomainError(op, x, f"radial coordinate must be >= 0 for {kind.value}")


def field_value(kind: NormalFormKind, p: float, x: float) -> float:
    s = kind.pitchfork_sign
    if s:
        return p * x + s * x * x * x
    if kind is NormalFormKind.TRANSCRITICAL:
        return p * x - x * x
    return p - x * x


def eval_field(spec: NormalFormSpec, x: float) -> float:
    _check_domain(spec.kind, x, "eval_field()")
    return field_value(spec.kind, spec.p, x)


def eval_field_array(spec: NormalFormSpec, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if spec.kind.is_hopf and np.any(x < 0):
        raise DomainError("eval_field_array()", None,
                          f"radial coordinate must be >= 0 for {spec.kind.value}")
    return field_value(spec.kind, spec.p, x)


def derivative(spec: NormalFormSpec, x: float) -> float:
    kind, p = spec.kind, spec.p
    s = kind.pitchfork_sign
    if s:
        return p + 3.0 * s * x * x
    if kind is NormalFormKind.TRANSCRITICAL:
        return p - 2.0 * x
    return -2.0 * x


def _equilibrium_points(kind: NormalFormKind, p: float) -> list[float]:
    s = kind.pitchfork_sign
    if s:
        # roots of p + s x^2 = 0 besides x = 0
        pts = [0.0]
        if -s * p > 0:
            r = math.sqrt(-s * p)
            pts += [r] if kind.is_hopf else [-r, r]
        return sorted(pts)
    if kind is NormalFormKind.TRANSCRITICAL:
        return sorted({0.0, p})
    if p > 0:
        r = math.sqrt(p)
        return [-r, r]
    if p == 0:
        return [0.0]
    return []


def equilibria(spec: NormalFormSpec) -> list[Equilibrium]:
    """Real equilibria with their linear stability.

    A vanishing derivative marks the equilibrium degenerate; it is then
    labelled unstable since linearization cannot certify attraction.
    """
    out = []
    for x in _equilibrium_points(spec.kind, spec.p):
        d = derivative(spec, x)
        out.append(Equilibrium(
            x=x,
            stability=Stability.STABLE if d < 0 else Stability.UNSTABLE,
            degenerate=(d == 0),
        ))
    return out


def linearize_at_zero(spec: NormalFormSpec) -> float:
    if not spec.kind.has_zero_equilibrium:
        raise DomainError("linearize_at_zero()", spec.kind.value,
                          "0 is not an equilibrium of the fold normal form")
    return spec.p


# --- Bernoulli equation y' = a y + b y^2 -----------------------------------

def bernoulli_escape_time(a: float, b: float, y0: float) -> float | None:
    c = b * y0
    if c <= 0:
        return None
    if a == 0:
        return 1.0 / c
    r = a / c
    if a < 0 and r <= -1.0:
        return None
    return math.log1p(r) / a


def bernoulli_value(a: float, b: float, y0: float, t: float) -> float:
    if y0 == 0 or t == 0:
        return y0
    if a == 0:
        return y0 / (1.0 - b * y0 * t)
    if a > 0:
        return y0 / (math.exp(-a * t) + b * y0 * math.expm1(-a * t) / a)
    return y0 * math.exp(a * t) / (1.0 - b * y0 * math.expm1(a * t) / a)


def _bernoulli_array(a: float, b: float, y0: float, t: np.ndarray) -> np.ndarray:
    if y0 == 0:
        return np.zeros_like(t)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if a == 0:
            return y0 / (1.0 - b * y0 * t)
        if a > 0:
            return y0 / (np.exp(-a * t) + b * y0 * np.expm1(-a * t) / a)
        return y0 * np.exp(a * t) / (1.0 - b * y0 * np.expm1(a * t) / a)


def _reduction(kind: NormalFormKind, p: float, x0: float) -> tuple[float, float, float]:
    """(a, b, y0) of the Bernoulli equation equivalent to the kind at x0."""
    s = kind.pitchfork_sign
    if s:
        return 2.0 * p, 2.0 * s, x0 * x0
    if kind is NormalFormKind.TRANSCRITICAL:
        return p, -1.0, x0
    # fold with p >= 0, shifted to the upper equilibrium
    r = math.sqrt(p)
    return -2.0 * r, -1.0, x0 - r


def _lift(kind: NormalFormKind, p: float, x0: float, y: float) -> float:
    if kind.pitchfork_sign:
        return math.copysign(math.sqrt(y), x0)
    if kind is NormalFormKind.TRANSCRITICAL:
        return y
    return y + math.sqrt(p)


def _escape_direction(kind: NormalFormKind, x0: float) -> int:
    if kind.pitchfork_sign:
        return 1 if x0 > 0 else -1
    return -1


def escape_time(kind: NormalFormKind, p: float, x0: float) -> float | None:
    if kind is NormalFormKind.FOLD and p < 0:
        w = math.sqrt(-p)
        return (0.5 * math.pi + math.atan(x0 / w)) / w
    a, b, y0 = _reduction(kind, p, x0)
    return bernoulli_escape_time(a, b, y0)


def _clamp(kind: NormalFormKind, x: float) -> float:
    if kind.has_zero_equilibrium and abs(x) < UNDERFLOW:
        return 0.0
    return x


def flow_value(kind: NormalFormKind, p: float, x0: float, t: float) -> float:
    """Value of the flow at t, assuming no escape happens before t."""
    if t == 0 or x0 in _equilibrium_points(kind, p):
        return x0
    if kind is NormalFormKind.FOLD and p < 0:
        w = math.sqrt(-p)
        return -w * math.tan(w * t - math.atan(x0 / w))
    a, b, y0 = _reduction(kind, p, x0)
    y = bernoulli_value(a, b, y0, t)
    return _clamp(kind, _lift(kind, p, x0, y))


def flow(spec: NormalFormSpec, x0: float, t: float) -> FlowResult:
    if t < 0 or not math.isfinite(t):
        raise DomainError("flow()", t, "time must be finite and >= 0")
    _check_domain(spec.kind, x0, "flow()")
    t_star = escape_time(spec.kind, spec.p, x0)
    if t_star is not None and t_star <= t:
        return BlowUp(t_star=t_star, direction=_escape_direction(spec.kind, x0))
    return FlowValue(flow_value(spec.kind, spec.p, x0, t))


def blow_up_time(spec: NormalFormSpec, x0: float) -> float | None:
    _check_domain(spec.kind, x0, "blow_up_time()")
    return escape_time(spec.kind, spec.p, x0)


def flow_array(spec: NormalFormSpec, x0: float, times: np.ndarray) -> np.ndarray:
    """Flow of x0 evaluated at many times; entries at or past escape are +-inf."""
    _check_domain(spec.kind, x0, "flow_array()")
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise DomainError("flow_array()", None, "times must be >= 0")
    return flow_values(spec.kind, spec.p, x0, times)


def flow_values(kind: NormalFormKind, p: float, x0: float, times: np.ndarray) -> np.ndarray:
    if x0 in _equilibrium_points(kind, p):
        out = np.full_like(times, x0)
    elif kind is NormalFormKind.FOLD and p < 0:
        w = math.sqrt(-p)
        out = -w * np.tan(w * times - math.atan(x0 / w))
    else:
        a, b, y0 = _reduction(kind, p, x0)
        y = _bernoulli_array(a, b, y0, times)
        if kind.pitchfork_sign:
            out = math.copysign(1.0, x0) * np.sqrt(np.maximum(y, 0.0))
        elif kind is NormalFormKind.TRANSCRITICAL:
            out = y
        else:
            out = y + math.sqrt(p)
        if kind.has_zero_equilibrium:
            out = np.where(np.abs(out) < UNDERFLOW, 0.0, out)

    t_star = escape_time(kind, p, x0)
    if t_star is not None:
        out = np.where(times >= t_star, _escape_direction(kind, x0) * np.inf, out)
    return out


def hopf_planar_field(kind: NormalFormKind, p: float, x1: float, x2: float) -> tuple[float, float]:
    """Cartesian Hopf normal form whose polar form is r' = p r -+ r^3, theta' = 1."""
    s = kind.pitchfork_sign
    if not kind.is_hopf:
        raise DomainError("hopf_planar_field()", kind.value, "kind is not a Hopf radial kind")
    r2 = x1 * x1 + x2 * x2
    return (p * x1 - x2 + s * x1 * r2,
            x1 + p * x2 + s * x2 * r2)
