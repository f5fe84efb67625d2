"""Predator-prey, van der Pol fast subsystem and swarming models with their bifurcation diagnostics."""

from __future__ import annotations

import logging
import math
from typing import Callable, Sequence

import numpy as np
from pydantic import Field
from scipy.optimize import bisect

from pdmpswitch.errors import DomainError, UndefinedSymbolError
from pdmpswitch.integrators import GeneralSwitchedSpec, GeneralTrajectory, switched_simulate_general
from pdmpswitch.records import Record
from pdmpswitch.trajectory import StopCondition

logger = logging.getLogger(__name__)

SWARM_MIN_FRACTION = 1e-9
BRANCH_CLAMP = 1e-12


def central_jacobian(field: Callable[[np.ndarray], np.ndarray], state) -> np.ndarray:
    """Jacobian by central differences, step 1e-6*(1+|x_j|) per component."""
    x = np.asarray(state, dtype=float)
    n = x.shape[0]
    jac = np.empty((n, n))
    for j in range(n):
        h = 1e-6 * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += h
        xm[j] -= h
        jac[:, j] = (np.asarray(field(xp)) - np.asarray(field(xm))) / (xp[j] - xm[j])
    return jac


# --- Rosenzweig-MacArthur ----------------------------------------------------

class RMParams(Record):
    p: float = Field(..., gt=0, description="prey carrying capacity")
    beta: float = Field(3.0, gt=0, description="conversion factor")
    m: float = Field(1.0, gt=0, description="predator mortality")


def rm_field(params: RMParams, state) -> np.ndarray:
    x, y = float(state[0]), float(state[1])
    predation = x * y / (1.0 + x)
    return np.array([x * (1.0 - x / params.p) - predation,
                     params.beta * predation - params.m * y])


def rm_coexistence_equilibrium(p: float, beta: float = 3.0, m: float = 1.0) -> tuple[float, float]:
    """(x*, y*) = (m/(beta-m), (1+x*)(1-x*/p)); (1/2, 3(2p-1)/(4p)) for m=1, beta=3."""
    if not beta > m:
        raise DomainError("rm_coexistence_equilibrium()", (beta, m), "need beta > m")
    x_star = m / (beta - m)
    if not p > x_star:
        raise DomainError("rm_coexistence_equilibrium()", p, f"need p > {x_star!r}")
    return x_star, (1.0 + x_star) * (1.0 - x_star / p)


def rm_jacobian(params: RMParams, state) -> np.ndarray:
    return central_jacobian(lambda s: rm_field(params, s), state)


def rm_hopf_trace(p: float, beta: float = 3.0, m: float = 1.0) -> float:
    params = RMParams(p=p, beta=beta, m=m)
    eq = rm_coexistence_equilibrium(p, beta, m)
    return float(np.trace(rm_jacobian(params, eq)))


def rm_hopf_point(lo: float = 1.0, hi: float = 4.0, tol: float = 1e-6,
                  beta: float = 3.0, m: float = 1.0) -> float:
    """Carrying capacity where the trace at the coexistence equilibrium changes sign."""
    f_lo, f_hi = rm_hopf_trace(lo, beta, m), rm_hopf_trace(hi, beta, m)
    if f_lo * f_hi > 0:
        raise DomainError("rm_hopf_point()", (lo, hi), "trace has no sign change on the bracket")
    return bisect(rm_hopf_trace, lo, hi, args=(beta, m), xtol=tol)


def rm_hopf_scan(ps: Sequence[float], beta: float = 3.0, m: float = 1.0) -> dict[str, np.ndarray]:
    ps = np.asarray(ps, dtype=float)
    return {"p": ps, "trace": np.array([rm_hopf_trace(float(p), beta, m) for p in ps])}


# --- van der Pol fast subsystem ---------------------------------------------

def vdp_fast_field(p, x):
    return p - x ** 3 / 3.0 + x


def vdp_fold_points() -> tuple[float, float]:
    return -2.0 / 3.0, 2.0 / 3.0


def vdp_equilibrium_count(p: float) -> int:
    a = 3.0 * abs(p)
    if a < 2.0:
        return 3
    return 2 if a == 2.0 else 1


def vdp_equilibria(p: float) -> list[float]:
    """Real roots of p - x^3/3 + x, ascending; x = 2 cos(.) or 2 cosh(.) parametrizations."""
    count = vdp_equilibrium_count(p)
    c = 1.5 * p
    if count == 1:
        return [math.copysign(2.0 * math.cosh(math.acosh(abs(c)) / 3.0), p)]
    phi = math.acos(max(-1.0, min(1.0, c))) / 3.0
    roots = [2.0 * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]
    if count == 2:
        # double root at the fold: -x_simple/2
        simple = max(roots, key=abs)
        roots = [simple, -0.5 * simple]
    return sorted(roots)


def vdp_scan(ps: Sequence[float]) -> dict[str, np.ndarray]:
    ps = np.asarray(ps, dtype=float)
    return {"p": ps, "equilibria": np.array([vdp_equilibrium_count(float(p)) for p in ps])}


# --- Adaptive swarming -------------------------------------------------------

class SwarmParams(Record):
    q: float = Field(..., ge=0)
    w2: float = Field(..., ge=0)
    w3: float = Field(..., ge=0)
    ae: float = Field(0.0, ge=0)
    de: float = Field(0.0, ge=0)
    a0: float = Field(..., ge=0)
    d0: float = Field(..., ge=0)


def swarm_field(params: SwarmParams, state, symmetrized: bool = False) -> np.ndarray:
    """Right-hand side for (x1, x2, y1, y2, y3).

    The verbatim equations carry an undefined symbol L in the w2 term of y1';
    they can only be evaluated when w2 = 0. symmetrized=True reads L as x1 and
    makes y2' the left/right mirror image of y1'.
    """
    x1, x2, y1, y2, y3 = (float(v) for v in state)
    if x1 <= SWARM_MIN_FRACTION or x2 <= SWARM_MIN_FRACTION:
        raise DomainError("swarm_field()", (x1, x2), "x1 and x2 must be > 1e-9")
    q, w2, w3, ae, de = params.q, params.w2, params.w3, params.ae, params.de
    s2 = y3 * y3

    dx1 = q * (x1 - x2) + w3 * (s2 / (2 * x2) - s2 / (2 * x1))
    dx2 = q * (x2 - x1) + w3 * (s2 / (2 * x1) - s2 / (2 * x2))

    if symmetrized:
        dy1 = (q * (y3 - 2 * y1) + w2 * (y3 + s2 / x1 - 2 * y3 * y1 / x1)
               + w3 * (s2 / x2 + y3 * s2 / (2 * x2 * x2) - s2 * y1 / (x1 * x1))
               + ae * x1 * x1 - de * y1)
        dy2 = (q * (y3 - 2 * y2) + w2 * (y3 + s2 / x2 - 2 * y3 * y2 / x2)
               + w3 * (s2 / x1 + y3 * s2 / (2 * x1 * x1) - s2 * y2 / (x2 * x2))
               + ae * x2 * x2 - de * y2)
    else:
        if w2 != 0:
            raise UndefinedSymbolError("swarm_field()", "L",
                                       "symbol L in the y1' equation is undefined; "
                                       "set w2 = 0 or use the symmetrized equations")
        dy1 = (q * (y3 - 2 * y1)
               + w3 * (s2 / x2 + y3 * s2 / (2 * x2 * x2) - s2 * y1 / (x1 * x1))
               + ae * x1 * x1 - de * y1)
        dy2 = (q * (y3 - 2 * y2) + w2 * (y3 + s2 / x1 - 2 * y3 * y1 / x1)
               + w3 * (s2 / x1 + y3 * s2 / (2 * x1 * x1) - s2 * y2 / (x2 * x2))
               + ae * x2 * x2 - de * y2)

    total = params.a0 * x1 * x2 - params.d0 * y3 + ae * (x1 * x1 + x2 * x2) - de * (y1 + y2)
    dy3 = total - dy1 - dy2
    return np.array([dx1, dx2, dy1, dy2, dy3])


def swarm_pitchfork_threshold(q: float, w3: float, d0: float) -> float:
    if not (q > 0 and w3 > 0 and d0 > 0):
        raise DomainError("swarm_pitchfork_threshold()", (q, w3, d0), "q, w3, d0 must be > 0")
    return 2.0 * d0 * math.sqrt(2.0 * q / w3)


def swarm_ordered_branch(params: SwarmParams) -> tuple[float, float]:
    """((x1)+, (x1)-) of the ordered steady states; equal to 1/2 at the threshold."""
    if params.ae != 0 or params.de != 0:
        raise DomainError("swarm_ordered_branch()", (params.ae, params.de), "requires ae = de = 0")
    if not params.a0 > 0:
        raise DomainError("swarm_ordered_branch()", params.a0, "a0 must be > 0")
    radicand = 1.0 - 8.0 * params.q * params.d0 ** 2 / (params.w3 * params.a0 ** 2)
    if radicand < 0:
        if radicand < -BRANCH_CLAMP:
            raise DomainError("swarm_ordered_branch()", params.a0,
                              "a0 lies below the pitchfork threshold")
        radicand = 0.0
    half = 0.5 * math.sqrt(radicand)
    return 0.5 + half, 0.5 - half


def swarm_disordered_state(params: SwarmParams) -> np.ndarray:
    """Steady state with x1 = x2 = 1/2 and y1 = y2 (symmetrized equations, ae = de = 0)."""
    if params.ae != 0 or params.de != 0:
        raise DomainError("swarm_disordered_state()", (params.ae, params.de), "requires ae = de = 0")
    if not params.d0 > 0:
        raise DomainError("swarm_disordered_state()", params.d0, "d0 must be > 0")
    q, w2, w3 = params.q, params.w2, params.w3
    y3 = params.a0 / (4.0 * params.d0)
    num = q * y3 + w2 * (y3 + 2 * y3 * y3) + w3 * (2 * y3 * y3 + 2 * y3 ** 3)
    den = 2 * q + 4 * w2 * y3 + 4 * w3 * y3 * y3
    if den == 0:
        raise DomainError("swarm_disordered_state()", params, "link densities are undetermined")
    y = num / den
    return np.array([0.5, 0.5, y, y, y3])


def swarm_jacobian(params: SwarmParams, state, symmetrized: bool = True) -> np.ndarray:
    return central_jacobian(lambda s: swarm_field(params, s, symmetrized), state)


# --- switched application runs -----------------------------------------------

def rm_switched(p_minus: float, p_plus: float, lambda_minus: float, lambda_plus: float,
                x0, stop: StopCondition, seed: int, step_size: float = 1e-3,
                record_dt: float | None = None, beta: float = 3.0, m: float = 1.0,
                i0: int = -1) -> GeneralTrajectory:
    lo = RMParams(p=p_minus, beta=beta, m=m)
    hi = RMParams(p=p_plus, beta=beta, m=m)
    spec = GeneralSwitchedSpec(
        field_minus=lambda s: rm_field(lo, s),
        field_plus=lambda s: rm_field(hi, s),
        lambda_minus=lambda_minus, lambda_plus=lambda_plus,
        step_size=step_size, record_dt=record_dt,
    )
    logger.info("Switching Rosenzweig-MacArthur between p=%r and p=%r", p_minus, p_plus)
    return switched_simulate_general(spec, x0, i0, stop, seed)


def vdp_switched(p_minus: float, p_plus: float, lambda_minus: float, lambda_plus: float,
                 x0: float, stop: StopCondition, seed: int, step_size: float = 1e-3,
                 record_dt: float | None = None, i0: int = -1) -> GeneralTrajectory:
    spec = GeneralSwitchedSpec(
        field_minus=lambda s: vdp_fast_field(p_minus, s),
        field_plus=lambda s: vdp_fast_field(p_plus, s),
        lambda_minus=lambda_minus, lambda_plus=lambda_plus,
        step_size=step_size, record_dt=record_dt,
    )
    return switched_simulate_general(spec, [x0], i0, stop, seed)


def swarm_switched(params: SwarmParams, a0_minus: float, a0_plus: float,
                   lambda_minus: float, lambda_plus: float, x0, stop: StopCondition,
                   seed: int, step_size: float = 1e-3, record_dt: float | None = None,
                   symmetrized: bool = True, i0: int = -1) -> GeneralTrajectory:
    lo = params.model_copy(update={"a0": a0_minus})
    hi = params.model_copy(update={"a0": a0_plus})
    spec = GeneralSwitchedSpec(
        field_minus=lambda s: swarm_field(lo, s, symmetrized),
        field_plus=lambda s: swarm_field(hi, s, symmetrized),
        lambda_minus=lambda_minus, lambda_plus=lambda_plus,
        step_size=step_size, record_dt=record_dt,
    )
    return switched_simulate_general(spec, x0, i0, stop, seed)
