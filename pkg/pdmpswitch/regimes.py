"""Regime classification of switched normal forms and Monte Carlo checks of it."""

from __future__ import annotations

import logging
import math
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from pydantic import Field
from scipy.optimize import brentq

from pdmpswitch.errors import DomainError, InsufficientSamplesError
from pdmpswitch.normal_forms import NormalFormKind, escape_time, flow_value
from pdmpswitch.pdmp_engine import stationary_mode_weights
from pdmpswitch.records import Record
from pdmpswitch.rng import RandomStream, derive_seed, sample_switch_time
from pdmpswitch.trajectory import Status, SwitchingSpec, Trajectory

logger = logging.getLogger(__name__)

CRITICAL_RTOL = 1e-12
MIN_SEGMENTS = 10
# Restart level for shrinking runs in lyapunov_estimate.
TINY = 1e-200


class Comparison(str, Enum):
    SUB = "sub"
    CRITICAL = "critical"
    SUPER = "super"


class Blowup(str, Enum):
    NONE = "none"
    POSITIVE_PROBABILITY = "positive_probability"
    ALMOST_SURE = "almost_sure"
    ALMOST_SURE_FROM_LEFT_OF_ZERO = "almost_sure_from_left_of_zero"
    DICHOTOMY = "dichotomy"


class ErgodicMeasure(Record):
    name: str
    support: str
    mode_weights: tuple[float, float]


class RegimeReport(Record):
    kind: NormalFormKind
    growth_rate: float
    comparison: Comparison
    ergodic_ipms: list[ErgodicMeasure] = Field(alias="ergodicIPMs")
    blowup: Blowup
    notes: str = ""


class GrowthEstimate(Record):
    lambda_hat: float
    std_err: float
    samples_used: int


def _exact(*values) -> bool:
    return all(isinstance(v, (int, Rational)) and not isinstance(v, bool) for v in values)


def average_growth_rate(p_minus, p_plus, lambda_minus, lambda_plus):
    """Lyapunov exponent of the linearization at 0: (p- l+ + p+ l-) / (l+ + l-)."""
    if not (lambda_minus > 0 and lambda_plus > 0):
        raise DomainError("average_growth_rate()", (lambda_minus, lambda_plus), "rates must be > 0")
    num = p_minus * lambda_plus + p_plus * lambda_minus
    den = lambda_plus + lambda_minus
    if _exact(p_minus, p_plus, lambda_minus, lambda_plus):
        return Fraction(num) / Fraction(den)
    return num / den


def compare_rates(p_minus, p_plus, lambda_minus, lambda_plus) -> Comparison:
    """Position of l+/p+ relative to -l-/p-, decided on l- p+ + l+ p- to avoid division."""
    a = lambda_minus * p_plus
    b = lambda_plus * p_minus
    s = a + b
    if _exact(p_minus, p_plus, lambda_minus, lambda_plus):
        critical = s == 0
    else:
        critical = abs(s) <= CRITICAL_RTOL * (abs(a) + abs(b))
    if critical:
        return Comparison.CRITICAL
    return Comparison.SUPER if s > 0 else Comparison.SUB


def _delta(weights: tuple[float, float]) -> ErgodicMeasure:
    return ErgodicMeasure(name="trivialDelta", support="{0}", mode_weights=weights)


def classify(spec: SwitchingSpec) -> RegimeReport:
    kind = spec.kind
    cmp = compare_rates(spec.p_minus, spec.p_plus, spec.lambda_minus, spec.lambda_plus)
    rate = float(average_growth_rate(spec.p_minus, spec.p_plus, spec.lambda_minus, spec.lambda_plus))
    weights = stationary_mode_weights(spec.lambda_minus, spec.lambda_plus)
    top = math.sqrt(spec.p_plus)
    notes = []

    ipms: list[ErgodicMeasure] = []
    blowup = Blowup.NONE
    if kind is NormalFormKind.SUP_PITCHFORK:
        ipms = [_delta(weights)]
        if cmp is Comparison.SUPER:
            ipms += [
                ErgodicMeasure(name="muPositive", support=f"(0, {top!r})", mode_weights=weights),
                ErgodicMeasure(name="piNegative", support=f"({-top!r}, 0)", mode_weights=weights),
            ]
    elif kind is NormalFormKind.SUP_HOPF_RADIAL:
        ipms = [_delta(weights)]
        if cmp is Comparison.SUPER:
            ipms.append(ErgodicMeasure(name="uniformAngleTimesMu",
                                       support=f"S1 x (0, {top!r})", mode_weights=weights))
    elif kind is NormalFormKind.TRANSCRITICAL:
        ipms = [_delta(weights)]
        if cmp is Comparison.SUPER:
            ipms.append(ErgodicMeasure(name="muPositive", support=f"(0, {spec.p_plus!r})",
                                       mode_weights=weights))
            blowup = Blowup.ALMOST_SURE_FROM_LEFT_OF_ZERO
        elif cmp is Comparison.SUB:
            blowup = Blowup.DICHOTOMY
            notes.append("initial mass on (pMinus, 0) either escapes below pMinus - 1 or converges to 0")
        else:
            blowup = Blowup.POSITIVE_PROBABILITY
            notes.append("blow-up behaviour in the critical case: indeterminate (not covered)")
    elif kind in (NormalFormKind.SUB_PITCHFORK, NormalFormKind.SUB_HOPF_RADIAL):
        ipms = [_delta(weights)]
        notes.append("delta is the unique IPM of the model stopped at the escape thresholds")
        if cmp is Comparison.SUPER:
            blowup = Blowup.ALMOST_SURE
        elif cmp is Comparison.SUB:
            blowup = Blowup.DICHOTOMY
        else:
            blowup = Blowup.POSITIVE_PROBABILITY
            notes.append("blow-up behaviour in the critical case: indeterminate (not covered)")
    else:
        blowup = Blowup.ALMOST_SURE
        notes.append("no invariant probability measure is claimed for the fold")

    if cmp is Comparison.CRITICAL and kind in (NormalFormKind.SUP_PITCHFORK,
                                               NormalFormKind.SUP_HOPF_RADIAL,
                                               NormalFormKind.TRANSCRITICAL):
        notes.append("critical rates: delta is the unique IPM")

    report = RegimeReport(kind=kind, growth_rate=rate, comparison=cmp, ergodic_ipms=ipms,
                          blowup=blowup, notes="; ".join(notes))
    logger.debug("classify %s: %s, %d ergodic IPM(s), blowup %s",
                 kind.value, cmp.value, len(ipms), blowup.value)
    return report


def escape_thresholds(spec: SwitchingSpec) -> float | None:
    """Level whose first passage the blow-up statements are phrased with."""
    kind = spec.kind
    if kind is NormalFormKind.TRANSCRITICAL:
        return spec.p_minus - 1.0
    if kind in (NormalFormKind.SUB_PITCHFORK, NormalFormKind.SUB_HOPF_RADIAL):
        return math.sqrt(-spec.p_minus) + 1.0
    if kind is NormalFormKind.FOLD:
        return -math.sqrt(spec.p_plus) - 1.0
    return None


def _time_to_level(kind: NormalFormKind, p: float, x: float, level: float, step: float) -> float:
    t_star = escape_time(kind, p, x)
    if t_star is not None and t_star <= step:
        t_level = escape_time(kind, p, level)
        return t_star - t_level if t_level is not None else t_star
    return brentq(lambda s: flow_value(kind, p, x, s) - level, 0.0, step, xtol=1e-14)


def _run_growth(spec: SwitchingSpec, x0: float, horizon: float, guard: float,
                seed: int) -> tuple[float, float, int]:
    kind = spec.kind
    rng = RandomStream(seed)
    w_minus, _ = stationary_mode_weights(spec.lambda_minus, spec.lambda_plus)
    i = -1 if rng.uniform() < w_minus else 1
    t, x = 0.0, x0
    log_sum, time_sum, used = 0.0, 0.0, 0
    while t < horizon:
        p = spec.p(i)
        tau = sample_switch_time(spec.rate(i), rng)
        step = min(tau, horizon - t)
        t_star = escape_time(kind, p, x)
        x_new = flow_value(kind, p, x, step) if t_star is None or t_star > step else math.inf
        if x_new >= guard:
            s = _time_to_level(kind, p, x, guard, step)
            log_sum += math.log(guard / x)
            time_sum += s
            x = x0
        else:
            log_sum += math.log(x_new / x) if x_new > 0 else math.log(TINY / x)
            time_sum += step
            x = x_new if x_new > TINY else x0
        used += 1
        t += step
        i = -i
    return log_sum, time_sum, used


def lyapunov_estimate(spec: SwitchingSpec, x0: float = 1e-6, horizon: float = 200.0,
                      seed: int = 0, n_runs: int = 20,
                      guard_radius: float | None = None) -> GrowthEstimate:
    """Empirical growth rate of log X near 0.

    Runs follow the nonlinear flow; whenever X reaches the guard radius
    (default 0.1*sqrt(p+)) or underflows it restarts from x0, keeping the
    accumulated log growth and elapsed time.
    """
    if not spec.kind.has_zero_equilibrium:
        raise DomainError("lyapunov_estimate()", spec.kind.value, "0 is not a common equilibrium")
    guard = 0.1 * math.sqrt(spec.p_plus) if guard_radius is None else guard_radius
    if not 0 < x0 < guard:
        raise DomainError("lyapunov_estimate()", x0, f"x0 must lie in (0, {guard!r})")
    if n_runs < 2:
        raise DomainError("lyapunov_estimate()", n_runs, "need at least 2 runs for a standard error")

    rates = []
    used = 0
    for k in range(n_runs):
        log_sum, time_sum, segs = _run_growth(spec, x0, horizon, guard, derive_seed(seed, k))
        used += segs
        if time_sum > 0:
            rates.append(log_sum / time_sum)
    if used < MIN_SEGMENTS or len(rates) < 2:
        raise InsufficientSamplesError("lyapunov_estimate()", used,
                                       f"need at least {MIN_SEGMENTS} usable segments")
    arr = np.array(rates)
    est = GrowthEstimate(lambda_hat=float(arr.mean()),
                         std_err=float(arr.std(ddof=1) / math.sqrt(len(arr))),
                         samples_used=used)
    logger.info("Growth rate estimate %.6g +- %.2g from %d segments", est.lambda_hat, est.std_err, used)
    return est


def blowup_fraction(ensemble: Sequence[Trajectory]) -> tuple[float, list[float]]:
    if not ensemble:
        raise InsufficientSamplesError("blowup_fraction()", 0, "empty ensemble")
    times = [tr.end_time for tr in ensemble if tr.status is Status.BLEW_UP]
    return len(times) / len(ensemble), times


def absorbed_fraction(ensemble: Sequence[Trajectory], level: float = 1e-6) -> float:
    """Fraction of runs absorbed at 0 or ending with |X| below level."""
    if not ensemble:
        raise InsufficientSamplesError("absorbed_fraction()", 0, "empty ensemble")
    hits = sum(1 for tr in ensemble
               if tr.status is Status.ABSORBED
               or (tr.status is Status.HORIZON_REACHED and abs(tr.x_end) < level))
    return hits / len(ensemble)


def final_values(ensemble: Sequence[Trajectory]) -> np.ndarray:
    return np.array([tr.x_end for tr in ensemble])
