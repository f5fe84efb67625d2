"""Event-exact simulation of the two-mode switched normal form (X, E)."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from pdmpswitch import log as pdmp_log
from pdmpswitch.errors import DomainError, InsufficientSamplesError
from pdmpswitch.normal_forms import (
    escape_time,
    flow_value,
    flow_values,
)
from pdmpswitch.rng import RandomStream, derive_seed, sample_switch_time
from pdmpswitch.trajectory import (
    Histogram,
    PlanarTrajectory,
    Status,
    StopCondition,
    SwitchingSpec,
    Trajectory,
)

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100


def stationary_mode_weights(lambda_minus: float, lambda_plus: float) -> tuple[float, float]:
    """Invariant law of the mode chain: (P(E=-1), P(E=+1))."""
    total = lambda_minus + lambda_plus
    return lambda_plus / total, lambda_minus / total


def default_burn_in(spec: SwitchingSpec) -> float:
    return 100.0 / min(spec.lambda_minus, spec.lambda_plus)


def default_sample_dt(spec: SwitchingSpec) -> float:
    return 0.1 / max(spec.lambda_minus, spec.lambda_plus)


def _check_initial(spec: SwitchingSpec, x0: float, i0: int, op: str) -> None:
    if i0 not in (-1, 1):
        raise DomainError(op, i0, "initial mode must be -1 or +1")
    if not math.isfinite(x0):
        raise DomainError(op, x0, "initial state must be finite")
    if spec.kind.is_hopf and x0 < 0:
        raise DomainError(op, x0, f"radial coordinate must be >= 0 for {spec.kind.value}")


def simulate(spec: SwitchingSpec, x0: float, i0: int, stop: StopCondition, seed: int) -> Trajectory:
    """One event-exact run.

    Each segment draws its holding time first, then compares it with the
    analytic escape time of the current mode from the current state.
    """
    _check_initial(spec, x0, i0, "simulate()")
    stop.check_against(spec)

    kind = spec.kind
    horizon = stop.horizon
    guard = stop.absorption_guard
    rng = RandomStream(seed)

    t_start: list[float] = []
    x_start: list[float] = []
    modes: list[int] = []
    durations: list[float] = []

    t, x, i = 0.0, float(x0), i0
    direction = 0
    guard_time = None
    while True:
        p = spec.p_minus if i < 0 else spec.p_plus
        tau = sample_switch_time(spec.lambda_minus if i < 0 else spec.lambda_plus, rng)
        remaining = horizon - t
        step = tau if tau < remaining else remaining

        t_star = escape_time(kind, p, x)
        if t_star is not None and t_star <= step:
            t_start.append(t)
            x_start.append(x)
            modes.append(i)
            durations.append(t_star)
            direction = 1 if (kind.pitchfork_sign and x > 0) else -1
            level = direction * stop.blowup_guard
            t_level = escape_time(kind, p, level)
            if t_level is not None and t_level <= t_star:
                guard_time = t + (t_star - t_level)
            t += t_star
            status = Status.BLEW_UP
            x = direction * math.inf
            logger.debug("seed %d blew up at t=%r (direction %+d)", seed, t, direction)
            break

        x_new = flow_value(kind, p, x, step)
        t_start.append(t)
        x_start.append(x)
        modes.append(i)
        durations.append(step)

        if x != 0 and (x_new == 0 or abs(x_new) < guard):
            t += step
            x = x_new
            status = Status.ABSORBED
            logger.debug("seed %d absorbed at t=%r", seed, t)
            break
        x = x_new
        if tau >= remaining:
            t = horizon
            status = Status.HORIZON_REACHED
            break
        t += step
        i = -i

    pdmp_log.trace(logger, "seed %d: %d segments, %s", seed, len(t_start), status.value)
    return Trajectory(
        spec=spec,
        t_start=np.array(t_start),
        x_start=np.array(x_start),
        mode=np.array(modes, dtype=np.int8),
        duration=np.array(durations),
        status=status,
        end_time=t,
        x_end=x,
        rng_seed=seed,
        direction=direction,
        guard_time=guard_time,
    )


def _run_one(args) -> Trajectory:
    spec, x0, i0, stop, seed = args
    return simulate(spec, x0, i0, stop, seed)


def simulate_ensemble(spec: SwitchingSpec, initial_points: Sequence[tuple[float, int]],
                      stop: StopCondition, n: int, base_seed: int,
                      threads: int = 1) -> list[Trajectory]:
    """n independent runs; run k starts at initial_points[k % len] with seed splitmix64(base_seed, k)."""
    if n < 1:
        raise DomainError("simulate_ensemble()", n, "ensemble size must be >= 1")
    if not initial_points:
        raise DomainError("simulate_ensemble()", None, "no initial points given")

    jobs = []
    for k in range(n):
        x0, i0 = initial_points[k % len(initial_points)]
        jobs.append((spec, float(x0), int(i0), stop, derive_seed(base_seed, k)))

    logger.info("Simulating %d runs of %s (base seed %d, %d worker(s))",
                n, spec.kind.value, base_seed, threads)
    if threads <= 1 or n == 1:
        return [_run_one(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_one, jobs, chunksize=max(1, n // (4 * threads))))


def uniform_initials(lo: float, hi: float, n: int, seed: int, i0: int = -1) -> list[tuple[float, int]]:
    """Uniform-on-interval initial states, all starting in mode i0."""
    if not hi > lo:
        raise DomainError("uniform_initials()", (lo, hi), "need lo < hi")
    rng = RandomStream(seed)
    return [(lo + (hi - lo) * rng.uniform(), i0) for _ in range(n)]


def _segment_index(traj: Trajectory, t: float) -> int:
    k = int(np.searchsorted(traj.t_start, t, side="right")) - 1
    return min(max(k, 0), traj.n_segments - 1)


def state_at(traj: Trajectory, t: float) -> float:
    if t < 0 or t > traj.end_time:
        raise DomainError("state_at()", t, f"time outside [0, {traj.end_time!r}]")
    if t == traj.end_time:
        return traj.x_end
    k = _segment_index(traj, t)
    p = traj.spec.p(int(traj.mode[k]))
    return flow_value(traj.spec.kind, p, float(traj.x_start[k]), t - float(traj.t_start[k]))


def mode_time_fractions(traj: Trajectory) -> tuple[float, float]:
    total = float(np.sum(traj.duration))
    if total == 0:
        raise InsufficientSamplesError("mode_time_fractions()", None, "trajectory has zero length")
    minus = float(np.sum(traj.duration[traj.mode < 0]))
    return minus / total, 1.0 - minus / total


def validate_trajectory(traj: Trajectory, rel_tol: float = 1e-12) -> None:
    """Walk the segments and raise DomainError on the first broken invariant."""
    kind = traj.spec.kind
    n = traj.n_segments
    if n == 0:
        raise DomainError("validate_trajectory()", None, "no segments")
    for k in range(n - 1):
        end = traj.t_start[k] + traj.duration[k]
        if abs(traj.t_start[k + 1] - end) > rel_tol * max(1.0, abs(end)):
            raise DomainError("validate_trajectory()", k, "segments are not contiguous in time")
        if traj.mode[k + 1] != -traj.mode[k]:
            raise DomainError("validate_trajectory()", k, "modes do not alternate")
        x_next = flow_value(kind, traj.spec.p(int(traj.mode[k])),
                            float(traj.x_start[k]), float(traj.duration[k]))
        if x_next != traj.x_start[k + 1]:
            raise DomainError("validate_trajectory()", k,
                              f"segment end {x_next!r} != next start {traj.x_start[k + 1]!r}")
    if traj.status is not Status.BLEW_UP:
        x_last = flow_value(kind, traj.spec.p(int(traj.mode[-1])),
                            float(traj.x_start[-1]), float(traj.duration[-1]))
        if x_last != traj.x_end:
            raise DomainError("validate_trajectory()", n - 1, "final state does not match last segment")
    total = float(np.sum(traj.duration))
    if abs(total - traj.end_time) > rel_tol * max(1.0, traj.end_time) * n:
        raise DomainError("validate_trajectory()", total, f"durations do not sum to {traj.end_time!r}")


def sample_states(traj: Trajectory, burn_in: float, sample_dt: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(times, states, modes) at burn_in, burn_in + dt, ... below end_time, by exact flow."""
    if sample_dt <= 0:
        raise DomainError("sample_states()", sample_dt, "sampleDt must be > 0")
    n = int(math.ceil((traj.end_time - burn_in) / sample_dt)) if traj.end_time > burn_in else 0
    times = burn_in + sample_dt * np.arange(max(n, 0))
    times = times[times < traj.end_time]
    states = np.empty_like(times)
    modes = np.empty(times.shape, dtype=np.int8)

    seg_of = np.searchsorted(traj.t_start, times, side="right") - 1
    bounds = np.searchsorted(seg_of, np.arange(traj.n_segments + 1), side="left")
    kind = traj.spec.kind
    for k in np.unique(seg_of):
        lo, hi = bounds[k], bounds[k + 1]
        mode = int(traj.mode[k])
        states[lo:hi] = flow_values(kind, traj.spec.p(mode), float(traj.x_start[k]),
                                    times[lo:hi] - traj.t_start[k])
        modes[lo:hi] = mode
    return times, states, modes


def occupation_histogram(traj: Trajectory, bins: int, value_range: tuple[float, float],
                         burn_in: float | None = None, sample_dt: float | None = None) -> Histogram:
    if traj.status is not Status.HORIZON_REACHED:
        raise DomainError("occupation_histogram()", traj.status.value,
                          "trajectory did not reach its horizon")
    burn_in = default_burn_in(traj.spec) if burn_in is None else burn_in
    sample_dt = default_sample_dt(traj.spec) if sample_dt is None else sample_dt
    if not traj.end_time > burn_in:
        raise DomainError("occupation_histogram()", burn_in, "burn-in exceeds the horizon")

    _, states, modes = sample_states(traj, burn_in, sample_dt)
    if len(states) < MIN_SAMPLES:
        raise InsufficientSamplesError("occupation_histogram()", len(states),
                                       f"need at least {MIN_SAMPLES} samples")
    return histogram_from_samples(states, modes, bins, value_range)


def histogram_from_samples(states: np.ndarray, modes: np.ndarray, bins: int,
                           value_range: tuple[float, float]) -> Histogram:
    if len(states) == 0:
        raise InsufficientSamplesError("histogram_from_samples()", 0, "no samples")
    edges = np.linspace(value_range[0], value_range[1], bins + 1)
    minus, _ = np.histogram(states[modes < 0], bins=edges)
    plus, _ = np.histogram(states[modes > 0], bins=edges)
    return Histogram(edges=edges, counts_minus=minus.astype(float),
                     counts_plus=plus.astype(float), n_samples=len(states))


def hopf_simulate(spec: SwitchingSpec, theta0: float, r0: float, i0: int,
                  stop: StopCondition, seed: int) -> PlanarTrajectory:
    if not spec.kind.is_hopf:
        raise DomainError("hopf_simulate()", spec.kind.value, "kind is not a Hopf radial kind")
    if not r0 > 0:
        raise DomainError("hopf_simulate()", r0, "r0 must be > 0")
    theta0 = math.fmod(theta0, 2.0 * math.pi)
    if theta0 < 0:
        theta0 += 2.0 * math.pi
    return PlanarTrajectory(radial=simulate(spec, r0, i0, stop, seed), theta0=theta0)


def hopf_samples(ptraj: PlanarTrajectory, burn_in: float, sample_dt: float) -> dict[str, np.ndarray]:
    times, r, modes = sample_states(ptraj.radial, burn_in, sample_dt)
    return {"t": times, "theta": ptraj.theta_at(times), "r": r, "mode": modes}


def threshold_crossing_times(traj: Trajectory, levels: Sequence[float]) -> dict[float, float | None]:
    """First time X reaches each level (the stopping time of that level).

    Inside a segment the scalar flow is monotone, so a level is crossed at most
    once per segment and the crossing is found by bracketing.
    """
    kind = traj.spec.kind
    out: dict[float, float | None] = {}
    pending = sorted(set(float(a) for a in levels))
    x_first = float(traj.x_start[0]) if traj.n_segments else traj.x_end
    for a in pending:
        if x_first == a:
            out[a] = 0.0
    pending = [a for a in pending if a not in out]

    for k in range(traj.n_segments):
        if not pending:
            break
        p = traj.spec.p(int(traj.mode[k]))
        xs = float(traj.x_start[k])
        dur = float(traj.duration[k])
        last = k == traj.n_segments - 1
        xe = traj.x_end if last else float(traj.x_start[k + 1])
        lo, hi = min(xs, xe), max(xs, xe)
        hit = [a for a in pending if lo <= a <= hi]
        for a in hit:
            if last and traj.status is Status.BLEW_UP:
                # remaining escape time from a is the tail of the segment
                t_a = escape_time(kind, p, a)
                s = dur - t_a if t_a is not None else dur
            elif a == xe:
                s = dur
            else:
                s = brentq(lambda u: flow_value(kind, p, xs, u) - a, 0.0, dur, xtol=1e-14, rtol=1e-14)
            out[a] = float(traj.t_start[k]) + s
        pending = [a for a in pending if a not in out]
    for a in pending:
        out[a] = None
    return out


def ensemble_summary(trajs: Sequence[Trajectory], base_seed: int | None = None) -> dict:
    counts = {s.value: 0 for s in Status}
    for tr in trajs:
        counts[tr.status.value] += 1
    n = len(trajs)
    blow_times = [tr.end_time for tr in trajs if tr.status is Status.BLEW_UP]
    finals = [tr.x_end for tr in trajs if tr.status is not Status.BLEW_UP]
    out = {
        "kind": trajs[0].spec.kind.value if trajs else None,
        "n": n,
        "statusCounts": counts,
        "blowupFraction": counts[Status.BLEW_UP.value] / n if n else 0.0,
        "absorbedFraction": counts[Status.ABSORBED.value] / n if n else 0.0,
        "meanBlowupTime": float(np.mean(blow_times)) if blow_times else None,
        "meanFinalState": float(np.mean(finals)) if finals else None,
        "segments": int(sum(tr.n_segments for tr in trajs)),
    }
    if base_seed is not None:
        out["baseSeed"] = base_seed
    return out
