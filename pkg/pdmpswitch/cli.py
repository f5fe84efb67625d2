"""
pdmpswitch - switched normal form toolkit

Usage:
    python main.py [--log-level N] [--threads N] COMMAND [options]

Commands:
    classify      regime verdict as JSON
    simulate      one event-exact trajectory (+ occupation histogram)
    density       analytic invariant density table
    blowup        ensemble blow-up statistics
    hopf          polar lift of a Hopf radial run
    app           Rosenzweig-MacArthur / van der Pol / swarming runs and scans
    dump-config   print the JSON config reproducing a command line

Exit status: 0 ok, 2 invalid input, 3 runtime failure, 4 I/O failure.

Sample:
    python main.py classify --kind sup-pitchfork --p-minus -1 --p-plus 1 \\
        --lambda-minus 2 --lambda-plus 1
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Sequence

import numpy as np
from pydantic import ValidationError
from scipy import stats

from pdmpswitch import applications, densities, pdmp_engine, regimes
from pdmpswitch.config import (
    AppConfig,
    BlowupConfig,
    ClassifyConfig,
    DensityConfig,
    HopfConfig,
    SimulateConfig,
    describe_validation_error,
    dump_run_config,
    read_config_dict,
    validate_run_config,
)
from pdmpswitch.errors import (
    ConfigError,
    DomainError,
    Error,
    FieldEvaluationError,
    InsufficientSamplesError,
    QuadratureError,
    RegimeError,
    UndefinedSymbolError,
)
from pdmpswitch.log import setup_logging
from pdmpswitch.normal_forms import NormalFormKind
from pdmpswitch.output import json_text, write_columns_csv, write_json, write_trajectory_csv
from pdmpswitch.rng import derive_seed
from pdmpswitch.settings import Settings, load_settings
from pdmpswitch.trajectory import Status

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

COMMANDS = ("classify", "simulate", "density", "blowup", "hopf", "app")
RUNTIME_ERRORS = (RegimeError, QuadratureError, DomainError, InsufficientSamplesError,
                  UndefinedSymbolError, FieldEvaluationError)


# --- argument parsing ---------------------------------------------------------
# Options store into dotted config paths (dest="switching.pMinus") and are
# suppressed when absent, so a --config file supplies everything not given.

def _opt(p: argparse.ArgumentParser, flag: str, dest: str, **kw) -> None:
    p.add_argument(flag, dest=dest, default=argparse.SUPPRESS, **kw)


def _add_switching(p: argparse.ArgumentParser) -> None:
    _opt(p, "--kind", "switching.kind", choices=[k.value for k in NormalFormKind])
    _opt(p, "--p-minus", "switching.pMinus", type=float)
    _opt(p, "--p-plus", "switching.pPlus", type=float)
    _opt(p, "--lambda-minus", "switching.lambdaMinus", type=float)
    _opt(p, "--lambda-plus", "switching.lambdaPlus", type=float)


def _add_stop(p: argparse.ArgumentParser, prefix: str = "stop") -> None:
    _opt(p, "--horizon", f"{prefix}.horizon", type=float)
    _opt(p, "--blowup-guard", f"{prefix}.blowupGuard", type=float)
    _opt(p, "--absorption-guard", f"{prefix}.absorptionGuard", type=float)


def build_parser() -> argparse.ArgumentParser:
    # accepted before and after the command; subparsers must not reset them
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON run config; flags override it")
    common.add_argument("--log-level", type=int, help="0 (off) .. 5 (trace)")
    common.add_argument("--threads", type=int, help="worker cap for ensembles")

    parser = argparse.ArgumentParser(prog="pdmpswitch", description="Switched normal form toolkit",
                                     parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="regime verdict")
    _add_switching(p)

    p = sub.add_parser("simulate", parents=[common], help="one exact trajectory")
    _add_switching(p)
    _add_stop(p)
    _opt(p, "--x0", "x0", type=float)
    _opt(p, "--i0", "i0", type=int, choices=[-1, 1])
    _opt(p, "--seed", "seed", type=int)
    _opt(p, "--out", "out")
    _opt(p, "--bins", "histogram.bins", type=int)
    _opt(p, "--hist-lo", "histogram.lo", type=float)
    _opt(p, "--hist-hi", "histogram.hi", type=float)
    _opt(p, "--burn-in", "histogram.burnIn", type=float)
    _opt(p, "--sample-dt", "histogram.sampleDt", type=float)
    _opt(p, "--hist-out", "histOut")

    p = sub.add_parser("density", parents=[common], help="analytic density table")
    _add_switching(p)
    _opt(p, "--grid", "grid", type=int)
    _opt(p, "--tol", "tol", type=float)
    _opt(p, "--out", "out")

    p = sub.add_parser("blowup", parents=[common], help="ensemble blow-up statistics")
    _add_switching(p)
    _add_stop(p)
    _opt(p, "--x0", "x0", type=float)
    _opt(p, "--x-range", "xRange", type=float, nargs=2, metavar=("LO", "HI"))
    _opt(p, "--i0", "i0", type=int, choices=[-1, 1])
    _opt(p, "--n", "n", type=int)
    _opt(p, "--seed", "seed", type=int)
    _opt(p, "--out", "out")

    p = sub.add_parser("hopf", parents=[common], help="polar Hopf lift")
    _add_switching(p)
    _add_stop(p)
    _opt(p, "--theta0", "theta0", type=float)
    _opt(p, "--r0", "r0", type=float)
    _opt(p, "--i0", "i0", type=int, choices=[-1, 1])
    _opt(p, "--seed", "seed", type=int)
    _opt(p, "--burn-in", "burnIn", type=float)
    _opt(p, "--sample-dt", "sampleDt", type=float)
    _opt(p, "--bins", "bins", type=int)
    _opt(p, "--out", "out")

    p = sub.add_parser("app", parents=[common], help="application models")
    _opt(p, "--model", "model", choices=["rm", "vdp", "swarm"])
    _opt(p, "--scan", "scan", action="store_const", const=True)
    _opt(p, "--scan-lo", "scanLo", type=float)
    _opt(p, "--scan-hi", "scanHi", type=float)
    _opt(p, "--scan-points", "scanPoints", type=int)
    _opt(p, "--p-minus", "pMinus", type=float)
    _opt(p, "--p-plus", "pPlus", type=float)
    _opt(p, "--lambda-minus", "lambdaMinus", type=float)
    _opt(p, "--lambda-plus", "lambdaPlus", type=float)
    _opt(p, "--x0", "x0", type=float, nargs="+")
    _opt(p, "--i0", "i0", type=int, choices=[-1, 1])
    _add_stop(p)
    _opt(p, "--seed", "seed", type=int)
    _opt(p, "--step-size", "stepSize", type=float)
    _opt(p, "--record-dt", "recordDt", type=float)
    _opt(p, "--beta", "beta", type=float)
    _opt(p, "--m", "m", type=float)
    _opt(p, "--q", "q", type=float)
    _opt(p, "--w2", "w2", type=float)
    _opt(p, "--w3", "w3", type=float)
    _opt(p, "--d0", "d0", type=float)
    _opt(p, "--symmetrized", "symmetrized", action="store_const", const=True)
    _opt(p, "--out", "out")

    p = sub.add_parser("dump-config", parents=[common], help="print the JSON config of a command line")
    p.add_argument("target", choices=COMMANDS)
    p.add_argument("rest", nargs=argparse.REMAINDER)
    return parser


def _deep_merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def config_from_args(ns: argparse.Namespace):
    """RunConfig from a --config file (if any) overridden by the given flags."""
    source = getattr(ns, "config", None)
    data: dict = read_config_dict(source) if source else {}
    flags: dict = {}
    for dest, value in vars(ns).items():
        if dest in ("config", "log_level", "threads", "command", "target", "rest"):
            continue
        node = flags
        *parents, leaf = dest.split(".")
        for part in parents:
            node = node.setdefault(part, {})
        node[leaf] = list(value) if isinstance(value, tuple) else value
    data = _deep_merge(data, flags)
    data["command"] = ns.command
    return validate_run_config(data, source or "command line")


# --- commands ----------------------------------------------------------------

def cmd_classify(cfg: ClassifyConfig, settings: Settings) -> dict:
    return regimes.classify(cfg.switching).to_json_dict()


def _histogram_summary(cfg: SimulateConfig, traj, settings: Settings) -> dict:
    hs = cfg.histogram
    top = float(np.max(np.abs(traj.x_start))) if traj.n_segments else 1.0
    lo = hs.lo if hs.lo is not None else min(0.0, float(np.min(traj.x_start)))
    hi = hs.hi if hs.hi is not None else max(top, lo + 1.0)
    hist = pdmp_engine.occupation_histogram(traj, hs.bins, (lo, hi), hs.burn_in, hs.sample_dt)
    out = {
        "bins": hs.bins,
        "range": [lo, hi],
        "samples": hist.n_samples,
        "totalMass": hist.total_mass(),
        "modeMasses": [float(np.sum(hist.density_minus * hist.widths)),
                       float(np.sum(hist.density_plus * hist.widths))],
    }
    spec = cfg.switching
    end = spec.p_plus if spec.kind is NormalFormKind.TRANSCRITICAL else math.sqrt(spec.p_plus)
    # 0 is invariant, so a pitchfork run started below it lives on the mirror branch
    branch = "pi" if spec.kind is NormalFormKind.SUP_PITCHFORK and traj.x_start[0] < 0 else "mu"
    covered = lo <= -end and hi >= 0 if branch == "pi" else lo <= 0 and hi >= end
    if (spec.kind in densities.SUPPORTED_KINDS and covered
            and regimes.compare_rates(spec.p_minus, spec.p_plus, spec.lambda_minus,
                                      spec.lambda_plus) is regimes.Comparison.SUPER):
        model = densities.density_model(spec)
        out["densityBranch"] = branch
        out["l1Marginal"] = densities.l1_distance(hist, model, branch=branch)
    if cfg.hist_out:
        write_columns_csv(settings.output_path(cfg.hist_out), {
            "lo": hist.edges[:-1], "hi": hist.edges[1:],
            "density_minus": hist.density_minus, "density_plus": hist.density_plus,
            "density": hist.density,
        })
    return out


def cmd_simulate(cfg: SimulateConfig, settings: Settings) -> dict:
    traj = pdmp_engine.simulate(cfg.switching, cfg.x0, cfg.i0, cfg.stop, cfg.seed)
    summary = {
        "seed": cfg.seed,
        "segments": traj.n_segments,
        **traj.status_record(),
        "xEnd": traj.x_end,
    }
    if traj.end_time > 0:
        summary["modeTimeFractions"] = list(pdmp_engine.mode_time_fractions(traj))
    if cfg.histogram is not None:
        if traj.status is Status.HORIZON_REACHED:
            summary["histogram"] = _histogram_summary(cfg, traj, settings)
        else:
            logger.warning("No histogram: run ended with %s at t=%r", traj.status.value, traj.end_time)
            summary["histogram"] = None
    if cfg.out:
        write_trajectory_csv(settings.output_path(cfg.out), traj)
    return summary


def cmd_density(cfg: DensityConfig, settings: Settings) -> dict:
    model = densities.density_model(cfg.switching, cfg.tol)
    table = densities.density_table(model, cfg.grid)
    if cfg.out:
        write_columns_csv(settings.output_path(cfg.out), table)
    return {
        "kind": model.kind.value,
        "support": list(model.support),
        "C": model.c,
        "logC": model.log_c,
        "exponents": model.exponents.to_json_dict(),
        "masses": list(model.masses),
        "rows": len(table["x"]),
    }


def cmd_blowup(cfg: BlowupConfig, settings: Settings) -> dict:
    spec = cfg.switching
    if cfg.x0 is not None:
        initials = [(cfg.x0, cfg.i0)]
    else:
        lo, hi = cfg.x_range
        initials = pdmp_engine.uniform_initials(lo, hi, cfg.n, derive_seed(cfg.seed, cfg.n), cfg.i0)
    ensemble = pdmp_engine.simulate_ensemble(spec, initials, cfg.stop, cfg.n, cfg.seed,
                                             threads=settings.threads)
    fraction, times = regimes.blowup_fraction(ensemble)
    summary = pdmp_engine.ensemble_summary(ensemble, cfg.seed)
    summary["blowupFraction"] = fraction
    summary["escapeThreshold"] = regimes.escape_thresholds(spec)
    summary["verdict"] = regimes.classify(spec).blowup.value
    if cfg.out:
        write_json(settings.output_path(cfg.out), {"blowupTimes": times,
                                                   "guardTimes": [tr.guard_time for tr in ensemble
                                                                  if tr.status is Status.BLEW_UP]})
    return summary


def cmd_hopf(cfg: HopfConfig, settings: Settings) -> dict:
    spec = cfg.switching
    ptraj = pdmp_engine.hopf_simulate(spec, cfg.theta0, cfg.r0, cfg.i0, cfg.stop, cfg.seed)
    radial = ptraj.radial
    summary = {"seed": cfg.seed, "segments": radial.n_segments, **radial.status_record(),
               "theta0": ptraj.theta0}
    if radial.status is Status.HORIZON_REACHED:
        burn_in = pdmp_engine.default_burn_in(spec) if cfg.burn_in is None else cfg.burn_in
        sample_dt = pdmp_engine.default_sample_dt(spec) if cfg.sample_dt is None else cfg.sample_dt
        samples = pdmp_engine.hopf_samples(ptraj, burn_in, sample_dt)
        summary["samples"] = int(len(samples["t"]))
        if len(samples["t"]):
            ks = stats.kstest(samples["theta"] / (2.0 * math.pi), "uniform")
            summary["ksAngle"] = float(ks.statistic)
        if spec.kind is NormalFormKind.SUP_HOPF_RADIAL and regimes.compare_rates(
                spec.p_minus, spec.p_plus, spec.lambda_minus, spec.lambda_plus) is regimes.Comparison.SUPER:
            top = math.sqrt(spec.p_plus)
            hist = pdmp_engine.histogram_from_samples(samples["r"], samples["mode"], cfg.bins, (0.0, top))
            summary["l1Radial"] = densities.l1_distance(hist, densities.density_model(spec))
        if cfg.out:
            write_columns_csv(settings.output_path(cfg.out), samples)
    return summary


def _app_scan(cfg: AppConfig) -> tuple[dict, dict]:
    if cfg.model == "rm":
        lo, hi = cfg.scan_lo or 0.6, cfg.scan_hi or 10.0
        cols = applications.rm_hopf_scan(np.linspace(lo, hi, cfg.scan_points), cfg.beta, cfg.m)
        signs = np.nonzero(np.diff(np.sign(cols["trace"])))[0]
        info = {"signChanges": [[float(cols["p"][k]), float(cols["p"][k + 1])] for k in signs]}
        if len(signs) == 1:
            k = int(signs[0])
            info["hopfPoint"] = applications.rm_hopf_point(float(cols["p"][k]), float(cols["p"][k + 1]),
                                                           beta=cfg.beta, m=cfg.m)
        return cols, info
    if cfg.model == "vdp":
        lo, hi = cfg.scan_lo or -1.5, cfg.scan_hi or 1.5
        cols = applications.vdp_scan(np.linspace(lo, hi, cfg.scan_points))
        return cols, {"foldPoints": list(applications.vdp_fold_points())}
    threshold = applications.swarm_pitchfork_threshold(cfg.q, cfg.w3, cfg.d0)
    lo, hi = cfg.scan_lo or 0.5 * threshold, cfg.scan_hi or 2.0 * threshold
    a0s = np.linspace(lo, hi, cfg.scan_points)
    upper = []
    for a0 in a0s:
        params = applications.SwarmParams(q=cfg.q, w2=cfg.w2, w3=cfg.w3, a0=float(a0), d0=cfg.d0)
        upper.append(applications.swarm_ordered_branch(params)[0] if a0 >= threshold else 0.5)
    return {"a0": a0s, "x1_plus": np.array(upper)}, {"threshold": threshold}


def cmd_app(cfg: AppConfig, settings: Settings) -> dict:
    summary: dict = {"model": cfg.model}
    if cfg.scan:
        cols, info = _app_scan(cfg)
        summary.update(info)
        summary["rows"] = len(next(iter(cols.values())))
        if cfg.out:
            write_columns_csv(settings.output_path(cfg.out), cols)
        return summary

    if cfg.model == "rm":
        gt = applications.rm_switched(cfg.p_minus, cfg.p_plus, cfg.lambda_minus, cfg.lambda_plus,
                                      cfg.x0, cfg.stop, cfg.seed, cfg.step_size, cfg.record_dt,
                                      cfg.beta, cfg.m, cfg.i0)
    elif cfg.model == "vdp":
        gt = applications.vdp_switched(cfg.p_minus, cfg.p_plus, cfg.lambda_minus, cfg.lambda_plus,
                                       cfg.x0[0], cfg.stop, cfg.seed, cfg.step_size, cfg.record_dt, cfg.i0)
    else:
        params = applications.SwarmParams(q=cfg.q, w2=cfg.w2, w3=cfg.w3, a0=cfg.p_minus, d0=cfg.d0)
        gt = applications.swarm_switched(params, cfg.p_minus, cfg.p_plus, cfg.lambda_minus,
                                         cfg.lambda_plus, cfg.x0, cfg.stop, cfg.seed, cfg.step_size,
                                         cfg.record_dt, cfg.symmetrized, cfg.i0)
    summary.update({"seed": cfg.seed, "status": gt.status.value, "t": gt.end_time,
                    "xEnd": gt.x_end.tolist(), "switches": int(len(gt.switch_times))})
    if cfg.out:
        if cfg.record_dt is not None:
            times, states, modes = gt.record_times, gt.record_states, gt.record_modes
        else:
            times, states, modes = gt.switch_times, gt.switch_states, gt.switch_modes
        cols = {"t": times}
        for j in range(states.shape[1]):
            cols[f"x{j + 1}"] = states[:, j]
        cols["mode"] = modes
        write_columns_csv(settings.output_path(cfg.out), cols)
    return summary


HANDLERS = {
    ClassifyConfig: cmd_classify,
    SimulateConfig: cmd_simulate,
    DensityConfig: cmd_density,
    BlowupConfig: cmd_blowup,
    HopfConfig: cmd_hopf,
    AppConfig: cmd_app,
}


def handle_error(e: BaseException) -> int:
    if isinstance(e, ValidationError):
        msg, code = describe_validation_error(e), EXIT_INVALID
    elif isinstance(e, ConfigError):
        msg, code = e.reason, EXIT_INVALID
    elif isinstance(e, RUNTIME_ERRORS):
        msg, code = str(e), EXIT_RUNTIME
    elif isinstance(e, OSError):
        msg, code = str(e), EXIT_IO
    elif isinstance(e, Error):
        msg, code = str(e), EXIT_RUNTIME
    else:
        raise e
    print(f"Error: {msg}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command == "dump-config":
            inner = parser.parse_args([ns.target, *ns.rest])
            if getattr(inner, "config", None) is None and getattr(ns, "config", None):
                inner.config = ns.config
            ns = inner
            dumping = True
        else:
            dumping = False
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_INVALID

    try:
        settings = load_settings()
        overrides = {}
        for key in ("log_level", "threads"):
            if getattr(ns, key, None) is not None:
                overrides[key] = getattr(ns, key)
        if overrides:
            settings = Settings(**{**settings.model_dump(), **overrides})
        setup_logging(settings.log_level, settings.log_file)

        cfg = config_from_args(ns)
        if dumping:
            sys.stdout.write(dump_run_config(cfg))
            return EXIT_OK
        logger.info("Running %s", cfg.command)
        summary = HANDLERS[type(cfg)](cfg, settings)
        sys.stdout.write(json_text(summary))
        return EXIT_OK
    except (Error, ValidationError, OSError) as e:
        return handle_error(e)


if __name__ == "__main__":
    sys.exit(main())
