"""Closed-form invariant densities of the switched supercritical pitchfork and transcritical forms.

With u = x**k (k = 2 for the pitchfork, k = 1 for the transcritical form) the
stationary fluxes are phi(-1) = -C g(x) and phi(+1) = C g(x) where

    g(x) = x**xExp * (u - p-)**leftExp * (p+ - u)**rightExp
    xExp = -l-/p- - l+/p+,  leftExp = l-/(k p-),  rightExp = l+/(k p+)

and the densities are rho_i = phi_i / f_i. All evaluation happens in log
space; integrals use tanh-sinh in the logistic variable t = logit(x/b), which maps
the power singularities at both ends of the support to exponential tails.
"""

from __future__ import annotations

import logging
import math
from functools import cached_property
from typing import Sequence

import numpy as np
from pydantic import Field
from scipy.optimize import minimize_scalar

from pdmpswitch.errors import DomainError, InsufficientSamplesError, QuadratureError, RegimeError
from pdmpswitch.normal_forms import NormalFormKind, field_value
from pdmpswitch.quadrature import tanh_sinh
from pdmpswitch.records import Record
from pdmpswitch.regimes import Comparison, compare_rates
from pdmpswitch.rng import RandomStream
from pdmpswitch.trajectory import Histogram, SwitchingSpec

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(5)
# peak search grid in t, tail cut (log units) and the widest window tried
PEAK_SPAN = 60.0
PEAK_POINTS = 2401
TAIL_CUT = 60.0
MAX_SPAN = 1e12

SUPPORTED_KINDS = (
    NormalFormKind.SUP_PITCHFORK,
    NormalFormKind.SUP_HOPF_RADIAL,
    NormalFormKind.TRANSCRITICAL,
)


class DensityExponents(Record):
    x_exp: float
    left_exp: float
    right_exp: float
    power: int

    def left_factor_exp(self, mode: int) -> float:
        return self.left_exp - (1 - mode) / 2

    def right_factor_exp(self, mode: int) -> float:
        return self.right_exp - (1 + mode) / 2


class DensityModel(Record):
    kind: NormalFormKind
    spec: SwitchingSpec
    support: tuple[float, float]
    c: float = Field(alias="C")
    log_c: float
    exponents: DensityExponents
    masses: tuple[float, float]
    tol: float


class FluxValue(Record):
    phi_minus: float
    phi_plus: float


def density_exponents(spec: SwitchingSpec) -> DensityExponents:
    k = 1 if spec.kind is NormalFormKind.TRANSCRITICAL else 2
    return DensityExponents(
        x_exp=-spec.lambda_minus / spec.p_minus - spec.lambda_plus / spec.p_plus,
        left_exp=spec.lambda_minus / (k * spec.p_minus),
        right_exp=spec.lambda_plus / (k * spec.p_plus),
        power=k,
    )


def _support_end(spec: SwitchingSpec) -> float:
    if spec.kind is NormalFormKind.TRANSCRITICAL:
        return spec.p_plus
    return math.sqrt(spec.p_plus)


def _check_spec(spec: SwitchingSpec, op: str) -> None:
    if spec.kind not in SUPPORTED_KINDS:
        raise DomainError(op, spec.kind.value, "no invariant density exists for this kind")
    cmp = compare_rates(spec.p_minus, spec.p_plus, spec.lambda_minus, spec.lambda_plus)
    if cmp is not Comparison.SUPER:
        raise RegimeError(op, spec.kind.value,
                          f"densities exist only when l+/p+ < -l-/p- (rates are {cmp.value})")


class _Kernel:
    """Log of x**(xExp-1) * L**l * R**r for one mode, L = u - p-, R = p+ - u.

    Integrals run in t = logit(x / b). With x = b*s(t), s the logistic
    function, the integrand is smooth on the whole line and decays like
    exp(xExp*t) on the left and exp(-(r+1)*t) on the right, so the endpoint
    powers of the support never reach the quadrature.
    """

    def __init__(self, spec: SwitchingSpec, e: DensityExponents, mode: int):
        self.p_minus = spec.p_minus
        self.b = _support_end(spec)
        self.log_b = math.log(self.b)
        self.k = e.power
        self.alpha = e.x_exp
        self.l = e.left_factor_exp(mode)
        self.r = e.right_factor_exp(mode)

    def _log_lr(self, x: np.ndarray, d: np.ndarray) -> np.ndarray:
        if self.k == 2:
            log_left = np.log(x * x - self.p_minus)
            log_right = np.log(d) + np.log(self.b + x)
        else:
            log_left = np.log(x - self.p_minus)
            log_right = np.log(d)
        return self.l * log_left + self.r * log_right

    def log_value(self, x: np.ndarray) -> np.ndarray:
        return (self.alpha - 1.0) * np.log(x) + self._log_lr(x, self.b - x)

    def log_integrand(self, t):
        """log of kernel(x(t)) * dx/dt."""
        t = np.asarray(t, dtype=float)
        log_s = -np.logaddexp(0.0, -t)
        log_1s = -np.logaddexp(0.0, t)
        x = self.b * np.exp(log_s)
        out = (self.alpha + self.r) * self.log_b + self.alpha * log_s + (self.r + 1.0) * log_1s
        if self.k == 2:
            return out + self.l * np.log(x * x - self.p_minus) + self.r * np.log(self.b + x)
        return out + self.l * np.log(x - self.p_minus)

    @cached_property
    def peak(self) -> tuple[float, float]:
        """(t, value) at the maximum of log_integrand."""
        ts = np.linspace(-PEAK_SPAN, PEAK_SPAN, PEAK_POINTS)
        k = int(np.argmax(self.log_integrand(ts)))
        step = ts[1] - ts[0]
        res = minimize_scalar(lambda t: -float(self.log_integrand(t)),
                              bounds=(ts[k] - step, ts[k] + step), method="bounded",
                              options={"xatol": 1e-10})
        t_star = float(res.x)
        return t_star, float(self.log_integrand(t_star))

    def _edge(self, direction: int) -> float:
        t0, g0 = self.peak
        step = 1.0
        while step <= MAX_SPAN:
            t = t0 + direction * step
            if float(self.log_integrand(t)) < g0 - TAIL_CUT:
                return t
            step *= 2.0
        raise QuadratureError("density_model()", (self.alpha, self.r + 1.0),
                              "integrand tails do not decay inside the search window")

    @cached_property
    def window(self) -> tuple[float, float]:
        return self._edge(-1), self._edge(1)


def _logit(y: float) -> float:
    return math.log(y) - math.log1p(-y)


def _log_mode_integral(kern: _Kernel, upper: float, tol: float) -> float:
    """log of the integral of the unnormalized mode density over (0, upper)."""
    if upper <= 0:
        return -math.inf
    t_star, g_star = kern.peak
    t_lo, t_hi = kern.window
    t_up = t_hi if upper >= kern.b else min(t_hi, _logit(upper / kern.b))
    if t_up <= t_lo:
        return -math.inf

    def f(t, _d):
        return np.exp(kern.log_integrand(t) - g_star)

    # split at the maximum so each piece is monotone with its peak at an end
    total = tanh_sinh(f, t_lo, min(t_star, t_up), tol=tol).value
    if t_up > t_star:
        total += tanh_sinh(f, t_star, t_up, tol=tol).value
    if total <= 0:
        return -math.inf
    return g_star + math.log(total)


def normalization(kind: NormalFormKind, spec: SwitchingSpec, tol: float = DEFAULT_TOL) -> float:
    """Shared constant C making the two mode densities integrate to 1 jointly."""
    if kind is not spec.kind:
        spec = spec.model_copy(update={"kind": kind})
    return density_model(spec, tol).c


def density_model(spec: SwitchingSpec, tol: float = DEFAULT_TOL) -> DensityModel:
    _check_spec(spec, "density_model()")
    if not tol > 0:
        raise DomainError("density_model()", tol, "tol must be > 0")
    e = density_exponents(spec)
    b = _support_end(spec)
    logs = [_log_mode_integral(_Kernel(spec, e, mode), b, tol) for mode in (-1, 1)]
    log_total = float(np.logaddexp(*logs))
    log_c = -log_total
    masses = (math.exp(logs[0] - log_total), math.exp(logs[1] - log_total))
    logger.debug("density model %s: log C=%.12g, masses=(%.12g, %.12g)",
                 spec.kind.value, log_c, *masses)
    return DensityModel(kind=spec.kind, spec=spec, support=(0.0, b), c=math.exp(log_c),
                        log_c=log_c, exponents=e, masses=masses, tol=tol)


def mode_masses(model: DensityModel) -> tuple[float, float]:
    return model.masses


def density(model: DensityModel, mode: int, x, branch: str = "mu"):
    """Normalized density of one mode; 0 off the open support.

    branch="pi" gives the mirror measure of the pitchfork on (-sqrt(p+), 0).
    """
    if mode not in (-1, 1):
        raise DomainError("density()", mode, "mode must be -1 or +1")
    if branch == "pi":
        if model.kind is not NormalFormKind.SUP_PITCHFORK:
            raise DomainError("density()", branch, "mirror branch exists only for the pitchfork")
        x = -np.asarray(x, dtype=float)
    elif branch != "mu":
        raise DomainError("density()", branch, "branch must be 'mu' or 'pi'")

    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    b = model.support[1]
    inside = (xs > 0) & (xs < b)
    out = np.zeros_like(xs)
    if np.any(inside):
        kern = _Kernel(model.spec, model.exponents, mode)
        out[inside] = np.exp(model.log_c + kern.log_value(xs[inside]))
    return float(out[0]) if scalar else out


def marginal_density(model: DensityModel, x, branch: str = "mu"):
    return density(model, -1, x, branch) + density(model, 1, x, branch)


def _log_g(model: DensityModel, x: float) -> float:
    e = model.exponents
    b = model.support[1]
    if e.power == 2:
        log_left = math.log(x * x - model.spec.p_minus)
        log_right = math.log(b - x) + math.log(b + x)
    else:
        log_left = math.log(x - model.spec.p_minus)
        log_right = math.log(b - x)
    return e.x_exp * math.log(x) + e.left_exp * log_left + e.right_exp * log_right


def _phi_minus(model: DensityModel, x: float) -> float:
    return -math.exp(model.log_c + _log_g(model, x))


def flux(model: DensityModel, x: float) -> FluxValue:
    b = model.support[1]
    if not 0 < x < b:
        raise DomainError("flux()", x, f"x must lie strictly inside (0, {b!r})")
    phi = _phi_minus(model, x)
    return FluxValue(phi_minus=phi, phi_plus=-phi)


def fokker_planck_residual(model: DensityModel, x: float) -> tuple[float, float]:
    """Residuals of phi'(-1) = -l- phi(-1)/f(-1) + l+ phi(+1)/f(+1) and its mirror."""
    b = model.support[1]
    margin = 1e-3 * b
    if not margin <= x <= b - margin:
        raise DomainError("fokker_planck_residual()", x,
                          f"x must keep a distance {margin!r} from the support ends")
    spec = model.spec
    h = 1e-6 * b
    phi_m = _phi_minus(model, x)
    phi_p = -phi_m
    dphi_m = (_phi_minus(model, x + h) - _phi_minus(model, x - h)) / (2.0 * h)
    dphi_p = (-_phi_minus(model, x + h) + _phi_minus(model, x - h)) / (2.0 * h)
    f_m = field_value(spec.kind, spec.p_minus, x)
    f_p = field_value(spec.kind, spec.p_plus, x)
    exchange = -spec.lambda_minus * phi_m / f_m + spec.lambda_plus * phi_p / f_p
    return dphi_m - exchange, dphi_p + exchange


def _kernels(model: DensityModel) -> tuple[_Kernel, _Kernel]:
    return tuple(_Kernel(model.spec, model.exponents, mode) for mode in (-1, 1))


def _cdf(model: DensityModel, kernels: Sequence[_Kernel], x: float) -> float:
    b = model.support[1]
    if x <= 0:
        return 0.0
    if x >= b:
        return 1.0
    logs = [_log_mode_integral(kern, x, model.tol) for kern in kernels]
    return min(1.0, math.exp(model.log_c + float(np.logaddexp(*logs))))


def marginal_cdf(model: DensityModel, x: float) -> float:
    return _cdf(model, _kernels(model), x)


def _cdf_grid(model: DensityModel, n: int) -> tuple[np.ndarray, np.ndarray]:
    b = model.support[1]
    s = np.linspace(0.0, 1.0, n + 1)
    xs = 0.5 * b * (1.0 - np.cos(np.pi * s))
    kernels = _kernels(model)
    cdf = np.array([_cdf(model, kernels, float(x)) for x in xs])
    cdf[0], cdf[-1] = 0.0, 1.0
    return xs, np.maximum.accumulate(cdf)


def sample_marginal(model: DensityModel, n: int, rng: RandomStream,
                    grid: int = 1024) -> tuple[np.ndarray, np.ndarray]:
    """(states, modes) drawn from the analytic law by inverse-CDF on a tabulated grid."""
    if n < 1:
        raise DomainError("sample_marginal()", n, "n must be >= 1")
    xs, cdf = _cdf_grid(model, grid)
    u = rng.uniforms(n)
    states = np.interp(u, cdf, xs)
    b = model.support[1]
    states = np.clip(states, b * 1e-15, b * (1 - 1e-15))
    rho_m = density(model, -1, states)
    rho_p = density(model, 1, states)
    v = rng.uniforms(n)
    modes = np.where(v * (rho_m + rho_p) < rho_m, -1, 1).astype(np.int8)
    return states, modes


def bin_averages(model: DensityModel, edges: np.ndarray, mode: int | None,
                 branch: str = "mu") -> np.ndarray:
    """Average of the analytic density over each bin by 5-point Gauss-Legendre."""
    lo, hi = edges[:-1], edges[1:]
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    pts = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    if mode is None:
        vals = marginal_density(model, pts.ravel(), branch)
    else:
        vals = density(model, mode, pts.ravel(), branch)
    return 0.5 * (vals.reshape(pts.shape) @ _GAUSS_W)


def l1_distance(hist: Histogram, model: DensityModel, mode: int | None = None,
                branch: str = "mu") -> float:
    """sum |empirical - analytic bin average| * width; mode None compares marginals.

    branch="pi" compares against the mirrored pitchfork measure on (-sqrt(p+), 0).
    """
    if hist.n_samples == 0:
        raise InsufficientSamplesError("l1_distance()", 0, "histogram holds no samples")
    lo, hi = model.support
    if branch == "pi":
        lo, hi = -hi, -lo
    if hist.edges[0] > lo or hist.edges[-1] < hi:
        raise DomainError("l1_distance()", (hist.edges[0], hist.edges[-1]),
                          f"histogram range must cover the support ({lo!r}, {hi!r})")
    analytic = bin_averages(model, hist.edges, mode, branch)
    return float(np.sum(np.abs(hist.mode_density(mode) - analytic) * hist.widths))


def density_grid(model: DensityModel, grid: int | Sequence[float]) -> np.ndarray:
    if isinstance(grid, int):
        if grid < 1:
            raise DomainError("density_table()", grid, "grid must have at least one point")
        return np.linspace(model.support[0], model.support[1], grid + 2)[1:-1]
    return np.asarray(grid, dtype=float)


def density_table(model: DensityModel, grid: int | Sequence[float]) -> dict[str, np.ndarray]:
    xs = density_grid(model, grid)
    rho_m = density(model, -1, xs)
    rho_p = density(model, 1, xs)
    return {"x": xs, "rho_minus": rho_m, "rho_plus": rho_p, "rho_marginal": rho_m + rho_p}
