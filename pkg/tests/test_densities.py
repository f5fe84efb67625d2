import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pdmpswitch.densities import (
    bin_averages,
    density,
    density_exponents,
    density_model,
    density_table,
    flux,
    fokker_planck_residual,
    l1_distance,
    marginal_cdf,
    marginal_density,
    mode_masses,
    normalization,
    sample_marginal,
)
from pdmpswitch.errors import DomainError, RegimeError
from pdmpswitch.normal_forms import NormalFormKind, field_value
from pdmpswitch.pdmp_engine import histogram_from_samples, occupation_histogram, simulate
from pdmpswitch.rng import RandomStream
from pdmpswitch.trajectory import StopCondition, SwitchingSpec

K = NormalFormKind


def switching(kind, p_minus=-1.0, p_plus=1.0, lambda_minus=2.0, lambda_plus=1.0):
    return SwitchingSpec(kind=kind, p_minus=p_minus, p_plus=p_plus,
                         lambda_minus=lambda_minus, lambda_plus=lambda_plus)


@pytest.fixture(scope="module")
def pitchfork():
    return density_model(switching(K.SUP_PITCHFORK))


@pytest.fixture(scope="module")
def transcritical():
    return density_model(switching(K.TRANSCRITICAL))


def test_exponents():
    e = density_exponents(switching(K.SUP_PITCHFORK))
    assert (e.x_exp, e.left_exp, e.right_exp, e.power) == (1.0, -1.0, 0.5, 2)
    e = density_exponents(switching(K.TRANSCRITICAL, p_plus=2.0))
    assert (e.x_exp, e.left_exp, e.right_exp, e.power) == (1.5, -2.0, 0.5, 1)


def test_mode_masses_follow_switching_rates(pitchfork, transcritical):
    for model in (pitchfork, transcritical):
        minus, plus = mode_masses(model)
        assert minus == pytest.approx(1 / 3, abs=1e-8)
        assert plus == pytest.approx(2 / 3, abs=1e-8)
        assert model.c > 0
        assert model.log_c == pytest.approx(math.log(model.c))


def test_supports(pitchfork, transcritical):
    assert pitchfork.support == (0.0, 1.0)
    assert transcritical.support == (0.0, 1.0)
    assert density_model(switching(K.SUP_PITCHFORK, p_plus=4.0)).support == (0.0, 2.0)
    assert density_model(switching(K.TRANSCRITICAL, p_plus=3.0, lambda_minus=4.0)).support == (0.0, 3.0)


def test_model_json_uses_capital_c(pitchfork):
    doc = pitchfork.to_json_dict()
    assert doc["C"] == pitchfork.c
    assert "logC" in doc and "masses" in doc


def test_no_density_outside_super_regime():
    with pytest.raises(RegimeError):
        density_model(switching(K.SUP_PITCHFORK, lambda_minus=1.0))
    with pytest.raises(RegimeError):
        density_model(switching(K.TRANSCRITICAL, lambda_minus=0.5))
    with pytest.raises(DomainError):
        density_model(switching(K.FOLD))
    with pytest.raises(DomainError):
        density_model(switching(K.SUB_PITCHFORK))


def test_hopf_radial_density_is_pitchfork_density(pitchfork):
    hopf = density_model(switching(K.SUP_HOPF_RADIAL))
    assert hopf.c == pitchfork.c
    xs = np.linspace(0.05, 0.95, 7)
    np.testing.assert_array_equal(density(hopf, 1, xs), density(pitchfork, 1, xs))


def test_normalization_matches_model(pitchfork):
    spec = switching(K.SUP_PITCHFORK)
    assert normalization(K.SUP_PITCHFORK, spec) == pitchfork.c


def test_flux_antisymmetry_and_sign(pitchfork, transcritical):
    for model in (pitchfork, transcritical):
        spec = model.spec
        for x in np.linspace(0.01, 0.99, 25):
            fv = flux(model, float(x))
            assert fv.phi_minus + fv.phi_plus == 0.0
            assert fv.phi_minus < 0
            f_m = field_value(spec.kind, spec.p_minus, float(x))
            assert density(model, -1, float(x)) == pytest.approx(fv.phi_minus / f_m, rel=1e-12)
            f_p = field_value(spec.kind, spec.p_plus, float(x))
            assert density(model, 1, float(x)) == pytest.approx(fv.phi_plus / f_p, rel=1e-12)
    with pytest.raises(DomainError):
        flux(pitchfork, 1.0)


@pytest.mark.parametrize("kind,p_plus", [(K.SUP_PITCHFORK, 1.0), (K.SUP_PITCHFORK, 2.5),
                                         (K.TRANSCRITICAL, 1.0), (K.TRANSCRITICAL, 0.7)])
def test_fokker_planck_residuals(kind, p_plus):
    model = density_model(switching(kind, p_minus=-1.5, p_plus=p_plus, lambda_minus=3.0))
    b = model.support[1]
    worst = 0.0
    for x in np.linspace(0.01 * b, 0.99 * b, 100):
        r1, r2 = fokker_planck_residual(model, float(x))
        spec = model.spec
        phi = flux(model, float(x)).phi_minus
        scale = abs(spec.lambda_minus * phi / field_value(kind, spec.p_minus, float(x))) + \
            abs(spec.lambda_plus * phi / field_value(kind, spec.p_plus, float(x)))
        worst = max(worst, abs(r1) / scale, abs(r2) / scale)
    assert worst < 1e-6
    with pytest.raises(DomainError):
        fokker_planck_residual(model, 1e-6 * b)


def test_density_off_support_and_mirror_branch(pitchfork, transcritical):
    assert density(pitchfork, 1, -0.5) == 0.0
    assert density(pitchfork, -1, 1.5) == 0.0
    assert density(pitchfork, 1, -0.3, branch="pi") == density(pitchfork, 1, 0.3)
    np.testing.assert_array_equal(marginal_density(pitchfork, np.array([0.2, 0.4])),
                                  density(pitchfork, -1, np.array([0.2, 0.4]))
                                  + density(pitchfork, 1, np.array([0.2, 0.4])))
    with pytest.raises(DomainError):
        density(transcritical, 1, -0.3, branch="pi")
    with pytest.raises(DomainError):
        density(pitchfork, 0, 0.3)
    with pytest.raises(DomainError):
        density(pitchfork, 1, 0.3, branch="nu")


def test_marginal_cdf(pitchfork):
    assert marginal_cdf(pitchfork, 0.0) == 0.0
    assert marginal_cdf(pitchfork, 1.0) == 1.0
    xs = np.linspace(0.05, 0.95, 10)
    cdf = [marginal_cdf(pitchfork, float(x)) for x in xs]
    assert all(a < b for a, b in zip(cdf, cdf[1:]))
    assert marginal_cdf(pitchfork, 1.0 - 1e-9) == pytest.approx(1.0, abs=1e-3)


def test_bin_averages_integrate_to_mode_masses(pitchfork):
    edges = np.linspace(0.0, 1.0, 201)
    width = np.diff(edges)
    total = float(np.sum(bin_averages(pitchfork, edges, None) * width))
    minus = float(np.sum(bin_averages(pitchfork, edges, -1) * width))
    assert total == pytest.approx(1.0, abs=0.02)
    assert minus == pytest.approx(1 / 3, abs=5e-3)


def test_density_table(pitchfork):
    table = density_table(pitchfork, 1000)
    assert len(table["x"]) == 1000
    assert table["x"][0] > 0 and table["x"][-1] < 1
    np.testing.assert_array_equal(table["rho_marginal"], table["rho_minus"] + table["rho_plus"])
    assert np.all(table["rho_minus"] > 0) and np.all(table["rho_plus"] > 0)
    with pytest.raises(DomainError):
        density_table(pitchfork, 0)


def test_inverse_cdf_samples_match_density(transcritical):
    states, modes = sample_marginal(transcritical, 50000, RandomStream(12), grid=256)
    assert np.all((states > 0) & (states < 1))
    assert np.mean(modes < 0) == pytest.approx(1 / 3, abs=0.01)
    hist = histogram_from_samples(states, modes, 40, (0.0, 1.0))
    assert l1_distance(hist, transcritical) < 0.05


def test_l1_distance_requires_covering_range(pitchfork):
    states = np.array([0.2, 0.3, 0.4])
    modes = np.array([-1, 1, 1], dtype=np.int8)
    hist = histogram_from_samples(states, modes, 5, (0.1, 0.5))
    with pytest.raises(DomainError):
        l1_distance(hist, pitchfork)


@pytest.mark.slow
@pytest.mark.parametrize("kind", [K.SUP_PITCHFORK, K.TRANSCRITICAL])
def test_occupation_measure_matches_density(kind):
    spec = switching(kind)
    model = density_model(spec)
    traj = simulate(spec, 0.5, -1, StopCondition(horizon=5e4), 2024)
    hist = occupation_histogram(traj, 30, (0.0, 1.0))
    assert l1_distance(hist, model) < 0.05
    mass_minus = float(np.sum(hist.density_minus * hist.widths))
    assert mass_minus == pytest.approx(1 / 3, abs=0.02)


def _random_super_specs(n, seed):
    """Super-regime specs with rates and thresholds spread over several decades."""
    rng = np.random.default_rng(seed)
    specs = []
    for k in range(n):
        p_minus = -10 ** rng.uniform(-2, math.log10(3))
        p_plus = 10 ** rng.uniform(-2, math.log10(5))
        lambda_minus = 10 ** rng.uniform(-1, math.log10(200))
        frac = rng.uniform(0.05, 0.95)
        lambda_plus = frac * lambda_minus * p_plus / -p_minus
        kind = K.SUP_PITCHFORK if k % 2 == 0 else K.TRANSCRITICAL
        specs.append(switching(kind, p_minus, p_plus, lambda_minus, lambda_plus))
    return specs


CORNER_SPECS = [
    switching(K.TRANSCRITICAL, -0.1206, 3.161, 23.8, 15.41),
    switching(K.TRANSCRITICAL, -0.215, 4.229, 16.29, 11.66),
    switching(K.TRANSCRITICAL, -1.0, 1.0, 200.0, 100.0),
    switching(K.SUP_PITCHFORK, -0.01, 5.0, 50.0, 0.2),
]


def _check_masses(spec):
    model = density_model(spec)
    total = spec.lambda_minus + spec.lambda_plus
    minus, plus = mode_masses(model)
    assert minus + plus == pytest.approx(1.0, abs=1e-12)
    assert minus == pytest.approx(spec.lambda_plus / total, abs=1e-8)
    assert plus == pytest.approx(spec.lambda_minus / total, abs=1e-8)
    assert math.isfinite(model.log_c)
    c = normalization(spec.kind, spec)
    assert c > 0 and c == model.c
    b = model.support[1]
    cdf = [marginal_cdf(model, b * q) for q in (0.1, 0.5, 0.9)]
    assert 0.0 <= cdf[0] <= cdf[1] <= cdf[2] <= 1.0


@pytest.mark.parametrize("spec", CORNER_SPECS, ids=lambda s: f"{s.kind.value}{s.p_minus}")
def test_sharp_and_flat_kernels_integrate(spec):
    _check_masses(spec)


@pytest.mark.parametrize("spec", _random_super_specs(20, 2718))
def test_mode_masses_over_random_super_specs(spec):
    _check_masses(spec)


@settings(max_examples=20, deadline=None)
@given(log_pm=st.floats(-2.0, 0.4), log_pp=st.floats(-2.0, 0.7), log_lm=st.floats(-1.0, 2.3),
       frac=st.floats(0.05, 0.95), pitchfork=st.booleans())
def test_mode_masses_for_drawn_super_specs(log_pm, log_pp, log_lm, frac, pitchfork):
    p_minus, p_plus, lambda_minus = -10 ** log_pm, 10 ** log_pp, 10 ** log_lm
    kind = K.SUP_PITCHFORK if pitchfork else K.TRANSCRITICAL
    _check_masses(switching(kind, p_minus, p_plus, lambda_minus,
                            frac * lambda_minus * p_plus / -p_minus))


def test_l1_distance_on_mirror_branch(pitchfork):
    rng = RandomStream(5)
    states, modes = sample_marginal(pitchfork, 20000, rng, grid=256)
    upper = histogram_from_samples(states, modes, 20, (0.0, 1.0))
    lower = histogram_from_samples(-states, modes, 20, (-1.0, 0.0))
    d_mu = l1_distance(upper, pitchfork)
    d_pi = l1_distance(lower, pitchfork, branch="pi")
    assert d_pi == pytest.approx(d_mu, abs=1e-6)
    assert d_pi < 0.05
    with pytest.raises(DomainError):
        l1_distance(upper, pitchfork, branch="pi")
    with pytest.raises(DomainError):
        l1_distance(lower, pitchfork)
