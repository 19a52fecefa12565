import cmath
import math

import numpy as np
import pytest

from resurgent_pi.borel_analysis import borel_analysis
from resurgent_pi.borel_analysis.borel_analysis import XiPath
from resurgent_pi.series_engine import series_engine
from resurgent_pi.series_engine.series_engine import Anchor, TruncatedSeries
from resurgent_pi.stokes_geometry import stokes_geometry
from resurgent_pi.utils import utils


def test_pade_of_exponential():
    series = TruncatedSeries.from_coeffs([1 / math.factorial(n) for n in range(5)])
    approx = borel_analysis.pade(series, 2, 2)
    assert approx.degrees == (2, 2)
    expected = (1 + 0.25 + 0.25 / 12) / (1 - 0.25 + 0.25 / 12)
    assert abs(approx(0.5) - expected) < 1e-12


def test_pade_even_series():
    approx = borel_analysis.pade(TruncatedSeries.from_coeffs([1, 0, 1]), 0, 2)
    poles = np.sort_complex(borel_analysis.nearest_singularities(approx))
    assert np.allclose(poles, [-1, 1])


def test_pade_geometric_series():
    approx = borel_analysis.pade(TruncatedSeries.from_coeffs([1, 1, 1]), 1, 1)
    assert np.allclose(approx.poles, [1])
    assert abs(approx(0.5) - 2) < 1e-12
    with pytest.raises(ValueError):
        approx(1.0)


def test_pade_degenerate():
    with pytest.raises(utils.PadeDegeneracyError):
        borel_analysis.pade(TruncatedSeries.from_coeffs([1, 0, 0, 0, 0]), 2, 2)
    with pytest.raises(ValueError):
        borel_analysis.pade(TruncatedSeries.from_coeffs([1, 1]), 2, 2)


@pytest.mark.parametrize("z", [1.0, 2.0])
def test_pade_locates_singular_values(table, z):
    anchor = Anchor.from_z(z)
    omega, _ = series_engine.omega_hat(anchor, 40, table)
    approx = borel_analysis.pade(omega, 20, 20)
    poles = borel_analysis.nearest_singularities(approx)[:2]
    expected = z ** 5 / 30
    for target in (expected, -expected):
        assert np.min(np.abs(poles - target)) / expected < 0.005


def test_lateral_path_geometry():
    alpha, modulus, detour = 0.3, 2.0, 0.1
    path = XiPath.lateral(alpha, 3.0, "L", modulus, detour)
    delta = math.asin(detour / modulus)
    corner = borel_analysis.TAYLOR_FRACTION * modulus
    assert abs(path.vertices[2] - corner * cmath.exp(1j * (alpha + delta))) < 1e-12
    assert math.isclose(path.lateral_angle, alpha + delta)
    right = XiPath.lateral(alpha, 3.0, "R", modulus, detour)
    assert math.isclose(right.lateral_angle, alpha - delta)
    with pytest.raises(ValueError):
        XiPath.lateral(alpha, 3.0, "L", modulus, 1.0)
    with pytest.raises(ValueError):
        XiPath.lateral(alpha, 1.0, "L", modulus, detour)


def test_march_matches_taylor(table):
    anchor = Anchor.from_z(1.0)
    length = abs(anchor.w) / 2
    result = borel_analysis.march_continue(anchor, XiPath.ray(math.pi / 2, length), length / 100, table)
    plus, minus = series_engine.phi_hat(anchor, 100, table)
    omega, constant = series_engine.omega_hat(anchor, 100, table)
    assert np.allclose(result.phi_plus, plus(result.xi), rtol=1e-6, atol=0)
    assert np.allclose(result.phi_minus, minus(result.xi), rtol=1e-6, atol=0)
    scale = np.max(np.abs(omega(result.xi)))
    assert np.max(np.abs(result.omega - omega(result.xi) - constant)) < 1e-6 * scale
    assert result.refinement < borel_analysis.REFINEMENT_TOLERANCE
    assert list(result.to_dataframe().columns) == borel_analysis.CSV_COLUMNS


def test_march_convergence_order(table):
    anchor = Anchor.from_z(1.0)
    length = abs(anchor.w) / 2
    assert borel_analysis.convergence_order(anchor, math.pi / 2, length, length / 40, table) >= 1.8


def test_march_step_must_divide_length(table):
    with pytest.raises(ValueError):
        borel_analysis.march_continue(Anchor.from_z(1.0), XiPath.ray(math.pi / 2, 0.01), 0.003, table)


def test_blowup_on_stokes_ray(table):
    anchor = Anchor.from_z(1.0)
    xi0 = abs(anchor.w)
    step = xi0 / 150
    path = XiPath.ray(0.0, 1.2 * xi0)
    result = borel_analysis.march_continue(anchor, path, step, table, detect_blowup=True)
    assert result.blowup_at is not None
    assert abs(abs(result.blowup_at) - xi0) / xi0 < 0.02
    assert np.max(np.abs(result.xi)) < xi0
    with pytest.raises(utils.ClearanceError):
        borel_analysis.march_continue(anchor, path, step, table)


@pytest.mark.parametrize("alpha", [math.pi / 2, math.pi / 4, 3 * math.pi / 4])
def test_weighted_norm_bound(table, alpha):
    anchor = Anchor.from_z(1.2)
    length = 2 * abs(anchor.w)
    result = borel_analysis.march_continue(anchor, XiPath.ray(alpha, length), length / 200, table, richardson=False)
    assert result.z_clearance >= 1
    assert borel_analysis.weighted_norm(result, 96) <= 1.05
    bound, rate = result.bound_report
    assert rate >= 0
    assert np.all(np.abs(result.omega) <= bound * np.exp(rate * np.abs(result.xi)) * (1 + 1e-12))


def test_exponential_type_scan(table):
    frame = borel_analysis.exponential_type_scan([1.0, 1.5], math.pi / 2, table, extent=1.0, n_steps=60)
    assert list(frame.columns) == ["modulus", "K", "C", "z_clearance"]
    assert len(frame) == 2
    assert (frame["K"] >= 0).all()


def test_singular_value_on_ray():
    anchor = Anchor.from_z(1.0)
    assert borel_analysis.singular_value_on_ray(anchor, 0.0) == anchor.w
    assert borel_analysis.singular_value_on_ray(anchor, math.pi) == -anchor.w
    assert borel_analysis.singular_value_on_ray(anchor, 1.0) is None


def test_variation_vanishes_on_regular_direction(table):
    anchor = Anchor.from_z(1.0)
    result = borel_analysis.variation(anchor, math.pi / 2, 0.001, 0.0001, table, offsets=[0.001, 0.002])
    assert not result.stokes
    assert np.all(result.delta_omega == 0)
    assert np.all(result.profile([0.001]) == 0)


@pytest.mark.slow
def test_variation_components_integrate_to_omega(table):
    anchor = stokes_geometry.anchor_from_t(1, 0)
    alpha = math.pi / 4
    modulus = abs(anchor.w)
    h = 0.01 * modulus
    offsets = 0.4 * modulus + h * np.arange(-2, 3)
    result = borel_analysis.variation(anchor, alpha, 0.1 * modulus, modulus / 100, table, offsets=offsets)
    assert result.stokes
    omega = result.delta_omega
    derivative = (omega[0] - 8 * omega[1] + 8 * omega[3] - omega[4]) / (12 * h)
    components = result.delta_plus[2] + result.delta_minus[2]
    assert abs(components - cmath.exp(-1j * alpha) * derivative) < 1e-3 * abs(components)


def test_pade_agrees_with_march(table):
    anchor = Anchor.from_z(1.0)
    modulus = abs(anchor.w)
    length = 0.9 * modulus
    result = borel_analysis.march_continue(anchor, XiPath.ray(math.pi / 2, length), length / 180, table)
    omega, constant = series_engine.omega_hat(anchor, 40, table)
    approx = borel_analysis.pade(omega, 20, 20)
    outer = np.abs(result.xi) >= 0.6 * modulus
    scale = np.max(np.abs(result.omega))
    assert np.max(np.abs(approx(result.xi[outer]) + constant - result.omega[outer])) < 1e-4 * scale


def test_lateral_march_bound(table):
    anchor = Anchor.from_z(1.0)
    modulus = abs(anchor.w)
    path = XiPath.lateral(0.0, 3 * modulus, "L", modulus, 0.1 * modulus)
    result = borel_analysis.march_continue(anchor, path, 3 * modulus / 720, table)
    assert abs(np.abs(result.xi[-1]) - 3 * modulus) < 1e-9
    assert np.all(np.isfinite(result.omega))
    assert np.all(np.isfinite(result.phi_plus)) and np.all(np.isfinite(result.phi_minus))
    bound, rate = result.bound_report
    assert 0 < result.z_clearance < 1
    assert rate < 96 / result.z_clearance ** 8
    assert np.all(np.abs(result.omega) <= bound * np.exp(rate * np.abs(result.xi)) * (1 + 1e-12))


@pytest.mark.slow
def test_variation_step_halving(table):
    anchor = Anchor.from_z(1.0)
    detour = 0.1 * abs(anchor.w)
    runs = [borel_analysis.variation(anchor, 0.0, detour, detour / k, table, offsets=[0.01]) for k in (24, 48)]
    coarse, fine = runs[0].delta_omega[0], runs[1].delta_omega[0]
    assert runs[0].stokes
    assert abs(fine) > 1e-10
    assert abs(coarse - fine) < 5e-4 * abs(fine)


@pytest.mark.slow
def test_variation_antisymmetry(table):
    # ω is odd in ξ and ξ → -ξ exchanges φ_+ with φ_-
    anchor = Anchor.from_z(1.0)
    detour = 0.1 * abs(anchor.w)
    offsets = [0.01, 0.015]
    ahead = borel_analysis.variation(anchor, 0.0, detour, detour / 24, table, offsets=offsets)
    behind = borel_analysis.variation(anchor, math.pi, detour, detour / 24, table, offsets=offsets)
    assert abs(behind.xi0 + ahead.xi0) < 1e-15
    assert np.allclose(behind.delta_omega, -ahead.delta_omega, rtol=1e-3, atol=0)
    assert np.allclose(behind.delta_plus, ahead.delta_minus, rtol=1e-3, atol=0)
    assert np.allclose(behind.delta_minus, ahead.delta_plus, rtol=1e-3, atol=0)


def test_exponential_type_decreases(table):
    moduli = [1.0, 1.5, 2.0]
    frame = borel_analysis.exponential_type_scan(moduli, math.pi / 8, table, extent=1.0, n_steps=60)
    rates = frame["K"].to_numpy()
    assert rates[0] > 0
    assert np.all(np.diff(rates) < 0)
    # ω(λz, λ⁵ξ) = λ⁻³ω(z, ξ)
    for modulus, rate in zip(moduli[1:], rates[1:]):
        assert abs(rate * modulus ** 5 / rates[0] - 1) < 0.01


def test_singularities_scale_with_complex_factor(table):
    scale = 1.3 * cmath.exp(0.4j)
    poles = {}
    for z in (1.0, scale):
        omega, _ = series_engine.omega_hat(Anchor.from_z(z), 40, table)
        poles[z] = borel_analysis.nearest_singularities(borel_analysis.pade(omega, 20, 20))[:2]
    expected = scale ** 5 / 30
    for pole in poles[1.0]:
        assert np.min(np.abs(poles[scale] - scale ** 5 * pole)) < 1e-4 * abs(expected)
    for target in (expected, -expected):
        assert np.min(np.abs(poles[scale] - target)) < 0.005 * abs(expected)
