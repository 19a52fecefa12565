import math

import numpy as np
import pytest

from resurgent_pi.resummation import resummation
from resurgent_pi.series_engine import series_engine
from resurgent_pi.series_engine.series_engine import Anchor, TruncatedSeries
from resurgent_pi.stokes_geometry import stokes_geometry
from resurgent_pi.utils import utils


def test_anchor_relations():
    anchor = Anchor.from_z(1.3 + 0.4j)
    assert abs(anchor.z ** 4 + 24 * anchor.t) < 1e-12
    assert abs(anchor.tau ** 2 + anchor.t / 6) < 1e-12
    assert anchor.singular_values == (anchor.w, -anchor.w)
    with pytest.raises(utils.TurningPointError):
        Anchor.from_z(0)
    with pytest.raises(ValueError):
        Anchor(t=1, tau=1, z=1)


def test_convolution_of_monomials():
    one = TruncatedSeries.from_coeffs([1, 0, 0])
    xi = TruncatedSeries.from_coeffs([0, 1, 0])
    assert np.allclose(series_engine.convolve(one, one).coeffs[:3], [0, 1, 0])
    assert np.allclose(series_engine.convolve(xi, one).coeffs[:4], [0, 0, 0.5, 0])


def test_convolution_of_xi_with_itself():
    xi = TruncatedSeries.from_coeffs([0, 1, 0])
    assert np.allclose(series_engine.convolve(xi, xi).coeffs, [0, 0, 0, 1 / 6], rtol=0, atol=1e-16)


def test_convolution_is_commutative_and_associative():
    generator = np.random.default_rng(7)
    f, g, h = (TruncatedSeries.from_coeffs(generator.normal(size=7) + 1j * generator.normal(size=7))
               for _ in range(3))
    assert np.allclose(series_engine.convolve(f, g).coeffs, series_engine.convolve(g, f).coeffs, rtol=1e-13)
    left = series_engine.convolve(series_engine.convolve(f, g), h)
    right = series_engine.convolve(f, series_engine.convolve(g, h))
    assert left.order == right.order == 7
    assert np.allclose(left.coeffs, right.coeffs, rtol=1e-12, atol=1e-15)


def test_borel_product_rule():
    generator = np.random.default_rng(11)
    f = generator.integers(-5, 6, size=6).astype(float)
    g = generator.integers(-5, 6, size=6).astype(float)
    borel_f, f0 = series_engine.borel_transform(f)
    borel_g, g0 = series_engine.borel_transform(g)
    borel_product, _ = series_engine.borel_transform(np.convolve(f, g))
    combined = series_engine.convolve(TruncatedSeries.from_coeffs(borel_f), TruncatedSeries.from_coeffs(borel_g))
    combined = combined.coeffs + f0 * np.append(borel_g, 0) + g0 * np.append(borel_f, 0)
    assert np.allclose(borel_product[:6], combined, rtol=1e-12, atol=1e-12)


def test_borel_laplace_duality():
    polynomial = np.array([0, 2.0, -1.5, 0.25, 3.0])
    coeffs, constant = series_engine.borel_transform(polynomial)
    assert constant == 0
    borel = TruncatedSeries.from_coeffs(coeffs)
    hbar = 0.1 * np.exp(0.4j)
    expected = np.polyval(polynomial[::-1], hbar)
    value = resummation.laplace_ray(borel, 0.2, hbar).value
    assert abs(value - expected) < 1e-12 * abs(expected)


def test_convolution_checks_anchor():
    first = TruncatedSeries.from_coeffs([1, 2], Anchor.from_z(1))
    second = TruncatedSeries.from_coeffs([1, 2], Anchor.from_z(2))
    with pytest.raises(utils.AnchorMismatchError):
        series_engine.convolve(first, second)
    with pytest.raises(utils.AnchorMismatchError):
        first + second


def test_borel_conventions():
    coeffs, constant = series_engine.borel_transform([5, 1, 2, 6])
    assert constant == 5
    assert np.allclose(coeffs, [1, 2, 3])
    shifted, _ = series_engine.borel_transform([5, 1, 2, 6], "factorial_n_plus_1")
    assert np.allclose(shifted, [1, 1, 1])
    with pytest.raises(ValueError):
        series_engine.borel_transform([1, 2], "laplace")


def test_omega_hat_is_odd(table):
    anchor = Anchor.from_z(1.1 + 0.2j)
    omega, constant = series_engine.omega_hat(anchor, 30, table)
    assert constant == 0
    assert np.all(omega.coeffs[0::2] == 0)
    assert np.all(omega.coeffs[1::2] != 0)


def test_phi_hat_at_origin(table):
    plus, minus = series_engine.phi_hat(Anchor.from_z(1), 5, table)
    assert abs(plus.coeffs[0] + 6) < 1e-14 and abs(minus.coeffs[0] + 6) < 1e-14


def test_phi_hat_components_swap(table):
    anchor = Anchor.from_z(1.2 + 0.7j)
    plus, minus = series_engine.phi_hat(anchor, 30, table)
    mirror_plus, mirror_minus = series_engine.phi_hat(Anchor.from_z(-anchor.z), 30, table)
    assert np.allclose(mirror_plus.coeffs, minus.coeffs, rtol=1e-13, atol=0)
    assert np.allclose(mirror_minus.coeffs, plus.coeffs, rtol=1e-13, atol=0)


def test_omega_is_integral_of_phi_sum(table):
    anchor = Anchor.from_z(0.9 - 0.3j)
    plus, minus = series_engine.phi_hat(anchor, 20, table)
    omega, constant = series_engine.omega_hat(anchor, 21, table)
    integrated = (plus + minus).integral()
    assert np.allclose(omega.coeffs, integrated.coeffs + np.eye(1, 22)[0] * constant, rtol=1e-12, atol=0)


def test_momentum_hat_constant(table):
    anchor = Anchor.from_z(1.5)
    _, constant = series_engine.momentum_hat(anchor, 10, table)
    assert abs(constant + anchor.z ** -3) < 1e-15


def test_q_partial_sum_leading_term(table):
    anchor = Anchor.from_z(2 + 1j)
    assert abs(series_engine.q_partial_sum(anchor, 0.1, 0, table) - anchor.z ** 2 / 12) < 1e-14
    expected = anchor.z ** 2 / 12 - 12 * anchor.z ** -8 * 0.01
    assert abs(series_engine.q_partial_sum(anchor, 0.1, 3, table) - expected) < 1e-14


def test_rescaling_covariance(table):
    anchor = Anchor.from_z(0.8 + 0.5j)
    factor = 1.3 * np.exp(0.2j)
    scaled = series_engine.rescale_anchor(anchor, factor)
    omega, _ = series_engine.omega_hat(anchor, 25, table)
    omega_scaled, _ = series_engine.omega_hat(scaled.anchor, 25, table)
    plus, _ = series_engine.phi_hat(anchor, 25, table)
    plus_scaled, _ = series_engine.phi_hat(scaled.anchor, 25, table)
    powers = scaled.xi_factor ** np.arange(26)
    assert np.allclose(omega_scaled.coeffs * powers, scaled.omega_factor * omega.coeffs, rtol=1e-10)
    assert np.allclose(plus_scaled.coeffs * powers, scaled.phi_factor * plus.coeffs, rtol=1e-10)
    with pytest.raises(utils.TurningPointError):
        series_engine.rescale_anchor(anchor, 0)


def test_radius_matches_singular_value(table):
    anchor = stokes_geometry.anchor_from_t(1, 0)
    omega, _ = series_engine.omega_hat(anchor, 119, table)
    estimate = series_engine.radius_estimate(omega)
    expected = 24 ** 1.25 / 30
    assert abs(estimate.radius - expected) / expected < 0.02
    assert abs(estimate.radius - abs(anchor.w)) < 1e-9 + 0.02 * expected


def test_radius_needs_enough_terms():
    with pytest.raises(ValueError):
        series_engine.radius_estimate(TruncatedSeries.from_coeffs(np.ones(10)))


def test_geometric_radius():
    series = TruncatedSeries.from_coeffs(0.5 ** np.arange(40))
    estimate = series_engine.radius_estimate(series)
    assert abs(estimate.radius - 2) < 1e-9
    assert abs(series_engine.coefficient_growth(series) - 0.5) < 1e-12


def test_optimal_truncation(table):
    anchor = stokes_geometry.anchor_from_t(1, 0)
    hbar = 0.05 * np.exp(1j * np.pi / 2)
    value, order, smallest = series_engine.optimal_truncation(anchor, hbar, table)
    assert order % 2 == 1
    assert 20 < order < 50
    sizes = [abs(table.q_monos[n].evaluate(anchor.z) * hbar ** n) for n in range(2, 100, 2)]
    assert math.isclose(smallest, min(sizes), rel_tol=1e-12)
    assert value == series_engine.q_partial_sum(anchor, hbar, order, table)
