import cmath
import itertools
import math

import numpy as np
import pytest
from scipy import special

from resurgent_pi.borel_analysis import borel_analysis
from resurgent_pi.resummation import resummation
from resurgent_pi.resummation.resummation import ResumRequest
from resurgent_pi.series_engine import series_engine
from resurgent_pi.series_engine.series_engine import Anchor
from resurgent_pi.stokes_geometry import stokes_geometry
from resurgent_pi.utils import utils


def test_laplace_of_constant():
    value = resummation.laplace_ray(lambda xi: np.ones_like(xi), 0.0, 0.1)
    assert abs(value.value - 0.1) < 1e-14
    assert value.error < 1e-12


@pytest.mark.parametrize("n", [0, 1, 3, 6])
def test_laplace_of_monomials(n):
    hbar = 0.05 * cmath.exp(0.3j)
    value = resummation.laplace_ray(lambda xi: xi ** n / math.factorial(n), 0.2, hbar)
    assert abs(value.value - hbar ** (n + 1)) < 1e-10 * abs(hbar) ** (n + 1)


def test_laplace_against_exponential_integral():
    func = lambda xi: 1 / (1 - xi)
    value = resummation.laplace_ray(func, math.pi / 2, 0.1j)
    expected = -cmath.exp(10j) * special.exp1(10j)
    assert abs(value.value - expected) < 1e-12


def test_laplace_ray_panel_doubling():
    hbar = 0.1
    func = lambda xi: 1 / (1 + xi)
    coarse = resummation.laplace_ray(func, 0.0, hbar)
    pieces = [resummation.laplace_segment(func, k * hbar / 2, (k + 1) * hbar / 2, hbar) for k in range(120)]
    fine = sum(piece.value for piece in pieces)
    expected = special.exp1(10) * math.exp(10)
    assert abs(coarse.value - fine) < 1e-13 * abs(fine)
    assert abs(coarse.value - expected) < 1e-12
    assert abs(fine - expected) < 1e-12
    assert coarse.error < 1e-10


def test_laplace_divergence():
    with pytest.raises(utils.LaplaceDivergenceError):
        resummation.laplace_ray(lambda xi: np.ones_like(xi), math.pi, 0.1)
    with pytest.raises(utils.LaplaceDivergenceError):
        resummation.laplace_ray(lambda xi: np.ones_like(xi), 0.0, 0.1, bound=(1.0, 20.0))


def test_request_validation():
    anchor = stokes_geometry.anchor_from_t(5, 0)
    with pytest.raises(utils.LaplaceDivergenceError):
        ResumRequest(anchor, 0.0, (-0.1,))
    with pytest.raises(ValueError):
        ResumRequest(anchor, 0.0, (0.1,), continuation="euler")
    with pytest.raises(ValueError):
        ResumRequest(anchor, 0.0, ())


def test_stokes_direction_rejected(table):
    anchor = stokes_geometry.anchor_from_t(1, 0)
    request = ResumRequest(anchor, math.pi / 4, (0.1 * cmath.exp(1j * math.pi / 4),))
    with pytest.raises(utils.StokesDirectionError):
        resummation.resum_q(request, table)


@pytest.fixture(scope="module")
def regular_resum(table):
    anchor = stokes_geometry.anchor_from_t(5, 0)
    request = ResumRequest(anchor, math.pi / 2, (0.02j, 0.05j, 0.1j))
    return resummation.resum_q(request, table)


def test_resummation_is_superasymptotic(table, regular_resum):
    anchor = regular_resum.request.anchor
    for hbar, value, error in zip(regular_resum.request.hbars, regular_resum.q_values,
                                  regular_resum.quadrature_error_estimates):
        partial = series_engine.q_partial_sum(anchor, hbar, 8, table)
        terms = [abs(table.q_monos[n].evaluate(anchor.z) * hbar ** n) for n in range(9)]
        tenth = abs(table.q_monos[10].evaluate(anchor.z) * hbar ** 10)
        # rounding of the nine-term partial sum, plus the quadrature error of the Laplace sum
        rounding = 9 * np.finfo(float).eps * sum(terms)
        assert abs(value - partial) <= 2 * tenth + rounding + error


def test_components_add_up(regular_resum):
    for hbar, q, plus, minus in zip(regular_resum.request.hbars, regular_resum.q_values,
                                    regular_resum.f_plus, regular_resum.f_minus):
        assert abs(q - regular_resum.constant_part - hbar * (plus + minus)) < 1e-13


def test_resum_report(regular_resum):
    report = regular_resum.to_json()
    assert len(report["q"]) == 3
    assert all(error >= 0 for error in report["error"])
    frame = regular_resum.to_dataframe()
    assert {"q_re", "q_im", "error", "truncated_re"} <= set(frame.columns)


def test_direction_independence(table):
    anchor = stokes_geometry.anchor_from_t(5, 0)
    hbar = 0.05 * cmath.exp(1j * (math.pi / 2 + 0.15))
    first = resummation.resum_q(ResumRequest(anchor, math.pi / 2, (hbar,)), table)
    second = resummation.resum_q(ResumRequest(anchor, math.pi / 2 + 0.3, (hbar,)), table)
    assert abs(first.q_values[0] - second.q_values[0]) < 1e-10 * abs(first.q_values[0])


def test_branch_swap_exchanges_components(table):
    anchor = stokes_geometry.anchor_from_t(5, 0)
    opposite = Anchor.from_z(-anchor.z)
    hbar = (0.05j,)
    first = resummation.resum_q(ResumRequest(anchor, math.pi / 2, hbar), table)
    second = resummation.resum_q(ResumRequest(opposite, math.pi / 2, hbar), table)
    assert abs(first.q_values[0] - second.q_values[0]) < 1e-12
    assert abs(first.f_plus[0] - second.f_minus[0]) < 1e-12
    assert abs(first.f_minus[0] - second.f_plus[0]) < 1e-12


def test_formal_residual_order(table):
    anchor = Anchor.from_z(3.0)
    coarse = abs(resummation.formal_residual(anchor, 0.2, 6, table))
    fine = abs(resummation.formal_residual(anchor, 0.1, 6, table))
    assert math.log2(coarse / fine) > 6.8


def test_ode_residual(table):
    anchor = stokes_geometry.anchor_from_t(5, 0)
    report = resummation.verify_ode(anchor, math.pi / 2, 0.05j, 1e-3, table)
    assert report.max_residual < 1e-6
    assert report.to_json()["h"] == 1e-3


def test_propagation_matches_resummation(table):
    alpha = 3 * math.pi / 4
    hbar = 0.05 * cmath.exp(3j * math.pi / 4)
    start = stokes_geometry.anchor_from_t(5, 2)
    end = resummation.stencil_anchor(start, 6)
    initial = resummation.resum_q(ResumRequest(start, alpha, (hbar,)), table, components=False)
    final = resummation.resum_q(ResumRequest(end, alpha, (hbar,)), table, components=False)
    q, _ = resummation.propagate(start, initial.q_values[0], initial.p_values[0], 6, hbar)
    assert abs(q - final.q_values[0]) < 1e-6 * abs(final.q_values[0])


def test_tritronquee_family(table):
    frame = resummation.tritronquee_family(5.0, math.pi / 2, 0.05j, table)
    assert list(frame["sector"]) == [0, 1, 2, 3, 4]
    values = frame["q_re"] + 1j * frame["q_im"]
    assert len({round(v.real, 8) + 1j * round(v.imag, 8) for v in values}) == 5
    assert np.allclose(np.abs(frame["t_re"] + 1j * frame["t_im"]), 5.0)


@pytest.mark.parametrize("alpha", [0.3, math.pi / 4])
def test_tritronquee_family_sectors(table, alpha):
    frame = resummation.tritronquee_family(5.0, alpha, 0.05 * cmath.exp(1j * alpha), table)
    assert list(frame["sector"]) == [0, 1, 2, 3, 4]
    for row in frame.itertuples():
        tau = complex(row.tau_re, row.tau_im)
        info = stokes_geometry.sector_of(tau, alpha)
        assert info.index == row.sector
        assert not stokes_geometry.stokes_directions_at(info.anchor).is_stokes(alpha, 0.1)
    values = frame["q_re"] + 1j * frame["q_im"]
    assert min(abs(a - b) for a, b in itertools.combinations(values, 2)) > 1e-6
    assert np.allclose(np.abs(frame["t_re"] + 1j * frame["t_im"]), 5.0)


def test_jump_rate_fit():
    hbars = np.array([0.02, 0.03, 0.05, 0.08])
    jumps = 3.0 * hbars ** 0.5 * np.exp(-1.7 / hbars)
    rate, coefficients = resummation.fit_jump_rate(hbars, jumps)
    assert math.isclose(rate, 1.7, rel_tol=1e-8)
    assert math.isclose(coefficients[2], -0.5, rel_tol=1e-6)
    with pytest.raises(ValueError):
        resummation.fit_jump_rate(hbars[:2], jumps[:2])


def test_variation_jump_of_constant_profile():
    anchor = Anchor.from_z(1.0)
    xi0 = 0.05
    result = borel_analysis.VariationResult(anchor, 0.0, xi0, np.array([0.5]), None, None, None,
                                            fits=dict(omega=np.array([0.7])), fit_range=1.0)
    hbar = 0.01
    expected = 2j * 0.7 * math.sqrt(math.pi * hbar) * math.exp(-xi0 / hbar)
    assert abs(resummation.variation_jump(result, hbar) - expected) < 1e-10 * abs(expected)


def test_lateral_on_regular_direction(table):
    anchor = stokes_geometry.anchor_from_t(5, 0)
    request = ResumRequest(anchor, math.pi / 2, (0.05j,), side="L")
    lateral = resummation.lateral_resum(request, table)
    direct = resummation.resum_q(ResumRequest(anchor, math.pi / 2, (0.05j,)), table)
    assert abs(lateral.q_values[0] - direct.q_values[0]) < 1e-9 * abs(direct.q_values[0])


def test_jump_needs_stokes_direction(table):
    anchor = stokes_geometry.anchor_from_t(5, 0)
    with pytest.raises(utils.StokesDirectionError):
        resummation.stokes_jump(anchor, math.pi / 2, [0.05j], table)


@pytest.mark.slow
def test_lateral_sums_differ(table):
    anchor = stokes_geometry.anchor_from_t(1, 0)
    alpha = math.pi / 4
    # |ξ_0| ≈ 1.77 here: the jump e^{-|ξ_0|/|ħ|} ≈ 2e-8 at |ħ| = 0.1, while |ħ| = 0.05 would put it below 1e-15
    hbar = (0.1 * cmath.exp(1j * alpha),)
    left = resummation.lateral_resum(ResumRequest(anchor, alpha, hbar, "march", "L"), table)
    right = resummation.lateral_resum(ResumRequest(anchor, alpha, hbar, "march", "R"), table)
    difference = abs(left.q_values[0] - right.q_values[0])
    assert 1e-12 < difference < 1e-3


@pytest.mark.slow
def test_stokes_jump_routes_agree(table):
    anchor = stokes_geometry.anchor_from_t(1, 0)
    alpha = math.pi / 4
    modulus = abs(anchor.w)
    ratios = np.array([2.5, 4, 6.3, 10, 16, 25])
    hbars = modulus / ratios * cmath.exp(1j * alpha)
    report = resummation.stokes_jump(anchor, alpha, hbars, table)
    assert np.all(report.relative_difference < 0.01)
    # beyond the fit range of the variation the lateral difference still matters at the largest ħ
    assert abs(report.tail[0]) > 0.01 * abs(report.lateral[0])
    assert abs(report.tail[-1]) < 1e-4 * abs(report.lateral[-1])

    small = ratios > 6
    rate, _ = resummation.fit_jump_rate(report.hbars[small], report.lateral[small])
    assert abs(rate - modulus) / modulus < 0.03
    scaled = np.abs(report.lateral[small]) / np.abs(report.hbars[small]) ** 6
    assert np.all(np.diff(scaled) < 0)
