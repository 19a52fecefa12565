import cmath
import json
import math

import numpy as np
import pytest

from resurgent_pi.stokes_geometry import stokes_geometry
from resurgent_pi.utils import utils


def test_graph_lines_at_zero_phase():
    graph = stokes_geometry.stokes_graph(0.0)
    assert np.allclose(graph.tau_lines, [2 * math.pi * k / 5 for k in range(5)])
    assert len(graph.z_lines) == 10
    assert len(graph.sectors["tau"]) == 5
    assert np.allclose(graph.t_lines[0], math.pi)
    assert json.loads(graph.to_json())["alpha"] == 0.0


def test_graph_rotates_with_phase():
    graph = stokes_geometry.stokes_graph(math.pi / 2)
    assert any(utils.angle_distance(theta, -math.pi / 5) < 1e-12 for theta in graph.tau_lines)


def test_stokes_directions_at_t_one():
    data = stokes_geometry.stokes_directions(1)
    assert math.isclose(data.alpha_plus, 5 * math.pi / 4)
    assert math.isclose(data.alpha_minus, math.pi / 4)
    assert data.is_stokes(math.pi / 4)
    assert not data.is_stokes(math.pi / 2)


@pytest.mark.parametrize("t", [1, 5, 2j, -3 + 0.5j])
@pytest.mark.parametrize("branch", range(4))
def test_branch_directions(t, branch):
    closed = stokes_geometry.stokes_directions(t)
    anchor = stokes_geometry.anchor_from_t(t, branch)
    local = stokes_geometry.stokes_directions_at(anchor)
    distance = min(utils.angle_distance(local.alpha_plus, closed.alpha_plus),
                   utils.angle_distance(local.alpha_plus, closed.alpha_minus))
    # odd branches carry the opposite sign of q_0, their rays are a quarter turn away
    expected = 0.0 if branch % 2 == 0 else math.pi / 2
    assert abs(distance - expected) < 1e-9


def test_anchor_branches_sorted():
    arguments = [cmath.phase(stokes_geometry.anchor_from_t(5, branch).z) for branch in range(4)]
    assert np.allclose(arguments, [-3 * math.pi / 4, -math.pi / 4, math.pi / 4, 3 * math.pi / 4])
    with pytest.raises(ValueError):
        stokes_geometry.anchor_from_t(5, 4)


def test_singular_values_closed_form():
    plus, minus = stokes_geometry.borel_singular_values(1)
    assert math.isclose(abs(plus), 24 ** 1.25 / 30)
    assert plus == -minus
    anchor = stokes_geometry.anchor_from_t(1, 0)
    assert min(abs(anchor.w - plus), abs(anchor.w - minus)) < 1e-12


def test_turning_point_rejected():
    for call in (stokes_geometry.stokes_directions, stokes_geometry.borel_singular_values,
                 stokes_geometry.anchor_from_t, stokes_geometry.ramification_set):
        with pytest.raises(utils.TurningPointError):
            call(0)
    with pytest.raises(utils.TurningPointError):
        stokes_geometry.trace_geodesic(0, 0.0)


def test_sector_lookup():
    info = stokes_geometry.sector_of(cmath.exp(1j * math.pi / 5), 0.0)
    assert info.index == 0
    assert abs(info.anchor.tau - cmath.exp(1j * math.pi / 5)) < 1e-12
    with pytest.raises(utils.SectorBoundaryError):
        stokes_geometry.sector_of(1.0, 0.0)


def test_ramification_points_lie_on_quintic():
    z = 0.7 + 0.4j
    points = stokes_geometry.ramification_set(z)
    assert len(points.gamma_plus) == len(points.gamma_minus) == 5
    for x, y in points.gamma_plus:
        assert abs(stokes_geometry.quintic_residual(z, x, y)) < 1e-12
        assert abs(stokes_geometry.central_charge(z, x, y) - z ** 5 / 30) < 1e-12
    for x, y in points.gamma_minus:
        assert abs(stokes_geometry.central_charge(z, x, y) + z ** 5 / 30) < 1e-12


def test_central_charge_off_surface():
    with pytest.raises(utils.OffSurfaceError):
        stokes_geometry.central_charge(1, 1, 1)


def test_ramification_is_fifth_order():
    points = stokes_geometry.ramification_set(1.0)
    derivatives = stokes_geometry.ramification_derivatives(1.0, points.gamma_plus[0])
    assert np.all(derivatives[:4] < 1e-8)
    assert math.isclose(derivatives[4], 1.0)


def test_critical_geodesic():
    trace = stokes_geometry.trace_geodesic(1.0, 0.0, "+", s_max=1.0)
    assert trace.critical
    assert math.isclose(trace.s[-1], 1 / 30)
    assert trace.z[-1] == 0


def test_regular_geodesic():
    trace = stokes_geometry.trace_geodesic(1.0, math.pi / 2, "+", s_max=1.0)
    assert not trace.critical
    assert abs(trace.z[-1] ** 5 - (1 - 30j)) < 1e-9
    assert np.all(np.abs(np.diff(trace.z)) < 1.0)


def test_foliation_frame():
    frame = stokes_geometry.foliation(0.3, [1.0, 1j], s_max=0.5, n_samples=11)
    assert list(frame.columns) == ["sign", "alpha", "start_id", "s", "z_re", "z_im", "critical"]
    assert len(frame) == 22
    assert set(frame["start_id"]) == {0, 1}


def test_rotation_by_four_fifths_of_pi_swaps_directions():
    before = stokes_geometry.stokes_directions(cmath.exp(-0.5j))
    after = stokes_geometry.stokes_directions(cmath.exp(1j * (-0.5 + 4 * math.pi / 5)))
    assert utils.angle_distance(after.alpha_plus, before.alpha_minus) < 1e-12
    assert utils.angle_distance(after.alpha_minus, before.alpha_plus) < 1e-12
