"""
The stokes_geometry module gathers every closed-form geometric computation:
coordinate and branch transforms among t, τ and z, Stokes directions, Stokes lines and sectors,
ramification data of the Borel surface (x+z)⁵ + (y+z)⁵ = 2z⁵, its central charge,
and the geodesic trajectories whose central-charge image is a straight ray.
"""
import cmath
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..series_engine.series_engine import Anchor
from ..utils import utils

LOGGER = logging.getLogger(__name__)

SECTOR_TOLERANCE = 1e-12
QUINTIC_TOLERANCE = 1e-10
# Largest relative change of z⁵ allowed between two root-tracking steps.
ROOT_TRACKING_STEP = 0.25


@dataclass(frozen=True)
class StokesData:
    """Both Stokes directions (mod 2π) and the two open arcs A1 = (α_+, α_-), A2 = (α_-, α_+) they cut out."""
    alpha_plus: float
    alpha_minus: float

    @property
    def arcs(self):
        return dict(A1=(self.alpha_plus, self.alpha_minus), A2=(self.alpha_minus, self.alpha_plus))

    def is_stokes(self, alpha, tolerance=1e-9):
        return min(utils.angle_distance(alpha, self.alpha_plus), utils.angle_distance(alpha, self.alpha_minus)) < tolerance


@dataclass(frozen=True)
class StokesGraph:
    """
    Stokes lines for a phase α: five τ-plane lines θ_k = (2πk - 2α)/5, their t-plane images θ'_k = 2θ_k + π,
    the ten z-plane lines (2πk - 2α)/10 and the open sectors between consecutive lines.
    """
    alpha: float
    tau_lines: tuple
    t_lines: tuple
    z_lines: tuple
    sectors: dict = field(compare=False)

    def to_json(self):
        return json.dumps(dict(alpha=self.alpha, tau_lines=list(self.tau_lines), t_lines=list(self.t_lines),
                               z_lines=list(self.z_lines),
                               sectors={plane: [list(interval) for interval in intervals]
                                        for plane, intervals in self.sectors.items()}), indent=2)


@dataclass(frozen=True)
class SectorInfo:
    """Stokes sector V_k holding τ, with the anchor carrying the branch of q̂ it distinguishes (q_0 = τ)."""
    index: int
    interval: tuple
    anchor: Anchor


@dataclass(frozen=True)
class RamificationSet:
    """The ten ramification points Γ^± over z and the two branch values ξ_± = ±z⁵/30."""
    z: complex
    gamma_plus: tuple
    gamma_minus: tuple
    branch_values: tuple


@dataclass(frozen=True)
class GeodesicTrace:
    """Samples z(s) of a geodesic, and whether it reached the turning point z = 0."""
    s: np.ndarray
    z: np.ndarray
    critical: bool
    alpha: float
    sign: int


def _principal_arg(value):
    return cmath.phase(value)


def anchor_from_t(t, branch=0):
    """
    Builds the anchor over t for one of the four quartic roots of z⁴ = -24t.

    The roots are labelled 0..3 by increasing principal argument, and τ = z²/12.

    :param complex t: Point of the t-plane, t ≠ 0.
    :param int branch: 0..3.
    :raises TurningPointError: for t = 0.
    :rtype: Anchor
    """
    t = complex(t)
    if t == 0:
        raise utils.TurningPointError("t = 0 is the turning point")
    if branch not in range(4):
        raise ValueError("branch must be 0..3, got {}".format(branch))
    modulus = (24 * abs(t)) ** 0.25
    base = _principal_arg(-t) / 4
    roots = [modulus * cmath.exp(1j * (base + k * math.pi / 2)) for k in range(4)]
    roots.sort(key=_principal_arg)
    z = roots[branch]
    return Anchor(t=t, tau=z ** 2 / 12, z=z, branch_id=branch)


def borel_singular_values(t):
    """Closed form (ξ_+, ξ_-) = ±e^{iπ/4} 24^{5/4} t^{5/4} / 30 with the principal power of t."""
    t = complex(t)
    if t == 0:
        raise utils.TurningPointError("t = 0 is the turning point")
    value = cmath.exp(1j * math.pi / 4) * 24 ** 1.25 * t ** 1.25 / 30
    return value, -value


def stokes_directions(t):
    """
    Stokes directions at t: α_+ = (5/4)(θ_0 + π) with θ_0 the principal argument of t, α_- = α_+ + π.

    :rtype: StokesData
    """
    t = complex(t)
    if t == 0:
        raise utils.TurningPointError("t = 0 is the turning point")
    alpha_plus = utils.wrap_angle(1.25 * (_principal_arg(t) + math.pi))
    return StokesData(alpha_plus, utils.wrap_angle(alpha_plus + math.pi))


def stokes_directions_at(anchor):
    """
    Stokes directions read off the anchor's own branch: α_+ = arg(z⁵/30) and α_- = arg(-z⁵/30).

    On branches 0 and 2 they agree as a set with stokes_directions(anchor.t); branches 1 and 3 carry the opposite
    sign of q_0 = τ and their rays sit a quarter turn away.
    """
    return StokesData(utils.wrap_angle(_principal_arg(anchor.w)), utils.wrap_angle(_principal_arg(-anchor.w)))


def stokes_graph(alpha):
    """
    Stokes graph for the phase α in the τ-, t- and z-planes.

    :param float alpha: Phase, in radians.
    :rtype: StokesGraph
    """
    tau_lines = tuple(utils.wrap_angle((2 * math.pi * k - 2 * alpha) / 5) for k in range(5))
    t_lines = tuple(utils.wrap_angle(2 * theta + math.pi) for theta in tau_lines)
    z_lines = tuple(utils.wrap_angle((2 * math.pi * k - 2 * alpha) / 10) for k in range(10))
    sectors = dict(
        tau=tuple((theta, theta + 2 * math.pi / 5) for theta in tau_lines),
        t=tuple((theta, theta + 4 * math.pi / 5) for theta in t_lines),
        z=tuple((theta, theta + math.pi / 5) for theta in z_lines),
    )
    return StokesGraph(alpha, tau_lines, t_lines, z_lines, sectors)


def sector_of(tau, alpha, tolerance=SECTOR_TOLERANCE):
    """
    Index k of the Stokes sector V_k = (θ_k, θ_k + 2π/5) containing τ, and the branch of q̂ it distinguishes.

    :raises SectorBoundaryError: when τ lies on a Stokes line (within the angular tolerance).
    :rtype: SectorInfo
    """
    tau = complex(tau)
    if tau == 0:
        raise utils.TurningPointError("τ = 0 is the turning point")
    angle = utils.wrap_angle(_principal_arg(tau))
    graph = stokes_graph(alpha)
    for theta in graph.tau_lines:
        if utils.angle_distance(angle, theta) < tolerance:
            raise utils.SectorBoundaryError("τ = {} lies on the Stokes line θ = {}".format(tau, theta))
    for k, (low, high) in enumerate(graph.sectors["tau"]):
        if 0 < utils.wrap_angle(angle - low) < high - low:
            z = cmath.sqrt(12 * tau)
            return SectorInfo(k, (low, high), Anchor(t=-6 * tau ** 2, tau=tau, z=z, branch_id=-1))
    raise utils.SectorBoundaryError("no sector found for τ = {}".format(tau))


def ramification_set(z):
    """
    Ten ramification points of the Borel surface over z.

    Γ⁺ = {(-z, (ε_k - 1)z)} and Γ⁻ = {((ε_k - 1)z, -z)} with ε_k = 2^{1/5} e^{2πik/5}, k = 1..5.

    :raises TurningPointError: for z = 0, the nodal fibre.
    :rtype: RamificationSet
    """
    z = complex(z)
    if z == 0:
        raise utils.TurningPointError("z = 0 is the nodal fibre")
    epsilons = [2 ** 0.2 * cmath.exp(2j * math.pi * k / 5) for k in range(1, 6)]
    gamma_plus = tuple((-z, (epsilon - 1) * z) for epsilon in epsilons)
    gamma_minus = tuple(((epsilon - 1) * z, -z) for epsilon in epsilons)
    return RamificationSet(z, gamma_plus, gamma_minus, (z ** 5 / 30, -z ** 5 / 30))


def quintic_residual(z, x, y):
    return (x + z) ** 5 + (y + z) ** 5 - 2 * z ** 5


def central_charge(z, x, y, tolerance=QUINTIC_TOLERANCE):
    """
    Central charge ξ = (z⁵ - (x+z)⁵)/30 of the point (x, y) over z, checked against the y-formula -(z⁵ - (y+z)⁵)/30.

    :raises OffSurfaceError: when (x, y) is not on the quintic within tolerance.
    """
    z, x, y = complex(z), complex(x), complex(y)
    scale = max(1.0, abs(z) ** 5, abs(x + z) ** 5, abs(y + z) ** 5)
    if abs(quintic_residual(z, x, y)) > tolerance * scale:
        raise utils.OffSurfaceError("({}, {}) is not on the Borel surface over z = {}".format(x, y, z))
    from_x = (z ** 5 - (x + z) ** 5) / 30
    from_y = -(z ** 5 - (y + z) ** 5) / 30
    if abs(from_x - from_y) > tolerance * scale:
        raise utils.OffSurfaceError("central charge formulas disagree at ({}, {})".format(x, y))
    return from_x


def ramification_derivatives(z, point, radius=None, samples=64, max_order=5):
    """
    Derivatives of the central charge along the curve at a point, computed from Cauchy integrals (FFT on a small circle).

    The local parameter is u = x + z at Γ⁺ points (where u = 0) and v = y + z at Γ⁻ points; the other coordinate is a
    smooth function of it there. Returns |d^k Z / du^k| for k = 1..max_order, relative to the fifth derivative.
    """
    z = complex(z)
    x, y = point
    if abs(x + z) <= abs(y + z):
        centre, sign = x + z, 1
    else:
        centre, sign = y + z, -1
    if radius is None:
        radius = 0.1 * abs(z)
    nodes = centre + radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    values = sign * (z ** 5 - nodes ** 5) / 30
    taylor = np.fft.fft(values) / samples / radius ** np.arange(samples)
    derivatives = np.array([abs(taylor[k]) * math.factorial(k) for k in range(1, max_order + 1)])
    return derivatives / derivatives[-1]


def trace_geodesic(z0, alpha, sign="+", s_max=1.0, n_samples=101):
    """
    Samples the geodesic z(s) = (z0⁵ ∓ 30 e^{iα} s)^{1/5}, the fifth root continued from z0.

    Between samples the root is tracked in small steps, so that z⁵ never changes by more than a quarter of its size.
    If the trajectory reaches z = 0 before s_max (a critical geodesic) it stops there and the trace is flagged.

    :param complex z0: Starting point, z0 ≠ 0.
    :param float alpha: Phase of the central-charge ray.
    :param sign: '+' follows ξ_+ (z⁵ decreases along e^{iα}), '-' the opposite flow.
    :rtype: GeodesicTrace
    """
    z0 = complex(z0)
    if z0 == 0:
        raise utils.TurningPointError("geodesics start away from z = 0")
    s_sign = 1 if sign in ("+", 1) else -1
    direction = cmath.exp(1j * alpha)
    start = z0 ** 5

    critical = False
    end = float(s_max)
    hit = s_sign * start / (30 * direction)
    if abs(hit.imag) <= 1e-12 * max(1.0, abs(hit)) and 0 < hit.real <= s_max:
        critical, end = True, hit.real
        LOGGER.debug("critical geodesic from %s reaches z = 0 at s = %.6g", z0, end)

    s_values = np.linspace(0.0, end, n_samples)
    z_values = np.empty(n_samples, dtype=complex)
    z_values[0] = z0
    current_s, current_z = 0.0, z0
    for index in range(1, n_samples):
        target = s_values[index]
        if critical and index == n_samples - 1:
            z_values[index] = 0
            break
        while current_s < target:
            fifth = start - s_sign * 30 * direction * current_s
            step = target - current_s
            limit = ROOT_TRACKING_STEP * abs(fifth) / 30
            step = min(step, limit) if limit > 0 else step
            next_fifth = start - s_sign * 30 * direction * (current_s + step)
            current_z = current_z * (next_fifth / fifth) ** 0.2
            current_s += step
        z_values[index] = current_z
    return GeodesicTrace(s_values, z_values, critical, alpha, s_sign)


def foliation(alpha, starts, sign="+", s_max=1.0, n_samples=101):
    """
    Geodesics of phase α from several starting points, as a DataFrame tagged by (sign, alpha, start_id).

    :rtype: pandas.DataFrame
    """
    frames = []
    for start_id, z0 in enumerate(starts):
        trace = trace_geodesic(z0, alpha, sign, s_max, n_samples)
        frames.append(pd.DataFrame(dict(
            sign="+" if trace.sign == 1 else "-", alpha=alpha, start_id=start_id, s=trace.s,
            z_re=trace.z.real, z_im=trace.z.imag, critical=trace.critical)))
    return pd.concat(frames, ignore_index=True)
