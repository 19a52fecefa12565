"""
The resummation module turns the Borel transforms back into functions of ħ.

q_α(t, ħ) = q_0(t) + ∫_0^{∞e^{iα}} e^{-ξ/ħ} ω(ξ) dξ along a regular direction α, with the momentum
p = z·∫ e^{-ξ/ħ} ν(ξ) dξ and the components f_± = f^±_0 + ∫ e^{-ξ/ħ} φ_±(ξ) dξ obtained the same way.
Along a Stokes direction the integral is taken on the lateral paths of borel_analysis, and the difference
of the two lateral sums is the Stokes jump.
The module also checks the results against the equation ħ²q̈ = 6q² + t and against a direct integration
of the Hamiltonian system.
"""
import cmath
import functools
import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import integrate, interpolate, linalg

from ..borel_analysis import borel_analysis
from ..series_engine import series_engine
from ..stokes_geometry import stokes_geometry
from ..utils import utils

LOGGER = logging.getLogger(__name__)

PANEL_NODES = 32
MAX_PANELS = 200
RELATIVE_STOP = 1e-16
REGULAR_TOLERANCE = 1e-6
PADE_DEGREE = 20
MIN_PADE_DEGREE = 4
# Decay lengths 1/Re(e^{iα}/ħ) covered by march-based integrands.
TAIL_LENGTHS = 40
MARCH_STEPS_PER_MODULUS = 100
LATERAL_DETOUR_ANGLE = 0.25
VARIATION_DETOUR = 0.1
FIELDS = ("omega", "nu", "phi_plus", "phi_minus")

LaplaceValue = namedtuple("LaplaceValue", ["value", "error", "panels"])


@functools.lru_cache(maxsize=4)
def _gauss_legendre(n):
    return utils.load_dependency("gauss_legendre", n)


def laplace_segment(func, start, end, hbar):
    """
    ∫ e^{-ξ/ħ} func(ξ) dξ on the straight segment [start, end], with panels no wider than |ħ|.

    Each panel uses 32 Gauss-Legendre nodes; the 16-node rule on the same panel gives the error estimate.

    :return: LaplaceValue(value, error, panels)
    """
    rule = _gauss_legendre(PANEL_NODES)
    low_nodes, low_weights = rule["low_order"]
    start, end = complex(start), complex(end)
    count = max(1, int(math.ceil(abs(end - start) / abs(hbar))))
    edges = start + (end - start) * np.linspace(0, 1, count + 1)
    value, error = 0j, 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        half, middle = (right - left) / 2, (right + left) / 2
        points = middle + half * rule["nodes"]
        high = half * np.sum(rule["weights"] * np.exp(-points / hbar) * func(points))
        points = middle + half * low_nodes
        low = half * np.sum(low_weights * np.exp(-points / hbar) * func(points))
        value += high
        error += abs(high - low) + 64 * np.finfo(float).eps * abs(high)
    return LaplaceValue(value, error, count)


def laplace_ray(func, alpha, hbar, start=0j, bound=None, reach=None):
    """
    ∫ e^{-ξ/ħ} func(ξ) dξ from start to infinity along the direction α.

    Panels have the decay length 1/(Re(e^{iα}/ħ) - K) of the integrand and the sum stops once a panel adds less than
    1e-16 of the accumulated value. When reach is given the integrand is only known up to start + reach·e^{iα}.

    :param callable func: Vectorized integrand.
    :param tuple bound: Optional exponential-type bound (C, K) of func.
    :raises LaplaceDivergenceError: when e^{-ξ/ħ} does not decay along α, or when K ≥ Re(e^{iα}/ħ).
    :rtype: LaplaceValue
    """
    direction = cmath.exp(1j * alpha)
    decay = (direction / hbar).real
    if decay <= 0:
        raise utils.LaplaceDivergenceError("e^(-xi/hbar) does not decay along alpha = {:.6g} for hbar = {}".format(alpha, hbar))
    rate = 0.0 if bound is None else bound[1]
    if rate >= decay:
        raise utils.LaplaceDivergenceError("exponential type {:.4g} is not below the decay rate {:.4g}".format(rate, decay))
    width = 1.0 / (decay - rate)
    total, error = 0j, 0.0
    start = complex(start)
    for panel in range(MAX_PANELS):
        left = panel * width
        if reach is not None and left >= reach:
            tail = abs(np.exp(-(start + reach * direction) / hbar) * func(np.array([start + reach * direction]))[0]) * width
            if tail > 1e-12 * max(abs(total), 1e-300):
                LOGGER.warning("Laplace integral cut at reach %.4g with tail estimate %.2e", reach, tail)
            error += tail
            break
        right = left + width if reach is None else min(left + width, reach)
        piece = laplace_segment(func, start + left * direction, start + right * direction, hbar)
        total += piece.value
        error += piece.error
        if panel >= 2 and abs(piece.value) <= RELATIVE_STOP * abs(total):
            break
    else:
        LOGGER.warning("Laplace integral stopped after %d panels", MAX_PANELS)
    return LaplaceValue(total, error, panel + 1)


@dataclass(frozen=True)
class ResumRequest:
    """
    One resummation: an anchor, a direction and the ħ values, each with |arg ħ - α| < π/2.

    side is 'none' for a regular direction and 'L'/'R' for lateral sums along a Stokes direction.
    """
    anchor: object
    alpha: float
    hbars: tuple
    continuation: str = "pade"
    side: str = "none"
    pade_degree: int = PADE_DEGREE
    step: float = None
    detour_radius: float = None

    def __post_init__(self):
        hbars = tuple(complex(h) for h in np.atleast_1d(self.hbars))
        object.__setattr__(self, "hbars", hbars)
        if not hbars:
            raise ValueError("at least one hbar is needed")
        if self.continuation not in ("pade", "march"):
            raise ValueError("continuation must be 'pade' or 'march', got {!r}".format(self.continuation))
        if self.side not in ("none", "L", "R"):
            raise ValueError("side must be 'none', 'L' or 'R', got {!r}".format(self.side))
        for hbar in hbars:
            if hbar == 0 or utils.angle_distance(cmath.phase(hbar), self.alpha) >= math.pi / 2:
                raise utils.LaplaceDivergenceError("hbar = {} is outside the half-plane of alpha = {:.6g}".format(hbar, self.alpha))

    def as_dict(self):
        return dict(anchor=self.anchor.as_dict(), alpha=self.alpha, hbars=[[h.real, h.imag] for h in self.hbars],
                    continuation=self.continuation, side=self.side)


@dataclass(eq=False)
class ResumResult:
    """Resummed q, p and the components f_± per ħ, with the quadrature error estimate of q."""
    request: ResumRequest
    q_values: np.ndarray
    p_values: np.ndarray
    constant_part: complex
    quadrature_error_estimates: np.ndarray
    f_plus: np.ndarray = None
    f_minus: np.ndarray = None
    optimal_truncation: np.ndarray = None

    def to_dataframe(self):
        hbars = np.array(self.request.hbars)
        frame = pd.DataFrame(dict(
            hbar_re=hbars.real, hbar_im=hbars.imag,
            q_re=self.q_values.real, q_im=self.q_values.imag,
            p_re=self.p_values.real, p_im=self.p_values.imag,
            error=self.quadrature_error_estimates))
        if self.optimal_truncation is not None:
            frame["truncated_re"] = self.optimal_truncation.real
            frame["truncated_im"] = self.optimal_truncation.imag
        return frame

    def to_json(self):
        pairs = lambda values: [[v.real, v.imag] for v in values]
        report = dict(request=self.request.as_dict(),
                      constant_part=[self.constant_part.real, self.constant_part.imag],
                      q=pairs(self.q_values), p=pairs(self.p_values),
                      error=[float(e) for e in self.quadrature_error_estimates])
        if self.f_plus is not None:
            report.update(f_plus=pairs(self.f_plus), f_minus=pairs(self.f_minus))
        if self.optimal_truncation is not None:
            report["optimal_truncation"] = pairs(self.optimal_truncation)
        return report


class BorelFunctions:
    """
    Borel transforms ω, ν = B[p̂/z], φ_± at an anchor.

    Inside taylor_radius they are evaluated from the exact Taylor series; beyond it from Padé approximants or from
    a march along the integration ray, built lazily and kept per direction.
    """

    def __init__(self, anchor, table, continuation="pade", pade_degree=PADE_DEGREE, step=None):
        self.anchor = anchor
        self.table = table
        self.continuation = continuation
        self.pade_degree = pade_degree
        order = table.max_n - 1
        plus, minus = series_engine.phi_hat(anchor, order, table)
        omega, omega_constant = series_engine.omega_hat(anchor, order, table)
        difference, g0 = series_engine.momentum_hat(anchor, order, table)
        self.series = dict(omega=omega, nu=difference.integral(), phi_plus=plus, phi_minus=minus)
        self.constants = dict(omega=omega_constant, nu=g0, phi_plus=0j, phi_minus=0j)
        self.modulus = abs(anchor.w)
        self.taylor_radius = self.modulus * min(borel_analysis.TAYLOR_FRACTION, 1e-16 ** (1.0 / order))
        self.step = step or self.modulus / MARCH_STEPS_PER_MODULUS
        self._pade = {}
        self._marches = {}

    def taylor(self, name):
        series, constant = self.series[name], self.constants[name]
        return lambda xi: series(xi) + constant

    def pade(self, name):
        if name not in self._pade:
            series = self.series[name]
            degree = min(self.pade_degree, series.order // 2)
            while True:
                try:
                    self._pade[name] = borel_analysis.pade(series, degree, degree)
                    break
                except utils.PadeDegeneracyError:
                    if degree - 2 < MIN_PADE_DEGREE:
                        raise
                    LOGGER.info("[%d/%d] Padé of %s is degenerate, lowering the order", degree, degree, name)
                    degree -= 2
        return self._pade[name]

    def march(self, alpha, reach):
        """Samples of every field along the ray α up to reach (reused when a longer march exists)."""
        key = round(utils.wrap_angle(alpha), 12)
        known = self._marches.get(key)
        if known is None or known[0] < reach:
            length = math.ceil(reach / self.step) * self.step
            result = borel_analysis.march_continue(self.anchor, borel_analysis.XiPath.ray(alpha, length),
                                                   self.step, self.table)
            self._marches[key] = (length, result)
        return self._marches[key][1]

    def along(self, name, alpha, reach=None):
        """Integrand on the ray α: Taylor inside taylor_radius, the chosen continuation beyond."""
        inner = self.taylor(name)
        constant = self.constants[name]
        if self.continuation == "pade":
            approx = self.pade(name)
            outer = lambda xi: approx(xi) + constant
        else:
            result = self.march(alpha, reach)
            values = getattr(result, name)
            radius = np.abs(result.xi)
            outer = lambda xi: borel_analysis.interpolate_samples(radius, values, np.abs(xi))

        def integrand(xi):
            xi = np.asarray(xi, dtype=complex)
            value = np.empty(xi.shape, dtype=complex)
            near = np.abs(xi) <= self.taylor_radius
            value[near] = inner(xi[near])
            if np.any(~near):
                value[~near] = outer(xi[~near])
            return value
        return integrand

    def switch_mismatch(self, name, alpha, reach=None):
        """|Taylor - continuation| at the switching radius, used in the error estimate."""
        point = np.array([self.taylor_radius * cmath.exp(1j * alpha)])
        inner = self.taylor(name)(point)[0]
        if self.continuation == "pade":
            outer = self.pade(name)(point)[0] + self.constants[name]
        else:
            result = self.march(alpha, reach)
            outer = borel_analysis.interpolate_samples(np.abs(result.xi), getattr(result, name), np.abs(point))[0]
        return abs(inner - outer)


def check_regular(anchor, alpha, tolerance=REGULAR_TOLERANCE):
    """:raises StokesDirectionError: when α is within tolerance of a Stokes direction at the anchor."""
    data = stokes_geometry.stokes_directions_at(anchor)
    if data.is_stokes(alpha, tolerance):
        raise utils.StokesDirectionError(
            "alpha = {:.6g} is a Stokes direction at z = {} (use lateral_resum)".format(alpha, anchor.z))


def _constant_terms(anchor, table):
    z = anchor.z
    return (table.q_monos[0].evaluate(z), table.f_plus_monos[0].evaluate(z), table.f_minus_monos[0].evaluate(z))


def resum_q(request, table, components=True):
    """
    Borel-Laplace sum of q̂ (and p̂, f̂_±) along a regular direction, per ħ.

    q = q_0 + L[ω] and p = z·L[ν]; with components=True f_± = f^±_0 + L[φ_±] are also returned, which satisfy
    q = q_0 + ħ(f_+ + f_-).

    :raises StokesDirectionError: when α is a Stokes direction at the anchor.
    :rtype: ResumResult
    """
    anchor, alpha = request.anchor, request.alpha
    check_regular(anchor, alpha)
    functions = BorelFunctions(anchor, table, request.continuation, request.pade_degree, request.step)
    q0, f0_plus, f0_minus = _constant_terms(anchor, table)
    decays = [(cmath.exp(1j * alpha) / hbar).real for hbar in request.hbars]
    reach = functions.taylor_radius + TAIL_LENGTHS / min(decays) if request.continuation == "march" else None
    names = FIELDS if components else FIELDS[:2]
    integrands = {name: functions.along(name, alpha, reach) for name in names}
    mismatch = functions.switch_mismatch("omega", alpha, reach)

    values = {name: [] for name in names}
    errors = []
    for hbar, decay in zip(request.hbars, decays):
        for name in names:
            integral = laplace_ray(integrands[name], alpha, hbar, reach=reach)
            values[name].append(integral.value)
            if name == "omega":
                weight = math.exp(-decay * functions.taylor_radius) / decay
                errors.append(integral.error + mismatch * weight)
        LOGGER.debug("resummed hbar = %s", hbar)

    truncated = np.array([series_engine.optimal_truncation(anchor, hbar, table)[0] for hbar in request.hbars])
    result = ResumResult(request, q0 + np.array(values["omega"]), anchor.z * np.array(values["nu"]), q0,
                         np.array(errors), optimal_truncation=truncated)
    if components:
        result.f_plus = f0_plus + np.array(values["phi_plus"])
        result.f_minus = f0_minus + np.array(values["phi_minus"])
    return result


LateralPieces = namedtuple("LateralPieces", ["common", "side", "error"])


def _lateral_setup(request, table):
    anchor, alpha = request.anchor, request.alpha
    xi0 = borel_analysis.singular_value_on_ray(anchor, alpha, REGULAR_TOLERANCE)
    modulus = abs(xi0)
    detour = request.detour_radius or modulus * math.sin(LATERAL_DETOUR_ANGLE)
    delta = math.asin(detour / modulus)
    decays = [(cmath.exp(1j * (alpha + sign * delta)) / hbar).real for hbar in request.hbars for sign in (1, -1)]
    if min(decays) <= 0:
        raise utils.LaplaceDivergenceError("a lateral ray leaves the half-plane of some hbar")
    step = request.step or modulus / MARCH_STEPS_PER_MODULUS
    corner = borel_analysis.TAYLOR_FRACTION * modulus
    reach = math.ceil((corner + TAIL_LENGTHS / min(decays)) / step) * step
    return modulus, detour, step, reach


def _lateral_pieces(request, table, side, setup, names=FIELDS):
    """
    Laplace integrals along one lateral path, split into the part shared by both sides (the first segment,
    computed identically for L and R) and the side-dependent chord and tilted ray.
    """
    anchor, alpha = request.anchor, request.alpha
    modulus, detour, step, reach = setup
    path = borel_analysis.XiPath.lateral(alpha, reach, side, modulus, detour)
    result = borel_analysis.march_continue(anchor, path, step, table)
    (_, corner), (chord_angle, chord), (tilted, _) = path.segments
    functions = BorelFunctions(anchor, table)
    corner_point = corner * cmath.exp(1j * alpha)
    chord_end = corner_point + chord * cmath.exp(1j * chord_angle)
    tail = result.s >= corner + chord - 1e-9 * modulus
    radius = corner + (result.s[tail] - corner - chord)

    common, lateral, errors = {}, {}, []
    for name in names:
        taylor = functions.taylor(name)
        values = getattr(result, name)[tail]
        spline = lambda xi, values=values: borel_analysis.interpolate_samples(radius, values, np.abs(xi))
        per_hbar_common, per_hbar_side = [], []
        for index, hbar in enumerate(request.hbars):
            first = laplace_segment(taylor, 0j, corner_point, hbar)
            second = laplace_segment(taylor, corner_point, chord_end, hbar)
            third = laplace_ray(spline, tilted, hbar, start=chord_end, reach=reach - corner)
            per_hbar_common.append(first.value)
            per_hbar_side.append(second.value + third.value)
            if name == "omega":
                errors.append(first.error + second.error + third.error + result.refinement * abs(third.value))
        common[name] = np.array(per_hbar_common)
        lateral[name] = np.array(per_hbar_side)
    return LateralPieces(common, lateral, np.array(errors))


def lateral_resum(request, table):
    """
    Lateral Borel-Laplace sum q^{L/R}_α along a Stokes direction, using the march on the lateral path.

    A regular direction is accepted too: both lateral paths are then homotopic to the straight ray, and the
    result is the march-based resum_q.

    :rtype: ResumResult
    """
    if request.side not in ("L", "R"):
        raise ValueError("lateral_resum needs side 'L' or 'R'")
    anchor = request.anchor
    if not stokes_geometry.stokes_directions_at(anchor).is_stokes(request.alpha, REGULAR_TOLERANCE):
        LOGGER.info("alpha = %.6g is regular at z = %s: the lateral path reduces to the ray", request.alpha, anchor.z)
        return resum_q(ResumRequest(anchor, request.alpha, request.hbars, "march", "none", step=request.step), table)
    pieces = _lateral_pieces(request, table, request.side, _lateral_setup(request, table))
    q0, f0_plus, f0_minus = _constant_terms(anchor, table)
    total = {name: pieces.common[name] + pieces.side[name] for name in FIELDS}
    return ResumResult(request, q0 + total["omega"], anchor.z * total["nu"], q0, pieces.error,
                       f_plus=f0_plus + total["phi_plus"], f_minus=f0_minus + total["phi_minus"])


@dataclass(eq=False)
class JumpReport:
    """
    Stokes jump Δq = q^L - q^R per ħ by both routes, and the fit of -|ħ| log|Δ| against (1, |ħ|, |ħ| log|ħ|).

    tail is the part of the variation route beyond the fit range of the variation.
    """
    anchor: object
    alpha: float
    xi0: complex
    hbars: np.ndarray
    lateral: np.ndarray
    variation: np.ndarray
    errors: np.ndarray
    rate: float
    fit: np.ndarray
    tail: np.ndarray = None

    @property
    def relative_difference(self):
        return np.abs(self.lateral - self.variation) / np.abs(self.lateral)

    def to_dataframe(self):
        return pd.DataFrame(dict(
            hbar_re=self.hbars.real, hbar_im=self.hbars.imag,
            lateral_re=self.lateral.real, lateral_im=self.lateral.imag,
            variation_re=self.variation.real, variation_im=self.variation.imag,
            relative_difference=self.relative_difference, error=self.errors))

    def to_json(self):
        pairs = lambda values: [[v.real, v.imag] for v in values]
        return dict(anchor=self.anchor.as_dict(), alpha=self.alpha, xi0=[self.xi0.real, self.xi0.imag],
                    hbar=pairs(self.hbars), lateral=pairs(self.lateral), variation=pairs(self.variation),
                    error=[float(e) for e in self.errors], rate=self.rate, fit=[float(c) for c in self.fit])


def fit_jump_rate(hbars, jumps):
    """
    Least-squares fit of -|ħ| log|Δ| = A + B|ħ| + C|ħ| log|ħ|; A estimates |ξ_0|.

    :return: (A, coefficients)
    """
    size = np.abs(np.asarray(hbars))
    if len(size) < 3:
        raise ValueError("the rate fit needs at least three hbar values")
    basis = np.column_stack((np.ones_like(size), size, size * np.log(size)))
    coefficients = linalg.lstsq(basis, -size * np.log(np.abs(jumps)))[0]
    return float(coefficients[0]), coefficients


def variation_jump(variation, hbar):
    """
    e^{-ξ_0/ħ}·∫_0^∞ e^{-x e^{iα}/ħ} Δω(x) e^{iα} dx from the local profile x^{1/2}Δω of the variation.

    With x = u² the integrand becomes 2e^{iα} e^{-u² e^{iα}/ħ} (x^{1/2}Δω)(u²), smooth at u = 0. The profile is
    integrated up to its fit range; the neglected tail is of relative size e^{-Re(e^{iα}/ħ)·fit_range}.
    """
    direction = cmath.exp(1j * variation.alpha)
    rule = _gauss_legendre(PANEL_NODES)
    edges = np.linspace(0, math.sqrt(variation.fit_range), 5)
    total = 0j
    for left, right in zip(edges[:-1], edges[1:]):
        u = 0.5 * (right + left) + 0.5 * (right - left) * rule["nodes"]
        values = np.exp(-u ** 2 * direction / hbar) * variation.profile(u ** 2, "omega")
        total += 0.5 * (right - left) * np.sum(rule["weights"] * values)
    return cmath.exp(-variation.xi0 / hbar) * 2 * direction * total


def _variation_tail(anchor, alpha, start, hbars, step, table, n_ext):
    """
    ∫ e^{-ξ/ħ} (ω^L - ω^R)(ξ) dξ beyond the point start·e^{iα} of the Stokes ray, per ħ.

    Each side leaves the ray on the arc of radius start up to the rotated ray α ± δ, sin δ = VARIATION_DETOUR, and
    follows that ray to infinity. On the arc ω is interpolated in the angle through the marches along α ± lδ/n_ext,
    the rotated rays the variation is extrapolated from. The outermost ray passes ξ_0 n_ext times farther than the
    innermost one and is marched with an n_ext times longer step.
    """
    delta = math.asin(VARIATION_DETOUR)
    angles = np.array([delta * (l + 1) / n_ext for l in range(n_ext)])
    decays = [(cmath.exp(1j * (alpha + sign * delta)) / hbar).real for hbar in hbars for sign in (1, -1)]
    if min(decays) <= 0:
        raise utils.LaplaceDivergenceError("a rotated ray leaves the half-plane of some hbar")
    outer_step = n_ext * step
    near = math.ceil((start + 6 * step) / step) * step
    far = math.ceil((start + TAIL_LENGTHS / min(decays)) / outer_step) * outer_step
    rule = _gauss_legendre(PANEL_NODES)
    theta = 0.5 * delta * (1 + rule["nodes"])

    totals = np.zeros(len(hbars), dtype=complex)
    for sign in (1, -1):
        on_arc = []
        for angle in angles[:-1]:
            inner = borel_analysis.march_continue(anchor, borel_analysis.XiPath.ray(alpha + sign * angle, near),
                                                  step, table)
            on_arc.append(borel_analysis.interpolate_samples(np.abs(inner.xi), inner.omega, np.array([start]))[0])
        outermost = borel_analysis.march_continue(anchor, borel_analysis.XiPath.ray(alpha + sign * delta, far),
                                                  outer_step, table)
        radius = np.abs(outermost.xi)
        on_arc.append(borel_analysis.interpolate_samples(radius, outermost.omega, np.array([start]))[0])
        on_arc = np.array(on_arc)
        arc_values = (interpolate.BarycentricInterpolator(angles, on_arc.real)(theta)
                      + 1j * interpolate.BarycentricInterpolator(angles, on_arc.imag)(theta))
        arc_points = start * np.exp(1j * (alpha + sign * theta))
        keep = radius >= start - 6 * outer_step

        def along(xi, radius=radius[keep], values=outermost.omega[keep]):
            return borel_analysis.interpolate_samples(radius, values, np.abs(xi))

        for position, hbar in enumerate(hbars):
            arc = 0.5 * delta * np.sum(rule["weights"] * np.exp(-arc_points / hbar) * arc_values * 1j * sign * arc_points)
            ray = laplace_ray(along, alpha + sign * delta, hbar, start=start * cmath.exp(1j * (alpha + sign * delta)),
                              reach=far - start)
            totals[position] += sign * (arc + ray.value)
    return totals


def stokes_jump(anchor, alpha, hbars, table, detour_radius=None, step=None, variation_step=None, n_ext=5):
    """
    Stokes jump across the Stokes direction α by two routes.

    The lateral route subtracts the two lateral sums, whose shared first segment cancels exactly. The variation
    route Laplace-transforms the variation of ω at ξ_0 (borel_analysis.variation) over its fit range and adds the
    part of the lateral difference beyond it, which carries the contributions of the farther singular values
    2ξ_0, 3ξ_0... and is of relative size e^{-fit_range/|ħ|}. The decay rate fit of the lateral values is also
    reported.

    :raises StokesDirectionError: when α is not a Stokes direction at the anchor.
    :rtype: JumpReport
    """
    if not stokes_geometry.stokes_directions_at(anchor).is_stokes(alpha, REGULAR_TOLERANCE):
        raise utils.StokesDirectionError("alpha = {:.6g} is not a Stokes direction at z = {}".format(alpha, anchor.z))
    hbars = np.array([complex(h) for h in np.atleast_1d(hbars)])
    request = ResumRequest(anchor, alpha, tuple(hbars), "march", "L", step=step, detour_radius=detour_radius)
    setup = _lateral_setup(request, table)
    left = _lateral_pieces(request, table, "L", setup, names=("omega",))
    right = _lateral_pieces(request, table, "R", setup, names=("omega",))
    lateral = left.side["omega"] - right.side["omega"]
    errors = left.error + right.error

    modulus = setup[0]
    finest = modulus * VARIATION_DETOUR / (6 * n_ext)
    variation_step = min(variation_step or finest, finest)
    variation = borel_analysis.variation(anchor, alpha, VARIATION_DETOUR * modulus, variation_step, table, n_ext=n_ext)
    tail = _variation_tail(anchor, alpha, modulus + variation.fit_range, hbars, variation_step, table, n_ext)
    routed = np.array([variation_jump(variation, hbar) for hbar in hbars]) + tail
    rate, fit = fit_jump_rate(hbars, lateral) if len(hbars) >= 3 else (math.nan, np.full(3, math.nan))
    LOGGER.info("jump rate %.6g against |xi0| = %.6g", rate, modulus)
    return JumpReport(anchor, alpha, variation.xi0, hbars, lateral, routed, errors, rate, fit, tail)


@dataclass(eq=False)
class VerifyReport:
    """ODE residuals ħ²q̈ - 6q² - t and ħq̇ - p on stencils of width h and 2h, and their Richardson combination."""
    anchor: object
    alpha: float
    hbar: complex
    width: float
    second_order: complex
    first_order: complex
    second_order_raw: tuple
    first_order_raw: tuple
    quadrature_error: float

    @property
    def max_residual(self):
        return max(abs(self.second_order), abs(self.first_order))

    def to_json(self):
        pair = lambda v: [complex(v).real, complex(v).imag]
        return dict(anchor=self.anchor.as_dict(), alpha=self.alpha, hbar=pair(self.hbar), h=self.width,
                    residual=pair(self.second_order), momentum_residual=pair(self.first_order),
                    residual_h=pair(self.second_order_raw[0]), residual_2h=pair(self.second_order_raw[1]),
                    momentum_residual_h=pair(self.first_order_raw[0]),
                    momentum_residual_2h=pair(self.first_order_raw[1]),
                    quadrature_error=self.quadrature_error)

    def to_dataframe(self):
        return pd.DataFrame([dict(h=self.width, residual=abs(self.second_order), momentum_residual=abs(self.first_order),
                                  quadrature_error=self.quadrature_error)])


def stencil_anchor(anchor, t):
    """Anchor over t on the branch continuing the given one: z·(t/t_0)^{1/4} for t near t_0."""
    return series_engine.Anchor.from_z(anchor.z * (complex(t) / anchor.t) ** 0.25)


def verify_ode(anchor, alpha, hbar, width, table, continuation="pade"):
    """
    Checks the resummed solution against ħ²q̈ = 6q² + t and ħq̇ = p with central differences in t.

    q and p are resummed at t_0 + kh, k = -4..4. The 5-point second difference and the 4-point first difference are
    formed with widths h and 2h and combined as (16R(h) - R(2h))/15.

    :raises StokesDirectionError: when the stencil crosses a Stokes line for α.
    :rtype: VerifyReport
    """
    offsets = np.arange(-4, 5)
    anchors = [stencil_anchor(anchor, anchor.t + k * width) for k in offsets]
    for value in anchor.singular_values:
        sides = {np.sign(utils.wrap_angle(cmath.phase(value * (a.z / anchor.z) ** 5) - alpha + math.pi) - math.pi)
                 for a in anchors}
        if len(sides) > 1 or 0 in sides:
            raise utils.StokesDirectionError("the stencil crosses a Stokes line for alpha = {:.6g}".format(alpha))
    q, p, errors = [], [], []
    for point in anchors:
        result = resum_q(ResumRequest(point, alpha, (hbar,), continuation), table, components=False)
        q.append(result.q_values[0])
        p.append(result.p_values[0])
        errors.append(result.quadrature_error_estimates[0])
    q, p = np.array(q), np.array(p)
    centre = 4

    def residuals(stride):
        h = stride * width
        at = lambda k: q[centre + k * stride]
        second = (-at(2) + 16 * at(1) - 30 * at(0) + 16 * at(-1) - at(-2)) / (12 * h ** 2)
        first = (-at(2) + 8 * at(1) - 8 * at(-1) + at(-2)) / (12 * h)
        return (hbar ** 2 * second - 6 * q[centre] ** 2 - anchor.t, hbar * first - p[centre])

    fine, coarse = residuals(1), residuals(2)
    second = (16 * fine[0] - coarse[0]) / 15
    first = (16 * fine[1] - coarse[1]) / 15
    LOGGER.info("ODE residual %.3e, momentum residual %.3e", abs(second), abs(first))
    return VerifyReport(anchor, alpha, hbar, width, second, first, (fine[0], coarse[0]), (fine[1], coarse[1]),
                        float(max(errors)))


def formal_residual(anchor, hbar, order, table):
    """
    ħ²q̈_N - 6q_N² - t for the partial sum q_N = Σ_{n ≤ N} q_n ħ^n, with q̈ taken exactly on the monomials.

    With t = -z⁴/24, d/dt (C z^e) = -6Ce z^{e-4} and d²/dt² (C z^e) = 36Ce(e-4) z^{e-8}.
    """
    table.require(order - 1, "formal residual order")
    z = anchor.z
    values = np.array([table.q_monos[n].evaluate(z) for n in range(order + 1)])
    second = np.array([36 * mono.z_exponent * (mono.z_exponent - 4) * mono.evaluate(z) / z ** 8
                       for mono in table.q_monos[:order + 1]])
    powers = hbar ** np.arange(order + 1)
    q = np.sum(values * powers)
    return hbar ** 2 * np.sum(second * powers) - 6 * q ** 2 - anchor.t


def propagate(anchor, q, p, t1, hbar, rtol=1e-12, atol=1e-14):
    """
    Integrates ħq̇ = p, ħṗ = 6q² + t from the anchor's t to t1 along the straight segment (DOP853).

    :return: (q, p) at t1
    """
    t0 = anchor.t
    span = complex(t1) - t0

    def field(s, y):
        t = t0 + s * span
        return np.array([span * y[1] / hbar, span * (6 * y[0] ** 2 + t) / hbar])

    solution = integrate.solve_ivp(field, (0.0, 1.0), np.array([q, p], dtype=complex), method="DOP853",
                                   rtol=rtol, atol=atol)
    if not solution.success:
        raise utils.ResurgenceError("propagation failed: {}".format(solution.message))
    return complex(solution.y[0, -1]), complex(solution.y[1, -1])


def _regular_angle(low, high, alpha):
    """
    An angle of the sector (low, high) away from its boundary and from the ray on which ±z⁵/30 has phase α:
    the middle of the wider of the two pieces that ray cuts the sector into.
    """
    width = high - low
    cut = float(np.mod(2 * alpha / 5 - low, width))
    if min(cut, width - cut) < REGULAR_TOLERANCE:
        return low + width / 2
    if cut >= width / 2:
        return low + cut / 2
    return low + (cut + width) / 2


def tritronquee_family(t_modulus, alpha, hbar, table, continuation="pade"):
    """
    The five deformed tritronquée solutions for the phase α, one per Stokes sector V_k of stokes_graph(α).

    Each is resummed at |t| = t_modulus from a τ inside V_k that is also off the rays where ±z⁵/30 has phase α,
    so that α stays a regular direction at the anchor. The sector column is the index reported by sector_of.

    :rtype: pandas.DataFrame
    """
    modulus = math.sqrt(t_modulus / 6)
    rows = []
    for low, high in stokes_geometry.stokes_graph(alpha).sectors["tau"]:
        tau = modulus * cmath.exp(1j * _regular_angle(low, high, alpha))
        info = stokes_geometry.sector_of(tau, alpha)
        anchor = info.anchor
        result = resum_q(ResumRequest(anchor, alpha, (hbar,), continuation), table, components=False)
        rows.append(dict(sector=info.index, t_re=anchor.t.real, t_im=anchor.t.imag, tau_re=tau.real, tau_im=tau.imag,
                         q_re=result.q_values[0].real, q_im=result.q_values[0].imag,
                         error=result.quadrature_error_estimates[0]))
    return pd.DataFrame(rows)
