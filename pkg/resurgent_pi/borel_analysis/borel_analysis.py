"""
The borel_analysis module continues the Borel transforms beyond their disc of convergence.

Two independent continuations are provided:

* Padé approximants of the truncated Taylor series, whose poles locate the Borel singularities;
* a marching solver for the integral form of the Borel-plane system
  (±V - ∂_ξ)φ_± = a(z)(φ_+ + φ_-)∗(φ_+ + φ_-) + b(z)(φ_+ - φ_-), φ_±(z, 0) = c(z),
  written in the flow coordinate w = z⁵/30 where V = -∂_w, so that the characteristics are straight lines
  and φ_+(w, ξ) = c(w - ξ) - ∫_0^ξ Φ(w - ξ + s, s) ds, φ_-(w, ξ) = c(w + ξ) - ∫_0^ξ Φ(w + ξ - s, s) ds.

On top of the march sit the lateral continuations around a singularity, the variation between two sheets,
the discrete weighted norm and the exponential-type fits.
"""
import cmath
import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import integrate, interpolate, linalg

from ..series_engine import series_engine
from ..utils import utils

LOGGER = logging.getLogger(__name__)

FROISSART_THRESHOLD = 1e-10
PADE_RCOND = 1e-14
PADE_GUARD = 1e-8
BLOWUP_FACTOR = 1e8
CLEARANCE_FACTOR = 2
CORRECTOR_ITERATIONS = 3
CORRECTOR_TOLERANCE = 1e-8
REFINEMENT_TOLERANCE = 1e-3
# Share of |ξ_0| inside which lateral paths use the Taylor series instead of the march.
TAYLOR_FRACTION = 0.7
# Closest distance to the singular value, in steps, of march samples used for the local expansion.
LOCAL_FIT_MARGIN = 30
LOCAL_FIT_DEGREE = 10
# Leading half-integer power of the variation: φ_± behave like (ξ - ξ_0)^{-3/2}, ω like (ξ - ξ_0)^{-1/2}.
PUISEUX_ORDERS = dict(phi_plus=3, phi_minus=3, omega=1)
CSV_COLUMNS = ["s", "xi_re", "xi_im", "phip_re", "phip_im", "phim_re", "phim_im", "omega_re", "omega_im"]

RayMarch = namedtuple("RayMarch", ["xi", "phi_plus", "phi_minus", "omega", "nu", "blowup_at", "z_clearance", "triangle"])


@dataclass(frozen=True, eq=False)
class PadeApprox:
    """
    [m/n] rational approximant P(u)/Q(u) in the scaled variable u = ξ/scale.

    den_coeffs[0] = 1. Poles (in ξ) and their residues are computed once; poles whose residue falls below
    FROISSART_THRESHOLD times the series scale are flagged as spurious doublets.
    """
    num_coeffs: np.ndarray
    den_coeffs: np.ndarray
    anchor: object = None
    scale: float = 1.0
    guard: float = PADE_GUARD
    threshold: float = FROISSART_THRESHOLD

    def __post_init__(self):
        num = np.asarray(self.num_coeffs, dtype=complex)
        den = np.asarray(self.den_coeffs, dtype=complex)
        if den[0] != 1:
            raise ValueError("den_coeffs[0] must be 1")
        object.__setattr__(self, "num_coeffs", num)
        object.__setattr__(self, "den_coeffs", den)
        denominator = np.polynomial.Polynomial(np.trim_zeros(den, "b") if np.any(den[1:]) else den[:1])
        roots = denominator.roots() if denominator.degree() > 0 else np.zeros(0, dtype=complex)
        numerator = np.polynomial.Polynomial(num)
        slope = denominator.deriv()
        with np.errstate(divide="ignore", invalid="ignore"):
            residues = numerator(roots) / slope(roots) * self.scale if len(roots) else np.zeros(0, dtype=complex)
        norm = max(np.max(np.abs(num)), 1e-300) * abs(self.scale)
        genuine = np.isfinite(residues) & (np.abs(residues) >= self.threshold * norm)
        if np.any(~genuine):
            LOGGER.debug("Froissart filter dropped %d of %d poles", int(np.sum(~genuine)), len(roots))
        object.__setattr__(self, "poles", roots * self.scale)
        object.__setattr__(self, "residues", residues)
        object.__setattr__(self, "genuine", genuine)

    @property
    def degrees(self):
        return len(self.num_coeffs) - 1, len(self.den_coeffs) - 1

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=complex)
        poles = self.poles[self.genuine]
        if len(poles):
            if np.any(np.abs(xi[..., None] - poles) < self.guard * np.maximum(1.0, np.abs(poles))):
                raise ValueError("Padé approximant evaluated within {:.1e} of a pole".format(self.guard))
        u = xi / self.scale
        return np.polynomial.polynomial.polyval(u, self.num_coeffs) / np.polynomial.polynomial.polyval(u, self.den_coeffs)


def _solve_denominator(coeffs, m, n):
    """b_1..b_n with Σ_k b_k c_{m+i-k} = 0 for i = 1..n, b_0 = 1 (truncated-SVD least squares)."""
    if n == 0:
        return np.ones(1, dtype=complex)
    padded = lambda k: coeffs[k] if 0 <= k < len(coeffs) else 0j
    column = np.array([padded(m + i - 1) for i in range(1, n + 1)])
    row = np.array([padded(m + 1 - k) for k in range(1, n + 1)])
    system = linalg.toeplitz(column, row)
    rhs = -np.array([padded(m + i) for i in range(1, n + 1)])
    solution, _, rank, _ = linalg.lstsq(system, rhs, cond=PADE_RCOND)
    if rank < n:
        raise utils.PadeDegeneracyError(
            "[{}/{}] Padé system has numerical rank {} < {}; try a lower order".format(m, n, rank, n))
    return np.concatenate(([1.0 + 0j], solution))


def _numerator(coeffs, den, m):
    return np.array([sum(den[j] * coeffs[k - j] for j in range(min(k, len(den) - 1) + 1)) for k in range(m + 1)])


def pade(series, m, n, threshold=FROISSART_THRESHOLD):
    """
    [m/n] Padé approximant of a truncated series.

    The variable is rescaled by the coefficient growth so that the Toeplitz system is balanced, and the system
    is solved by least squares with singular values below PADE_RCOND·σ_max discarded. Odd and even series are
    reduced to a Padé approximant in ξ², which halves the size of the system.

    :param TruncatedSeries series: Needs order ≥ m + n.
    :raises PadeDegeneracyError: when the system is numerically rank deficient.
    :rtype: PadeApprox
    """
    if m < 0 or n < 0:
        raise ValueError("Padé degrees must be non-negative")
    if series.order < m + n:
        raise ValueError("[{}/{}] Padé approximant needs order >= {}, got {}".format(m, n, m + n, series.order))
    coeffs = series.coeffs[:m + n + 1]
    growth = series_engine.coefficient_growth(series_engine.TruncatedSeries.from_coeffs(coeffs))
    scale = 1.0 / growth if growth > 0 else 1.0
    scaled = coeffs * scale ** np.arange(m + n + 1)

    odd = len(scaled) > 1 and not np.any(scaled[0::2]) and np.any(scaled[1::2])
    even = not odd and len(scaled) > 1 and not np.any(scaled[1::2])
    if odd and m >= 1 and n % 2 == 0:
        reduced = scaled[1::2]
        m_r, n_r = (m - 1) // 2, n // 2
        den_r = _solve_denominator(reduced, m_r, n_r)
        num_r = _numerator(reduced, den_r, m_r)
        num = np.zeros(m + 1, dtype=complex)
        num[1:2 * m_r + 2:2] = num_r
        den = np.zeros(n + 1, dtype=complex)
        den[0::2] = den_r
    elif even and n % 2 == 0:
        reduced = scaled[0::2]
        m_r, n_r = m // 2, n // 2
        den_r = _solve_denominator(reduced, m_r, n_r)
        num = np.zeros(m + 1, dtype=complex)
        num[0:2 * m_r + 1:2] = _numerator(reduced, den_r, m_r)
        den = np.zeros(n + 1, dtype=complex)
        den[0::2] = den_r
    else:
        den = _solve_denominator(scaled, m, n)
        num = _numerator(scaled, den, m)
    return PadeApprox(num, den, anchor=series.anchor, scale=scale, threshold=threshold)


def nearest_singularities(approx):
    """Genuine poles of a Padé approximant sorted by modulus (empty when every pole was filtered)."""
    poles = approx.poles[approx.genuine]
    return poles[np.argsort(np.abs(poles), kind="stable")]


@dataclass(frozen=True)
class XiPath:
    """
    Piecewise-linear path from 0 in the ξ-plane: segments of (direction, length).

    Lateral paths (side 'L' or 'R') run along the ray up to TAYLOR_FRACTION·|ξ_0|, step aside along a chord
    and leave on the ray α ± δ which passes the singular value ξ_0 at distance detour_radius.
    """
    segments: tuple
    side: str = "none"
    detour_radius: float = 0.0
    singular_modulus: float = None

    def __post_init__(self):
        if self.side not in ("none", "L", "R"):
            raise ValueError("side must be 'none', 'L' or 'R', got {!r}".format(self.side))
        if not self.segments:
            raise ValueError("a path needs at least one segment")
        for _, length in self.segments:
            if not length > 0:
                raise ValueError("segment lengths must be positive")

    @classmethod
    def ray(cls, alpha, length):
        return cls(((float(alpha), float(length)),))

    @classmethod
    def lateral(cls, alpha, reach, side, singular_modulus, detour_radius, taylor_fraction=TAYLOR_FRACTION):
        """
        Lateral path around the singular value of modulus singular_modulus on the ray α, out to |ξ| = reach.

        L passes on the left of the singularity (ray α + δ), R on the right (ray α - δ), with sin δ = detour_radius/|ξ_0|.
        """
        if side not in ("L", "R"):
            raise ValueError("lateral paths need side 'L' or 'R'")
        corner = taylor_fraction * singular_modulus
        if not 0 < detour_radius < singular_modulus - corner:
            raise ValueError("detour_radius must lie in (0, {:.4g})".format(singular_modulus - corner))
        if reach <= corner:
            raise ValueError("reach must exceed the Taylor region {:.4g}".format(corner))
        sign = 1 if side == "L" else -1
        delta = math.asin(detour_radius / singular_modulus)
        chord = (alpha + sign * (delta / 2 + math.pi / 2), 2 * corner * math.sin(delta / 2))
        segments = ((float(alpha), corner), chord, (float(alpha + sign * delta), float(reach - corner)))
        return cls(segments, side, float(detour_radius), float(singular_modulus))

    @property
    def vertices(self):
        points = [0j]
        for direction, length in self.segments:
            points.append(points[-1] + length * cmath.exp(1j * direction))
        return points

    @property
    def length(self):
        return sum(length for _, length in self.segments)

    @property
    def alpha(self):
        return self.segments[0][0]

    @property
    def lateral_angle(self):
        """Direction of the last segment."""
        return self.segments[-1][0]


@dataclass(frozen=True, eq=False)
class CharTriangle:
    """
    Full triangle of march nodes: row j holds the offsets |m| ≤ n_steps - j, entries outside are NaN.

    w, z and the coefficient arrays a(z) = 3z^{-2}, b(z) = 3z^{-5}, c(z) = -6z^{-8} are indexed by m + n_steps.
    """
    anchor: object
    step: float
    n_steps: int
    w0: complex
    w: np.ndarray
    z: np.ndarray
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray


@dataclass(eq=False)
class ContinuationResult:
    """Values of φ_±, ω and ν = B[p̂/z] along a realized path, ordered by arc length s."""
    path: XiPath
    s: np.ndarray
    xi: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    omega: np.ndarray
    nu: np.ndarray
    blowup_at: complex = None
    bound_report: tuple = (0.0, 0.0)
    z_clearance: float = math.inf
    refinement: float = 0.0
    triangle: CharTriangle = None

    @property
    def samples(self):
        return np.column_stack([self.xi, self.phi_plus, self.phi_minus, self.omega])

    def to_dataframe(self):
        return pd.DataFrame(dict(
            s=self.s, xi_re=self.xi.real, xi_im=self.xi.imag,
            phip_re=self.phi_plus.real, phip_im=self.phi_plus.imag,
            phim_re=self.phi_minus.real, phim_im=self.phi_minus.imag,
            omega_re=self.omega.real, omega_im=self.omega.imag), columns=CSV_COLUMNS)

    def to_csv(self):
        return self.to_dataframe().to_csv(index=False, float_format="%.17g")


def _monomial_values(mono, z):
    if mono.coeff == 0:
        return np.zeros_like(z)
    return float(mono.coeff) * z ** mono.z_exponent


def _steps_for(length, step):
    count = int(round(length / step))
    if count < 1 or abs(count * step - length) > 1e-9 * max(length, step):
        raise ValueError("step {} does not divide the segment length {}".format(step, length))
    return count


def _march_ray(anchor, direction, n_steps, step, table, detect_blowup=False, keep_triangle=False):
    """One pass of the characteristic march along the ray ξ_j = j·step·direction, without refinement."""
    z0 = complex(anchor.z)
    w0 = anchor.w
    hd = step * direction
    offsets = np.arange(-n_steps, n_steps + 1)
    w = w0 + offsets * hd
    clearance = CLEARANCE_FACTOR * step
    close = np.abs(w) < clearance
    blowup_at = None
    if np.any(close):
        reach = int(np.min(np.abs(offsets[close])))
        if not detect_blowup:
            raise utils.ClearanceError("path hits turning point: |w| < {:.3g} near xi = {:.6g}".format(clearance, reach * hd))
        if reach < 2:
            raise utils.ClearanceError("anchor lies within the clearance {:.3g} of the turning point".format(clearance))
        blowup_at = reach * hd
        LOGGER.info("turning point image reached at xi = %.6g, march truncated", blowup_at)
        n_steps = reach - 1
        offsets = np.arange(-n_steps, n_steps + 1)
        w = w0 + offsets * hd

    N = n_steps
    # Principal powers of w/w0 keep z continuous: the row never encircles w = 0.
    z = z0 * (w / w0) ** 0.2
    a = 3.0 / z ** 2
    b = 3.0 / z ** 5
    c_plus = _monomial_values(table.f_plus_monos[1], z)
    c_minus = _monomial_values(table.f_minus_monos[1], z)
    initial = np.maximum(np.abs(c_plus), np.abs(c_minus))

    size = 2 * N + 1
    sigma = np.zeros((N + 1, size), dtype=complex)
    sigma[0] = c_plus + c_minus
    phi_plus = np.empty(N + 1, dtype=complex)
    phi_minus = np.empty(N + 1, dtype=complex)
    phi_plus[0], phi_minus[0] = c_plus[N], c_minus[N]
    if keep_triangle:
        tri_plus = np.full((N + 1, size), np.nan + 0j)
        tri_minus = np.full((N + 1, size), np.nan + 0j)
        tri_plus[0], tri_minus[0] = c_plus, c_minus

    previous = b * (c_plus - c_minus)
    before_previous = None
    diagonal_plus = 0.5 * previous.copy()
    diagonal_minus = 0.5 * previous.copy()

    last = N
    for j in range(1, N + 1):
        width = N - j
        idx = np.arange(N - width, N + width + 1)
        key_plus, key_minus = idx - j, idx + j
        if j > 1:
            fixed = hd * np.einsum("ki,ki->i", sigma[1:j, idx], sigma[j - 1:0:-1, idx])
        else:
            fixed = np.zeros(len(idx), dtype=complex)
        guess = previous[idx] if before_previous is None else 2 * previous[idx] - before_previous[idx]

        changes = []
        for _ in range(CORRECTOR_ITERATIONS):
            plus = c_plus[key_plus] - hd * (diagonal_plus[key_plus] + 0.5 * guess)
            minus = c_minus[key_minus] - hd * (diagonal_minus[key_minus] + 0.5 * guess)
            update = a[idx] * (fixed + hd * sigma[0, idx] * (plus + minus)) + b[idx] * (plus - minus)
            changes.append(np.max(np.abs(update - guess)))
            guess = update
        plus = c_plus[key_plus] - hd * (diagonal_plus[key_plus] + 0.5 * guess)
        minus = c_minus[key_minus] - hd * (diagonal_minus[key_minus] + 0.5 * guess)

        scale = max(np.max(np.abs(guess)), 1e-300)
        if len(changes) > 1 and changes[-1] > CORRECTOR_TOLERANCE * scale and changes[-1] > 0.5 * changes[-2]:
            raise utils.CorrectorDivergenceError(
                "implicit term did not settle at xi = {:.6g} (last update {:.3e})".format(j * hd, changes[-1]))

        growth = np.maximum(np.abs(plus), np.abs(minus)) / initial[idx]
        if not np.all(np.isfinite(growth)) or np.max(growth) > BLOWUP_FACTOR:
            if not detect_blowup:
                raise utils.ContinuationError("march blew up at xi = {:.6g}".format(j * hd))
            blowup_at = j * hd if blowup_at is None else min(blowup_at, j * hd, key=abs)
            LOGGER.info("|phi| exceeded %.0e times its initial size at xi = %.6g", BLOWUP_FACTOR, j * hd)
            last = j - 1
            break

        sigma[j, idx] = plus + minus
        diagonal_plus[key_plus] += guess
        diagonal_minus[key_minus] += guess
        before_previous, previous = previous, np.zeros(size, dtype=complex)
        previous[idx] = guess
        phi_plus[j], phi_minus[j] = plus[width], minus[width]
        if keep_triangle:
            tri_plus[j, idx], tri_minus[j, idx] = plus, minus
        if j % 200 == 0:
            LOGGER.debug("march row %d of %d", j, N)

    phi_plus, phi_minus = phi_plus[:last + 1], phi_minus[:last + 1]
    xi = np.arange(last + 1) * hd
    constant = table.f_plus_monos[0].evaluate(z0) + table.f_minus_monos[0].evaluate(z0)
    g0 = table.f_plus_monos[0].evaluate(z0) - table.f_minus_monos[0].evaluate(z0)
    omega = constant + integrate.cumulative_trapezoid(phi_plus + phi_minus, dx=hd, initial=0)
    nu = g0 + integrate.cumulative_trapezoid(phi_plus - phi_minus, dx=hd, initial=0)
    triangle = None
    if keep_triangle:
        triangle = CharTriangle(anchor, step, N, w0, w, z, a, b, c_plus, tri_plus, tri_minus)
    return RayMarch(xi, phi_plus, phi_minus, omega, nu, blowup_at, float(np.min(np.abs(z))), triangle)


def _refined_march(anchor, alpha, length, step, table, richardson=True, detect_blowup=False, keep_triangle=False):
    """
    March along the ray of direction α, optionally combined with a half-step run by Richardson extrapolation.

    :return: (RayMarch, relative disagreement between the two step sizes)
    """
    direction = cmath.exp(1j * alpha)
    count = _steps_for(length, step)
    coarse = _march_ray(anchor, direction, count, step, table, detect_blowup, keep_triangle)
    if not richardson:
        return coarse, 0.0
    fine = _march_ray(anchor, direction, 2 * count, step / 2, table, detect_blowup)
    common = min(len(coarse.xi), (len(fine.xi) + 1) // 2)
    fields = {}
    disagreement = 0.0
    for name in ("phi_plus", "phi_minus", "omega", "nu"):
        rough = getattr(coarse, name)[:common]
        sharp = getattr(fine, name)[:2 * common:2]
        fields[name] = (4 * sharp - rough) / 3
        disagreement = max(disagreement, np.max(np.abs(sharp - rough)) / max(np.max(np.abs(sharp)), 1e-300))
    blowup_at = fine.blowup_at if fine.blowup_at is not None else coarse.blowup_at
    if disagreement > REFINEMENT_TOLERANCE and not detect_blowup:
        raise utils.StepRefinementError(
            "halving the step changed the march by {:.2e} (tolerance {:.0e})".format(disagreement, REFINEMENT_TOLERANCE))
    march = RayMarch(coarse.xi[:common], fields["phi_plus"], fields["phi_minus"], fields["omega"], fields["nu"],
                     blowup_at, min(coarse.z_clearance, fine.z_clearance), coarse.triangle)
    return march, disagreement


def _taylor_samples(anchor, table, points):
    order = table.max_n - 1
    plus, minus = series_engine.phi_hat(anchor, order, table)
    omega, constant = series_engine.omega_hat(anchor, order, table)
    difference, g0 = series_engine.momentum_hat(anchor, order, table)
    nu = difference.integral()
    return plus(points), minus(points), omega(points) + constant, nu(points) + g0


def march_continue(anchor, path, step, table, richardson=True, detect_blowup=False, keep_triangle=False):
    """
    Continues φ_± and ω along a path by marching the characteristic integral equations.

    Straight paths are marched directly. Lateral paths use the Taylor series on their first two segments and the
    march along the last one, so the values are those of the continuation around the declared singularity.
    With richardson=True every march is repeated with half the step and the two runs are combined.

    :param Anchor anchor: Base point.
    :param XiPath path: A ray (side 'none') or a lateral path from XiPath.lateral.
    :param float step: Step in |ξ|; it must divide the ray length.
    :param CoeffTable table: Exact coefficients for c(z) and the Taylor segments.
    :param bool detect_blowup: Truncate and report instead of raising when the turning point image is reached.
    :raises ClearanceError: when the path hits the turning point image and detect_blowup is off.
    :raises StepRefinementError: when the two step sizes disagree beyond REFINEMENT_TOLERANCE.
    :rtype: ContinuationResult
    """
    if path.side == "none":
        if len(path.segments) != 1:
            raise ValueError("straight paths have a single segment; lateral paths come from XiPath.lateral")
        alpha, length = path.segments[0]
        march, refinement = _refined_march(anchor, alpha, length, step, table, richardson, detect_blowup, keep_triangle)
        s = np.abs(march.xi)
        result = ContinuationResult(path, s, march.xi, march.phi_plus, march.phi_minus, march.omega, march.nu,
                                    march.blowup_at, z_clearance=march.z_clearance, refinement=refinement,
                                    triangle=march.triangle)
    else:
        (alpha, corner), (chord_angle, chord), (tilted, tail) = path.segments
        first = np.arange(0, int(math.ceil(corner / step))) * (corner / math.ceil(corner / step))
        across = np.arange(0, int(math.ceil(chord / step)) + 1) * (chord / math.ceil(chord / step))
        start = corner * cmath.exp(1j * alpha)
        points = np.concatenate((first * cmath.exp(1j * alpha), start + across * cmath.exp(1j * chord_angle)))
        arc = np.concatenate((first, corner + across))
        plus, minus, omega, nu = _taylor_samples(anchor, table, points)

        reach = corner + tail
        march, refinement = _refined_march(anchor, tilted, reach, step, table, richardson, detect_blowup, keep_triangle)
        radius = np.abs(march.xi)
        beyond = radius > corner * (1 + 1e-12)
        s = np.concatenate((arc, corner + chord + (radius[beyond] - corner)))
        result = ContinuationResult(
            path, s,
            np.concatenate((points, march.xi[beyond])),
            np.concatenate((plus, march.phi_plus[beyond])),
            np.concatenate((minus, march.phi_minus[beyond])),
            np.concatenate((omega, march.omega[beyond])),
            np.concatenate((nu, march.nu[beyond])),
            march.blowup_at, z_clearance=march.z_clearance, refinement=refinement, triangle=march.triangle)
    result.bound_report = fit_exponential_type(result)
    return result


def convergence_order(anchor, alpha, length, step, table):
    """
    Observed order of the march from three step sizes h, h/2 and h/4, compared on ω at the coarse nodes.
    """
    runs = [_refined_march(anchor, alpha, length, step / 2 ** k, table, richardson=False)[0] for k in range(3)]
    common = len(runs[0].xi)
    first = np.max(np.abs(runs[0].omega - runs[1].omega[:2 * common:2]))
    second = np.max(np.abs(runs[1].omega[:2 * common:2] - runs[2].omega[:4 * common:4]))
    if second == 0:
        return math.inf
    return math.log2(first / second)


def fit_exponential_type(result, tail=0.5):
    """
    Fits log|ω| ≈ log C + K|ξ| over the outer part of the samples, then raises C so that the bound holds on every sample.

    :return: (C, K) with K ≥ 0.
    """
    radius = np.abs(result.xi)
    size = np.abs(result.omega)
    if len(radius) == 0:
        return 0.0, 0.0
    keep = (radius >= (1 - tail) * radius.max()) & (size > 0)
    rate = 0.0
    if np.sum(keep) >= 2 and np.ptp(radius[keep]) > 0:
        rate = max(float(np.polyfit(radius[keep], np.log(size[keep]), 1)[0]), 0.0)
    bound = float(np.max(size * np.exp(-rate * radius)))
    return bound, rate


def weighted_norm(result, K):
    """
    Discrete weighted norm ∫ e^{-Ks} max(|φ_+|, |φ_-|) ds along the realized path (trapezoid rule).

    :raises ValueError: for an empty result.
    """
    if len(result.s) == 0:
        raise ValueError("weighted_norm needs at least one sample")
    if len(result.s) == 1:
        return 0.0
    values = np.maximum(np.abs(result.phi_plus), np.abs(result.phi_minus))
    return float(integrate.trapezoid(np.exp(-K * result.s) * values, result.s))


def exponential_type_scan(moduli, alpha, table, extent=3.0, n_steps=120, argument=0.0):
    """
    Fitted exponential type of ω along the ray α for anchors z = R e^{i·argument}, one row per modulus R.

    The ray length is extent·|ξ_0| so that every anchor is marched over the same share of its own Borel plane.

    :rtype: pandas.DataFrame
    """
    rows = []
    for modulus in moduli:
        anchor = series_engine.Anchor.from_z(modulus * cmath.exp(1j * argument))
        length = extent * abs(anchor.w)
        result = march_continue(anchor, XiPath.ray(alpha, length), length / n_steps, table, richardson=False)
        bound, rate = result.bound_report
        rows.append(dict(modulus=modulus, K=rate, C=bound, z_clearance=result.z_clearance))
    return pd.DataFrame(rows, columns=["modulus", "K", "C", "z_clearance"])


def singular_value_on_ray(anchor, alpha, tolerance=1e-9):
    """The singular value ±z⁵/30 lying on the ray of direction α, or None for a regular direction."""
    for value in anchor.singular_values:
        if utils.angle_distance(cmath.phase(value), alpha) < tolerance:
            return value
    return None


def _extrapolation_weights(nodes):
    """Lagrange weights of the interpolation polynomial through the nodes, evaluated at 0."""
    nodes = np.asarray(nodes, dtype=float)
    weights = np.ones(len(nodes))
    for i, node in enumerate(nodes):
        for k, other in enumerate(nodes):
            if k != i:
                weights[i] *= other / (other - node)
    return weights


def interpolate_samples(radius, values, points):
    """Quintic spline through complex samples given at increasing radii, evaluated at points."""
    real = interpolate.make_interp_spline(radius, values.real, k=5)
    imag = interpolate.make_interp_spline(radius, values.imag, k=5)
    return real(points) + 1j * imag(points)


@dataclass(eq=False)
class VariationResult:
    """
    Variation Δ_{ξ_0} of φ_± and ω at the offsets x beyond the singular value (ξ = ξ_0 + x e^{iα}).

    profile(x, field) returns x^{P/2} Δ(x), the part of the variation that is analytic at x = 0, from the local fit.
    """
    anchor: object
    alpha: float
    xi0: complex
    x: np.ndarray
    delta_plus: np.ndarray
    delta_minus: np.ndarray
    delta_omega: np.ndarray
    fits: dict = None
    fit_range: float = 0.0

    @property
    def xi(self):
        start = self.xi0 if self.xi0 is not None else abs(self.anchor.w) * cmath.exp(1j * self.alpha)
        return start + self.x * cmath.exp(1j * self.alpha)

    @property
    def stokes(self):
        return self.xi0 is not None

    def profile(self, x, field="omega"):
        x = np.asarray(x, dtype=float)
        if self.fits is None:
            return np.zeros(x.shape, dtype=complex)
        power = PUISEUX_ORDERS[field]
        chebyshev = np.polynomial.chebyshev.chebval(-x / self.fit_range, self.fits[field])
        return 2 * 1j ** power * chebyshev

    def to_dataframe(self):
        xi = self.xi
        return pd.DataFrame(dict(
            x=self.x, xi_re=xi.real, xi_im=xi.imag,
            dphip_re=self.delta_plus.real, dphip_im=self.delta_plus.imag,
            dphim_re=self.delta_minus.real, dphim_im=self.delta_minus.imag,
            domega_re=self.delta_omega.real, domega_im=self.delta_omega.imag))


def _lateral_values(anchor, alpha, side, angles, reach, step, table, richardson, radii):
    sign = 1 if side == "L" else -1
    weights = _extrapolation_weights(angles)
    total = np.zeros((3, len(radii)), dtype=complex)
    for weight, angle in zip(weights, angles):
        march, _ = _refined_march(anchor, alpha + sign * angle, reach, step, table, richardson)
        radius = np.abs(march.xi)
        for row, values in enumerate((march.phi_plus, march.phi_minus, march.omega)):
            total[row] += weight * interpolate_samples(radius, values, radii)
    return total


def _local_fit(ray_data, lateral_data, fit_range, degree=LOCAL_FIT_DEGREE):
    """
    Joint fit of the expansion at the singular value.

    Before ξ_0 (y = |ξ_0| - |ξ| > 0, u = √y) a field reads F = E(y)u^{-P} + B(y); beyond it the variation is
    Δ(x) = 2 i^P E(-x) x^{-P/2}. Both data sets constrain the same Chebyshev series E on [-fit_range, fit_range].
    """
    y, before = ray_data
    x, variation_values = lateral_data
    fits = {}
    for row, field in enumerate(("phi_plus", "phi_minus", "omega")):
        power = PUISEUX_ORDERS[field]
        u_power = np.sqrt(y) ** power
        basis_before = np.polynomial.chebyshev.chebvander(y / fit_range, degree)
        basis_beyond = np.polynomial.chebyshev.chebvander(-x / fit_range, degree)
        system = np.vstack((
            np.hstack((basis_before, u_power[:, None] * basis_before)),
            np.hstack((basis_beyond, np.zeros_like(basis_beyond))),
        )).astype(complex)
        target = np.concatenate((u_power * before[row], variation_values[row] * x ** (power / 2) / (2 * 1j ** power)))
        solution = linalg.lstsq(system, target)[0]
        fits[field] = solution[:degree + 1]
    return fits


def variation(anchor, alpha, detour_radius, step, table, offsets=None, n_ext=4, extent=0.6, richardson=True):
    """
    Variation Δ_{ξ_0}φ_± and Δ_{ξ_0}ω across the Stokes ray α, sampled at ξ = ξ_0 + x e^{iα}.

    Each lateral value is the limit of marches along the rotated rays α ± δ_l, δ_l = l·δ/n_ext with
    sin δ = detour_radius/|ξ_0|, extrapolated to δ = 0 through the interpolation polynomial in δ.
    Offsets closer than 2·detour_radius to ξ_0 are not reached that way; they come from the local expansion at
    ξ_0 fitted jointly on the march before ξ_0 and the lateral differences.
    On a regular direction the two lateral paths coincide and the variation is zero.

    :param float detour_radius: Largest distance at which the rotated rays pass ξ_0; below |ξ_0|/2.
    :param float step: Requested march step; lowered to detour_radius/(6·n_ext) when larger.
    :param offsets: Distances x > 0 beyond ξ_0, default Chebyshev points in (0, extent·|ξ_0|].
    :rtype: VariationResult
    """
    modulus = abs(anchor.w)
    if offsets is None:
        offsets = 0.5 * extent * modulus * (1 - np.cos(np.pi * (np.arange(24) + 0.5) / 24))
    offsets = np.asarray(offsets, dtype=float)
    if np.any(offsets <= 0):
        raise ValueError("offsets beyond the singular value must be positive")
    xi0 = singular_value_on_ray(anchor, alpha)
    if xi0 is None:
        LOGGER.info("direction %.6g is regular at z = %s: lateral paths coincide", alpha, anchor.z)
        zeros = np.zeros(len(offsets), dtype=complex)
        return VariationResult(anchor, alpha, None, offsets, zeros, zeros.copy(), zeros.copy())
    if not 0 < detour_radius < 0.5 * modulus:
        raise ValueError("detour_radius must lie in (0, |xi0|/2)")
    step = min(step, detour_radius / (6 * n_ext))
    fit_range = max(extent * modulus, float(offsets.max()))
    if fit_range >= modulus:
        raise ValueError("offsets must stay below |xi0| where the next singular value sits")

    inner = 2 * detour_radius
    grid = inner + 0.5 * (fit_range - inner) * (1 - np.cos(np.pi * (np.arange(16) + 0.5) / 16))
    far = offsets[offsets >= inner]
    radii = modulus + np.concatenate((grid, far))
    count = int(math.ceil((radii.max() + 6 * step) / step))
    reach = count * step
    delta = math.asin(detour_radius / modulus)
    angles = [delta * (l + 1) / n_ext for l in range(n_ext)]
    LOGGER.info("variation at xi0 = %s: %d rotated rays per side, step %.3g", xi0, n_ext, step)
    difference = (_lateral_values(anchor, alpha, "L", angles, reach, step, table, richardson, radii)
                  - _lateral_values(anchor, alpha, "R", angles, reach, step, table, richardson, radii))

    before_count = int(math.ceil(modulus / step))
    straight, _ = _refined_march(anchor, alpha, before_count * step, step, table, richardson, detect_blowup=True)
    y = modulus - np.abs(straight.xi)
    keep = (y >= LOCAL_FIT_MARGIN * step) & (y <= fit_range)
    stride = max(1, int(np.sum(keep)) // 60)
    before = np.vstack((straight.phi_plus, straight.phi_minus, straight.omega))[:, keep][:, ::stride]
    fits = _local_fit((y[keep][::stride], before), (grid, difference[:, :len(grid)]), fit_range)

    result = VariationResult(anchor, alpha, xi0, offsets, None, None, None, fits, fit_range)
    values = {}
    for row, field in enumerate(("phi_plus", "phi_minus", "omega")):
        local = result.profile(offsets, field) * offsets ** (-PUISEUX_ORDERS[field] / 2)
        local[offsets >= inner] = difference[row, len(grid):]
        values[field] = local
    result.delta_plus, result.delta_minus, result.delta_omega = values["phi_plus"], values["phi_minus"], values["omega"]
    return result
