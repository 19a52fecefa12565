"""
The series_engine module handles truncated power series in the Borel variable ξ at a fixed anchor.

It provides the Anchor type (consistent t, τ, z values), the Borel transform of ħ-series,
the convolution product, and the construction of the Borel transforms φ̂_± of the
associated-system series and ω̂ of the formal solution itself from an exact CoeffTable.
"""
import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..utils import utils

LOGGER = logging.getLogger(__name__)

# B[Σ a_n ħ^n] = Σ a_{n+1} ξ^n / n!, the only normalization inverted by the Laplace transform used for resummation.
BOREL_CONVENTION = "factorial_n"
BOREL_CONVENTIONS = ("factorial_n", "factorial_n_plus_1")

ANCHOR_TOLERANCE = 1e-12

RadiusEstimate = namedtuple("RadiusEstimate", ["radius", "uncertainty", "regression", "ratio"])


@dataclass(frozen=True)
class Anchor:
    """
    A base point carrying consistent t, τ and z values: z⁴ = -24t, τ = z²/12 (so τ² = -t/6).

    branch_id records which of the four quartic roots was picked, -1 when the anchor was given through z directly.
    """
    t: complex
    tau: complex
    z: complex
    branch_id: int = -1

    def __post_init__(self):
        if self.z == 0:
            raise utils.TurningPointError("anchor at the turning point z = 0")
        scale = max(1.0, abs(self.z) ** 4)
        if abs(self.z ** 2 - 12 * self.tau) > ANCHOR_TOLERANCE * scale or abs(self.tau ** 2 + self.t / 6) > ANCHOR_TOLERANCE * scale:
            raise ValueError("inconsistent anchor t={}, tau={}, z={}".format(self.t, self.tau, self.z))

    @classmethod
    def from_z(cls, z, branch_id=-1):
        z = complex(z)
        if z == 0:
            raise utils.TurningPointError("anchor at the turning point z = 0")
        return cls(t=-z ** 4 / 24, tau=z ** 2 / 12, z=z, branch_id=branch_id)

    @property
    def w(self):
        """Flow coordinate w = z⁵/30, which is also the Borel singular value ξ_+."""
        return self.z ** 5 / 30

    @property
    def singular_values(self):
        """(ξ_+, ξ_-) = (z⁵/30, -z⁵/30)."""
        return self.w, -self.w

    def rescaled(self, factor):
        """Anchor at factor·z; Borel data transform as φ(λz, λ⁵ξ) = λ^{-8} φ(z, ξ)."""
        return Anchor.from_z(self.z * factor)

    def same_point(self, other):
        return abs(self.z - other.z) <= ANCHOR_TOLERANCE * max(1.0, abs(self.z))

    def as_dict(self):
        return dict(t=[self.t.real, self.t.imag], tau=[self.tau.real, self.tau.imag],
                    z=[self.z.real, self.z.imag], branch_id=self.branch_id)


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """
    Truncated power series Σ_{n ≤ order} coeffs[n] ξ^n at an anchor (anchor may be None for plain test series).

    Callers only evaluate it inside the estimated radius of convergence.
    """
    anchor: object
    coeffs: np.ndarray
    order: int

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.ndim != 1 or len(coeffs) != self.order + 1:
            raise ValueError("coeffs must have length order+1")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def from_coeffs(cls, coeffs, anchor=None):
        coeffs = np.asarray(coeffs, dtype=complex)
        return cls(anchor=anchor, coeffs=coeffs, order=len(coeffs) - 1)

    def __call__(self, xi):
        """Horner evaluation, vectorized over xi."""
        xi = np.asarray(xi, dtype=complex)
        value = np.zeros_like(xi)
        for coefficient in self.coeffs[::-1]:
            value = value * xi + coefficient
        return value

    def derivative(self):
        if self.order == 0:
            return TruncatedSeries(self.anchor, np.zeros(1, dtype=complex), 0)
        return TruncatedSeries(self.anchor, self.coeffs[1:] * np.arange(1, self.order + 1), self.order - 1)

    def integral(self):
        """∫_0^ξ, gaining one order."""
        coeffs = np.concatenate(([0j], self.coeffs / np.arange(1, self.order + 2)))
        return TruncatedSeries(self.anchor, coeffs, self.order + 1)

    def _check(self, other):
        if self.anchor is not None and other.anchor is not None and not self.anchor.same_point(other.anchor):
            raise utils.AnchorMismatchError("series built at different anchors")

    def __add__(self, other):
        self._check(other)
        order = min(self.order, other.order)
        return TruncatedSeries(self.anchor or other.anchor, self.coeffs[:order + 1] + other.coeffs[:order + 1], order)

    def __sub__(self, other):
        return self + other.scaled(-1)

    def scaled(self, factor):
        return TruncatedSeries(self.anchor, self.coeffs * factor, self.order)

    def truncated(self, order):
        order = min(order, self.order)
        return TruncatedSeries(self.anchor, self.coeffs[:order + 1], order)

    def to_json(self):
        return dict(anchor=self.anchor.as_dict() if self.anchor is not None else None,
                    coeffs=[[c.real, c.imag] for c in self.coeffs])


def borel_transform(hbar_series, convention=BOREL_CONVENTION):
    """
    Borel transform of a ħ-series, term by term.

    With the adopted convention the coefficient of ξ^n is a_{n+1}/n!; the alternative "factorial_n_plus_1"
    divides by (n+1)! instead and is only kept so that the two normalizations can be compared.

    :param hbar_series: The ħ-coefficients (a_0, a_1, ...).
    :param str convention: One of BOREL_CONVENTIONS.
    :return: (coefficients of ξ^0..ξ^{len-2}, dropped constant a_0)
    :rtype: tuple(numpy.ndarray, complex)
    """
    if convention not in BOREL_CONVENTIONS:
        raise ValueError("unknown Borel convention '{}'".format(convention))
    series = np.asarray(hbar_series, dtype=complex)
    if len(series) == 0:
        return np.zeros(0, dtype=complex), 0j
    shift = 0 if convention == "factorial_n" else 1
    factorials = np.array([math.factorial(n + shift) for n in range(len(series) - 1)], dtype=float)
    return series[1:] / factorials, complex(series[0])


def convolve(f, g):
    """
    Convolution (f∗g)(ξ) = ∫_0^ξ f(u) g(ξ-u) du of two truncated series.

    ξ^i ∗ ξ^j = i! j!/(i+j+1)! ξ^{i+j+1}, so (f∗g)_n = Σ_{i+j=n-1} f_i g_j B(i+1, j+1). The result keeps min(order_f, order_g) + 1.

    :raises AnchorMismatchError: when the two series live at different anchors.
    :rtype: TruncatedSeries
    """
    f._check(g)
    order = min(f.order, g.order) + 1
    coeffs = np.zeros(order + 1, dtype=complex)
    for n in range(1, order + 1):
        i = np.arange(0, n)
        j = n - 1 - i
        valid = (i <= f.order) & (j <= g.order)
        i, j = i[valid], j[valid]
        coeffs[n] = np.sum(f.coeffs[i] * g.coeffs[j] * special.beta(i + 1, j + 1))
    return TruncatedSeries(f.anchor or g.anchor, coeffs, order)


def phi_hat(anchor, order, table):
    """
    Borel transforms φ̂_±(z, ξ) = Σ_n f^±_{n+1}(z) ξ^n / n! truncated at the given order.

    :param Anchor anchor: Base point; only z is used.
    :param int order: Truncation order in ξ.
    :param CoeffTable table: Needs max_n ≥ order + 1.
    :return: (φ̂_+, φ̂_-)
    """
    table.require(order + 1, "phi_hat order")
    pair = []
    for sign in ("+", "-"):
        monos = table.f_monos(sign)
        coeffs = [monos[n + 1].evaluate(anchor.z, math.factorial(n)) for n in range(order + 1)]
        pair.append(TruncatedSeries(anchor, np.array(coeffs, dtype=complex), order))
    return tuple(pair)


def omega_hat(anchor, order, table):
    """
    Borel transform ω̂ = B[q̂] = Σ_n q_{n+1}(z) ξ^n / n!, together with its constant part f^+_0 + f^-_0.

    ω̂ = f^+_0 + f^-_0 + ∫_0^ξ (φ̂_+ + φ̂_-), and since f^±_0 = ∓½z^{-3} the constant is 0.
    The series is odd in ξ because every q_{odd} vanishes.

    :return: (ω̂ as TruncatedSeries, constant part)
    """
    table.require(order, "omega_hat order")
    coeffs = [table.q_monos[n + 1].evaluate(anchor.z, math.factorial(n)) for n in range(order + 1)]
    constant = table.f_plus_monos[0].evaluate(anchor.z) + table.f_minus_monos[0].evaluate(anchor.z)
    return TruncatedSeries(anchor, np.array(coeffs, dtype=complex), order), constant


def momentum_hat(anchor, order, table):
    """
    Borel transform of the momentum series p̂ divided by z, B[p̂/z] = G_0 + ∫(φ̂_+ - φ̂_-) with G_0 = f^+_0 - f^-_0.

    Resummed momentum is p = z·Laplace[G_0 + ∫(φ_+ - φ_-)], the Laplace transform of the constant G_0 being ħG_0.
    """
    plus, minus = phi_hat(anchor, order, table)
    constant = table.f_plus_monos[0].evaluate(anchor.z) - table.f_minus_monos[0].evaluate(anchor.z)
    return plus - minus, constant


ScaledAnchor = namedtuple("ScaledAnchor", ["anchor", "xi_factor", "phi_factor", "omega_factor"])


def rescale_anchor(anchor, factor):
    """
    Anchor at λz together with the factors relating its Borel data to the original ones.

    φ̂_±(λz, λ⁵ξ) = λ^{-8} φ̂_±(z, ξ) and ω̂(λz, λ⁵ξ) = λ^{-3} ω̂(z, ξ), since f_{n+1} ∝ z^{-5n-8} and q_{n+1} ∝ z^{-5n-3}.

    :rtype: ScaledAnchor
    """
    factor = complex(factor)
    if factor == 0:
        raise utils.TurningPointError("rescaling by zero sends the anchor to the turning point")
    return ScaledAnchor(anchor.rescaled(factor), factor ** 5, factor ** -8, factor ** -3)


def q_partial_sum(anchor, hbar, order, table):
    """Σ_{n ≤ order} q_n(z) ħ^n."""
    table.require(order - 1, "partial sum order")
    return sum(table.q_monos[n].evaluate(anchor.z) * hbar ** n for n in range(order + 1))


def p_partial_sum(anchor, hbar, order, table):
    """Σ_{n ≤ order} p_n(z) ħ^n."""
    table.require(order - 1, "partial sum order")
    return sum(table.p_monos[n].evaluate(anchor.z) * hbar ** n for n in range(order + 1))


def optimal_truncation(anchor, hbar, table, max_order=None):
    """
    Superasymptotic partial sum of q̂: truncates just before the smallest nonzero term.

    :return: (value, truncation order, size of the smallest term)
    """
    max_order = table.max_n + 1 if max_order is None else min(max_order, table.max_n + 1)
    sizes = []
    for n in range(2, max_order + 1, 2):
        sizes.append((abs(table.q_monos[n].evaluate(anchor.z) * hbar ** n), n))
    smallest, stop = min(sizes)
    value = q_partial_sum(anchor, hbar, stop - 1, table)
    LOGGER.debug("optimal truncation at order %d, smallest term %.3e", stop, smallest)
    return value, stop - 1, smallest


def radius_estimate(series, tail_fraction=0.5, floor=1e-300):
    """
    Radius of convergence of a truncated series, combining a Cauchy-Hadamard regression with a ratio test.

    The regression fits log|c_n| = A - n log R over the nonzero coefficients of the tail; the ratio test uses the
    last two nonzero coefficients, (|c_i| / |c_j|)^{1/(j-i)}. The estimate is their mean and the uncertainty their spread.

    :param TruncatedSeries series: Needs order ≥ 20.
    :rtype: RadiusEstimate
    """
    if series.order < 20:
        raise ValueError("radius_estimate needs order >= 20, got {}".format(series.order))
    start = int(series.order * (1 - tail_fraction))
    indices = np.arange(start, series.order + 1)
    magnitudes = np.abs(series.coeffs[start:])
    scale = np.max(np.abs(series.coeffs))
    keep = magnitudes > max(floor, 1e-250 * scale)
    indices, magnitudes = indices[keep], magnitudes[keep]
    if len(indices) < 2:
        raise ValueError("degenerate series: the coefficient tail is zero")
    slope, _ = np.polyfit(indices, np.log(magnitudes), 1)
    regression = float(np.exp(-slope))
    gap = indices[-1] - indices[-2]
    ratio = float((magnitudes[-2] / magnitudes[-1]) ** (1.0 / gap))
    radius = 0.5 * (regression + ratio)
    return RadiusEstimate(radius, 0.5 * abs(regression - ratio), regression, ratio)


def coefficient_growth(series):
    """sup_n |c_n|^{1/n} over the nonzero coefficients with n ≥ 1."""
    magnitudes = np.abs(series.coeffs[1:])
    n = np.arange(1, series.order + 1)
    keep = magnitudes > 0
    if not np.any(keep):
        return 0.0
    return float(np.max(magnitudes[keep] ** (1.0 / n[keep])))
