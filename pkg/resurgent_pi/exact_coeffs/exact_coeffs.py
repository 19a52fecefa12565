"""
The exact_coeffs module generates every coefficient of the formal 0-parameter solution exactly.

Two independent routes are provided and checked against each other:

* the closed forms in the t-coordinate, a^±_{2n} and b^±_{2n+1}, built from the integer sequence c_n,
  whose coefficients live in Q ∪ Q·κ with κ = i/√6 (class ExactKappa);
* the recursion written directly in the z-coordinate (t = -z⁴/24, q_0 = z²/12), which produces
  monomials σ_n z^{2-5n} with rational σ_n (class MonomialCoeff).

Both are gathered, together with the associated-system coefficients f^±_n, in an immutable
CoeffTable which can be saved to and reloaded from a versioned plain-text cache.
Rationals are plain fractions.Fraction values: always reduced, positive denominator, zero is 0/1.
"""
import logging
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from ..utils import utils

LOGGER = logging.getLogger(__name__)

ExactRational = Fraction

CACHE_HEADER = "RESURGENT-PI-COEFFS"
CACHE_VERSION = "v1"

KAPPA_SQUARED = Fraction(-1, 6)


def _sign(sign):
    """Normalizes '+', '-', +1 and -1 into +1 or -1."""
    if sign in ("+", 1, "plus"):
        return 1
    if sign in ("-", -1, "minus"):
        return -1
    raise ValueError("sign must be '+' or '-', got {!r}".format(sign))


def _sign_char(sign):
    return "+" if _sign(sign) == 1 else "-"


@dataclass(frozen=True)
class ExactKappa:
    """
    Exact scalar rat · κ^kappa_pow with κ = i/√6.

    Any integer power of κ may be given to the constructor, κ² = -1/6 is folded into rat so that
    kappa_pow always ends up in {0, 1}. Zero is stored as 0·κ⁰.
    """
    rat: Fraction
    kappa_pow: int = 0

    def __post_init__(self):
        rat = Fraction(self.rat)
        power = int(self.kappa_pow)
        remainder = power % 2
        rat *= KAPPA_SQUARED ** ((power - remainder) // 2)
        if rat == 0:
            remainder = 0
        object.__setattr__(self, "rat", rat)
        object.__setattr__(self, "kappa_pow", remainder)

    @staticmethod
    def _coerce(other):
        if isinstance(other, ExactKappa):
            return other
        if isinstance(other, (int, Fraction)):
            return ExactKappa(Fraction(other), 0)
        return NotImplemented

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return ExactKappa(self.rat * other.rat, self.kappa_pow + other.kappa_pow)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.rat == 0:
            raise ZeroDivisionError("division by an exact zero")
        return self * other ** -1

    def __pow__(self, exponent):
        exponent = int(exponent)
        if self.rat == 0:
            if exponent < 0:
                raise ZeroDivisionError("negative power of an exact zero")
            return ExactKappa(Fraction(int(exponent == 0)), 0)
        return ExactKappa(self.rat ** exponent, self.kappa_pow * exponent)

    def __neg__(self):
        return ExactKappa(-self.rat, self.kappa_pow)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.rat == 0:
            return self
        if self.rat == 0:
            return other
        if other.kappa_pow != self.kappa_pow:
            raise TypeError("sum of a rational and a κ-multiple is not a monomial in κ")
        return ExactKappa(self.rat + other.rat, self.kappa_pow)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def is_rational(self):
        return self.kappa_pow == 0

    def to_complex(self):
        value = complex(mpmath.mpf(self.rat.numerator) / self.rat.denominator)
        if self.kappa_pow:
            value *= 1j / math.sqrt(6)
        return value

    def __str__(self):
        if self.kappa_pow:
            return "({})·κ".format(self.rat)
        return str(self.rat)


KAPPA = ExactKappa(Fraction(1), 1)


@dataclass(frozen=True)
class MonomialCoeff:
    """Exact monomial coeff · z^z_exponent."""
    coeff: Fraction
    z_exponent: int

    def evaluate(self, z, divisor=1):
        """
        Value of coeff · z^z_exponent / divisor at a complex z.

        The product is formed in mpmath so that huge coefficients against tiny powers of z neither overflow nor underflow.
        """
        if self.coeff == 0:
            return 0j
        value = mpmath.mpf(self.coeff.numerator) / (mpmath.mpf(self.coeff.denominator) * divisor)
        return complex(value * mpmath.mpc(z) ** self.z_exponent)

    __call__ = evaluate


def q_exponent(n):
    return 2 - 5 * n


def p_exponent(n):
    return 3 - 5 * n


def f_exponent(n):
    return -5 * n - 3


class _GrowingSequence:
    """Lazily extended, lock-protected list for a convolution-type recursion."""
    def __init__(self, first, step):
        self._values = [first]
        self._step = step
        self._lock = threading.Lock()

    def upto(self, n):
        if n < 0:
            raise ValueError("index must be non-negative, got {}".format(n))
        with self._lock:
            while len(self._values) <= n:
                self._values.append(self._step(self._values))
            return list(self._values[:n + 1])


def _c_step(values):
    n = len(values)
    convolution = sum(values[i] * values[n - i] for i in range(1, n))
    return 2 * (5 * n - 6) * (5 * n - 4) * values[n - 1] + convolution


def _m_step(values):
    n = len(values)
    convolution = sum(values[i] * values[n - i] for i in range(1, n))
    return 13 * values[n - 1] + convolution


_C_SEQUENCE = _GrowingSequence(Fraction(-1, 2), _c_step)
_M_SEQUENCE = _GrowingSequence(Fraction(1, 13), _m_step)


def c_seq(n):
    """
    Returns c_n, the integer sequence controlling the closed forms.

    c_0 = -1/2 and c_n = 2(5n-6)(5n-4)c_{n-1} + Σ_{i+j=n, i,j≥1} c_i c_j, so that c_n is a positive integer for n ≥ 1.

    :param int n: Index of the term.
    :return: The exact value of c_n.
    :rtype: Fraction
    """
    return _C_SEQUENCE.upto(n)[n]


def m_seq(n):
    """
    Returns M_n, the majorant sequence with M_0 = 1/13 and M_n = 13M_{n-1} + Σ_{i+j=n, i,j≥1} M_i M_j.

    :param int n: Index of the term.
    :rtype: Fraction
    """
    return _M_SEQUENCE.upto(n)[n]


def c_sequence(max_n):
    """List [c_0, ..., c_max_n]."""
    return _C_SEQUENCE.upto(max_n)


def m_sequence(max_n):
    """List [M_0, ..., M_max_n]."""
    return _M_SEQUENCE.upto(max_n)


def a_coeff(n, sign="+"):
    """
    Returns a^±_{2n} = -(±1)^{n-1} c_n / (3^n 2^{5n-1} κ^{n-1}), the coefficient of ħ^{2n} t^{(1-5n)/2}.

    :param int n: Half of the ħ-order.
    :param sign: '+' or '-', the branch of q_0 = ±κ t^{1/2}.
    :rtype: ExactKappa
    """
    s = _sign(sign)
    rational = -Fraction(s) ** (n - 1) * c_seq(n) / (Fraction(3) ** n * Fraction(2) ** (5 * n - 1))
    return ExactKappa(rational, 0) * KAPPA ** (1 - n)


def b_coeff(n, sign="+"):
    """
    Returns b^±_{2n+1} = -½(5n-6) a^±_{2n}, following the closed form as printed.

    The derivative of q_{2n} with respect to t is given by momentum_coeff instead.

    :rtype: ExactKappa
    """
    return a_coeff(n, sign) * Fraction(-(5 * n - 6), 2)


def momentum_coeff(n, sign="+"):
    """
    Returns the t-coefficient of p_{2n+1} = q̇_{2n}, namely (1-5n)/2 · a^±_{2n}.

    The momentum series is p̂ = Σ momentum_coeff(n) t^{-(1+5n)/2} ħ^{2n+1}.

    :rtype: ExactKappa
    """
    return a_coeff(n, sign) * Fraction(1 - 5 * n, 2)


def tau_coeff(n, sign="+"):
    """Rational coefficient ã_{2n} = a_{2n} κ^{5n-1} of τ^{1-5n} ħ^{2n}, with τ = κ t^{1/2}."""
    value = a_coeff(n, sign) * KAPPA ** (5 * n - 1)
    assert value.is_rational()
    return value.rat


def tau_momentum_coeff(n, sign="+"):
    """Rational coefficient b̃_{2n+1} = b_{2n+1} κ^{5n+1}."""
    value = b_coeff(n, sign) * KAPPA ** (5 * n + 1)
    assert value.is_rational()
    return value.rat


def _sigma_step(sigmas):
    # sigmas holds σ_0, σ_2, ..., σ_{2n-2}
    n = len(sigmas)
    k = 12 - 10 * n
    convolution = sum(sigmas[i] * sigmas[n - i] for i in range(1, n))
    return 36 * k * (k - 4) * sigmas[n - 1] - 6 * convolution


def even_sigmas(count, start=None):
    """
    σ_0, σ_2, ..., σ_{2(count-1)} from the z-coordinate recursion.

    q_{2n} = (q̈_{2n-2} - 6 Σ' q_{2i} q_{2j}) / (12 q_0) with ∂_t = -6z^{-3}∂_z, which on monomials reads
    σ_{2n} = 36k(k-4)σ_{2n-2} - 6 Σ'_{i+j=n} σ_{2i}σ_{2j}, k = 12 - 10n.

    :param list start: Already known leading values to continue from.
    """
    sigmas = list(start) if start else [Fraction(1, 12)]
    while len(sigmas) < count:
        sigmas.append(_sigma_step(sigmas))
    return sigmas[:count]


def q_monomials(max_n, start=None):
    """
    Returns the monomials q_n(z) = σ_n z^{2-5n} for n = 0..max_n, with σ_odd = 0.

    :param int max_n: Highest ħ-order.
    :param list start: Optional known σ_{2i} values to continue the recursion from.
    :rtype: list(MonomialCoeff)
    """
    if max_n < 0:
        raise ValueError("max_n must be non-negative")
    sigmas = even_sigmas(max_n // 2 + 1, start)
    monos = []
    for n in range(max_n + 1):
        coeff = sigmas[n // 2] if n % 2 == 0 else Fraction(0)
        monos.append(MonomialCoeff(coeff, q_exponent(n)))
    return monos


def p_monomials(max_n, q_monos=None):
    """
    Returns the monomials p_n(z) of the momentum series p̂ = ħ ∂_t q̂, for n = 0..max_n.

    p_{n+1} = q̇_n, so p_{2m+1} = -6(2-10m) σ_{2m} z^{-2-10m} and the even ones vanish.
    """
    if q_monos is None or len(q_monos) < max_n:
        q_monos = q_monomials(max(max_n - 1, 0))
    monos = [MonomialCoeff(Fraction(0), p_exponent(0))]
    for n in range(1, max_n + 1):
        source = q_monos[n - 1]
        coeff = -6 * source.z_exponent * source.coeff
        monos.append(MonomialCoeff(coeff, p_exponent(n)))
    return monos


def f_monomials(max_n, sign="+", q_monos=None, p_monos=None):
    """
    Returns the associated-system coefficients f^±_n = (1/2z)(z q_{n+1} ± p_{n+1}) = ρ^±_n z^{-5n-3}, n = 0..max_n.

    Odd n only see q_{n+1} and even n only see p_{n+1}; in particular f^±_0 = ±p_1/(2z) = ∓½ z^{-3}
    and f^±_1 = q_2/2 = -6 z^{-8}.

    :param int max_n: Highest index.
    :param sign: '+' or '-'.
    :rtype: list(MonomialCoeff)
    """
    s = _sign(sign)
    if q_monos is None or len(q_monos) < max_n + 2:
        q_monos = q_monomials(max_n + 1)
    if p_monos is None or len(p_monos) < max_n + 2:
        p_monos = p_monomials(max_n + 1, q_monos)
    monos = []
    for n in range(max_n + 1):
        coeff = (q_monos[n + 1].coeff + s * p_monos[n + 1].coeff) / 2
        monos.append(MonomialCoeff(coeff, f_exponent(n)))
    return monos


def dual_route_sigma(n, sign="+"):
    """
    σ_{2n} predicted by the closed form: q_{2n} = a_{2n} t^{(1-5n)/2} with t^{1/2} = z²/(12 a_0), i.e. σ_{2n} = a_{2n}(12 a_0)^{5n-1}.

    Both signs give the same value; a κ left over would mean the routes disagree, and is reported as such.
    """
    value = a_coeff(n, sign) * (a_coeff(0, sign) * 12) ** (5 * n - 1)
    if not value.is_rational():
        raise utils.CoeffTableError("closed form left a factor κ at n={}".format(n))
    return value.rat


def dual_route_momentum(n, sign="+"):
    """Coefficient of p_{2n+1} predicted by the closed form, momentum_coeff(n)·(12 a_0)^{5n+1}."""
    value = momentum_coeff(n, sign) * (a_coeff(0, sign) * 12) ** (5 * n + 1)
    if not value.is_rational():
        raise utils.CoeffTableError("closed form left a factor κ at n={}".format(n))
    return value.rat


@dataclass(frozen=True)
class CoeffTable:
    """
    Immutable collection of every exact coefficient up to a depth.

    max_n is the highest index of f^±; q and p are kept up to max_n + 1 (f_n needs q_{n+1} and p_{n+1}),
    while c, M, a and b are kept up to (max_n + 1) // 2 so that a_{2n} covers every stored q_{2n}.
    """
    max_n: int
    q_monos: tuple
    p_monos: tuple
    f_plus_monos: tuple
    f_minus_monos: tuple
    c_seq: tuple
    m_seq: tuple
    a_seq: dict = field(compare=True)
    b_seq: dict = field(compare=True)

    @property
    def half_depth(self):
        return (self.max_n + 1) // 2

    def f_monos(self, sign):
        return self.f_plus_monos if _sign(sign) == 1 else self.f_minus_monos

    def require(self, order, what="order"):
        """Raises CoeffTableError when the table cannot serve f up to the given index."""
        if order > self.max_n:
            raise utils.CoeffTableError(
                "coefficient table depth {} is insufficient for {} {}; extend the table".format(self.max_n, what, order))


def _assemble(max_n, sigmas, c_values, m_values):
    q_monos = q_monomials(max_n + 1, start=sigmas)
    p_monos = p_monomials(max_n + 1, q_monos)
    half = (max_n + 1) // 2
    return CoeffTable(
        max_n=max_n,
        q_monos=tuple(q_monos),
        p_monos=tuple(p_monos),
        f_plus_monos=tuple(f_monomials(max_n, "+", q_monos, p_monos)),
        f_minus_monos=tuple(f_monomials(max_n, "-", q_monos, p_monos)),
        c_seq=tuple(c_values[:half + 1]),
        m_seq=tuple(m_values[:half + 1]),
        a_seq={s: tuple(a_coeff(n, s) for n in range(half + 1)) for s in ("+", "-")},
        b_seq={s: tuple(b_coeff(n, s) for n in range(half + 1)) for s in ("+", "-")},
    )


def build_table(max_n):
    """
    Computes a CoeffTable from scratch.

    :param int max_n: Highest index of f^± to keep.
    :rtype: CoeffTable
    """
    if max_n < 0:
        raise ValueError("max_n must be non-negative")
    LOGGER.debug("building coefficient table with max_n=%d", max_n)
    half = (max_n + 1) // 2
    return _assemble(max_n, None, c_sequence(half), m_sequence(half))


def extend_table(table, max_n):
    """
    Extends an existing table to a larger depth by continuing its own recursions.

    The stored σ values seed the z-recursion, so the result agrees with a table built from scratch only if the stored values were right.
    """
    if max_n <= table.max_n:
        return table
    LOGGER.debug("extending coefficient table from %d to %d", table.max_n, max_n)
    sigmas = [mono.coeff for mono in table.q_monos[::2]]
    half = (max_n + 1) // 2
    c_values = list(table.c_seq)
    while len(c_values) <= half:
        c_values.append(_c_step(c_values))
    m_values = list(table.m_seq)
    while len(m_values) <= half:
        m_values.append(_m_step(m_values))
    return _assemble(max_n, sigmas, c_values, m_values)


def associated_system_residual(table, order=None):
    """
    Exact residuals of the associated system satisfied by f^±, one pair per ħ-order n.

    The system reads ±ħ V f_± - f_± = ±½z^{-3} + ħ(a S² + b G), with V = -6z^{-4}∂_z, S = f_+ + f_-, G = f_+ - f_-,
    a = 3z^{-2} and b = 3z^{-5}. Every term at order ħ^n is a multiple of z^{-5n-3}, so each residual is a rational.

    :return: list of (residual_plus, residual_minus), all zero for a consistent table.
    """
    if order is None:
        order = table.max_n
    table.require(order)
    plus, minus = table.f_plus_monos, table.f_minus_monos
    sums = [p.coeff + m.coeff for p, m in zip(plus, minus)]
    differences = [p.coeff - m.coeff for p, m in zip(plus, minus)]
    residuals = []
    for n in range(order + 1):
        quadratic = sum(sums[i] * sums[n - 1 - i] for i in range(n)) if n else Fraction(0)
        linear = differences[n - 1] if n else Fraction(0)
        pair = []
        for s, monos in ((1, plus), (-1, minus)):
            derivative = Fraction(0)
            if n:
                previous = monos[n - 1]
                derivative = -6 * previous.z_exponent * previous.coeff
            left = s * derivative - monos[n].coeff
            right = (Fraction(s, 2) if n == 0 else Fraction(0)) + 3 * quadratic + 3 * linear
            pair.append(left - right)
        residuals.append(tuple(pair))
    return residuals


def save_table(table, path):
    """
    Writes a table to the versioned plain-text cache, atomically.

    One record per line with decimal integers, so the round trip is exact. p is not written: it is derived from q on load.
    """
    lines = ["{} {} max_n={}".format(CACHE_HEADER, CACHE_VERSION, table.max_n)]
    for n, mono in enumerate(table.q_monos):
        lines.append("q {} {} {}".format(n, mono.coeff.numerator, mono.coeff.denominator))
    for tag, monos in (("f+", table.f_plus_monos), ("f-", table.f_minus_monos)):
        for n, mono in enumerate(monos):
            lines.append("{} {} {} {}".format(tag, n, mono.coeff.numerator, mono.coeff.denominator))
    for tag, values in (("c", table.c_seq), ("m", table.m_seq)):
        for n, value in enumerate(values):
            lines.append("{} {} {} {}".format(tag, n, value.numerator, value.denominator))
    for tag, values in (("a", table.a_seq), ("b", table.b_seq)):
        for sign in ("+", "-"):
            for n, value in enumerate(values[sign]):
                lines.append("{} {} {} {} {} {}".format(
                    tag, sign, n, value.rat.numerator, value.rat.denominator, value.kappa_pow))
    utils.write_atomically(path, "\n".join(lines) + "\n")
    LOGGER.info("saved coefficient table max_n=%d to %s", table.max_n, path)


def _parse_int(token, line_number, what):
    try:
        return int(token)
    except ValueError:
        raise utils.CacheFormatError("{} '{}' is not an integer".format(what, token), line_number) from None


def load_table(path):
    """
    Reads a table written by save_table.

    :raises OSError: when the file cannot be read.
    :raises CacheFormatError: naming the offending line on any parse failure, missing record or version mismatch.
    :rtype: CoeffTable
    """
    with open(path, "r", encoding="utf-8") as stream:
        raw_lines = stream.read().splitlines()
    if not raw_lines:
        raise utils.CacheFormatError("empty cache file", 1)
    header = raw_lines[0].split()
    if len(header) != 3 or header[0] != CACHE_HEADER or not header[2].startswith("max_n="):
        raise utils.CacheFormatError("bad header '{}'".format(raw_lines[0]), 1)
    if header[1] != CACHE_VERSION:
        raise utils.CacheFormatError("unsupported cache version {} (expected {})".format(header[1], CACHE_VERSION), 1)
    max_n = _parse_int(header[2][len("max_n="):], 1, "max_n")

    records = {tag: {} for tag in ("q", "f+", "f-", "c", "m")}
    kappa_records = {(tag, sign): {} for tag in ("a", "b") for sign in ("+", "-")}
    record_lines = {}
    for line_number, line in enumerate(raw_lines[1:], start=2):
        tokens = line.split()
        if not tokens:
            continue
        tag = tokens[0]
        if tag in records:
            if len(tokens) != 4:
                raise utils.CacheFormatError("expected '{} <n> <num> <den>'".format(tag), line_number)
            n, num, den = (_parse_int(token, line_number, "field") for token in tokens[1:])
            if den <= 0:
                raise utils.CacheFormatError("denominator must be positive", line_number)
            records[tag][n] = Fraction(num, den)
            record_lines[(tag, n)] = line_number
        elif tag in ("a", "b"):
            if len(tokens) != 6 or tokens[1] not in ("+", "-"):
                raise utils.CacheFormatError("expected '{} <sign> <n> <num> <den> <kpow>'".format(tag), line_number)
            n, num, den, kpow = (_parse_int(token, line_number, "field") for token in tokens[2:])
            if den <= 0 or kpow not in (0, 1):
                raise utils.CacheFormatError("bad denominator or κ power", line_number)
            kappa_records[(tag, tokens[1])][n] = ExactKappa(Fraction(num, den), kpow)
        else:
            raise utils.CacheFormatError("unknown record type '{}'".format(tag), line_number)

    half = (max_n + 1) // 2
    expected = {"q": max_n + 2, "f+": max_n + 1, "f-": max_n + 1, "c": half + 1, "m": half + 1}
    for tag, count in expected.items():
        missing = [n for n in range(count) if n not in records[tag]]
        if missing:
            raise utils.CacheFormatError("missing '{}' record for n={}".format(tag, missing[0]), len(raw_lines))
    for key, values in kappa_records.items():
        missing = [n for n in range(half + 1) if n not in values]
        if missing:
            raise utils.CacheFormatError("missing '{} {}' record for n={}".format(key[0], key[1], missing[0]), len(raw_lines))

    q_monos = [MonomialCoeff(records["q"][n], q_exponent(n)) for n in range(max_n + 2)]
    p_monos = p_monomials(max_n + 1, q_monos)
    f_plus = f_monomials(max_n, "+", q_monos, p_monos)
    f_minus = f_monomials(max_n, "-", q_monos, p_monos)
    for tag, derived in (("f+", f_plus), ("f-", f_minus)):
        for n, mono in enumerate(derived):
            if records[tag][n] != mono.coeff:
                raise utils.CacheFormatError(
                    "'{}' record for n={} disagrees with the q records".format(tag, n), record_lines[(tag, n)])

    return CoeffTable(
        max_n=max_n,
        q_monos=tuple(q_monos),
        p_monos=tuple(p_monos),
        f_plus_monos=tuple(f_plus),
        f_minus_monos=tuple(f_minus),
        c_seq=tuple(records["c"][n] for n in range(half + 1)),
        m_seq=tuple(records["m"][n] for n in range(half + 1)),
        a_seq={s: tuple(kappa_records[("a", s)][n] for n in range(half + 1)) for s in ("+", "-")},
        b_seq={s: tuple(kappa_records[("b", s)][n] for n in range(half + 1)) for s in ("+", "-")},
    )
