"""Scalars and truncated power series in the nome q.

Two scalar modes are supported.  ``EXACT`` stores rationals as ``gmpy2.mpq``
(always reduced, denominator positive).  ``COMPLEX`` stores Python ``complex``
values and exists for generic degree values only.

A :class:`QSeries` holds the coefficients of q^0 .. q^N.  Everything beyond
q^N is unknown, so binary operations truncate to the smaller order.
"""

from fractions import Fraction
from numbers import Rational

from gmpy2 import mpq

from .errors import DegreeIntegralOnRay, ModeMismatch, ValuationError

EXACT = "exact"
COMPLEX = "complex"

_ZERO = mpq(0)
_ONE = mpq(1)
_MPQ = type(_ZERO)


def rational(x):
    """Convert ints, Fractions, mpq values and strings like "-3/4" to mpq."""
    if isinstance(x, _MPQ):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return mpq(Fraction(x.strip()))
    if isinstance(x, Rational):
        return mpq(int(x.numerator), int(x.denominator))
    if type(x).__name__ == "mpz":
        return mpq(x)
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def is_exact_scalar(x):
    return isinstance(x, (int, Fraction, _MPQ, Rational)) and not isinstance(x, bool)


def scalar_mode(x):
    """Mode tag of a bare scalar."""
    if isinstance(x, complex) or isinstance(x, float):
        return COMPLEX
    if is_exact_scalar(x):
        return EXACT
    raise TypeError(f"not a scalar: {x!r}")


def coerce(x, mode):
    """Convert a scalar to the representation used by ``mode``."""
    if mode == EXACT:
        return rational(x)
    if isinstance(x, complex):
        return x
    if isinstance(x, _MPQ):
        return complex(float(x))
    if isinstance(x, Fraction):
        return complex(float(x))
    return complex(x)


def zero(mode):
    return _ZERO if mode == EXACT else 0j


def one(mode):
    return _ONE if mode == EXACT else 1 + 0j


def to_fraction(x):
    """mpq -> Fraction (for callers that want stdlib types)."""
    return Fraction(int(x.numerator), int(x.denominator))


def format_scalar(x):
    if isinstance(x, complex):
        return repr(x)
    return str(x)


class QSeries:
    """Coefficients of q^0..q^N of a power series, N = ``q_order``.

    Instances are immutable.  ``coeffs`` is a tuple of mpq (exact mode) or
    complex (complex mode).
    """

    __slots__ = ("coeffs", "mode")

    def __init__(self, coeffs, mode=None):
        coeffs = list(coeffs)
        if not coeffs:
            raise ValueError("a QSeries needs at least the q^0 coefficient")
        if mode is None:
            mode = COMPLEX if any(scalar_mode(c) == COMPLEX for c in coeffs) else EXACT
        if mode not in (EXACT, COMPLEX):
            raise ValueError(f"unknown mode {mode!r}")
        object.__setattr__(self, "coeffs", tuple(coerce(c, mode) for c in coeffs))
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name, value):
        raise AttributeError("QSeries is immutable")

    @classmethod
    def _raw(cls, coeffs, mode):
        obj = object.__new__(cls)
        object.__setattr__(obj, "coeffs", tuple(coeffs))
        object.__setattr__(obj, "mode", mode)
        return obj

    # constructors

    @classmethod
    def zero(cls, q_order, mode=EXACT):
        return cls._raw([zero(mode)] * (q_order + 1), mode)

    @classmethod
    def one(cls, q_order, mode=EXACT):
        return cls.constant(1, q_order, mode)

    @classmethod
    def constant(cls, c, q_order, mode=EXACT):
        z = zero(mode)
        return cls._raw([coerce(c, mode)] + [z] * q_order, mode)

    @classmethod
    def monomial(cls, power, q_order, coeff=1, mode=EXACT):
        """coeff * q^power truncated at q_order."""
        out = [zero(mode)] * (q_order + 1)
        if 0 <= power <= q_order:
            out[power] = coerce(coeff, mode)
        return cls._raw(out, mode)

    # basic properties

    @property
    def q_order(self):
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        if isinstance(k, slice):
            return self.coeffs[k]
        if k < 0:
            raise IndexError("negative q-exponent")
        if k > self.q_order:
            raise IndexError(f"coefficient of q^{k} is beyond the truncation order {self.q_order}")
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def is_zero(self):
        return not any(self.coeffs)

    def valuation(self):
        """Index of the first nonzero coefficient, or None for the zero series."""
        for k, c in enumerate(self.coeffs):
            if c:
                return k
        return None

    def truncate(self, q_order):
        if q_order > self.q_order:
            raise ValueError("cannot extend a truncated series")
        return QSeries._raw(self.coeffs[: q_order + 1], self.mode)

    def to_mode(self, mode):
        if mode == self.mode:
            return self
        if mode == EXACT:
            raise ModeMismatch("complex series cannot be made exact")
        return QSeries._raw([coerce(c, COMPLEX) for c in self.coeffs], COMPLEX)

    def shift(self, power, q_order=None):
        """Multiply by q^power (power >= 0); the result is known through
        ``q_order`` (default: self.q_order + power)."""
        if power < 0:
            raise ValueError("negative shift")
        if q_order is None:
            q_order = self.q_order + power
        if q_order > self.q_order + power:
            raise ValueError("shift would report coefficients beyond the truncation order")
        out = [zero(self.mode)] * power + list(self.coeffs)
        return QSeries._raw(out[: q_order + 1], self.mode)

    # arithmetic

    def _check(self, other):
        if other.mode != self.mode:
            raise ModeMismatch(f"cannot combine {self.mode} and {other.mode} series")

    def _lift(self, other):
        """Turn a bare scalar into a constant series of matching order."""
        if isinstance(other, QSeries):
            self._check(other)
            return other
        if scalar_mode(other) != self.mode and self.mode == EXACT:
            raise ModeMismatch("complex scalar combined with an exact series")
        return QSeries.constant(other, self.q_order, self.mode)

    def __add__(self, other):
        if not isinstance(other, QSeries):
            try:
                other = self._lift(other)
            except ModeMismatch:
                raise
            except TypeError:
                return NotImplemented
        self._check(other)
        n = min(self.q_order, other.q_order)
        a, b = self.coeffs, other.coeffs
        return QSeries._raw([a[k] + b[k] for k in range(n + 1)], self.mode)

    __radd__ = __add__

    def __neg__(self):
        return QSeries._raw([-c for c in self.coeffs], self.mode)

    def __sub__(self, other):
        if not isinstance(other, QSeries):
            try:
                other = self._lift(other)
            except ModeMismatch:
                raise
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        if self.mode == EXACT:
            if scalar_mode(c) != EXACT:
                raise ModeMismatch("complex scalar applied to an exact series")
            c = rational(c)
        else:
            c = coerce(c, COMPLEX)
        return QSeries._raw([c * x for x in self.coeffs], self.mode)

    def __mul__(self, other):
        if isinstance(other, QSeries):
            self._check(other)
            return QSeries._raw(_mul_lists(self.coeffs, other.coeffs,
                                           min(self.q_order, other.q_order), self.mode),
                                self.mode)
        try:
            return self.scale(other)
        except ModeMismatch:
            raise
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except ModeMismatch:
            raise
        except TypeError:
            return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.invert()
        if self.mode == EXACT:
            return self.scale(1 / rational(other))
        return self.scale(1 / coerce(other, COMPLEX))

    def __pow__(self, k):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.invert() ** (-k)
        result = QSeries.one(self.q_order, self.mode)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def invert(self):
        """Multiplicative inverse; the constant term must be nonzero."""
        a = self.coeffs
        if not a[0]:
            raise ValuationError("valuation error: constant term is zero; factor out q-powers first")
        n = self.q_order
        inv0 = (1 / a[0]) if self.mode == EXACT else 1 / a[0]
        out = [inv0]
        nz = [k for k in range(1, n + 1) if a[k]]
        for k in range(1, n + 1):
            s = zero(self.mode)
            for j in nz:
                if j > k:
                    break
                s += a[j] * out[k - j]
            out.append(-s * inv0)
        return QSeries._raw(out, self.mode)

    # comparisons

    def __eq__(self, other):
        if isinstance(other, QSeries):
            return (self.mode == other.mode and self.coeffs == other.coeffs)
        return NotImplemented

    def __hash__(self):
        return hash((self.mode, self.coeffs))

    def agrees_with(self, other, tol=0.0):
        """Coefficient-wise comparison through the smaller order."""
        return self.max_deviation(other) <= tol

    def max_deviation(self, other):
        n = min(self.q_order, other.q_order)
        if self.mode == EXACT and other.mode == EXACT:
            dev = max((abs(self.coeffs[k] - other.coeffs[k]) for k in range(n + 1)), default=_ZERO)
            return float(dev) if dev else 0.0
        a = self.to_mode(COMPLEX) if self.mode == EXACT else self
        b = other.to_mode(COMPLEX) if other.mode == EXACT else other
        return max(abs(a.coeffs[k] - b.coeffs[k]) for k in range(n + 1))

    def __repr__(self):
        return f"QSeries({self}, q_order={self.q_order})"

    def __str__(self):
        parts = []
        for k, c in enumerate(self.coeffs):
            if not c:
                continue
            cs = format_scalar(c)
            if k == 0:
                parts.append(cs)
            elif c == 1:
                parts.append("q" if k == 1 else f"q^{k}")
            else:
                parts.append(f"({cs})*q" if k == 1 else f"({cs})*q^{k}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(q^{self.q_order + 1})"

    # serialization

    def to_json(self):
        if self.mode == EXACT:
            coeffs = [{"num": str(c.numerator), "den": str(c.denominator)} for c in self.coeffs]
        else:
            coeffs = [[c.real, c.imag] for c in self.coeffs]
        return {"q_order": self.q_order, "coeffs": coeffs}

    @classmethod
    def from_json(cls, obj):
        n = obj["q_order"]
        raw = obj["coeffs"]
        if len(raw) != n + 1:
            raise ValueError(f"q_order {n} needs {n + 1} coefficients, got {len(raw)}")
        if all(isinstance(c, dict) for c in raw):
            return cls._raw([mpq(int(c["num"]), int(c["den"])) for c in raw], EXACT)
        if all(isinstance(c, list) and len(c) == 2 for c in raw):
            return cls._raw([complex(float(c[0]), float(c[1])) for c in raw], COMPLEX)
        raise ValueError("coefficients must be all {num,den} objects or all [re,im] pairs")


def _mul_lists(a, b, n, mode):
    out = [zero(mode)] * (n + 1)
    bnz = [(j, y) for j, y in enumerate(b[: n + 1]) if y]
    for i in range(n + 1):
        x = a[i]
        if not x:
            continue
        lim = n - i
        for j, y in bnz:
            if j > lim:
                break
            out[i + j] += x * y
    return out


def qs_invert(a):
    return a.invert()


def qs_geometric(a, zeta, q_order):
    """Expansion of 1/(1 - zeta q^a), continued analytically when a <= 0.

    For a < 0 the factor is rewritten as -zeta^{-1} q^{|a|}/(1 - zeta^{-1} q^{|a|}).
    """
    mode = scalar_mode(zeta)
    z = coerce(zeta, mode)
    out = [zero(mode)] * (q_order + 1)
    if a == 0:
        if _is_one(z, mode):
            raise DegreeIntegralOnRay("degree integral on ray: 1/(1 - q^0) is undefined")
        out[0] = one(mode) / (one(mode) - z)
        return QSeries._raw(out, mode)
    if a > 0:
        p = one(mode)
        for t in range(0, q_order // a + 1):
            out[a * t] = p
            p = p * z
        return QSeries._raw(out, mode)
    b = -a
    zinv = one(mode) / z
    p = -zinv
    for t in range(1, q_order // b + 1):
        out[b * t] = p
        p = p * zinv
    return QSeries._raw(out, mode)


def _is_one(z, mode):
    if mode == EXACT:
        return z == 1
    return abs(z - 1) < 1e-12


def divisor_sigma(w, r):
    return sum(k ** w for k in range(1, r + 1) if r % k == 0)


def qs_sigma_series(weight, scale, q_order):
    """Sum over r >= 1 of sigma_weight(r) q^(scale*r), truncated at q_order."""
    out = [_ZERO] * (q_order + 1)
    for r in range(1, q_order // scale + 1):
        out[scale * r] = mpq(divisor_sigma(weight, r))
    return QSeries._raw(out, EXACT)


def eisenstein_e4(q_order):
    return QSeries.one(q_order) + qs_sigma_series(3, 1, q_order).scale(240)


def discriminant(q_order):
    """Delta = q prod (1 - q^n)^24."""
    if q_order == 0:
        return QSeries.zero(0)
    eta = QSeries.one(q_order - 1)
    for n in range(1, q_order):
        eta = eta * QSeries._raw([_ONE] + [_ZERO] * (n - 1) + [-_ONE] + [_ZERO] * (q_order - 1 - n), EXACT)
    return (eta ** 24).shift(1, q_order)


__all__ = [
    "EXACT", "COMPLEX", "QSeries", "rational", "coerce", "scalar_mode", "zero", "one",
    "qs_invert", "qs_geometric", "qs_sigma_series", "divisor_sigma", "eisenstein_e4",
    "discriminant", "to_fraction", "is_exact_scalar",
]
