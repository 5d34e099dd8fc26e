"""Jets of the Jacobi theta function and the characteristic series built on it.

We work with the algebraic normalization in the variable x = 2 pi i z:

    Theta(x; a) = (zeta^{1/2} e^{x/2} - zeta^{-1/2} e^{-x/2})
                  * prod_{j>=1} (1 - q^j)(1 - zeta q^j e^x)(1 - zeta^{-1} q^j e^{-x}),

with zeta = e^{2 pi i a}.  It differs from theta(a + x/(2 pi i)) by the
constant factor -i q^{-1/8}, so any ratio with as many thetas upstairs as
downstairs is unchanged, and each z-derivative becomes 2 pi i times an
x-derivative.

For half periods a = s/2 (s an integer) the prefactor is i^s times
e^{x/2} - e^{-x/2} (s even) or e^{x/2} + e^{-x/2} (s odd), so all
coefficients are rational and the unit i^s is tracked on the side.
"""

import cmath
from functools import lru_cache
from math import factorial

from gmpy2 import mpq

from .errors import ThetaBalanceError, ValuationError
from .integrand import Piece, build_factors
from .jets import (exp_jet, jet_exp, jet_inv, jet_mul, jet_pow, ring_zero_like,
                   rscale)
from .laurent import residue_of_product
from .qseries import COMPLEX, EXACT, QSeries, coerce, qs_sigma_series, rational


def half_period_index(shift):
    """s with shift = s/2 when shift is an exact half-integer, else None."""
    if isinstance(shift, (complex, float)):
        return None
    r = rational(shift)
    d = 2 * r
    if d.denominator == 1:
        return int(d)
    return None


class ThetaJet:
    """Coefficients of Theta(x; shift) for x^0..x^K, each a QSeries through q^N.

    In exact mode the true jet is i^unit_power times ``coeffs``.
    """

    __slots__ = ("shift", "unit_power", "coeffs", "K", "N", "mode")

    def __init__(self, shift, unit_power, coeffs, K, N, mode):
        self.shift = shift
        self.unit_power = unit_power % 4
        self.coeffs = tuple(coeffs)
        self.K = K
        self.N = N
        self.mode = mode

    @property
    def unit(self):
        return 1j ** self.unit_power

    def __getitem__(self, k):
        return self.coeffs[k]

    def complex_coeffs(self):
        """Coefficients with the unit folded in, as complex QSeries."""
        u = [1, 1j, -1, -1j][self.unit_power]
        return [c.to_mode(COMPLEX).scale(u) for c in self.coeffs]


def theta_alg_jet(shift, K, N, mode=None):
    """Jet of Theta(x; shift) through x^K and q^N."""
    s = half_period_index(shift)
    if mode is None:
        mode = EXACT if s is not None else COMPLEX
    if s is None and mode == EXACT:
        raise ValueError("generic shifts need complex mode")
    key = ("half", s) if s is not None else ("gen", complex(shift))
    return _theta_jet_cached(key, K, N, mode)


@lru_cache(maxsize=256)
def _theta_jet_cached(key, K, N, mode):
    kind, val = key
    if mode == EXACT:
        inv_fact = [mpq(1, factorial(k)) for k in range(K + 1)]
        half = [mpq(1, 2 ** k * factorial(k)) for k in range(K + 1)]
        zero = mpq(0)
    else:
        inv_fact = [1.0 / factorial(k) for k in range(K + 1)]
        half = [1.0 / (2 ** k * factorial(k)) for k in range(K + 1)]
        zero = 0j
    if kind == "half":
        s = val
        unit = s % 4
        sign = 1 if s % 2 else -1
        pre = [half[k] + sign * (-1) ** k * half[k] for k in range(K + 1)]
        zeta = mpq(-1) ** s if mode == EXACT else complex((-1) ** s)
        if mode == COMPLEX:
            pre = [complex(p) for p in pre]
            u = [1, 1j, -1, -1j][unit]
            pre = [u * p for p in pre]
            unit = 0
    else:
        alpha = val
        unit = 0
        root = cmath.exp(1j * cmath.pi * alpha)
        pre = [root * half[k] - (1 / root) * (-1) ** k * half[k] for k in range(K + 1)]
        zeta = root * root
    zinv = 1 / zeta
    # J[k][n]: coefficient of x^k q^n
    J = [[zero] * (N + 1) for _ in range(K + 1)]
    for k in range(K + 1):
        J[k][0] = pre[k] if mode == EXACT else complex(pre[k])
    for j in range(1, N + 1):
        # (1 - q^j)
        for k in range(K + 1):
            row = J[k]
            for n in range(N, j - 1, -1):
                row[n] = row[n] - row[n - j]
        for c, eps in ((zeta, 1), (zinv, -1)):
            # (1 - c q^j e^{eps x})
            T = []
            for k in range(K + 1):
                acc = [zero] * (N + 1 - j)
                for l in range(k + 1):
                    w = inv_fact[k - l] if (eps == 1 or (k - l) % 2 == 0) else -inv_fact[k - l]
                    src = J[l]
                    for n in range(N + 1 - j):
                        if src[n]:
                            acc[n] += w * src[n]
                T.append(acc)
            for k in range(K + 1):
                row = J[k]
                t = T[k]
                for n in range(j, N + 1):
                    if t[n - j]:
                        row[n] = row[n] - c * t[n - j]
    coeffs = [QSeries._raw(row, mode) for row in J]
    shift_val = mpq(val, 2) if kind == "half" else val
    return ThetaJet(shift_val, unit, coeffs, K, N, mode)


def theta_log_ratio(shift, m, N, base=None, mode=None):
    """(2 pi i)^{-(m-b)} theta^{(m)}(shift) / theta^{(b)}(shift) as a q-series.

    ``base`` is "self" (b = 0) or "prime" (b = 1); the default is "prime" for
    integral shifts, where theta itself vanishes, and "self" otherwise.
    """
    s = half_period_index(shift)
    integral = s is not None and s % 2 == 0
    if base is None:
        base = "prime" if integral else "self"
    b = {"self": 0, "prime": 1}[base]
    jet = theta_alg_jet(shift, max(m, b), N, mode)
    if m == b:
        return QSeries.one(N, jet.mode)
    den = jet[b]
    if den.is_zero():
        raise ValuationError("ratio base vanishes identically")
    num = jet[m].scale(factorial(m))
    return (num * den.invert()).scale(mpq(1, factorial(b)))


def theta_numeric(z, tau, terms=80):
    """theta(z, tau) = 2 q^{1/8} sin(pi z) prod (1-q^j)(1-e^{2 pi i z} q^j)(1-e^{-2 pi i z} q^j)."""
    q = cmath.exp(2j * cmath.pi * tau)
    w = cmath.exp(2j * cmath.pi * z)
    val = 2 * cmath.exp(2j * cmath.pi * tau / 8) * cmath.sin(cmath.pi * z)
    qj = 1
    for _ in range(terms):
        qj *= q
        val *= (1 - qj) * (1 - w * qj) * (1 - qj / w)
    return val


# characteristic series --------------------------------------------------

FAMILIES = ("todd", "ahat", "l", "elliptic-half", "witten", "custom")


def _sinh_over_x(K, scale):
    """sinh(scale x)/(scale x) through x^K."""
    out = []
    for k in range(K + 1):
        out.append(mpq(scale) ** k / factorial(k + 1) if k % 2 == 0 else mpq(0))
    return out


def _cosh(K, scale):
    return [mpq(scale) ** k / factorial(k) if k % 2 == 0 else mpq(0) for k in range(K + 1)]


class CharSeries:
    """A genus given by its characteristic series Q(x) = x / f(x)."""

    def __init__(self, family, f_provider=None):
        family = family.lower()
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
        if family == "custom" and f_provider is None:
            raise ValueError("custom family needs an f provider")
        self.family = family
        self._f_provider = f_provider
        self._cache = {}

    @property
    def q_dependent(self):
        return self.family in ("witten", "elliptic-half") or (
            self.family == "custom" and getattr(self._f_provider, "q_dependent", False))

    def f_over_x(self, K, N=None):
        """P(x) = f(x)/x through x^K."""
        return jet_inv(self.Q(K, N), K)

    def f(self, K, N=None):
        P = self.f_over_x(K - 1, N) if K >= 1 else []
        return [ring_zero_like(self.Q(0, N)[0])] + list(P)

    def Q(self, K, N=None):
        key = (K, N)
        if key not in self._cache:
            self._cache[key] = self._compute_Q(K, N)
        return self._cache[key]

    def _compute_Q(self, K, N):
        fam = self.family
        if self.q_dependent and N is None:
            raise ValueError(f"{fam} needs a q-order")
        if fam == "todd":
            # f/x = (1 - e^{-x})/x
            P = [mpq((-1) ** k, factorial(k + 1)) for k in range(K + 1)]
            return jet_inv(P, K)
        if fam == "ahat":
            return jet_inv(_sinh_over_x(K, mpq(1, 2)), K)
        if fam == "l":
            P = jet_mul(_sinh_over_x(K, 1), jet_inv(_cosh(K, 1), K), K)
            return jet_inv(P, K)
        if fam == "witten":
            return witten_Q(K, N)
        if fam == "elliptic-half":
            return elliptic_half_Q(K, N)
        f = self._f_provider(K + 1, N)
        if f[0] or f[1] != 1:
            raise ValueError("custom f must satisfy f(0) = 0 and f'(0) = 1")
        return jet_inv(list(f[1:K + 2]), K)


def witten_Q(K, N):
    """x/(2 sinh(x/2)) * exp(2 sum_k x^{2k}/(2k)! sum_n sigma_{2k-1}(n) q^n)."""
    ahat = jet_inv(_sinh_over_x(K, mpq(1, 2)), K)
    ahat = [QSeries.constant(c, N) for c in ahat]
    arg = [QSeries.zero(N)] * (K + 1)
    for k in range(1, K // 2 + 1):
        arg[2 * k] = qs_sigma_series(2 * k - 1, 1, N).scale(mpq(2, factorial(2 * k)))
    return jet_mul(ahat, jet_exp(arg, K), K)


def witten_Q_theta(K, N, mode=EXACT):
    """S(0)/S(x) with S(x) = Theta(x; 0)/x; an independent route to witten_Q."""
    jet = theta_alg_jet(0, K + 1, N, mode)
    S = list(jet.coeffs[1:])
    return [c.scale(1) for c in jet_mul([S[0]] + [ring_zero_like(S[0])] * K, jet_inv(S, K), K)]


def elliptic_half_Q(K, N, mode=EXACT):
    """[Theta(x;1/2)/Theta(0;1/2)] * [x Theta'(0;0)/Theta(x;0)]."""
    half = theta_alg_jet(mpq(1, 2), K, N, mode)
    J = [c * half[0].invert() for c in half.coeffs]
    return jet_mul(J, witten_Q_theta(K, N, mode), K)


def char_series(family, x_order, q_order=None):
    """f(x) of a family truncated at x^x_order (and q^q_order when relevant)."""
    return CharSeries(family).f(x_order, q_order)


# balanced theta integrands ----------------------------------------------


def _shift_key(shift):
    """Jets depend on a half-period shift only through its parity (the unit aside)."""
    s = half_period_index(shift)
    if s is not None:
        return ("h", s % 2)
    return ("c", complex(shift))


@lru_cache(maxsize=256)
def _normalized_jet(key, K, N, mode):
    """Theta(x; a) divided by its leading x-coefficient, through x^K, plus that coefficient."""
    kind, val = key
    shift = mpq(val, 2) if kind == "h" else val
    vanishing = kind == "h" and val == 0
    jet = theta_alg_jet(shift, K + 1 if vanishing else K, N)
    coeffs = list(jet.coeffs)
    if mode == COMPLEX and jet.mode == EXACT:
        coeffs = [c.to_mode(COMPLEX) for c in coeffs]
    s = coeffs[1:K + 2] if vanishing else coeffs[:K + 1]
    base = s[0]
    inv = base.invert()
    return tuple([QSeries.one(N, mode)] + [c * inv for c in s[1:]]), base


class ThetaIntegrand:
    """Product of Theta factors at linear forms, checked for balance.

    Every Theta factor (including Theta(0; a) and Theta'(0; 0)) counts +1 in
    the numerator and -1 in the denominator; the residue is only taken when
    the count is zero, so the dropped prefactors of Theta cancel.  Each factor
    is split as (leading x-coefficient) * (normalized jet); the leading
    coefficients are collected by net power, so matching pairs cancel without
    rounding.
    """

    def __init__(self, vars, q_order, mode=EXACT):
        self.vars = tuple(vars)
        self.N = q_order
        self.mode = mode
        self.pieces = []
        self.extra = []
        self.balance = 0
        self.unit = 0
        self.const_powers = {}

    def _key(self, shift):
        key = _shift_key(shift)
        if self.mode == EXACT and key[0] != "h":
            raise ValueError("generic shift in an exact integrand")
        return key

    def _unit(self, shift):
        s = half_period_index(shift)
        return s % 4 if s is not None else 0

    def _count(self, key, shift, power):
        self.balance += power
        self.unit += power * self._unit(shift)
        self.const_powers[key] = self.const_powers.get(key, 0) + power

    def theta(self, vector, shift, power=1):
        """Theta(vector . u; shift)^power."""
        if not any(vector):
            return self.theta_at_zero(shift, power)
        key = self._key(shift)
        self._count(key, shift, power)
        vanishing = key == ("h", 0)
        N, mode = self.N, self.mode

        def provider(K):
            jet, _ = _normalized_jet(key, K, N, mode)
            return jet_pow(list(jet), power, K) if power != 1 else list(jet)

        self.pieces.append(Piece(vector, provider, power if vanishing else 0))

    def theta_at_zero(self, shift, power=1):
        key = self._key(shift)
        if key == ("h", 0):
            raise ValueError("Theta(0; a) vanishes for integral a; use theta_prime_at_zero")
        self._count(key, shift, power)

    def theta_prime_at_zero(self, power=1):
        self._count(("h", 0), 0, power)

    def linear_power(self, vector, power=1):
        """(vector . u)^power, which is not a theta factor."""
        self.pieces.append(Piece(vector, None, power))

    def add_factor(self, factor):
        self.extra.append(factor)

    def constant(self):
        out = QSeries.one(self.N, self.mode)
        for key, p in sorted(self.const_powers.items(), key=repr):
            if p:
                _, base = _normalized_jet(key, 0, self.N, self.mode)
                out = out * base ** p
        return out

    def residue(self):
        if self.balance != 0:
            raise ThetaBalanceError(
                f"unbalanced theta ratio: numerator minus denominator count is {self.balance}")
        factors, const = build_factors(self.vars, self.pieces)
        factors = factors + self.extra
        value = residue_of_product(self.vars, factors)
        if not isinstance(value, QSeries):
            value = QSeries.constant(value, self.N, self.mode)
        value = value.to_mode(self.mode) if value.mode != self.mode else value
        out = (value * self.constant()).scale(const)
        u = self.unit % 4
        if self.mode == COMPLEX:
            return out.scale([1, 1j, -1, -1j][u])
        if u % 2:
            raise ValueError("theta integrand has an imaginary unit prefactor")
        return out if u == 0 else -out


__all__ = [
    "ThetaJet", "theta_alg_jet", "theta_log_ratio", "theta_numeric", "CharSeries",
    "char_series", "witten_Q", "witten_Q_theta", "elliptic_half_Q", "ThetaIntegrand",
    "half_period_index", "FAMILIES", "exp_jet", "rscale", "coerce",
]
