"""Truncated univariate series in a formal variable x.

A jet of order K is a list ``[c_0, ..., c_K]``.  Coefficients may be exact
rationals, complex numbers or :class:`QSeries`; the helpers only use ``+``,
``*`` and an explicit zero element.
"""

from math import factorial

from gmpy2 import mpq

from .qseries import EXACT, QSeries, coerce, one, zero


def ring_zero_like(c):
    if isinstance(c, QSeries):
        return QSeries.zero(c.q_order, c.mode)
    return zero(EXACT) if not isinstance(c, complex) else 0j


def ring_inverse(c):
    if isinstance(c, QSeries):
        return c.invert()
    if not c:
        raise ZeroDivisionError("jet with vanishing constant term is not invertible")
    return 1 / c


def rscale(c, r):
    """c * r for an exact rational r, keeping complex values as Python complex."""
    if isinstance(c, complex):
        return c * (int(r.numerator) / int(r.denominator))
    return c * r


def is_zero(c):
    if isinstance(c, QSeries):
        return c.is_zero()
    return not c


def jet_mul(a, b, K=None):
    if K is None:
        K = min(len(a), len(b)) - 1
    z = ring_zero_like(a[0])
    out = [z] * (K + 1)
    bnz = [(j, y) for j, y in enumerate(b[: K + 1]) if not is_zero(y)]
    for i in range(min(K, len(a) - 1) + 1):
        x = a[i]
        if is_zero(x):
            continue
        for j, y in bnz:
            if i + j > K:
                break
            out[i + j] = out[i + j] + x * y
    return out


def jet_inv(a, K=None):
    """1/a for a jet with invertible constant term."""
    if K is None:
        K = len(a) - 1
    inv0 = ring_inverse(a[0])
    out = [inv0]
    for k in range(1, K + 1):
        s = ring_zero_like(a[0])
        for j in range(1, min(k, len(a) - 1) + 1):
            if not is_zero(a[j]):
                s = s + a[j] * out[k - j]
        out.append(-(s * inv0))
    return out


def jet_pow(a, k, K=None):
    if K is None:
        K = len(a) - 1
    result = [ring_zero_like(a[0]) + 1] + [ring_zero_like(a[0])] * K
    base = list(a[: K + 1])
    if k < 0:
        base = jet_inv(base, K)
        k = -k
    while k:
        if k & 1:
            result = jet_mul(result, base, K)
        k >>= 1
        if k:
            base = jet_mul(base, base, K)
    return result


def jet_exp(a, K=None):
    """exp(a) for a jet with a[0] == 0, via the recurrence (exp a)' = a' exp a."""
    if K is None:
        K = len(a) - 1
    if not is_zero(a[0]):
        raise ValueError("jet_exp needs a vanishing constant term")
    z = ring_zero_like(a[0])
    out = [z + 1]
    for n in range(1, K + 1):
        s = z
        for k in range(1, n + 1):
            if k < len(a) and not is_zero(a[k]):
                s = s + a[k] * out[n - k] * k
        out.append(rscale(s, mpq(1, n)))
    return out


def exp_jet(c, K, mode=EXACT):
    """Coefficients of e^{c x} through x^K."""
    c = coerce(c, mode)
    out = []
    p = one(mode)
    for k in range(K + 1):
        out.append(p / factorial(k) if mode != EXACT else p * mpq(1, factorial(k)))
        p = p * c
    return out


def divide_by_x(a):
    """(a - a_0)/x, requiring a_0 == 0."""
    if not is_zero(a[0]):
        raise ValueError("series does not vanish at x = 0")
    return list(a[1:])


def jet_slice_q0(a):
    """Replace QSeries coefficients by their q^0 coefficient."""
    return [c[0] if isinstance(c, QSeries) else c for c in a]
