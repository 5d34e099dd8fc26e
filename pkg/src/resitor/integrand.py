"""Products of univariate series evaluated at integer linear forms.

An integrand such as prod_r Q(r)/r * prod_c f(c) is a product of pieces
``y^p * s(y)`` with ``y`` a linear form in u_1..u_n.  Pieces whose linear
forms are proportional are merged into one univariate series first, which
keeps the number of multivariate factors small.
"""

from math import gcd

from gmpy2 import mpq

from .jets import jet_mul
from .laurent import ComposeFactor, ExactFactor, ILSeries, InverseFactor
from .qseries import QSeries


def primitive_direction(vector):
    """Split an integer vector into (lam, prim) with the last nonzero entry of
    prim positive and gcd(prim) = 1."""
    vector = tuple(int(x) for x in vector)
    g = 0
    for x in vector:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero linear form")
    last = next(x for x in reversed(vector) if x)
    if last < 0:
        g = -g
    return g, tuple(x // g for x in vector)


def scale_jet(jet, lam):
    """s(y) -> s(lam * y)."""
    if lam == 1:
        return list(jet)
    out = []
    p = 1
    for c in jet:
        out.append(c * p)
        p *= lam
    return out


class Piece:
    """y^power * s(y) * lam^power at y = prim . u, where vector = lam * prim.

    ``provider(K)`` returns s through y^K (s may be None for a pure power).
    """

    __slots__ = ("vector", "provider", "power")

    def __init__(self, vector, provider=None, power=0):
        self.vector = tuple(int(x) for x in vector)
        self.provider = provider
        self.power = power


def build_factors(vars, pieces, mode=None):
    """Turn pieces into residue-pipeline factors plus a scalar multiplier.

    Returns (factors, constant) where constant collects the lam^power
    multipliers as an exact rational.
    """
    groups = {}
    const = mpq(1)
    for pc in pieces:
        lam, prim = primitive_direction(pc.vector)
        g = groups.setdefault(prim, {"power": 0, "series": []})
        g["power"] += pc.power
        const *= mpq(lam) ** pc.power
        if pc.provider is not None:
            g["series"].append((lam, pc.provider))
    factors = []
    for prim, g in sorted(groups.items()):
        L = ILSeries.linear(vars, prim)
        if g["series"]:
            factors.append(ComposeFactor(_merged_provider(g["series"]), L, label=prim))
        p = g["power"]
        if p > 0:
            factors.append(ExactFactor(_power(L, p)))
        elif p < 0:
            factors.append(InverseFactor(_power(L, -p)))
    return factors, const


def _power(L, k):
    out = ILSeries.constant(L.vars, 1, L.mode)
    for _ in range(k):
        out = out.mul(L)
    return out


def _merged_provider(series):
    cache = {}

    def provider(K):
        if K in cache:
            return cache[K]
        acc = None
        for lam, prov in series:
            jet = scale_jet(prov(K)[: K + 1], lam)
            acc = jet if acc is None else jet_mul(acc, jet, K)
        cache[K] = acc
        return acc

    return provider


def constant_series(value, q_order, mode):
    """Lift a scalar to a QSeries when a q-order is in play."""
    if isinstance(value, QSeries) or q_order is None:
        return value
    return QSeries.constant(value, q_order, mode)


__all__ = ["Piece", "build_factors", "primitive_direction", "scale_jet"]
