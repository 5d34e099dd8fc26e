"""Generalized Bott towers, their cohomology rings and characteristic numbers.

Stage k of a tower is the projectivization of a sum of n_k + 1 line bundles
over the previous stage.  Its cohomology is generated by u_1..u_n with the
triangular relations f_k = u_k prod_j (u_k + x_kj), where x_kj is an integer
linear form in u_1..u_{k-1} (one twist row per j).
"""

import itertools
import re
from dataclasses import dataclass, field

from gmpy2 import mpq

from .integrand import Piece, build_factors
from .laurent import ExactFactor, ILSeries, InverseFactor, residue_of_product
from .qseries import EXACT, QSeries, format_scalar, rational
from .theta import CharSeries, ThetaIntegrand


@dataclass(frozen=True)
class Stage:
    fiber_dim: int
    twists: tuple = ()


class BottTower:
    """A generalized Bott tower given by fiber dimensions and twist rows."""

    def __init__(self, stages):
        out = []
        for k, st in enumerate(stages):
            if isinstance(st, Stage):
                n, tw = st.fiber_dim, st.twists
            else:
                n, tw = st
            if isinstance(n, bool) or not isinstance(n, int) or n < 1:
                raise ValueError(f"stages[{k}].fiber_dim must be a positive integer")
            tw = tuple(tuple(row) for row in tw) if tw else ()
            if k == 0:
                if any(len(r) for r in tw):
                    raise ValueError("stages[0].twists must be empty")
                tw = ((),) * n
            if len(tw) != n:
                raise ValueError(f"stages[{k}].twists must have {n} rows, got {len(tw)}")
            for j, row in enumerate(tw):
                if len(row) != k:
                    raise ValueError(f"stages[{k}].twists[{j}] must have length {k}, got {len(row)}")
                for x in row:
                    if isinstance(x, bool) or not isinstance(x, int):
                        raise ValueError(f"stages[{k}].twists[{j}] entries must be integers")
            out.append(Stage(n, tw))
        if not out:
            raise ValueError("a tower needs at least one stage")
        self.stages = tuple(out)

    @classmethod
    def projective(cls, n):
        return cls([(n, ())])

    @classmethod
    def hirzebruch(cls, k):
        """CP(C + O(k)) over CP^1, with u_2(u_2 - k u_1) = 0."""
        return cls([(1, ()), (1, [[-k]])])

    @classmethod
    def twisted_milnor(cls, n1, I):
        """CP(eta^{i_1} + ... + eta^{i_n2} + C) over CP^{n1}; x_2j = -i_j u_1."""
        I = tuple(I)
        return cls([(n1, ()), (len(I), [[-i] for i in I])])

    @property
    def n(self):
        return len(self.stages)

    @property
    def dim(self):
        return sum(s.fiber_dim for s in self.stages)

    @property
    def vars(self):
        return tuple(f"u{k + 1}" for k in range(self.n))

    @property
    def top_exponents(self):
        return tuple(s.fiber_dim for s in self.stages)

    def twist_form(self, k, j):
        """x_kj as a length-n coefficient vector."""
        row = self.stages[k].twists[j]
        return tuple(row) + (0,) * (self.n - len(row))

    def roots(self):
        """Tangent roots as (coefficient vector, multiplicity)."""
        out = []
        for k, st in enumerate(self.stages):
            e = tuple(1 if i == k else 0 for i in range(self.n))
            if k == 0:
                out.append((e, st.fiber_dim + 1))
                continue
            out.append((e, 1))
            for j in range(st.fiber_dim):
                x = self.twist_form(k, j)
                out.append((tuple(a + b for a, b in zip(e, x)), 1))
        return out

    def to_json(self):
        stages = []
        for k, st in enumerate(self.stages):
            d = {"fiber_dim": st.fiber_dim}
            if k:
                d["twists"] = [list(r) for r in st.twists]
            stages.append(d)
        return {"stages": stages}

    def __eq__(self, other):
        return isinstance(other, BottTower) and self.stages == other.stages

    def __hash__(self):
        return hash(self.stages)

    def __repr__(self):
        return f"BottTower({self.to_json()['stages']})"


@dataclass(frozen=True)
class CISpec:
    """Divisor classes a_1 u_1 + ... + a_n u_n cutting out a complete intersection."""

    classes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        cl = tuple(tuple(int(x) for x in c) for c in self.classes)
        for s, c in enumerate(cl):
            if not any(c):
                raise ValueError(f"classes[{s}] is the zero class")
        object.__setattr__(self, "classes", cl)

    def check(self, tower):
        for s, c in enumerate(self.classes):
            if len(c) != tower.n:
                raise ValueError(f"classes[{s}] must have length {tower.n}, got {len(c)}")
        if len(self.classes) > tower.dim:
            raise ValueError("more classes than the ambient dimension")


# cohomology polynomials ---------------------------------------------------


_MONO = re.compile(r"u(\d+)(?:\^(\d+))?")


class CohomPoly:
    """Polynomial in u_1..u_n with exact rational coefficients."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        clean = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != n or any(x < 0 for x in e):
                raise ValueError(f"bad exponent {e}")
            c = rational(c)
            if c:
                clean[e] = clean.get(e, 0) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def constant(cls, n, c=1):
        return cls(n, {(0,) * n: c})

    @classmethod
    def linear(cls, coeffs):
        n = len(coeffs)
        return cls(n, {tuple(1 if i == j else 0 for i in range(n)): a for j, a in enumerate(coeffs) if a})

    @classmethod
    def parse(cls, text, n):
        """Parse sums like "u1^2 u2", "2 u1 u2 - 1/3 u2^2" or "3*u1"."""
        src = text.replace("*", " ").replace("-", " + -").strip()
        out = cls(n)
        for chunk in src.split("+"):
            chunk = chunk.strip()
            if not chunk:
                continue
            coeff = mpq(1)
            e = [0] * n
            for tok in chunk.split():
                if tok == "-":
                    coeff = -coeff
                    continue
                m = _MONO.fullmatch(tok.lstrip("-"))
                if m:
                    if tok.startswith("-"):
                        coeff = -coeff
                    i = int(m.group(1))
                    if not 1 <= i <= n:
                        raise ValueError(f"variable u{i} out of range 1..{n}")
                    e[i - 1] += int(m.group(2) or 1)
                else:
                    try:
                        coeff *= rational(tok)
                    except (ValueError, TypeError, ZeroDivisionError):
                        raise ValueError(f"cannot parse {tok!r} in monomial {text!r}") from None
            out = out + cls(n, {tuple(e): coeff})
        return out

    def is_zero(self):
        return not self.terms

    def degree(self):
        return max((sum(e) for e in self.terms), default=-1)

    def __add__(self, other):
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return CohomPoly(self.n, out)

    def __neg__(self):
        return CohomPoly(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, CohomPoly):
            return CohomPoly(self.n, {e: c * rational(other) for e, c in self.terms.items()})
        out = {}
        for ea, ca in self.terms.items():
            for eb, cb in other.terms.items():
                e = tuple(a + b for a, b in zip(ea, eb))
                out[e] = out.get(e, 0) + ca * cb
        return CohomPoly(self.n, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = CohomPoly.constant(self.n)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, CohomPoly) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def coefficient(self, e):
        return self.terms.get(tuple(e), mpq(0))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = " ".join(f"u{i + 1}" + (f"^{x}" if x > 1 else "") for i, x in enumerate(e) if x)
            if not mono:
                parts.append(format_scalar(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{format_scalar(c)} {mono}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__


def _linear_poly(vec):
    return CohomPoly.linear(vec)


def tower_relations(t):
    """f_k = u_k prod_j (u_k + x_kj) for every stage."""
    rels = []
    for k, st in enumerate(t.stages):
        e = tuple(1 if i == k else 0 for i in range(t.n))
        f = _linear_poly(e)
        for j in range(st.fiber_dim):
            if k == 0:
                f = f * _linear_poly(e)
            else:
                x = t.twist_form(k, j)
                f = f * _linear_poly(tuple(a + b for a, b in zip(e, x)))
        rels.append(f)
    return rels


def normal_form(p, t):
    """Reduce p to the basis {prod u_i^{e_i} : e_i <= n_i}."""
    rels = tower_relations(t)
    terms = dict(p.terms)
    for i in range(t.n - 1, -1, -1):
        ni = t.stages[i].fiber_dim
        lead = tuple(ni + 1 if j == i else 0 for j in range(t.n))
        # u_i^{n_i+1} = u_i^{n_i+1} - f_i, which has u_i-degree <= n_i
        tail = {e: -c for e, c in rels[i].terms.items() if e != lead}
        while True:
            high = [e for e in terms if e[i] > ni]
            if not high:
                break
            e = max(high, key=lambda x: x[i])
            c = terms.pop(e)
            base = tuple(x - l for x, l in zip(e, lead))
            for te, tc in tail.items():
                ne = tuple(a + b for a, b in zip(base, te))
                v = terms.get(ne, 0) + c * tc
                if v:
                    terms[ne] = v
                else:
                    terms.pop(ne, None)
    return CohomPoly(t.n, terms)


def pairing(p, t, method="residue"):
    """<p, [B_n]> by iterated residue or by normal-form reduction."""
    if method == "normalform":
        return normal_form(p, t).coefficient(t.top_exponents)
    if method != "residue":
        raise ValueError(f"unknown pairing method {method!r}")
    if p.is_zero():
        return mpq(0)
    vars = t.vars
    factors = [ExactFactor(ILSeries.polynomial(vars, p.terms))]
    for f in tower_relations(t):
        factors.append(InverseFactor(ILSeries.polynomial(vars, f.terms)))
    return residue_of_product(vars, factors)


def characteristic_classes(t, ci=CISpec()):
    """(c1, p1) of the complete intersection, unreduced."""
    ci.check(t)
    c1 = CohomPoly(t.n)
    p1 = CohomPoly(t.n)
    for vec, mult in t.roots():
        r = _linear_poly(vec)
        c1 = c1 + r * mult
        p1 = p1 + r * r * mult
    for a in ci.classes:
        c = _linear_poly(a)
        c1 = c1 - c
        p1 = p1 - c * c
    return c1, p1


@dataclass
class StringReport:
    spin: bool
    p1_pushforward_zero: bool
    c1: CohomPoly
    p1: CohomPoly
    pushforward: CohomPoly
    system_residuals: tuple = None
    verdict: str = ""

    @property
    def string(self):
        return self.spin and self.p1_pushforward_zero

    def to_json(self):
        return {
            "spin": self.spin,
            "p1_pushforward_zero": self.p1_pushforward_zero,
            "c1": str(self.c1),
            "p1": str(self.p1),
            "p1_pushforward": str(self.pushforward),
            "system_residuals": list(self.system_residuals) if self.system_residuals is not None else None,
            "verdict": self.verdict,
        }


STRING_LABEL = "string-certified (i_! criterion)"
NOT_STRING_LABEL = "not string"


def string_system_residuals(n1, I, classes):
    """Residuals of the three two-stage equations (zero means solved).

    n1 + 1 + sum i^2 = sum d_odd^2,  1 + n2 = sum d_even^2,
    sum d_odd d_even + sum i = 0; missing classes count as zero.
    """
    cl = list(classes) + [(0, 0)] * (2 - len(classes))
    (d1, d2), (d3, d4) = cl[0], cl[1]
    n2 = len(I)
    return (n1 + 1 + sum(i * i for i in I) - d1 * d1 - d3 * d3,
            1 + n2 - d2 * d2 - d4 * d4,
            d1 * d2 + d3 * d4 + sum(I))


def milnor_data(t):
    """(n1, I) when t is a two-stage tower with x_2j = -i_j u_1, else None."""
    if t.n != 2:
        return None
    return t.stages[0].fiber_dim, tuple(-row[0] for row in t.stages[1].twists)


def string_check(t, ci=CISpec()):
    ci.check(t)
    c1, p1 = characteristic_classes(t, ci)
    c1n = normal_form(c1, t)
    spin = all(c.denominator == 1 and c.numerator % 2 == 0 for c in c1n.terms.values())
    push = p1
    for a in ci.classes:
        push = push * _linear_poly(a)
    push = normal_form(push, t)
    residuals = None
    md = milnor_data(t)
    if md is not None and len(ci.classes) <= 2:
        residuals = string_system_residuals(md[0], md[1], ci.classes)
    rep = StringReport(spin, push.is_zero(), c1n, normal_form(p1, t), push, residuals)
    rep.verdict = STRING_LABEL if rep.string else NOT_STRING_LABEL
    return rep


def solve_string_system(n1, n2, I, bound, classes=2):
    """All (d1, d2, d3, d4) with |d| <= bound solving the two-stage system.

    With ``classes=1`` the search runs over single hypersurfaces (d1, d2) and
    keeps those that pass string_check, since for small n2 the cohomology
    relation can kill the v^2 term that the equation set would demand.
    """
    if bound < 1:
        raise ValueError("bound must be at least 1")
    I = tuple(I)
    if len(I) != n2:
        raise ValueError(f"I must have {n2} entries")
    rng = range(-bound, bound + 1)
    if classes == 2:
        out = []
        for d in itertools.product(rng, repeat=4):
            if string_system_residuals(n1, I, [d[:2], d[2:]]) == (0, 0, 0):
                out.append(d)
        return out
    if classes != 1:
        raise ValueError("classes must be 1 or 2")
    t = BottTower.twisted_milnor(n1, I)
    out = []
    for d in itertools.product(rng, repeat=2):
        if any(d) and string_check(t, CISpec((d,))).string:
            out.append(d)
    return out


# genera -----------------------------------------------------------------


def _q_provider(cs, N, use_Q):
    def provider(K):
        return cs.Q(K, N) if use_Q else cs.f_over_x(K, N)
    return provider


def genus_ci(t, ci, cs, q_order=None):
    """Genus of the complete intersection: Res prod_s f(a_s.u) / prod_r f(r)."""
    if isinstance(cs, str):
        cs = CharSeries(cs)
    ci.check(t)
    N = q_order if cs.q_dependent else None
    if cs.q_dependent and N is None:
        raise ValueError("q_order is required for a q-dependent series")
    pieces = []
    qprov = _q_provider(cs, N, True)
    pprov = _q_provider(cs, N, False)
    for vec, mult in t.roots():
        for _ in range(mult):
            pieces.append(Piece(vec, qprov, -1))
    for a in ci.classes:
        pieces.append(Piece(a, pprov, 1))
    factors, const = build_factors(t.vars, pieces)
    value = residue_of_product(t.vars, factors)
    if isinstance(value, QSeries):
        return value.scale(const)
    value = value * const
    if N is not None:
        return QSeries.constant(value, N)
    return value


def witten_theta_route(t, ci, q_order, mode=EXACT):
    """Witten genus of a two-stage complete intersection from theta jets."""
    if t.n != 2:
        raise ValueError(f"the theta route needs a two-stage tower, got {t.n} stages")
    ci.check(t)
    if len(ci.classes) > 2:
        raise ValueError("the theta route takes at most two classes")
    ti = ThetaIntegrand(t.vars, q_order, mode)
    roots = t.roots()
    nroots = sum(m for _, m in roots)
    ti.theta_prime_at_zero(nroots - len(ci.classes))
    for a in ci.classes:
        ti.theta(a, 0, 1)
    for vec, mult in roots:
        ti.theta(vec, 0, -mult)
    return ti.residue()


__all__ = [
    "Stage", "BottTower", "CISpec", "CohomPoly", "tower_relations", "normal_form", "pairing",
    "characteristic_classes", "StringReport", "string_check", "string_system_residuals",
    "solve_string_system", "genus_ci", "witten_theta_route", "milnor_data", "STRING_LABEL",
]
