"""Iterated Laurent series with certified exponent windows.

Variables u_1, ..., u_n are expanded in the regime u_1 << u_2 << ... << u_n,
so a series lives in K((u_n))...((u_1)) and the residue in u_1 is taken first.

Certification
-------------
Each series carries

* ``hi``: per-variable upper bounds (``INF`` allowed) and ``deg_hi``, a bound
  on the total degree.  Stored terms are exactly the true terms in the region
  ``{e : e_j <= hi_j for all j, |e| <= deg_hi}``.
* ``lo``: ``lo_j`` bounds e_j from below over the true terms whose earlier
  exponents satisfy e_i <= hi_i (i < j).  ``deg_lo`` bounds the total degree
  of every true term from below.

With these semantics the product of A and B is certified on
``hi_j = min(hi_a + lo_b, hi_b + lo_a)`` (same rule for the degree), and
``lo = lo_a + lo_b``.  Exact polynomials carry ``hi = INF``.
"""

import math
import os
from operator import add

from gmpy2 import mpq

from .errors import BudgetExceeded, LeadingTermError, ModeMismatch, WindowUnderflow
from .jets import is_zero, ring_inverse
from .qseries import COMPLEX, EXACT, QSeries, coerce, format_scalar, scalar_mode, zero

INF = math.inf
DEFAULT_MAX_BUDGET = 4096


def _hsum(h, lo):
    """hi + lo where an infinite hi stays infinite."""
    if h == INF or lo == INF:
        return INF
    return h + lo


def _lsum(a, b):
    if a == INF or b == INF:
        return INF
    return a + b


def _as_int(x):
    return x if x in (INF, -INF) else int(x)


def lex_positive(e):
    for x in e:
        if x:
            return x > 0
    return False


def first_positive(e):
    """Index of the first nonzero entry (which is positive for lex-positive e)."""
    for i, x in enumerate(e):
        if x:
            return i
    return None


def max_budget():
    raw = os.environ.get("RESITOR_MAX_BUDGET")
    if raw is None:
        return DEFAULT_MAX_BUDGET
    try:
        val = int(raw)
    except ValueError:
        raise ValueError(f"RESITOR_MAX_BUDGET must be an integer, got {raw!r}")
    if val < 1:
        raise ValueError("RESITOR_MAX_BUDGET must be positive")
    return val


def _coerce_coeff(c, mode):
    if isinstance(c, QSeries):
        if c.mode != mode:
            return c.to_mode(mode)
        return c
    return coerce(c, mode)


def _coeff_q_order(c):
    return c.q_order if isinstance(c, QSeries) else None


def _min_q(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class ILSeries:
    """Sparse iterated Laurent series with a certified window."""

    __slots__ = ("vars", "terms", "lo", "hi", "deg_lo", "deg_hi", "mode", "q_order")

    def __init__(self, vars, terms, lo, hi, deg_lo=-INF, deg_hi=INF, mode=None,
                 q_order=None, check=True):
        vars = tuple(vars)
        n = len(vars)
        if mode is None:
            mode = EXACT
            for c in terms.values():
                if (isinstance(c, QSeries) and c.mode == COMPLEX) or isinstance(c, complex):
                    mode = COMPLEX
                    break
        clean = {}
        qo = q_order
        for e, c in terms.items():
            e = tuple(int(x) for x in e)
            if len(e) != n:
                raise ValueError(f"exponent {e} has wrong length for {n} variables")
            if is_zero(c):
                continue
            c = _coerce_coeff(c, mode)
            qo = _min_q(qo, _coeff_q_order(c))
            clean[e] = c
        if qo is not None:
            clean = {e: (c.truncate(qo) if isinstance(c, QSeries) and c.q_order > qo else c)
                     for e, c in clean.items()}
        self.vars = vars
        self.terms = clean
        self.lo = tuple(_as_int(x) for x in lo)
        self.hi = tuple(_as_int(x) for x in hi)
        self.deg_lo = _as_int(deg_lo)
        self.deg_hi = _as_int(deg_hi)
        self.mode = mode
        self.q_order = qo
        if len(self.lo) != n or len(self.hi) != n:
            raise ValueError("window length does not match the number of variables")
        if check:
            for e in clean:
                if not self.in_region(e):
                    raise ValueError(f"stored exponent {e} lies outside the certified window")
                if any(x < l for x, l in zip(e, self.lo)) or sum(e) < self.deg_lo:
                    raise ValueError(f"stored exponent {e} violates the lower bounds")

    # construction helpers

    @classmethod
    def polynomial(cls, vars, terms, mode=EXACT):
        """An exact finite series (window unbounded above)."""
        vars = tuple(vars)
        n = len(vars)
        terms = {tuple(e): c for e, c in dict(terms).items() if not is_zero(c)}
        if terms:
            lo = tuple(min(e[j] for e in terms) for j in range(n))
            deg_lo = min(sum(e) for e in terms)
        else:
            lo = (INF,) * n
            deg_lo = INF
        return cls(vars, terms, lo, (INF,) * n, deg_lo, INF, mode=mode)

    @classmethod
    def constant(cls, vars, c=1, mode=EXACT):
        return cls.polynomial(vars, {(0,) * len(tuple(vars)): c}, mode)

    @classmethod
    def monomial(cls, vars, exps, c=1, mode=EXACT):
        return cls.polynomial(vars, {tuple(exps): c}, mode)

    @classmethod
    def linear(cls, vars, coeffs, mode=EXACT):
        """sum_i coeffs[i] * u_i."""
        n = len(tuple(vars))
        terms = {}
        for i, a in enumerate(coeffs):
            if a:
                e = [0] * n
                e[i] = 1
                terms[tuple(e)] = a
        return cls.polynomial(vars, terms, mode)

    # inspection

    @property
    def nvars(self):
        return len(self.vars)

    @property
    def exact(self):
        return all(h == INF for h in self.hi) and self.deg_hi == INF

    def in_region(self, e):
        return all(x <= h for x, h in zip(e, self.hi)) and sum(e) <= self.deg_hi

    def zero_coeff(self):
        if self.q_order is not None:
            return QSeries.zero(self.q_order, self.mode)
        return zero(self.mode)

    def coefficient(self, exps):
        exps = tuple(exps)
        if not self.in_region(exps):
            bad = next((self.vars[j] for j, (x, h) in enumerate(zip(exps, self.hi)) if x > h), None)
            raise WindowUnderflow(
                f"window underflow: exponent {exps} is outside the certified window"
                + (f" (variable {bad})" if bad else " (total degree)"), bad)
        c = self.terms.get(exps)
        return self.zero_coeff() if c is None else c

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return (f"ILSeries(vars={self.vars}, {len(self.terms)} terms, lo={self.lo}, hi={self.hi}, "
                f"deg=[{self.deg_lo}, {self.deg_hi}])")

    def dump(self):
        """One line per term, "e1,...,en : coeff", sorted lexicographically."""
        lines = []
        for e in sorted(self.terms):
            c = self.terms[e]
            if isinstance(c, QSeries):
                cs = "[" + ", ".join(format_scalar(x) for x in c.coeffs) + "]"
            else:
                cs = format_scalar(c)
            lines.append(",".join(str(x) for x in e) + " : " + cs)
        return "\n".join(lines)

    # mode handling

    def to_mode(self, mode):
        if mode == self.mode:
            return self
        if mode == EXACT:
            raise ModeMismatch("complex series cannot be made exact")
        terms = {e: _coerce_coeff(c, COMPLEX) for e, c in self.terms.items()}
        return ILSeries(self.vars, terms, self.lo, self.hi, self.deg_lo, self.deg_hi,
                        mode=COMPLEX, q_order=self.q_order, check=False)

    def _compatible(self, other):
        if self.vars != other.vars:
            raise ValueError(f"variable contexts differ: {self.vars} vs {other.vars}")
        if self.mode != other.mode:
            raise ModeMismatch(f"cannot combine {self.mode} and {other.mode} series")

    # ring operations

    def truncate(self, hi=None, deg_hi=None):
        """Restrict to a smaller region (never enlarges the window)."""
        new_hi = self.hi if hi is None else tuple(min(a, _as_int(b)) for a, b in zip(self.hi, hi))
        new_dh = self.deg_hi if deg_hi is None else min(self.deg_hi, _as_int(deg_hi))
        terms = {e: c for e, c in self.terms.items()
                 if all(x <= h for x, h in zip(e, new_hi)) and sum(e) <= new_dh}
        return ILSeries(self.vars, terms, self.lo, new_hi, self.deg_lo, new_dh,
                        mode=self.mode, q_order=self.q_order, check=False)

    def __add__(self, other):
        if not isinstance(other, ILSeries):
            other = ILSeries.constant(self.vars, other, self.mode)
        self._compatible(other)
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        dh = min(self.deg_hi, other.deg_hi)
        lo = tuple(min(a, b) for a, b in zip(self.lo, other.lo))
        dl = min(self.deg_lo, other.deg_lo)
        terms = {}
        for src in (self.terms, other.terms):
            for e, c in src.items():
                if all(x <= h for x, h in zip(e, hi)) and sum(e) <= dh:
                    terms[e] = terms[e] + c if e in terms else c
        return ILSeries(self.vars, terms, lo, hi, dl, dh, mode=self.mode,
                        q_order=_min_q(self.q_order, other.q_order), check=False)

    __radd__ = __add__

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        if not isinstance(other, ILSeries):
            other = ILSeries.constant(self.vars, other, self.mode)
        return self + (-other)

    def scale(self, c):
        """Multiply every coefficient by a scalar or QSeries."""
        if not isinstance(c, QSeries):
            if scalar_mode(c) == COMPLEX and self.mode == EXACT:
                return self.to_mode(COMPLEX).scale(c)
            c = _coerce_coeff(c, self.mode)
        elif c.mode != self.mode:
            if self.mode == EXACT:
                return self.to_mode(COMPLEX).scale(c)
            c = c.to_mode(self.mode)
        terms = {e: x * c for e, x in self.terms.items()}
        if is_zero(c):
            terms = {}
        return ILSeries(self.vars, terms, self.lo, self.hi, self.deg_lo, self.deg_hi,
                        mode=self.mode, q_order=_min_q(self.q_order, _coeff_q_order(c)),
                        check=False)

    def product_window(self, other):
        hi = tuple(min(_hsum(ha, lb), _hsum(hb, la))
                   for ha, hb, la, lb in zip(self.hi, other.hi, self.lo, other.lo))
        dh = min(_hsum(self.deg_hi, other.deg_lo), _hsum(other.deg_hi, self.deg_lo))
        lo = tuple(_lsum(a, b) for a, b in zip(self.lo, other.lo))
        dl = _lsum(self.deg_lo, other.deg_lo)
        return lo, hi, dl, dh

    def mul(self, other, hi=None, deg_hi=None, strict=False):
        """Product, optionally truncated to a smaller region.

        With ``strict`` an empty certified window (hi < lo in some variable)
        raises WindowUnderflow naming the variable.
        """
        if not isinstance(other, ILSeries):
            return self.scale(other)
        self._compatible(other)
        lo, whi, dl, dh = self.product_window(other)
        if hi is not None:
            whi = tuple(min(a, _as_int(b)) for a, b in zip(whi, hi))
        if deg_hi is not None:
            dh = min(dh, _as_int(deg_hi))
        if strict:
            for j, (l, h) in enumerate(zip(lo, whi)):
                if l != INF and h < l:
                    raise WindowUnderflow(
                        f"window underflow: empty certified window in variable {self.vars[j]}",
                        self.vars[j])
        terms = _mul_terms(self.terms, other.terms, whi, dh)
        return ILSeries(self.vars, terms, lo, whi, dl, dh, mode=self.mode,
                        q_order=_min_q(self.q_order, other.q_order), check=False)

    def __mul__(self, other):
        return self.mul(other, strict=True)

    def __rmul__(self, other):
        return self.scale(other)

    # leading term and inversion

    def leading_term(self):
        """Lexicographically minimal stored exponent (u_1 compared first)."""
        if not self.terms:
            raise LeadingTermError("the zero series has no leading term")
        m = min(self.terms)
        return m, self.terms[m]

    def invert(self, hi=None, deg_hi=None):
        """Multiplicative inverse, certified on the requested region.

        ``hi`` may contain INF in variables that never need truncation; a
        variable in which the expansion can grow without bound must get a
        finite budget, otherwise WindowUnderflow is raised.
        """
        m, c = self.leading_term()
        if not self.exact:
            if any(mj != lj for mj, lj in zip(m, self.lo)):
                raise LeadingTermError("no certified leading term: stored minimum differs from the window's lower bound")
        if isinstance(c, QSeries):
            if not c[0]:
                raise LeadingTermError("leading coefficient is a q-series without unit constant term")
        elif not c:
            raise LeadingTermError("leading coefficient is zero")
        cinv = ring_inverse(c)
        R = _normalized_remainder(self, m, cinv)
        if hi is None:
            if self.exact:
                raise WindowUnderflow("inverting an exact series needs an explicit budget")
            hi = tuple(_hsum(h, -mj) for h, mj in zip(self.hi, m))
        hi = tuple(_as_int(h) for h in hi)
        target = tuple(_hsum(h, mj) for h, mj in zip(hi, m))
        if not self.exact:
            target = tuple(min(t, _hsum(h, -mj)) for t, h, mj in zip(target, self.hi, m))
        dm = sum(m)
        dtarget = INF if deg_hi is None else _hsum(_as_int(deg_hi), dm)
        S = power_sum(R, None, target, dtarget, negate=True)
        shift = ILSeries.monomial(self.vars, tuple(-x for x in m), 1, self.mode)
        out = S.mul(shift).scale(cinv)
        lo = tuple(_lsum(l, -mj) for l, mj in zip(S.lo, m))
        return ILSeries(self.vars, out.terms, lo, out.hi, out.deg_lo, out.deg_hi,
                        mode=self.mode, q_order=out.q_order, check=False).truncate(hi, deg_hi)

    def inverse_lo_bound(self, hi):
        """Lower bounds that ``invert(hi)`` will report, computed without expanding."""
        m, c = self.leading_term()
        R = _normalized_remainder(self, m, 1)
        target = tuple(_hsum(_as_int(h), mj) for h, mj in zip(hi, m))
        if not self.exact:
            target = tuple(min(t, _hsum(h, -mj)) for t, h, mj in zip(target, self.hi, m))
        b = power_lo_bound(R, target)
        return tuple(_lsum(x, -mj) for x, mj in zip(b, m))

    def inverse_deg_lo(self):
        m, _ = self.leading_term()
        R = _normalized_remainder(self, m, 1)
        return _lsum(_power_deg_lo(R, None), -sum(m))

    # residues

    def residue_innermost(self):
        """Coefficient of u_1^{-1}, as a series in u_2..u_n."""
        if self.nvars == 0:
            raise ValueError("no variable left to take a residue in")
        if self.hi[0] < -1:
            raise WindowUnderflow(
                f"window underflow: exponent -1 of {self.vars[0]} is outside the certified window",
                self.vars[0])
        if self.deg_hi == -INF:
            raise WindowUnderflow("window underflow: empty total-degree window")
        terms = {e[1:]: c for e, c in self.terms.items() if e[0] == -1}
        return ILSeries(self.vars[1:], terms, self.lo[1:], self.hi[1:],
                        _lsum(self.deg_lo, 1), _hsum(self.deg_hi, 1), mode=self.mode,
                        q_order=self.q_order, check=False)

    def iterated_residue(self):
        a = self
        while a.nvars:
            a = a.residue_innermost()
        if a.deg_hi < 0:
            raise WindowUnderflow("window underflow: total degree window excludes the residue")
        return a.terms.get((), a.zero_coeff())


def _mul_terms(ta, tb, hi, dh):
    """Sparse product restricted to {e <= hi, |e| <= dh}."""
    out = {}
    if not ta or not tb:
        return out
    bl = [(e, c, sum(e)) for e, c in tb.items()]
    bl.sort()
    finite = [j for j, h in enumerate(hi) if h != INF]
    dh_finite = dh != INF
    for ea, ca in ta.items():
        da = sum(ea)
        if dh_finite:
            dlim = dh - da
        lim = [hi[j] - ea[j] for j in finite]
        for eb, cb, db in bl:
            if dh_finite and db > dlim:
                continue
            ok = True
            for j, l in zip(finite, lim):
                if eb[j] > l:
                    ok = False
                    break
            if not ok:
                continue
            e = tuple(map(add, ea, eb))
            p = ca * cb
            if e in out:
                out[e] = out[e] + p
            else:
                out[e] = p
    return {e: c for e, c in out.items() if not is_zero(c)}


def _normalized_remainder(a, m, cinv):
    """R with a = c u^m (1 + R); the window of R is a's window shifted by -m."""
    terms = {}
    for e, c in a.terms.items():
        if e == m:
            continue
        terms[tuple(x - y for x, y in zip(e, m))] = c * cinv
    hi = tuple(_hsum(h, -mj) for h, mj in zip(a.hi, m))
    lo = tuple(_lsum(l, -mj) for l, mj in zip(a.lo, m))
    if a.exact:
        if terms:
            lo = tuple(min(min(e[j] for e in terms), 0) for j in range(a.nvars))
            dl = min(sum(e) for e in terms)
        else:
            lo = (INF,) * a.nvars
            dl = INF
    else:
        lo = tuple(max(l, 0) if l != INF else l for l in lo)
        dl = _lsum(a.deg_lo, -sum(m))
    dh = _hsum(a.deg_hi, -sum(m))
    for e in terms:
        if not lex_positive(e):
            raise LeadingTermError(f"term {e} is not above the leading term")
    return ILSeries(a.vars, terms, lo, hi, dl, dh, mode=a.mode, q_order=a.q_order, check=False)


def _possible_first_positive(X):
    if X.exact:
        return {first_positive(e) for e in X.terms}
    return set(range(X.nvars))


def power_count_bounds(X, target):
    """Per-variable counts K_i of factors of X whose first positive exponent is u_i."""
    P = _possible_first_positive(X)
    K = []
    M = 0
    for i in range(X.nvars):
        if i not in P:
            K.append(0)
            continue
        t = target[i]
        neg = min(0, X.lo[i]) if X.lo[i] != INF else 0
        if t == INF or (M == INF and neg < 0):
            K.append(INF)
            M = INF
            continue
        k = max(0, t - M * neg)
        K.append(k)
        M = _lsum(M, k)
    return K


def power_lo_bound(X, target):
    """Lower bounds on e_j over sum_k X^k restricted to earlier exponents <= target."""
    n = X.nvars
    K = power_count_bounds(X, target)
    out = []
    for j in range(n):
        M = 0
        for i in range(j):
            M = _lsum(M, K[i])
        neg = min(0, X.lo[j]) if X.lo[j] != INF else 0
        b = 0 if neg == 0 else (-INF if M == INF else M * neg)
        if X.exact and X.terms:
            rho = _slope(X, j)
            if rho is not None:
                tot = 0
                for i in range(j):
                    tot = _lsum(tot, max(0, target[i]))
                if rho == 0:
                    b = 0
                elif tot != INF:
                    b = max(b, -math.floor(rho * tot))
        out.append(b)
    return tuple(out)


def _slope(X, j):
    """max over terms with e_j < 0 of -e_j / sum_{i<j} e_i, when all earlier
    exponents of all terms are nonnegative; None otherwise."""
    rho = mpq(0)
    for e in X.terms:
        if any(x < 0 for x in e[:j]):
            return None
        if e[j] < 0:
            s = sum(e[:j])
            rho = max(rho, mpq(-e[j], s))
    return rho


def _power_deg_lo(X, Kmax):
    d = X.deg_lo
    if d >= 0:
        return 0
    if Kmax is None or Kmax == INF:
        return -INF
    return Kmax * d


def power_sum(X, coeffs, target, deg_target, negate=False):
    """sum_k coeffs[k] X^k on the region {e <= target, |e| <= deg_target}.

    X must have strictly positive recursive order (every term lex-positive).
    ``coeffs`` is a list of scalars or QSeries; None means all ones, with
    ``negate`` giving the geometric series sum (-X)^k.
    """
    K = power_count_bounds(X, target)
    Kmax = 0
    for k in K:
        Kmax = _lsum(Kmax, k)
    if X.deg_lo != INF and X.deg_lo >= 1 and deg_target != INF:
        Kmax = min(Kmax, max(0, deg_target // X.deg_lo))
    if Kmax == INF:
        bad = next(X.vars[i] for i, k in enumerate(K) if k == INF)
        raise WindowUnderflow(f"window underflow: expansion needs a finite budget in {bad}", bad)
    if coeffs is not None and Kmax > len(coeffs) - 1:
        raise WindowUnderflow(
            f"window underflow: composition needs the series through order {Kmax}, got {len(coeffs) - 1}")
    lo_b = power_lo_bound(X, target)
    neg = tuple(min(0, l) if l != INF else 0 for l in X.lo)
    dneg = min(0, X.deg_lo) if X.deg_lo != INF else 0
    base = -X if negate else X
    one_ = ILSeries.constant(X.vars, 1, X.mode)

    def region(k):
        box = tuple(_hsum(t, -(Kmax - k) * nj) for t, nj in zip(target, neg))
        return box, _hsum(deg_target, -(Kmax - k) * dneg)

    box0, d0 = region(0)
    P = one_.truncate(box0, d0)
    total = P if coeffs is None else P.scale(coeffs[0])
    for k in range(1, Kmax + 1):
        box, dk = region(k)
        P = P.mul(base, box, dk)
        if coeffs is None:
            total = total + P
        else:
            total = total + P.scale(coeffs[k])
        if not P.terms:
            break
    total = total.truncate(target, deg_target)
    return ILSeries(X.vars, total.terms, lo_b, total.hi, _power_deg_lo(X, Kmax), total.deg_hi,
                    mode=total.mode, q_order=total.q_order, check=False)


def il_compose(s, L, hi=None, deg_hi=None):
    """s(L) for a univariate truncated series s = [s_0, ..., s_K].

    When L is an exact polynomial with nonnegative exponents and no term of
    degree below 1, the result is certified for total degree <= K with no
    box restriction.  Otherwise a box budget ``hi`` is required.
    """
    if (0,) * L.nvars in L.terms:
        raise ValueError("L has a constant term")
    if L.exact:
        for e in L.terms:
            if not lex_positive(e):
                raise ValueError(f"L is not of strictly positive order (term {e})")
    elif any(l < 0 for l in L.lo):
        raise ValueError("L is not certified to have positive order")
    K = len(s) - 1
    mode = L.mode
    for c in s:
        if (isinstance(c, QSeries) and c.mode == COMPLEX) or isinstance(c, complex):
            mode = COMPLEX
    X = L.to_mode(mode)
    poly = X.exact and all(x >= 0 for e in X.terms for x in e) and X.terms and \
        min(sum(e) for e in X.terms) >= 1
    if poly:
        dl = min(sum(e) for e in X.terms)
        dt = K * dl + (dl - 1) if deg_hi is None else min(_as_int(deg_hi), K * dl + (dl - 1))
        target = (INF,) * X.nvars if hi is None else tuple(_as_int(h) for h in hi)
        return power_sum(X, list(s), target, dt)
    if hi is None:
        raise WindowUnderflow("composition with a non-polynomial argument needs a budget")
    return power_sum(X, list(s), tuple(_as_int(h) for h in hi),
                     INF if deg_hi is None else _as_int(deg_hi))


def il_iterated_residue(a):
    return a.iterated_residue()


def il_residue_innermost(a):
    return a.residue_innermost()


def il_invert(a, hi=None, deg_hi=None):
    return a.invert(hi, deg_hi)


# residue pipelines ---------------------------------------------------------


class ExactFactor:
    """A factor that is already a fully certified series."""

    def __init__(self, series):
        self.series = series

    def lo_bound(self, box):
        return self.series.lo

    def deg_lo(self):
        return self.series.deg_lo

    def build(self, box, deg):
        return self.series


class InverseFactor:
    """1/p for an exact polynomial (or other certified series) p."""

    def __init__(self, series):
        self.series = series
        self._deg_lo = series.inverse_deg_lo()

    def lo_bound(self, box):
        return self.series.inverse_lo_bound(box)

    def deg_lo(self):
        return self._deg_lo

    def build(self, box, deg):
        return self.series.invert(box)


class ComposeFactor:
    """s(L) with s supplied on demand by ``provider(K) -> [s_0..s_K]``."""

    def __init__(self, provider, L, label=None):
        self.provider = provider
        self.L = L
        self.label = label
        self.degree_mode = L.exact and L.terms and all(x >= 0 for e in L.terms for x in e) \
            and min(sum(e) for e in L.terms) >= 1

    def lo_bound(self, box):
        if self.degree_mode:
            return (0,) * self.L.nvars
        return power_lo_bound(self.L, box)

    def deg_lo(self):
        return 0 if self.degree_mode else -INF

    def build(self, box, deg):
        if self.degree_mode:
            dl = min(sum(e) for e in self.L.terms)
            if deg == INF:
                raise WindowUnderflow("composite factor needs a finite total-degree budget")
            K = max(0, deg // dl)
            return il_compose(self.provider(K), self.L, deg_hi=deg)
        K = sum(power_count_bounds(self.L, box))
        return il_compose(self.provider(K), self.L, hi=box)


def _covers(lo, hi, dl, dh, target, tdeg):
    return all(h >= t for h, t in zip(hi, target)) and dh >= tdeg


def residue_of_product(vars, factors, target=None, cap=None):
    """Iterated residue (or any coefficient ``target``) of a product of factors.

    Budgets follow hi_t = target - sum_{s != t} lo_s per variable, processed
    in variable order because an inverse's lower bound depends on its budget
    in earlier variables; on a shortfall every budget is doubled until the
    cap (RESITOR_MAX_BUDGET) is reached.
    """
    vars = tuple(vars)
    n = len(vars)
    if target is None:
        target = (-1,) * n
    target = tuple(target)
    tdeg = sum(target)
    if cap is None:
        cap = max_budget()
    factors = list(factors)
    if not factors:
        raise ValueError("empty product")
    T = len(factors)
    slack = 0
    while True:
        deg_los = [f.deg_lo() for f in factors]
        degs = []
        for t in range(T):
            rest = 0
            for s in range(T):
                if s != t:
                    rest = _lsum(rest, deg_los[s])
            degs.append(INF if rest == -INF else tdeg - rest + slack)
        boxes = [[INF] * n for _ in range(T)]
        for j in range(n):
            los = [f.lo_bound(tuple(b))[j] for f, b in zip(factors, boxes)]
            for t in range(T):
                rest = 0
                for s in range(T):
                    if s != t:
                        rest = _lsum(rest, los[s])
                boxes[t][j] = INF if rest == -INF else target[j] - rest + slack
        for t in range(T):
            for j in range(n):
                b = boxes[t][j]
                if b != INF and abs(b) > cap:
                    raise BudgetExceeded(
                        f"window budget {b} for {vars[j]} exceeds the cap {cap} (RESITOR_MAX_BUDGET)", vars[j])
            if degs[t] != INF and abs(degs[t]) > cap:
                raise BudgetExceeded(f"total-degree budget {degs[t]} exceeds the cap {cap}")
        built = [f.build(tuple(b), d) for f, b, d in zip(factors, boxes, degs)]
        mode = COMPLEX if any(b.mode == COMPLEX for b in built) else EXACT
        built = [b.to_mode(mode) for b in built]
        try:
            return _multiply_to_coefficient(built, target, tdeg)
        except WindowUnderflow:
            slack = 2 * slack + 1
            if slack > cap:
                raise


def _multiply_to_coefficient(series, target, tdeg):
    """Multiply certified factors and read off the coefficient at ``target``."""
    n = len(target)
    order = sorted(range(len(series)), key=lambda i: (series[i].q_order is not None, len(series[i])))
    series = [series[i] for i in order]
    suffix_lo = [(0,) * n]
    suffix_dl = [0]
    for s in reversed(series):
        suffix_lo.append(tuple(_lsum(a, b) for a, b in zip(s.lo, suffix_lo[-1])))
        suffix_dl.append(_lsum(s.deg_lo, suffix_dl[-1]))
    suffix_lo.reverse()
    suffix_dl.reverse()
    P = series[0]
    for k in range(1, len(series) - 1):
        rest = suffix_lo[k + 1]
        box = tuple(INF if r == INF else (t - r) for t, r in zip(target, rest))
        dbox = INF if suffix_dl[k + 1] in (INF, -INF) else tdeg - suffix_dl[k + 1]
        P = P.mul(series[k], box, dbox)
    if len(series) == 1:
        return P.coefficient(target)
    last = series[-1]
    lo, hi, dl, dh = P.product_window(last)
    if not _covers(lo, hi, dl, dh, target, tdeg):
        bad = next((P.vars[j] for j, (h, t) in enumerate(zip(hi, target)) if h < t), None)
        raise WindowUnderflow(f"window underflow: product window {hi} misses the target {target}", bad)
    acc = None
    for ea, ca in P.terms.items():
        eb = tuple(t - x for t, x in zip(target, ea))
        cb = last.terms.get(eb)
        if cb is None:
            continue
        p = ca * cb
        acc = p if acc is None else acc + p
    if acc is None:
        z = P.zero_coeff() if P.q_order is not None else last.zero_coeff()
        if P.q_order is not None and last.q_order is not None:
            z = QSeries.zero(min(P.q_order, last.q_order), P.mode)
        return z
    if isinstance(acc, QSeries):
        qo = _min_q(P.q_order, last.q_order)
        if qo is not None and acc.q_order > qo:
            acc = acc.truncate(qo)
    return acc
