"""Closed-form theta expressions and the verification targets.

Each target compares two independently computed sides and reports the
largest coefficient deviation.  Exact sides must agree identically; a float
side is accepted within ``tol`` per coefficient.
"""

import random
from dataclasses import dataclass, field

from gmpy2 import mpq

from .bott import (BottTower, CISpec, characteristic_classes, genus_ci, normal_form,
                   string_check, witten_theta_route)
from .laurent import ILSeries, InverseFactor, residue_of_product
from .qseries import (COMPLEX, EXACT, QSeries, discriminant, eisenstein_e4, qs_geometric,
                      qs_sigma_series)
from .theta import theta_log_ratio
from .toric import (DegreeFunction, fan_bundle_over_cp, fan_cp, fan_from_tower, fan_hirzebruch,
                    toric_form_lattice, toric_form_theta)

HALF = mpq(1, 2)
HIRZEBRUCH_ALPHAS = (mpq(1, 3), mpq(1, 5), mpq(1, 7), mpq(2, 7))
HIRZEBRUCH_INTEGRAL_ALPHAS = (mpq(1, 3), mpq(1, 5), mpq(1, 7), mpq(6, 7))
BUNDLE_CASES = ((0, 0), (1, 0), (1, 1), (2, 1))
VANISHING_I = (1, 3, 4)
MILNOR_VANISHING = (3, (1, 2, 3), ((3, 0), (-3, 2)))
STRING24 = (12, (6,), ((7, 0),))


# closed forms -------------------------------------------------------------


def rr_lhs(N):
    """sum_{m,n>=1} q^{m+n} / ((1+q^m)(1+q^n)(1+q^{m+n})) through q^N."""
    total = QSeries.zero(N)
    inv = {a: qs_geometric(a, -1, N) for a in range(1, N + 1)}
    for m in range(1, N):
        for n in range(1, N - m + 1):
            term = (inv[m] * inv[n] * inv[m + n]).shift(m + n, N)
            total = total + term
    return total


def rr_rhs(N):
    return qs_sigma_series(1, 2, N)


def cp2_closed_form(N):
    """(3/2) L_2(1/2) - (1/2) L_3(0), the elliptic genus of CP^2 at alpha = 1/2."""
    A = theta_log_ratio(HALF, 2, N)
    B = theta_log_ratio(0, 3, N, base="prime")
    return A.scale(mpq(3, 2)) - B.scale(HALF)


def hirzebruch_rhs(alphas, k, N):
    """(L1(-a3) + L1(-a4))(L1(-a1) + L1(-a2)) + (k/2)(L2(-a3) - L2(-a4))."""
    L = [[None] + [theta_log_ratio(-a, m, N, base="self") for m in (1, 2)] for a in alphas]
    out = (L[2][1] + L[3][1]) * (L[0][1] + L[1][1])
    return out + (L[2][2] - L[3][2]).scale(mpq(k, 2))


def bundle_rhs(j, k, N):
    """Closed theta expression for the CP^2-bundle over CP^2 at alpha = 1/2."""
    A = theta_log_ratio(HALF, 2, N)
    B3 = theta_log_ratio(0, 3, N, base="prime")
    L4 = theta_log_ratio(HALF, 4, N)
    L5 = theta_log_ratio(0, 5, N, base="prime")
    base = cp2_closed_form(N)
    corr = ((A * A).scale(mpq(1, 4)) + L4.scale(mpq(5, 24)) - (B3 * A).scale(mpq(7, 12))
            - L5.scale(mpq(1, 24)) + (B3 * B3).scale(mpq(1, 6)))
    return base * base + corr.scale(j * j + k * k - j * k)


def weight12_fit(phi):
    """Solve phi = a E4^3 + b Delta from q^0 and q^1; return (a, b, fitted series)."""
    N = phi.q_order
    E = eisenstein_e4(N)
    D = discriminant(N)
    a = phi[0]
    b = phi[1] - 720 * a
    return a, b, (E * E * E).scale(a) + D.scale(b)


# reports ------------------------------------------------------------------


def _fmt(x):
    return str(x)


def _deviation(a, b):
    if isinstance(a, QSeries) and isinstance(b, QSeries):
        return a.max_deviation(b)
    if isinstance(a, (QSeries,)) or isinstance(b, (QSeries,)):
        raise TypeError("cannot compare a series with a scalar")
    return float(abs(a - b))


def _is_exact(x):
    if isinstance(x, QSeries):
        return x.mode == EXACT
    return not isinstance(x, (complex, float))


@dataclass
class Check:
    label: str
    lhs: object
    rhs: object
    deviation: float
    passed: bool

    def to_json(self):
        def enc(x):
            if isinstance(x, QSeries):
                return x.to_json()
            if isinstance(x, (complex, float)):
                return [complex(x).real, complex(x).imag]
            return str(x)
        return {"label": self.label, "lhs": enc(self.lhs), "rhs": enc(self.rhs),
                "max_deviation": self.deviation, "pass": self.passed}


@dataclass
class VerifyResult:
    target: str
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    @property
    def deviation(self):
        return max((c.deviation for c in self.checks), default=0.0)

    def add(self, label, lhs, rhs, tol):
        if _is_exact(lhs) and _is_exact(rhs):
            ok = lhs == rhs
            dev = 0.0 if ok else _deviation(lhs, rhs)
        else:
            dev = _deviation(lhs, rhs)
            ok = dev <= tol
        self.checks.append(Check(label, lhs, rhs, dev, ok))
        return ok

    def add_flag(self, label, value, expected=True):
        self.checks.append(Check(label, value, expected, 0.0 if value == expected else 1.0,
                                 value == expected))

    def lines(self):
        out = []
        for c in self.checks:
            out.append(f"[{self.target}] {c.label}")
            out.append(f"  lhs: {_fmt(c.lhs)}")
            out.append(f"  rhs: {_fmt(c.rhs)}")
            out.append(f"  {'PASS' if c.passed else 'FAIL'} (max deviation {c.deviation:.3g})")
        out.append(f"{self.target}: {'PASS' if self.passed else 'FAIL'} "
                   f"(max deviation {self.deviation:.3g})")
        return out

    def to_json(self):
        return {"target": self.target, "pass": self.passed, "max_deviation": self.deviation,
                "checks": [c.to_json() for c in self.checks]}


# targets ------------------------------------------------------------------


def verify_rr(N=24, tol=1e-8, **_):
    res = VerifyResult("rr")
    res.add("double sum = sum sigma_1(r) q^{2r}", rr_lhs(N), rr_rhs(N), tol)
    return res


def verify_cp2(N=12, tol=1e-8, jobs=1, **_):
    res = VerifyResult("cp2")
    fan = fan_cp(2)
    deg = DegreeFunction.constant(3, HALF)
    lat = toric_form_lattice(fan, deg, N, jobs=jobs)
    res.add("lattice = theta route", lat, toric_form_theta(fan, deg, N), tol)
    res.add("lattice = closed form", lat, cp2_closed_form(N), tol)
    return res


def verify_hirzebruch(N=8, tol=1e-8, jobs=1, ks=(0, 1, 2, 3), **_):
    res = VerifyResult("prop31")
    for k in ks:
        fan = fan_hirzebruch(k)
        deg = DegreeFunction(HIRZEBRUCH_ALPHAS)
        res.add(f"k={k} alpha={tuple(map(str, HIRZEBRUCH_ALPHAS))}: lattice = rhs",
                toric_form_lattice(fan, deg, N, jobs=jobs), hirzebruch_rhs(HIRZEBRUCH_ALPHAS, k, N), tol)
    for k in ks:
        fan = fan_hirzebruch(k)
        deg = DegreeFunction.constant(4, HALF)
        res.add(f"k={k} alpha=1/2: lattice = 0", toric_form_lattice(fan, deg, N, jobs=jobs),
                QSeries.zero(N), tol)
        res.add(f"k={k} alpha=1/2: rhs = 0", hirzebruch_rhs((HALF,) * 4, k, N), QSeries.zero(N), tol)
    fan = fan_hirzebruch(2)
    deg = DegreeFunction(HIRZEBRUCH_INTEGRAL_ALPHAS)
    res.add("k=2 a3+a4=1: lattice = 0", toric_form_lattice(fan, deg, N, jobs=jobs),
            QSeries.zero(N, COMPLEX), tol)
    return res


def verify_bundle(N=6, tol=1e-8, jobs=1, cases=BUNDLE_CASES, **_):
    res = VerifyResult("prop32")
    for j, k in cases:
        fan = fan_bundle_over_cp(2, (j, k))
        deg = DegreeFunction.constant(6, HALF)
        lat = toric_form_lattice(fan, deg, N, jobs=jobs)
        res.add(f"(j,k)=({j},{k}): lattice = rhs", lat, bundle_rhs(j, k, N), tol)
        if (j, k) == (0, 0):
            cp2 = toric_form_lattice(fan_cp(2), DegreeFunction.constant(3, HALF), N, jobs=jobs)
            res.add("(0,0): lattice = (CP^2 series)^2", lat, cp2 * cp2, tol)
    return res


def verify_vanishing_form(N=6, tol=1e-8, jobs=1, **_):
    res = VerifyResult("thm33")
    tower = BottTower.twisted_milnor(1, VANISHING_I)
    fan = fan_from_tower(tower)
    deg = DegreeFunction.constant(len(fan.rays), HALF)
    res.add_flag("sum of degrees on the stage-2 rays is integral",
                 sum(deg.values[2:]).denominator == 1)
    res.add(f"I={VANISHING_I}: lattice = 0", toric_form_lattice(fan, deg, N, jobs=jobs),
            QSeries.zero(N), tol)
    res.add(f"I={VANISHING_I}: theta route = 0", toric_form_theta(fan, deg, N), QSeries.zero(N), tol)
    return res


def verify_witten_vanishing(N=10, tol=1e-8, theta_order=6, **_):
    res = VerifyResult("witten-vanishing")
    n1, I, classes = MILNOR_VANISHING
    tower = BottTower.twisted_milnor(n1, I)
    ci = CISpec(classes)
    rep = string_check(tower, ci)
    res.add_flag(f"string check: {rep.verdict}", rep.string)
    phi = genus_ci(tower, ci, "witten", N)
    res.add("Witten genus = 0", phi, QSeries.zero(N), tol)
    M = min(theta_order, N)
    res.add(f"theta route = char-series route through q^{M}",
            witten_theta_route(tower, ci, M), phi.truncate(M), tol)
    return res


def order_dependence_values():
    """Res of 1/(u1 (u1 + u2)) taking u1 first, then taking u2 first."""
    f = {(1, 1): 1, (2, 0): 1}
    a = residue_of_product(("u1", "u2"), [InverseFactor(ILSeries.polynomial(("u1", "u2"), f))])
    swapped = {(e[1], e[0]): c for e, c in f.items()}
    b = residue_of_product(("u2", "u1"), [InverseFactor(ILSeries.polynomial(("u2", "u1"), swapped))])
    return a, b


def verify_order_dependence(**_):
    res = VerifyResult("order-dependence")
    a, b = order_dependence_values()
    res.add("Res_u2 Res_u1 1/(u1(u1+u2)) = 1", a, mpq(1), 0)
    res.add("Res_u1 Res_u2 1/(u1(u1+u2)) = 0", b, mpq(0), 0)
    return res


def random_tower(rng, max_stages=4, max_fiber=3, max_twist=3):
    n = rng.randint(1, max_stages)
    stages = []
    for k in range(n):
        nk = rng.randint(1, max_fiber)
        rows = [[rng.randint(-max_twist, max_twist) for _ in range(k)] for _ in range(nk)] if k else ()
        stages.append((nk, rows))
    return BottTower(stages)


def verify_todd_one(count=20, seed=0, **_):
    res = VerifyResult("todd-one")
    rng = random.Random(seed)
    for _ in range(count):
        t = random_tower(rng, max_stages=3, max_fiber=2, max_twist=3)
        res.add(f"Todd {t.to_json()['stages']}", genus_ci(t, CISpec(), "todd"), mpq(1), 0)
    return res


def verify_weight12(N=6, tol=1e-8, **_):
    res = VerifyResult("weight12")
    n1, I, classes = STRING24
    tower = BottTower.twisted_milnor(n1, I)
    ci = CISpec(classes)
    _, p1 = characteristic_classes(tower, ci)
    res.add_flag("p1 normal form vanishes", normal_form(p1, tower).is_zero())
    phi = genus_ci(tower, ci, "witten", N)
    a, b, fit = weight12_fit(phi)
    res.add(f"Witten genus = {a} E4^3 + {b} Delta", phi, fit, tol)
    return res


TARGETS = {
    "rr": verify_rr,
    "cp2": verify_cp2,
    "prop31": verify_hirzebruch,
    "prop32": verify_bundle,
    "thm33": verify_vanishing_form,
    "witten-vanishing": verify_witten_vanishing,
    "order-dependence": verify_order_dependence,
    "todd-one": verify_todd_one,
    "weight12": verify_weight12,
}

DEFAULT_ORDERS = {"rr": 24, "cp2": 12, "prop31": 8, "prop32": 6, "thm33": 6,
                  "witten-vanishing": 10, "weight12": 6}


def run_target(name, q_order=None, tol=1e-8, jobs=1):
    if name not in TARGETS:
        raise ValueError(f"unknown target {name!r}; expected one of {', '.join(TARGETS)}")
    kw = {"tol": tol, "jobs": jobs}
    N = q_order if q_order is not None else DEFAULT_ORDERS.get(name)
    if N is not None:
        kw["N"] = N
    return TARGETS[name](**kw)


__all__ = [
    "rr_lhs", "rr_rhs", "cp2_closed_form", "hirzebruch_rhs", "bundle_rhs", "weight12_fit",
    "order_dependence_values", "random_tower", "VerifyResult", "Check", "TARGETS", "run_target",
]
