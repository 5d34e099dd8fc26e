"""Acceptance criteria 1-10, each checked at its tolerance and time limit.

Every test prints one PASS/FAIL line; the lines are also collected into the
"acceptance criteria" section of the pytest terminal summary.
"""

import cmath
import random
import time
from contextlib import contextmanager

import pytest
from gmpy2 import mpq

from resitor.bott import BottTower, CISpec, CohomPoly, characteristic_classes, genus_ci, normal_form
from resitor.bott import pairing, string_check, witten_theta_route
from resitor.qseries import COMPLEX, QSeries, qs_sigma_series
from resitor.theta import theta_numeric
from resitor.toric import (DegreeFunction, fan_bundle_over_cp, fan_cp, fan_from_tower, fan_hirzebruch,
                           toric_form_lattice, toric_form_theta)
from resitor.verify import (MILNOR_VANISHING, HIRZEBRUCH_ALPHAS, HIRZEBRUCH_INTEGRAL_ALPHAS, BUNDLE_CASES,
                            STRING24, VANISHING_I, order_dependence_values, hirzebruch_rhs, bundle_rhs,
                            random_tower, rr_lhs, rr_rhs)

HALF = mpq(1, 2)


@pytest.fixture
def criterion(record_property):
    @contextmanager
    def run(n, title, limit):
        t0 = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            dt = time.perf_counter() - t0
            verdict = "PASS" if ok and dt < limit else "FAIL"
            line = f"criterion {n:2d}: {verdict}  {title}  ({dt:.1f}s, limit {limit}s)"
            print(line)
            record_property("acceptance", (n, line))
        assert dt < limit, f"criterion {n} took {dt:.1f}s (limit {limit}s)"
    return run


def half(n):
    return DegreeFunction.constant(n, HALF)


def odd_divisor_cp2(N):
    # 1/4 + 3 sum_j (q^j/(1+q^j)^2 + q^j/(1-q^j)^2)
    c = [mpq(1, 4)] + [6 * sum(d for d in range(1, n + 1, 2) if n % d == 0) for n in range(1, N + 1)]
    return QSeries(c)


def top_degree_monomials(t, rng, count):
    out = []
    for _ in range(count):
        cuts = sorted(rng.randint(0, t.dim) for _ in range(t.n - 1))
        parts = tuple(b - a for a, b in zip([0] + cuts, cuts + [t.dim]))
        out.append(CohomPoly(t.n, {parts: 1}))
    return out


def test_c01_pairing_normalization(criterion):
    with criterion(1, "top monomial pairs to 1 on 50 random towers", 60):
        rng = random.Random(2024)
        for _ in range(50):
            t = random_tower(rng, max_stages=4, max_fiber=3, max_twist=3)
            assert pairing(CohomPoly(t.n, {t.top_exponents: 1}), t) == 1


def test_c02_oracle_equivalence(criterion):
    with criterion(2, "residue pairing = normal-form pairing on 200 monomials", 120):
        rng = random.Random(77)
        count = 0
        while count < 200:
            t = random_tower(rng, max_stages=4, max_fiber=3, max_twist=3)
            for p in top_degree_monomials(t, rng, 4):
                assert pairing(p, t, "residue") == pairing(p, t, "normalform")
                count += 1


def test_c03_double_sum_identity(criterion):
    with criterion(3, "double sum = sum sigma_1(r) q^{2r} through q^24", 10):
        N = 24
        lhs, rhs = rr_lhs(N), rr_rhs(N)
        assert lhs == rhs
        assert list(lhs.coeffs[:7]) == [0, 0, 1, 0, 3, 0, 4]


def test_c04_cp2_identity(criterion):
    with criterion(4, "CP^2 lattice = theta = 1/4 + 6q + 6q^2 + ... through q^12", 30):
        N = 12
        lat = toric_form_lattice(fan_cp(2), half(3), N)
        th = toric_form_theta(fan_cp(2), half(3), N)
        assert lat == th == odd_divisor_cp2(N)


def test_c05_hirzebruch_identity(criterion):
    with criterion(5, "Hirzebruch lattice = theta expression (1e-8) and exact 0 = 0", 120):
        N, tol = 8, 1e-8
        deg = DegreeFunction(HIRZEBRUCH_ALPHAS)
        for k in (0, 1, 2, 3):
            lat = toric_form_lattice(fan_hirzebruch(k), deg, N)
            rhs = hirzebruch_rhs(HIRZEBRUCH_ALPHAS, k, N)
            assert lat.max_deviation(rhs.to_mode(COMPLEX)) <= tol
        for k in (0, 1, 2, 3):
            assert toric_form_lattice(fan_hirzebruch(k), half(4), N) == QSeries.zero(N)
            assert hirzebruch_rhs((HALF,) * 4, k, N) == QSeries.zero(N)
        lat = toric_form_lattice(fan_hirzebruch(2), DegreeFunction(HIRZEBRUCH_INTEGRAL_ALPHAS), N)
        assert lat.max_deviation(QSeries.zero(N, COMPLEX)) <= tol
        assert hirzebruch_rhs(HIRZEBRUCH_INTEGRAL_ALPHAS, 2, N).max_deviation(QSeries.zero(N, COMPLEX)) <= tol


def test_c06_bundle_identity(criterion):
    with criterion(6, "CP^2-bundle lattice sum = theta expression, exact through q^6", 600):
        N = 6
        cp2 = odd_divisor_cp2(N)
        for j, k in BUNDLE_CASES:
            lat = toric_form_lattice(fan_bundle_over_cp(2, (j, k)), half(6), N)
            assert lat == bundle_rhs(j, k, N)
            if (j, k) == (0, 0):
                assert lat == cp2 * cp2


def test_c07_vanishing_toric_form(criterion):
    with criterion(7, "I = (1,3,4) over CP^1 at alpha = 1/2: toric form = 0 through q^6", 300):
        N = 6
        fan = fan_from_tower(BottTower.twisted_milnor(1, VANISHING_I))
        assert sum(VANISHING_I) % 2 == 0
        assert toric_form_lattice(fan, half(len(fan.rays)), N) == QSeries.zero(N)
        assert toric_form_theta(fan, half(len(fan.rays)), N) == QSeries.zero(N)


def test_c08_witten_vanishing(criterion):
    with criterion(8, "string complete intersection has Witten genus 0 (q^10, theta q^6)", 300):
        n1, I, classes = MILNOR_VANISHING
        t, ci = BottTower.twisted_milnor(n1, I), CISpec(classes)
        assert string_check(t, ci).string
        assert genus_ci(t, ci, "witten", 10) == QSeries.zero(10)
        assert witten_theta_route(t, ci, 6) == QSeries.zero(6)


def _e4(N):
    return QSeries.one(N) + qs_sigma_series(3, 1, N).scale(240)


def _delta(N):
    prod = QSeries.one(N)
    for n in range(1, N + 1):
        factor = QSeries.one(N) - QSeries.monomial(n, N)
        for _ in range(24):
            prod = prod * factor
    return prod.shift(1, N)


def test_c09_weight_twelve_consistency(criterion):
    with criterion(9, "24-dim string hypersurface: p1 = 0, Witten genus in span(E4^3, Delta)", 120):
        n1, I, classes = STRING24
        t, ci = BottTower.twisted_milnor(n1, I), CISpec(classes)
        _, p1 = characteristic_classes(t, ci)
        assert normal_form(p1, t).is_zero()
        N = 6
        phi = genus_ci(t, ci, "witten", N)
        E, D = _e4(N), _delta(N)
        assert list(D.coeffs[:3]) == [0, 1, -24]
        a = phi[0]
        b = phi[1] - a * (E * E * E)[1]
        fit = (E * E * E).scale(a) + D.scale(b)
        assert [phi[i] for i in range(2, 6)] == [fit[i] for i in range(2, 6)]
        assert phi == fit
        assert witten_theta_route(t, ci, 4) == phi.truncate(4)


def test_c10_property_suites(criterion):
    with criterion(10, "Todd = 1, never-string, order dependence, theta periodicity, Witten q^0 = A-hat", 120):
        rng = random.Random(10)
        for _ in range(20):
            assert genus_ci(random_tower(rng), CISpec(), "todd") == 1

        # the never-string argument needs u^2 != 0 on the base, so n1 >= 2
        for _ in range(100):
            n1 = rng.randint(2, 6)
            I = [rng.randint(-4, 4) for _ in range(rng.randint(3, 6))]
            d = (0, 0)
            while d == (0, 0):
                d = (rng.randint(-8, 8), rng.randint(-8, 8))
            assert not string_check(BottTower.twisted_milnor(n1, I), CISpec((d,))).string

        assert order_dependence_values() == (1, 0)

        for _ in range(50):
            z = complex(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4))
            tau = complex(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 1.5))
            th = theta_numeric(z, tau)
            assert abs(theta_numeric(z + 1, tau) + th) <= 1e-10
            q = cmath.exp(2j * cmath.pi * tau)
            expect = -q ** -0.5 * cmath.exp(-2j * cmath.pi * z) * th
            assert abs(theta_numeric(z + tau, tau) - expect) <= 1e-10 * max(1.0, abs(expect))

        for _ in range(10):
            t = random_tower(rng, max_stages=3, max_fiber=2)
            assert genus_ci(t, CISpec(), "witten", 2)[0] == genus_ci(t, CISpec(), "ahat")


def test_single_hypersurface_over_cp1_is_string():
    # reported beside criterion 10: with n1 = 1 a single hypersurface with n2 >= 3 can be string
    t = BottTower.twisted_milnor(1, (1, 1, 1, 0, 0, 0, 0, 0))
    rep = string_check(t, CISpec(((-1, 3),)))
    _, p1 = characteristic_classes(t, CISpec(((-1, 3),)))
    assert rep.string and normal_form(p1, t).is_zero()
