import numpy as np
import pytest
from gmpy2 import mpq

from resitor.bott import BottTower, CISpec, genus_ci
from resitor.errors import DegreeIntegralOnRay, NotStabilized
from resitor.qseries import COMPLEX, EXACT, QSeries
from resitor.toric import (DegreeFunction, Fan, LatticePolicy, _LatticeEvaluator, _merge, _shell_counts,
                           cone_term, fan_bundle_over_cp, fan_cp, fan_from_tower, fan_hirzebruch,
                           lattice_term, toric_form_lattice, toric_form_theta)
from resitor.verify import HIRZEBRUCH_ALPHAS, cp2_closed_form, hirzebruch_rhs

HALF = mpq(1, 2)
CP2_SERIES = [mpq(1, 4), 6, 6, 24, 6, 36, 24]


def half(n):
    return DegreeFunction.constant(n, HALF)


def test_cp2_series_oracle():
    # 1/4 + 3 sum_j (q^j/(1+q^j)^2 + q^j/(1-q^j)^2) has q^n coefficient 6 times the odd divisor sum
    odd = [sum(d for d in range(1, n + 1, 2) if n % d == 0) for n in range(1, len(CP2_SERIES))]
    assert CP2_SERIES[1:] == [6 * s for s in odd]


def test_builders():
    f = fan_cp(2)
    assert f.rays == ((1, 0), (0, 1), (-1, -1))
    assert len(f.max_cones) == 3
    assert len(f.cones) == 7
    h = fan_hirzebruch(1)
    assert (-1, 1) in h.rays and len(h.max_cones) == 4
    b = fan_bundle_over_cp(2, (1, 2))
    assert (-1, -1, 1, 2) in b.rays and (0, 0, -1, -1) in b.rays
    assert len(b.rays) == 6 and len(b.max_cones) == 9


def test_fan_validation():
    with pytest.raises(ValueError, match="rays\\[1\\]: ray not primitive"):
        Fan(2, [(1, 0), (0, 2)], [(0, 1)])
    with pytest.raises(ValueError, match="max_cones\\[0\\]: cone is not unimodular"):
        Fan(2, [(1, 0), (1, 2)], [(0, 1)])


def test_degree_function():
    d = DegreeFunction(["1/2", "3/2", "1/3"])
    assert not d.exact and d.mode == COMPLEX
    assert half(3).exact and half(3).zeta(0) == -1
    assert DegreeFunction(["1/2", 1]).integral_rays() == [1]


def test_cone_term_examples():
    f = fan_cp(2)
    assert cone_term(f, (), (3, -1), half(3), 4) == QSeries.one(4)
    assert cone_term(f, (0, 1), (0, 0), half(3), 3) == QSeries.constant(mpq(1, 4), 3)
    assert cone_term(f, (0,), (-1, 0), half(3), 4) == QSeries([0, 1, -1, 1, -1])


def test_cone_term_integral_on_ray():
    with pytest.raises(DegreeIntegralOnRay):
        cone_term(fan_cp(2), (0,), (0, 5), DegreeFunction(["0", "1/2", "1/2"]), 3)


def test_vectorized_evaluator_matches_reference():
    for fan, deg in ((fan_cp(2), half(3)), (fan_hirzebruch(2), half(4)),
                     (fan_hirzebruch(1), DegreeFunction(HIRZEBRUCH_ALPHAS))):
        N, B = 3, 3
        ev = _LatticeEvaluator(fan, deg, N, True)
        rays = np.array(fan.rays, dtype=np.int64)
        parts = [_shell_counts((m0, -1, B, rays, ev.clamp)) for m0 in range(-B, B + 1)]
        fast = ev.evaluate(*_merge(parts, len(fan.rays)))
        ref = _box_sum(fan, deg, N, B, True)
        for a, b in zip(fast, ref.coeffs):
            assert abs(complex(a) - complex(b)) <= 1e-12


def test_cp2_lattice_and_theta():
    N = len(CP2_SERIES) - 1
    lat = toric_form_lattice(fan_cp(2), half(3), N)
    assert lat == QSeries(CP2_SERIES)
    assert toric_form_theta(fan_cp(2), half(3), N) == lat
    assert cp2_closed_form(N) == lat


def test_cp1_elliptic_genus_vanishes():
    assert toric_form_lattice(fan_cp(1), half(2), 5).is_zero()


def _box_sum(fan, deg, N, B, signs):
    total = QSeries.zero(N, deg.mode)
    for m0 in range(-B, B + 1):
        for m1 in range(-B, B + 1):
            total = total + lattice_term(fan, deg, (m0, m1), N, signs)
    return total


def test_sign_negative_control():
    fan, deg = fan_cp(2), half(3)
    assert _box_sum(fan, deg, 0, 3, True)[0] == mpq(1, 4)
    assert _box_sum(fan, deg, 0, 3, False)[0] != mpq(1, 4)
    with pytest.raises(NotStabilized):
        toric_form_lattice(fan, deg, 2, signs=False)


def test_not_stabilized():
    with pytest.raises(NotStabilized):
        toric_form_lattice(fan_cp(2), half(3), 4, LatticePolicy(start=1, step=1, cap=1))


@pytest.mark.parametrize("k", [0, 1, 2])
def test_hirzebruch_half_is_zero(k):
    assert toric_form_lattice(fan_hirzebruch(k), half(4), 4).is_zero()
    assert toric_form_theta(fan_hirzebruch(k), half(4), 4).is_zero()


def test_hirzebruch_generic_alpha_matches_closed_form():
    N, k = 4, 2
    deg = DegreeFunction(HIRZEBRUCH_ALPHAS)
    lat = toric_form_lattice(fan_hirzebruch(k), deg, N)
    th = toric_form_theta(fan_hirzebruch(k), deg, N)
    rhs = hirzebruch_rhs(HIRZEBRUCH_ALPHAS, k, N)
    assert lat.to_mode(COMPLEX).max_deviation(rhs.to_mode(COMPLEX)) <= 1e-8
    assert th.max_deviation(rhs.to_mode(COMPLEX)) <= 1e-8


def test_jobs_do_not_change_result():
    deg = DegreeFunction(HIRZEBRUCH_ALPHAS)
    a = toric_form_lattice(fan_hirzebruch(1), deg, 3, jobs=1)
    b = toric_form_lattice(fan_hirzebruch(1), deg, 3, jobs=2)
    assert a.coeffs == b.coeffs
    assert toric_form_lattice(fan_cp(2), half(3), 3, jobs=2) == QSeries(CP2_SERIES[:4])


@pytest.mark.parametrize("k", [0, 1, 3])
def test_fan_from_tower_reproduces_hirzebruch(k):
    f = fan_from_tower(BottTower.hirzebruch(k))
    g = fan_hirzebruch(k)
    assert set(f.rays) == set(g.rays)
    perm = [f.rays.index(r) for r in g.rays]
    assert [f.divisor_map[i] for i in perm] == list(g.divisor_map)
    assert {tuple(sorted(perm[i] for i in c)) for c in g.max_cones} == set(f.max_cones)


@pytest.mark.parametrize("builder", [lambda: fan_cp(2), lambda: fan_hirzebruch(1),
                                     lambda: fan_from_tower(BottTower.twisted_milnor(1, (1, 2)))])
def test_half_degree_is_elliptic_genus(builder):
    fan = builder()
    N = 3
    lat = toric_form_lattice(fan, half(len(fan.rays)), N)
    assert lat == genus_ci(fan.tower, CISpec(), "elliptic-half", N)


def test_bundle_trivial_twist_is_square():
    N = 2
    fan = fan_bundle_over_cp(2, (0, 0))
    sq = QSeries(CP2_SERIES[:N + 1]) * QSeries(CP2_SERIES[:N + 1])
    assert toric_form_theta(fan, half(6), N) == sq


def test_theta_route_needs_tower():
    fan = Fan(2, [(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ValueError, match="divisor map"):
        toric_form_theta(fan, half(3), 2)


def test_exact_theta_mode_default():
    assert toric_form_theta(fan_cp(2), half(3), 2).mode == EXACT
